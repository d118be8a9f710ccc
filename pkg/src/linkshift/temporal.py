"""Three-year moving aggregates, eligibility thresholds, and normalized triples.

A moving aggregate sums a cell over a sliding three-year window; a cell
enters the window only if it is present (count > 0) in each of the three
raw years. For an evaluation year t, the triple (p, p', q) holds the
relative frequencies of a link in the windows ending at t-2, t-1, and t,
normalized over the eligible link set of that evaluation year.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable

from .ingest import Link, YearSlice

WINDOW = 3


class EligibilityMode(Enum):
    AGGREGATE_ABOVE_TEN = "aggregate"
    EACH_WINDOW_ABOVE_TEN = "each-window"
    PRESENT_ALL_YEARS_AND_AGGREGATE_ABOVE_TEN = "present-all"


@dataclass(frozen=True)
class EligibilityPolicy:
    """Which links enter the analysis for an evaluation year.

    The threshold is strict: "larger than ten" keeps counts >= threshold+1.
    `per_citing_normalization` switches the relative-frequency base from the
    grand total over all eligible links to the citing column's own total.
    """

    mode: EligibilityMode = EligibilityMode.EACH_WINDOW_ABOVE_TEN
    threshold: int = 10
    per_citing_normalization: bool = False


@dataclass
class MovingAggregate:
    """Sum of each cell over the three raw years ending at window_end_year."""

    window_end_year: int
    cells: dict[Link, int]

    @property
    def grand_total(self) -> int:
        return sum(self.cells.values())


@dataclass(frozen=True)
class CellSeries:
    """Normalized relative frequencies of one link around one evaluation year.

    p is the a priori frequency (window ending eval_year-2), p_prime the
    revision (eval_year-1), q the a posteriori outcome (eval_year).
    """

    link: Link
    eval_year: int
    p: float
    p_prime: float
    q: float


class MissingWindowError(ValueError):
    def __init__(self, year: int):
        super().__init__(f"no moving aggregate for window ending {year}")
        self.year = year


def build_aggregates(slices: list[YearSlice]) -> list[MovingAggregate]:
    """Build one aggregate per window whose three raw years are all present.

    A cell is kept only if present in each of the three years; its value is
    the sum. Fewer than three years of input yields an empty list.
    """
    by_year = {sl.year: sl for sl in sorted(slices, key=lambda s: s.year)}
    years = sorted(by_year)
    if years and years != list(range(years[0], years[-1] + 1)):
        raise ValueError("year slices must cover consecutive years")
    aggregates = []
    for end in years:
        if end - 1 not in by_year or end - 2 not in by_year:
            continue
        window = [by_year[end - 2], by_year[end - 1], by_year[end]]
        cells: dict[Link, int] = {}
        for link, count in window[0].cells.items():
            c1 = window[1].cells.get(link, 0)
            c2 = window[2].cells.get(link, 0)
            if c1 > 0 and c2 > 0:
                cells[link] = count + c1 + c2
        aggregates.append(MovingAggregate(window_end_year=end, cells=cells))
    return aggregates


def _by_end_year(aggregates: Iterable[MovingAggregate]) -> dict[int, MovingAggregate]:
    return {a.window_end_year: a for a in aggregates}


def evaluation_years(aggregates: list[MovingAggregate]) -> list[int]:
    """Years for which the three consecutive windows exist."""
    ends = {a.window_end_year for a in aggregates}
    return sorted(y for y in ends if y - 1 in ends and y - 2 in ends)


def eligible_links(
    aggregates: list[MovingAggregate],
    eval_year: int,
    policy: EligibilityPolicy = EligibilityPolicy(),
) -> set[Link]:
    """Links entering the analysis for eval_year under the given policy.

    Every mode requires the link to be present in all three windows (the
    triple is undefined otherwise); modes differ in where the count
    threshold applies.
    """
    by_end = _by_end_year(aggregates)
    windows = []
    for year in (eval_year - 2, eval_year - 1, eval_year):
        if year not in by_end:
            raise MissingWindowError(year)
        windows.append(by_end[year])
    w0, w1, w2 = windows
    thr = policy.threshold
    eligible = set()
    for link, c2 in w2.cells.items():
        c0 = w0.cells.get(link, 0)
        c1 = w1.cells.get(link, 0)
        if c0 <= 0 or c1 <= 0:
            continue
        if policy.mode is EligibilityMode.EACH_WINDOW_ABOVE_TEN:
            if c0 > thr and c1 > thr and c2 > thr:
                eligible.add(link)
        elif policy.mode is EligibilityMode.AGGREGATE_ABOVE_TEN:
            if c2 > thr:
                eligible.add(link)
        else:  # PRESENT_ALL_YEARS_AND_AGGREGATE_ABOVE_TEN
            if c0 + c1 + c2 > thr:
                eligible.add(link)
    return eligible


def normalize(aggregate: MovingAggregate, links: set[Link]) -> dict[Link, float]:
    """Relative frequencies of the supplied links within the aggregate.

    The base is the sum of counts over exactly the supplied links, so the
    values sum to 1.
    """
    if not links:
        raise ValueError("cannot normalize over an empty link set")
    missing = [link for link in links if link not in aggregate.cells]
    if missing:
        raise ValueError(f"link {missing[0]} absent from window {aggregate.window_end_year}")
    total = sum(aggregate.cells[link] for link in links)
    return {link: aggregate.cells[link] / total for link in links}


def _normalize_per_citing(aggregate: MovingAggregate, links: set[Link]) -> dict[Link, float]:
    totals: dict[str, int] = {}
    for citing, cited in links:
        totals[citing] = totals.get(citing, 0) + aggregate.cells[(citing, cited)]
    return {link: aggregate.cells[link] / totals[link[0]] for link in links}


def cell_series(
    aggregates: list[MovingAggregate],
    eval_year: int,
    policy: EligibilityPolicy = EligibilityPolicy(),
) -> list[CellSeries]:
    """One (p, p', q) triple per eligible link, in canonical link order."""
    links = eligible_links(aggregates, eval_year, policy)
    if not links:
        return []
    by_end = _by_end_year(aggregates)
    norm = _normalize_per_citing if policy.per_citing_normalization else normalize
    freq = [norm(by_end[eval_year - 2 + i], links) for i in range(3)]
    return [
        CellSeries(link=link, eval_year=eval_year, p=freq[0][link], p_prime=freq[1][link], q=freq[2][link])
        for link in sorted(links)
    ]


def dump_cell_series(series: Iterable[CellSeries], out: IO[str]) -> None:
    """Audit dump: eval_year, citing, cited, p, p_prime, q as TSV."""
    out.write("eval_year\tciting\tcited\tp\tp_prime\tq\n")
    for cs in series:
        out.write(
            f"{cs.eval_year}\t{cs.link[0]}\t{cs.link[1]}\t{cs.p!r}\t{cs.p_prime!r}\t{cs.q!r}\n"
        )
