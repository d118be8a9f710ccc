"""Sweep eligible link-years into transition records, with yearly summaries
and a value histogram.

Records carry (p, p', q) alongside the indicators so downstream analysis
and audits never have to re-read raw data. Output order is canonical
(eval_year, citing, cited), independent of the number of workers.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .entropy import CellIndicators, Classification, Monotone, cell_indicators, classify
from .ingest import Link
from .temporal import CellSeries, EligibilityPolicy, MovingAggregate, cell_series


@dataclass(frozen=True)
class TransitionRecord:
    link: Link
    eval_year: int
    p: float
    p_prime: float
    q: float
    u: float
    v: float
    improve_fwd: float
    classification: Classification


@dataclass(frozen=True)
class YearSummary:
    eval_year: int
    n_links: int
    n_critical_fwd: int
    n_critical_bwd: int
    n_improved_fwd: int
    n_improved_bwd: int
    n_tied: int
    frac_critical: float
    frac_improved_fwd: float


@dataclass(frozen=True)
class Histogram:
    bin_edges: list[float]   # in bits; first/last bins are overflow (infinite edges)
    counts: list[int]
    interval: tuple[float, float]
    in_range_fraction: float


def _records_for_series(series: Sequence[CellSeries], tie_eps: float) -> list[TransitionRecord]:
    out = []
    for cs in series:
        ind = cell_indicators(cs.p, cs.p_prime, cs.q)
        cls = classify(ind, cs.p, cs.p_prime, cs.q, tie_eps=tie_eps)
        out.append(
            TransitionRecord(
                link=cs.link,
                eval_year=cs.eval_year,
                p=cs.p,
                p_prime=cs.p_prime,
                q=cs.q,
                u=ind.u,
                v=ind.v,
                improve_fwd=ind.improve_fwd,
                classification=cls,
            )
        )
    return out


def sweep(
    aggregates: list[MovingAggregate],
    years: Iterable[int],
    policy: EligibilityPolicy = EligibilityPolicy(),
    tie_eps: float = 1e-12,
    n_workers: int = 1,
) -> list[TransitionRecord]:
    """One record per eligible link-year, in canonical order.

    Work is partitioned by link range; results are identical for any
    n_workers because each partition is a pure function of its input and
    the merge is an ordered concatenation.
    """
    years = sorted(years)
    records: list[TransitionRecord] = []
    for year in years:
        series = cell_series(aggregates, year, policy)
        if n_workers <= 1 or len(series) < 2 * n_workers:
            records.extend(_records_for_series(series, tie_eps))
            continue
        size = (len(series) + n_workers - 1) // n_workers
        chunks = [series[i : i + size] for i in range(0, len(series), size)]
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            for part in pool.map(lambda c: _records_for_series(c, tie_eps), chunks):
                records.extend(part)
    return records


def summarize_year(records: Sequence[TransitionRecord]) -> YearSummary:
    """Counts and fractions for one evaluation year; ties counted separately."""
    if not records:
        raise ValueError("cannot summarize an empty record list")
    year = records[0].eval_year
    n = len(records)
    n_cf = sum(r.classification.critical_fwd for r in records)
    n_cb = sum(r.classification.critical_bwd for r in records)
    n_if = sum(r.classification.improved_fwd for r in records)
    n_ib = sum(r.classification.improved_bwd for r in records)
    n_tied = sum(r.classification.monotone is Monotone.TIED for r in records)
    return YearSummary(
        eval_year=year,
        n_links=n,
        n_critical_fwd=n_cf,
        n_critical_bwd=n_cb,
        n_improved_fwd=n_if,
        n_improved_bwd=n_ib,
        n_tied=n_tied,
        frac_critical=n_cf / n,
        frac_improved_fwd=n_if / n,
    )


def summarize_by_year(records: Sequence[TransitionRecord]) -> list[YearSummary]:
    by_year: dict[int, list[TransitionRecord]] = {}
    for r in records:
        by_year.setdefault(r.eval_year, []).append(r)
    return [summarize_year(by_year[y]) for y in sorted(by_year)]


def histogram(
    records: Sequence[TransitionRecord],
    bin_width: float = 0.01e-3,
    value_range: tuple[float, float] = (-0.5e-3, 0.5e-3),
    interval: tuple[float, float] = (-0.1e-3, 0.1e-3),
    field: str = "u",
) -> Histogram:
    """Histogram of u (or v) values in bits, with overflow bins at each end.

    Defaults bin at 0.01 mbit over +/-0.5 mbit and report the fraction
    falling within +/-0.1 mbit.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    lo, hi = value_range
    values = np.array([getattr(r, field) for r in records], dtype=float)
    n_bins = max(1, int(round((hi - lo) / bin_width)))
    inner_edges = lo + bin_width * np.arange(n_bins + 1)
    counts = np.zeros(n_bins + 2, dtype=int)
    if values.size:
        counts[0] = int(np.sum(values < inner_edges[0]))
        counts[-1] = int(np.sum(values >= inner_edges[-1]))
        inner = values[(values >= inner_edges[0]) & (values < inner_edges[-1])]
        idx = np.floor((inner - lo) / bin_width).astype(int)
        idx = np.clip(idx, 0, n_bins - 1)
        for i in idx:
            counts[1 + i] += 1
    a, b = interval
    in_range = int(np.sum((values >= a) & (values <= b))) if values.size else 0
    frac = in_range / values.size if values.size else 0.0
    edges = [-np.inf] + [float(e) for e in inner_edges] + [np.inf]
    return Histogram(
        bin_edges=edges,
        counts=[int(c) for c in counts],
        interval=interval,
        in_range_fraction=frac,
    )


RECORD_COLUMNS = [
    "eval_year",
    "citing",
    "cited",
    "p",
    "p_prime",
    "q",
    "u_bits",
    "v_bits",
    "improve_fwd_bits",
    "critical_fwd",
    "critical_bwd",
    "improved_fwd",
    "improved_bwd",
]


def write_records(records: Iterable[TransitionRecord], out: IO[str]) -> None:
    out.write("\t".join(RECORD_COLUMNS) + "\n")
    for r in records:
        c = r.classification
        out.write(
            f"{r.eval_year}\t{r.link[0]}\t{r.link[1]}\t{r.p!r}\t{r.p_prime!r}\t{r.q!r}\t"
            f"{r.u!r}\t{r.v!r}\t{r.improve_fwd!r}\t"
            f"{int(c.critical_fwd)}\t{int(c.critical_bwd)}\t{int(c.improved_fwd)}\t{int(c.improved_bwd)}\n"
        )


def read_records(source: IO[str]) -> list[TransitionRecord]:
    """Read a records TSV written by write_records.

    The monotone label is not serialized; it is recovered as TIED when no
    flags are set and the triple carries exact ties, otherwise recomputed
    from the stored frequencies.
    """
    header = source.readline().rstrip("\n").split("\t")
    if header != RECORD_COLUMNS:
        raise ValueError("unrecognized records file header")
    records = []
    for line in source:
        if not line.strip():
            continue
        f = line.rstrip("\n").split("\t")
        p, pp, q = float(f[3]), float(f[4]), float(f[5])
        ind = cell_indicators(p, pp, q)
        cls = classify(ind, p, pp, q)
        records.append(
            TransitionRecord(
                link=(f[1], f[2]),
                eval_year=int(f[0]),
                p=p,
                p_prime=pp,
                q=q,
                u=float(f[6]),
                v=float(f[7]),
                improve_fwd=float(f[8]),
                classification=cls,
            )
        )
    return records


def summaries_to_json(summaries: Sequence[YearSummary]) -> str:
    return json.dumps([s.__dict__ for s in summaries], indent=2)


def write_summaries_tsv(summaries: Sequence[YearSummary], out: IO[str]) -> None:
    cols = [
        "eval_year",
        "n_links",
        "n_critical_fwd",
        "n_critical_bwd",
        "n_improved_fwd",
        "n_improved_bwd",
        "n_tied",
        "frac_critical",
        "frac_improved_fwd",
    ]
    out.write("\t".join(cols) + "\n")
    for s in summaries:
        out.write("\t".join(repr(getattr(s, c)) if isinstance(getattr(s, c), float) else str(getattr(s, c)) for c in cols) + "\n")


def write_histogram_tsv(hist: Histogram, out: IO[str]) -> None:
    out.write("bin_lo_bits\tbin_hi_bits\tcount\n")
    for i, count in enumerate(hist.counts):
        lo = hist.bin_edges[i]
        hi = hist.bin_edges[i + 1]
        out.write(f"{lo!r}\t{hi!r}\t{count}\n")
