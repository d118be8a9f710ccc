"""Edge-list parsing, journal rename resolution, and per-year sparse matrices.

Input format is a flat tab-separated edge list, one row per
(year, citing, cited, count). Rename maps are `old<TAB>new<TAB>year`.
Lines starting with `#` are comments; an optional header line whose first
field is "year" (case-insensitive) is skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, Optional

Link = tuple[str, str]


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class RenameCycleError(ValueError):
    """A rename chain loops back on itself."""

    def __init__(self, cycle: list[str]):
        super().__init__("rename cycle: " + " -> ".join(cycle))
        self.cycle = cycle


def canonical_name(raw: str) -> str:
    """Canonical node identifier: uppercase, surrounding whitespace stripped."""
    name = raw.strip().upper()
    if not name:
        raise ValueError("empty node name")
    return name


@dataclass
class YearSlice:
    """Sparse directed weighted citation matrix for one raw year.

    Zero cells are absent (missing data); every stored count is >= 1.
    Citing and cited names are drawn from the same node universe.
    """

    year: int
    cells: dict[Link, int]
    node_set: set[str] = field(default_factory=set)

    def __post_init__(self):
        if not self.node_set:
            self.node_set = {n for link in self.cells for n in link}

    @property
    def total_citations(self) -> int:
        return sum(self.cells.values())


@dataclass(frozen=True)
class SliceDescriptives:
    n_nodes: int
    n_possible_cells: int
    n_nonzero: int
    total_citations: int
    density: float
    mean_per_nonzero: Optional[float]


@dataclass
class RenameMap:
    """Journal name changes as (old, new, change_year) entries.

    Chains must be acyclic; resolution always runs to the terminal
    (latest-known) name and applies it to every year of the series.
    """

    entries: list[tuple[str, str, int]] = field(default_factory=list)

    def _successors(self) -> dict[str, list[tuple[int, str]]]:
        succ: dict[str, list[tuple[int, str]]] = {}
        for old, new, year in self.entries:
            succ.setdefault(canonical_name(old), []).append((year, canonical_name(new)))
        for options in succ.values():
            options.sort()
        return succ

    def terminal_name(self, name: str) -> str:
        """Follow the rename chain forward in time to its last name."""
        succ = self._successors()
        current = canonical_name(name)
        seen = [current]
        year_floor = -(10**9)
        while current in succ:
            nxt = None
            for year, new in succ[current]:
                if year >= year_floor:
                    nxt = (year, new)
                    break
            if nxt is None:
                break
            year_floor, current = nxt
            if current in seen:
                raise RenameCycleError(seen + [current])
            seen.append(current)
        return current


def _iter_data_lines(source: Iterable[str]):
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def parse_edge_list(source: IO[str] | Iterable[str]) -> list[YearSlice]:
    """Parse a TSV edge list into one YearSlice per distinct year.

    Duplicate (year, citing, cited) rows are summed. Rows with count 0 are
    accepted but the cell stays absent. Negative counts and malformed rows
    raise EdgeListParseError with the offending line number.
    """
    per_year: dict[int, dict[Link, int]] = {}
    first_data_line = True
    for lineno, line in _iter_data_lines(source):
        fields = line.split("\t")
        if first_data_line and fields and fields[0].strip().lower() == "year":
            first_data_line = False
            continue
        first_data_line = False
        if len(fields) != 4:
            raise EdgeListParseError(lineno, f"expected 4 tab-separated fields, got {len(fields)}")
        year_s, citing_s, cited_s, count_s = fields
        try:
            year = int(year_s)
        except ValueError:
            raise EdgeListParseError(lineno, f"bad year {year_s!r}") from None
        try:
            count = int(count_s)
        except ValueError:
            raise EdgeListParseError(lineno, f"bad count {count_s!r}") from None
        if count < 0:
            raise EdgeListParseError(lineno, f"negative count {count}")
        try:
            citing = canonical_name(citing_s)
            cited = canonical_name(cited_s)
        except ValueError as exc:
            raise EdgeListParseError(lineno, str(exc)) from None
        cells = per_year.setdefault(year, {})
        cells[(citing, cited)] = cells.get((citing, cited), 0) + count
    slices = []
    for year in sorted(per_year):
        cells = {link: c for link, c in per_year[year].items() if c > 0}
        slices.append(YearSlice(year=year, cells=cells))
    return slices


def parse_rename_map(source: IO[str] | Iterable[str]) -> RenameMap:
    """Parse a rename map TSV `old<TAB>new<TAB>year`."""
    entries = []
    for lineno, line in _iter_data_lines(source):
        fields = line.split("\t")
        if fields and fields[0].strip().lower() == "old" and lineno == 1:
            continue
        if len(fields) != 3:
            raise EdgeListParseError(lineno, f"expected 3 tab-separated fields, got {len(fields)}")
        old, new, year_s = fields
        try:
            year = int(year_s)
        except ValueError:
            raise EdgeListParseError(lineno, f"bad year {year_s!r}") from None
        entries.append((canonical_name(old), canonical_name(new), year))
    return RenameMap(entries=entries)


def resolve_renames(slices: list[YearSlice], rename_map: RenameMap) -> list[YearSlice]:
    """Replace every node name by the terminal name of its rename chain.

    Applied to all years, past and future of the change year, so the whole
    series carries the latest name. Cells that collide after renaming are
    summed; the total citation count is preserved.
    """
    if not rename_map.entries:
        return slices
    cache: dict[str, str] = {}

    def resolve(name: str) -> str:
        if name not in cache:
            cache[name] = rename_map.terminal_name(name)
        return cache[name]

    out = []
    for sl in slices:
        cells: dict[Link, int] = {}
        for (citing, cited), count in sl.cells.items():
            link = (resolve(citing), resolve(cited))
            cells[link] = cells.get(link, 0) + count
        out.append(YearSlice(year=sl.year, cells=cells))
    return out


def describe(sl: YearSlice) -> SliceDescriptives:
    """Descriptive statistics of one year slice (nonzero cells only)."""
    n_nodes = len(sl.node_set)
    n_possible = n_nodes * n_nodes
    n_nonzero = len(sl.cells)
    total = sl.total_citations
    density = n_nonzero / n_possible if n_possible else 0.0
    mean = total / n_nonzero if n_nonzero else None
    return SliceDescriptives(
        n_nodes=n_nodes,
        n_possible_cells=n_possible,
        n_nonzero=n_nonzero,
        total_citations=total,
        density=density,
        mean_per_nonzero=mean,
    )
