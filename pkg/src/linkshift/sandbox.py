"""Desk-scale oracles: a Bak-Tang-Wiesenfeld sandpile and a synthetic
temporal citation-network generator with injected shocks.

Simulation defaults (grid size, threshold 4, open boundaries, drop rules)
are implementation choices; avalanche size is counted in topplings. The
generator writes integer counts compatible with the ingest edge-list
format, so its output round-trips through the full pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable

import numpy as np

from .ingest import Link, YearSlice

MAX_TOPPLES_PER_DROP = 10**8


class DropRule(Enum):
    CENTER = "center"
    UNIFORM_RANDOM = "uniform"


@dataclass(frozen=True)
class SandpileConfig:
    width: int = 50
    height: int = 50
    topple_threshold: int = 4
    n_grains: int = 100_000
    seed: int = 0
    drop_rule: DropRule = DropRule.UNIFORM_RANDOM

    def __post_init__(self):
        if self.width < 3 or self.height < 3:
            raise ValueError("grid must be at least 3x3")
        if self.topple_threshold < 2:
            raise ValueError("topple_threshold must be at least 2")
        if self.n_grains < 0:
            raise ValueError("n_grains must be non-negative")


@dataclass
class AvalancheLog:
    sizes: list[int]
    grains_dropped: int
    grains_on_grid: int
    grains_lost: int

    @property
    def max_size(self) -> int:
        return max(self.sizes) if self.sizes else 0


def run_sandpile(config: SandpileConfig, check_conservation: bool = True) -> AvalancheLog:
    """Standard BTW dynamics on an open-boundary grid, starting empty.

    One grain per step at the drop site; every cell at or above the
    threshold topples, sending one grain to each of its four neighbors
    (grains crossing the boundary are lost). The avalanche size is the
    number of topplings in the cascade. Deterministic for a fixed seed.
    """
    h, w = config.height, config.width
    grid = np.zeros((h, w), dtype=np.int64)
    rng = np.random.default_rng(config.seed)
    thr = config.topple_threshold
    sizes = []
    lost = 0
    if config.drop_rule is DropRule.UNIFORM_RANDOM:
        rows = rng.integers(0, h, size=config.n_grains)
        cols = rng.integers(0, w, size=config.n_grains)
    else:
        rows = np.full(config.n_grains, h // 2)
        cols = np.full(config.n_grains, w // 2)
    for step in range(config.n_grains):
        grid[rows[step], cols[step]] += 1
        topples = 0
        while True:
            over = grid >= thr
            n_over = int(over.sum())
            if n_over == 0:
                break
            topples += n_over
            if topples > MAX_TOPPLES_PER_DROP:
                raise RuntimeError("cascade exceeded the toppling bound")
            grid[over] -= 4
            shed = over.astype(np.int64)
            grid[:-1, :] += shed[1:, :]
            grid[1:, :] += shed[:-1, :]
            grid[:, :-1] += shed[:, 1:]
            grid[:, 1:] += shed[:, :-1]
            lost += int(shed[0, :].sum() + shed[-1, :].sum() + shed[:, 0].sum() + shed[:, -1].sum())
        sizes.append(topples)
        if check_conservation:
            on_grid = int(grid.sum())
            if on_grid + lost != step + 1:
                raise AssertionError(
                    f"grain conservation violated at step {step}: "
                    f"{on_grid} on grid + {lost} lost != {step + 1} dropped"
                )
    return AvalancheLog(
        sizes=sizes,
        grains_dropped=config.n_grains,
        grains_on_grid=int(grid.sum()),
        grains_lost=lost,
    )


def write_avalanche_log(log: AvalancheLog, out: IO[str]) -> None:
    for s in log.sizes:
        out.write(f"{s}\n")


@dataclass(frozen=True)
class SyntheticConfig:
    n_nodes: int = 200
    n_years: int = 12
    start_year: int = 2000
    out_degree: int = 10
    base_attachment: float = 1.0
    noise_level: float = 0.05
    shock_year: int | None = None
    shock_links: frozenset[Link] = field(default_factory=frozenset)
    shock_factor: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 2 or self.n_years < 1:
            raise ValueError("need at least 2 nodes and 1 year")
        if self.shock_year is not None:
            last = self.start_year + self.n_years - 1
            if not (self.start_year <= self.shock_year <= last):
                raise ValueError(
                    f"shock_year {self.shock_year} outside {self.start_year}-{last}"
                )
            if self.shock_factor <= 0 or self.shock_factor == 1.0:
                raise ValueError("shock_factor must be positive and != 1")


def node_name(i: int) -> str:
    return f"J{i:04d}"


def _base_structure(config: SyntheticConfig, rng: np.random.Generator) -> dict[Link, int]:
    """Sparse base counts via preferential attachment on the cited side."""
    n = config.n_nodes
    in_weight = np.ones(n)
    base: dict[Link, int] = {}
    for citing in range(n):
        probs = in_weight ** config.base_attachment
        probs = probs / probs.sum()
        k = min(config.out_degree, n)
        targets = rng.choice(n, size=k, replace=False, p=probs)
        for cited in targets:
            count = int(rng.integers(15, 60))
            base[(node_name(citing), node_name(cited))] = count
            in_weight[cited] += 1
    return base


def generate_synthetic(config: SyntheticConfig) -> list[YearSlice]:
    """Year slices with smooth multiplicative noise and an optional
    persistent shock: from shock_year on, shocked links are rescaled by
    shock_factor. Deterministic for a fixed seed; with noise 0 and no
    shock, every year is identical."""
    rng = np.random.default_rng(config.seed)
    base = _base_structure(config, rng)
    known = {node_name(i) for i in range(config.n_nodes)}
    for citing, cited in sorted(config.shock_links):
        if citing not in known or cited not in known:
            raise ValueError(f"shock link ({citing}, {cited}) references unknown nodes")
        if (citing, cited) not in base:
            # shocked links must exist before the shock to be detectable
            base[(citing, cited)] = int(rng.integers(15, 60))
    slices = []
    links = sorted(base)
    for offset in range(config.n_years):
        year = config.start_year + offset
        cells: dict[Link, int] = {}
        if config.noise_level > 0:
            noise = np.exp(config.noise_level * rng.standard_normal(len(links)))
        else:
            noise = np.ones(len(links))
        for i, link in enumerate(links):
            value = base[link] * noise[i]
            if (
                config.shock_year is not None
                and year >= config.shock_year
                and link in config.shock_links
            ):
                value *= config.shock_factor
            cells[link] = max(1, int(round(value)))
        slices.append(YearSlice(year=year, cells=cells))
    return slices


def write_edge_list(slices: Iterable[YearSlice], out: IO[str]) -> None:
    """Serialize slices in the ingest TSV format (round-trip guaranteed)."""
    out.write("year\tciting\tcited\tcount\n")
    for sl in slices:
        for (citing, cited), count in sorted(sl.cells.items()):
            out.write(f"{sl.year}\t{citing}\t{cited}\t{count}\n")
