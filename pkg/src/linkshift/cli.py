"""Command-line entry point: detect, fit, graph, simulate, generate, describe.

The subcommands compose through files only: `generate` (or your own data)
feeds `detect`, whose records file feeds `fit` and `graph`. Every run
writes a manifest with the effective configuration, input digests, and the
tool version, under a single output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from typing import Sequence

from . import __version__
from .detector import (
    histogram,
    read_records,
    summaries_to_json,
    summarize_by_year,
    sweep,
    write_histogram_tsv,
    write_records,
    write_summaries_tsv,
)
from .entropy import MBIT
from .ingest import describe, parse_edge_list, parse_rename_map, resolve_renames
from .netgraph import (
    build_critical_graph,
    compare_communities,
    export_pajek,
    find_communities,
    graph_report_json,
)
from .sandbox import (
    DropRule,
    SandpileConfig,
    SyntheticConfig,
    generate_synthetic,
    run_sandpile,
    write_avalanche_log,
    write_edge_list,
)
from .scaling import (
    TailDirection,
    fit_lognormal,
    fit_powerlaw,
    top_tail,
)
from .temporal import (
    EligibilityMode,
    EligibilityPolicy,
    build_aggregates,
    evaluation_years,
)

MODE_NAMES = {m.value: m for m in EligibilityMode}


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(outdir: str, args: argparse.Namespace, input_paths: list[str]) -> None:
    config = {
        k: (v.value if hasattr(v, "value") else v)
        for k, v in sorted(vars(args).items())
        if k not in ("func",)
    }
    manifest = {
        "tool": "linkshift",
        "version": __version__,
        "config": config,
        "inputs": {p: _sha256(p) for p in input_paths},
    }
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_slices(args: argparse.Namespace):
    with open(args.edges, encoding="utf-8") as fh:
        slices = parse_edge_list(fh)
    if getattr(args, "renames", None):
        with open(args.renames, encoding="utf-8") as fh:
            rename_map = parse_rename_map(fh)
        slices = resolve_renames(slices, rename_map)
    return slices


def _policy(args: argparse.Namespace) -> EligibilityPolicy:
    return EligibilityPolicy(
        mode=MODE_NAMES[args.mode],
        threshold=args.threshold,
        per_citing_normalization=args.per_citing,
    )


def _figures_dir(outdir: str) -> str:
    path = os.path.join(outdir, "figures")
    os.makedirs(path, exist_ok=True)
    return path


def cmd_detect(args: argparse.Namespace) -> int:
    slices = _load_slices(args)
    aggregates = build_aggregates(slices)
    years = evaluation_years(aggregates)
    if args.years:
        lo, hi = args.years
        years = [y for y in years if lo <= y <= hi]
    if not years:
        print("error: no evaluation years available (need >= 5 raw years)", file=sys.stderr)
        return 1
    records = sweep(aggregates, years, _policy(args), tie_eps=args.tie_eps, n_workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "records.tsv"), "w", encoding="utf-8") as fh:
        write_records(records, fh)
    summaries = summarize_by_year(records)
    with open(os.path.join(args.out, "year_summaries.json"), "w", encoding="utf-8") as fh:
        fh.write(summaries_to_json(summaries) + "\n")
    with open(os.path.join(args.out, "year_summaries.tsv"), "w", encoding="utf-8") as fh:
        write_summaries_tsv(summaries, fh)
    hist = histogram(records)
    with open(os.path.join(args.out, "histogram.tsv"), "w", encoding="utf-8") as fh:
        write_histogram_tsv(hist, fh)
    inputs = [args.edges] + ([args.renames] if args.renames else [])
    _write_manifest(args.out, args, inputs)
    if args.figures:
        from . import report

        figdir = _figures_dir(args.out)
        report.save_histogram_figure(hist, os.path.join(figdir, "u_histogram.png"))
        report.save_year_counts_figure(summaries, os.path.join(figdir, "counts_by_year.png"))
    print(f"wrote {len(records)} records over {len(years)} evaluation years to {args.out}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    with open(args.records, encoding="utf-8") as fh:
        records = read_records(fh)
    by_year: dict[int, list] = {}
    for r in records:
        by_year.setdefault(r.eval_year, []).append(r)
    os.makedirs(args.out, exist_ok=True)
    figdir = _figures_dir(args.out) if args.figures else None
    results = []
    for year in sorted(by_year):
        for direction in (TailDirection.MOST_NEGATIVE, TailDirection.MOST_POSITIVE):
            tail = top_tail(by_year[year], args.k, direction)
            values = [v for v in tail.values if v > 0]
            if len(values) < args.min_tail:
                print(
                    f"warning: {year} {direction.value}: only {len(values)} usable values, skipped",
                    file=sys.stderr,
                )
                continue
            fit = fit_powerlaw(values, direction)
            entry = {
                "eval_year": year,
                "direction": direction.value,
                "k": fit.k,
                "truncated": tail.truncated,
                "exponent": fit.exponent,
                "intercept": fit.intercept,
                "r2": fit.r2,
            }
            try:
                ln = fit_lognormal(values)
                entry["lognormal"] = {"mu": ln.mu, "sigma": ln.sigma, "quantile_r2": ln.quantile_r2}
            except ValueError as exc:
                entry["lognormal"] = {"error": str(exc)}
            results.append(entry)
            tag = "neg" if direction is TailDirection.MOST_NEGATIVE else "pos"
            with open(os.path.join(args.out, f"tail_{year}_{tag}.tsv"), "w", encoding="utf-8") as fh:
                fh.write("rank\tvalue_bits\n")
                for rank, value in enumerate(values, start=1):
                    fh.write(f"{rank}\t{value!r}\n")
            if figdir:
                from . import report

                report.save_tail_figure(
                    values,
                    fit,
                    os.path.join(figdir, f"tail_{year}_{tag}.png"),
                    label=f"{year} {tag} tail",
                )
    with open(os.path.join(args.out, "fits.json"), "w", encoding="utf-8") as fh:
        json.dump(results, fh, indent=2)
        fh.write("\n")
    _write_manifest(args.out, args, [args.records])
    print(f"wrote {len(results)} tail fits to {args.out}")
    return 0


def cmd_graph(args: argparse.Namespace) -> int:
    with open(args.records, encoding="utf-8") as fh:
        records = read_records(fh)
    threshold_bits = args.threshold_mbit * MBIT
    graphs = {}
    years = [args.year] + ([args.compare_year] if args.compare_year else [])
    for year in years:
        year_records = [r for r in records if r.eval_year == year]
        if not year_records:
            print(f"error: no records for evaluation year {year}", file=sys.stderr)
            return 1
        graph = build_critical_graph(year_records, threshold_bits)
        if graph.nodes:
            find_communities(graph)
        graphs[year] = graph
    os.makedirs(args.out, exist_ok=True)
    for year, graph in graphs.items():
        with open(os.path.join(args.out, f"graph_{year}.net"), "w", encoding="utf-8") as fh:
            fh.write(export_pajek(graph))
        with open(os.path.join(args.out, f"graph_{year}.json"), "w", encoding="utf-8") as fh:
            fh.write(graph_report_json(graph) + "\n")
        with open(os.path.join(args.out, f"edges_{year}.tsv"), "w", encoding="utf-8") as fh:
            fh.write("citing\tcited\tu_bits\n")
            for citing, cited, u in graph.edges:
                fh.write(f"{citing}\t{cited}\t{u!r}\n")
    if args.compare_year and args.anchors:
        anchors = {a.strip().upper() for a in args.anchors.split(",") if a.strip()}
        overlap = compare_communities(graphs[args.year], graphs[args.compare_year], anchors)
        with open(os.path.join(args.out, "overlap.json"), "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "year_a": overlap.year_a,
                    "year_b": overlap.year_b,
                    "community_a": sorted(overlap.community_a),
                    "community_b": sorted(overlap.community_b),
                    "intersection_size": overlap.intersection_size,
                    "jaccard": overlap.jaccard,
                },
                fh,
                indent=2,
            )
            fh.write("\n")
    _write_manifest(args.out, args, [args.records])
    for year, graph in graphs.items():
        sizes = graph.component_sizes()
        print(
            f"{year}: {len(graph.edges)} edges over {len(graph.nodes)} nodes, "
            f"components {sizes[:5]}{'...' if len(sizes) > 5 else ''}"
        )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = SandpileConfig(
        width=args.width,
        height=args.height,
        topple_threshold=args.topple_threshold,
        n_grains=args.grains,
        seed=args.seed,
        drop_rule=DropRule(args.drop),
    )
    log = run_sandpile(config)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "avalanche_sizes.txt"), "w", encoding="utf-8") as fh:
        write_avalanche_log(log, fh)
    positive = sorted((s for s in log.sizes if s > 0), reverse=True)
    fit = None
    result = {
        "grains_dropped": log.grains_dropped,
        "grains_on_grid": log.grains_on_grid,
        "grains_lost": log.grains_lost,
        "max_size": log.max_size,
        "n_nonzero": len(positive),
    }
    if len(positive) >= args.tail_k >= 10:
        fit = fit_powerlaw(positive[: args.tail_k])
        result["tail_fit"] = {"k": fit.k, "exponent": fit.exponent, "r2": fit.r2}
    with open(os.path.join(args.out, "sandpile_fit.json"), "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    _write_manifest(args.out, args, [])
    if args.figures:
        from . import report

        report.save_avalanche_figure(
            log.sizes, fit, os.path.join(_figures_dir(args.out), "avalanches.png")
        )
    print(f"simulated {log.grains_dropped} drops; max avalanche {log.max_size}")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    shock_links: frozenset = frozenset()
    if args.shock_links:
        with open(args.shock_links, encoding="utf-8") as fh:
            pairs = set()
            for line in fh:
                if not line.strip() or line.startswith("#"):
                    continue
                citing, cited = line.rstrip("\n").split("\t")[:2]
                pairs.add((citing.strip().upper(), cited.strip().upper()))
            shock_links = frozenset(pairs)
    config = SyntheticConfig(
        n_nodes=args.nodes,
        n_years=args.years,
        start_year=args.start_year,
        out_degree=args.out_degree,
        noise_level=args.noise,
        shock_year=args.shock_year,
        shock_links=shock_links,
        shock_factor=args.shock_factor,
        seed=args.seed,
    )
    if args.shock_count and args.shock_year is not None and not shock_links:
        # pick deterministic shock targets among generated links
        import numpy as np

        probe = generate_synthetic(dataclasses.replace(config, shock_year=None, shock_links=frozenset()))
        links = sorted(probe[0].cells)
        rng = np.random.default_rng(config.seed + 1)
        idx = rng.choice(len(links), size=min(args.shock_count, len(links)), replace=False)
        shock_links = frozenset(links[i] for i in sorted(idx))
        config = dataclasses.replace(config, shock_links=shock_links)
    slices = generate_synthetic(config)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "edges.tsv"), "w", encoding="utf-8") as fh:
        write_edge_list(slices, fh)
    with open(os.path.join(args.out, "ground_truth.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "shock_year": config.shock_year,
                "shock_factor": config.shock_factor,
                "shock_links": sorted(list(l) for l in config.shock_links),
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    _write_manifest(args.out, args, [args.shock_links] if args.shock_links else [])
    print(f"wrote {sum(len(s.cells) for s in slices)} rows over {len(slices)} years to {args.out}")
    return 0


def cmd_describe(args: argparse.Namespace) -> int:
    slices = _load_slices(args)
    stats = []
    for sl in slices:
        d = describe(sl)
        stats.append({"year": sl.year, **dataclasses.asdict(d)})
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "descriptives.json"), "w", encoding="utf-8") as fh:
        json.dump(stats, fh, indent=2)
        fh.write("\n")
    inputs = [args.edges] + ([args.renames] if args.renames else [])
    _write_manifest(args.out, args, inputs)
    for row in stats:
        print(
            f"{row['year']}: {row['n_nodes']} nodes, {row['n_nonzero']} links, "
            f"{row['total_citations']} citations"
        )
    return 0


def _year_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi or lo)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="linkshift",
        description="Critical-transition detection in temporal weighted directed networks.",
    )
    parser.add_argument("--version", action="version", version=f"linkshift {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    def common(p):
        p.add_argument("--out", required=True, help="output directory for this run")
        p.add_argument("--config", help="JSON config file; command-line flags override it")
        p.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True,
                       help="render figures alongside the delimited outputs")

    p = sub.add_parser("detect", help="sweep eligible link-years into transition records")
    common(p)
    p.add_argument("--edges", required=True, help="edge-list TSV: year, citing, cited, count")
    p.add_argument("--renames", help="rename map TSV: old, new, change year")
    p.add_argument("--threshold", type=int, default=10, help="strict eligibility threshold")
    p.add_argument("--mode", choices=sorted(MODE_NAMES), default=EligibilityMode.EACH_WINDOW_ABOVE_TEN.value)
    p.add_argument("--per-citing", action="store_true", help="normalize within each citing column")
    p.add_argument("--tie-eps", type=float, default=1e-12)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--years", type=_year_range, help="restrict evaluation years, e.g. 2004:2010")
    p.set_defaults(func=cmd_detect)
    subparsers["detect"] = p

    p = sub.add_parser("fit", help="fit power-law and log-normal models to the top-K tails")
    common(p)
    p.add_argument("--records", required=True, help="records TSV from `detect`")
    p.add_argument("--k", type=int, default=10_000)
    p.add_argument("--min-tail", type=int, default=10)
    p.set_defaults(func=cmd_fit)
    subparsers["fit"] = p

    p = sub.add_parser("graph", help="extract the critical-link graph for one year")
    common(p)
    p.add_argument("--records", required=True)
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--threshold-mbit", type=float, default=-1.0,
                   help="U threshold in millibits (negative)")
    p.add_argument("--compare-year", type=int, help="second year for community overlap")
    p.add_argument("--anchors", help="comma-separated anchor node names for the overlap")
    p.set_defaults(func=cmd_graph)
    subparsers["graph"] = p

    p = sub.add_parser("simulate", help="run the sandpile cellular automaton")
    common(p)
    p.add_argument("--width", type=int, default=50)
    p.add_argument("--height", type=int, default=50)
    p.add_argument("--topple-threshold", type=int, default=4)
    p.add_argument("--grains", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--drop", choices=[d.value for d in DropRule], default=DropRule.UNIFORM_RANDOM.value)
    p.add_argument("--tail-k", type=int, default=1000)
    p.set_defaults(func=cmd_simulate)
    subparsers["simulate"] = p

    p = sub.add_parser("generate", help="generate a synthetic temporal network")
    common(p)
    p.add_argument("--nodes", type=int, default=200)
    p.add_argument("--years", type=int, default=12)
    p.add_argument("--start-year", type=int, default=2000)
    p.add_argument("--out-degree", type=int, default=10)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shock-year", type=int)
    p.add_argument("--shock-factor", type=float, default=5.0)
    p.add_argument("--shock-links", help="TSV of citing, cited pairs to shock")
    p.add_argument("--shock-count", type=int, default=0,
                   help="number of random links to shock when no file is given")
    p.set_defaults(func=cmd_generate)
    subparsers["generate"] = p

    p = sub.add_parser("describe", help="descriptive statistics per year slice")
    common(p)
    p.add_argument("--edges", required=True)
    p.add_argument("--renames")
    p.set_defaults(func=cmd_describe)
    subparsers["describe"] = p

    return parser, subparsers


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            overrides = {k.replace("-", "_"): v for k, v in json.load(fh).items()}
        subparsers[args.command].set_defaults(**overrides)
        args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
