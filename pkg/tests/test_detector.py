import io
import random

import numpy as np
import pytest

from linkshift.detector import (
    TransitionRecord,
    histogram,
    read_records,
    summarize_by_year,
    summarize_year,
    sweep,
    write_records,
)
from linkshift.entropy import Classification, Monotone, cell_indicators, classify
from linkshift.ingest import YearSlice
from linkshift.temporal import EligibilityPolicy, build_aggregates, evaluation_years


def make_record(u, link=("A", "B"), year=2000, critical=None):
    critical = u < 0 if critical is None else critical
    cls = Classification(
        critical_fwd=critical,
        critical_bwd=critical,
        improved_fwd=u > 0,
        improved_bwd=False,
        monotone=Monotone.INCREASING if critical else Monotone.NON_MONOTONE,
    )
    return TransitionRecord(link, year, 0.2, 0.3, 0.4, u, u, u, cls)


def random_slices(seed, n_links=30, n_years=8, lo=11, hi=99):
    rng = random.Random(seed)
    links = [(f"N{i:02d}", f"M{i:02d}") for i in range(n_links)]
    return [
        YearSlice(2000 + y, {l: rng.randint(lo, hi) for l in links})
        for y in range(n_years)
    ]


class TestSweep:
    def test_stationary_network_all_zero(self):
        slices = [YearSlice(2000 + y, {("A", "B"): 20, ("C", "D"): 30}) for y in range(6)]
        aggs = build_aggregates(slices)
        records = sweep(aggs, evaluation_years(aggs))
        assert records
        for r in records:
            assert r.u == 0.0 and r.v == 0.0
            assert not r.classification.critical_fwd

    def test_doubling_link_flagged_critical(self):
        # one link doubles every year against two constant links
        slices = [
            YearSlice(2000 + y, {("A", "B"): 16 * 2**y, ("C", "D"): 50, ("E", "F"): 50})
            for y in range(5)
        ]
        aggs = build_aggregates(slices)
        records = {r.link: r for r in sweep(aggs, [2004])}
        grower = records[("A", "B")]
        assert grower.classification.critical_fwd
        assert grower.u < 0

    def test_19_year_summaries_from_23_raw_years(self):
        slices = [YearSlice(1994 + y, {("A", "B"): 20, ("C", "D"): 25}) for y in range(23)]
        aggs = build_aggregates(slices)
        records = sweep(aggs, evaluation_years(aggs))
        assert len(summarize_by_year(records)) == 19

    def test_canonical_order(self):
        slices = random_slices(1)
        aggs = build_aggregates(slices)
        records = sweep(aggs, evaluation_years(aggs))
        keys = [(r.eval_year, r.link) for r in records]
        assert keys == sorted(keys)

    def test_worker_count_does_not_change_output(self):
        slices = random_slices(2)
        aggs = build_aggregates(slices)
        years = evaluation_years(aggs)
        serial = sweep(aggs, years, n_workers=1)
        parallel = sweep(aggs, years, n_workers=4)
        assert serial == parallel

    def test_records_self_consistent(self):
        slices = random_slices(3)
        aggs = build_aggregates(slices)
        for r in sweep(aggs, evaluation_years(aggs)):
            ind = cell_indicators(r.p, r.p_prime, r.q)
            assert r.u == pytest.approx(ind.u, rel=1e-12, abs=1e-15)
            assert r.v == pytest.approx(ind.v, rel=1e-12, abs=1e-15)
            assert r.classification == classify(ind, r.p, r.p_prime, r.q)


class TestSummarize:
    def test_counts_and_fractions(self):
        records = [make_record(-1.0), make_record(-0.5), make_record(-0.2), make_record(0.3)]
        s = summarize_year(records)
        assert s.n_links == 4
        assert s.n_critical_fwd == 3
        assert s.frac_critical == 0.75

    def test_all_tied_counts_zero(self):
        cls = Classification(False, False, False, False, Monotone.TIED)
        records = [TransitionRecord(("A", "B"), 2000, 0.2, 0.2, 0.2, 0.0, 0.0, 0.0, cls)] * 3
        s = summarize_year(records)
        assert s.n_critical_fwd == 0 and s.n_improved_fwd == 0
        assert s.n_tied == 3

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            summarize_year([])

    def test_matches_brute_force_recount(self):
        rng = np.random.default_rng(7)
        records = []
        for _ in range(500):
            p, pp, q = rng.uniform(0.01, 0.99, 3)
            ind = cell_indicators(p, pp, q)
            cls = classify(ind, p, pp, q)
            records.append(TransitionRecord(("A", "B"), 2001, p, pp, q, ind.u, ind.v, ind.improve_fwd, cls))
        s = summarize_year(records)
        assert s.n_critical_fwd == sum(
            1 for r in records if (r.p < r.p_prime < r.q) or (r.p > r.p_prime > r.q)
        )
        assert s.n_improved_fwd == sum(1 for r in records if r.p_prime > r.p)


class TestHistogram:
    def test_all_zero_single_central_bin(self):
        records = [make_record(0.0, critical=False) for _ in range(10)]
        hist = histogram(records)
        assert sum(hist.counts) == 10
        assert max(hist.counts) == 10
        assert hist.in_range_fraction == 1.0

    def test_counts_match_brute_force_binning(self):
        rng = np.random.default_rng(9)
        values = rng.uniform(-2e-3, 2e-3, 400)
        records = [make_record(v) for v in values]
        hist = histogram(records)
        assert sum(hist.counts) == 400
        edges = hist.bin_edges
        for i, count in enumerate(hist.counts):
            lo, hi = edges[i], edges[i + 1]
            expected = sum(1 for v in values if lo <= v < hi)
            assert count == expected
        a, b = hist.interval
        assert hist.in_range_fraction == pytest.approx(
            sum(1 for v in values if a <= v <= b) / 400
        )

    def test_bad_bin_width(self):
        with pytest.raises(ValueError):
            histogram([make_record(0.0)], bin_width=0.0)


class TestRecordsIo:
    def test_round_trip(self):
        slices = random_slices(4)
        aggs = build_aggregates(slices)
        records = sweep(aggs, evaluation_years(aggs))
        buf = io.StringIO()
        write_records(records, buf)
        buf.seek(0)
        back = read_records(buf)
        assert back == records

    def test_write_is_deterministic(self):
        slices = random_slices(5)
        aggs = build_aggregates(slices)
        records = sweep(aggs, evaluation_years(aggs))
        a, b = io.StringIO(), io.StringIO()
        write_records(records, a)
        write_records(records, b)
        assert a.getvalue() == b.getvalue()

    def test_bad_header_rejected(self):
        with pytest.raises(ValueError):
            read_records(io.StringIO("nope\n"))
