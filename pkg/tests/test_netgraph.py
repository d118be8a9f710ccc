import numpy as np
import pytest

from linkshift.detector import TransitionRecord
from linkshift.entropy import MBIT, Classification, Monotone
from linkshift.netgraph import (
    CriticalGraph,
    build_critical_graph,
    compare_communities,
    export_pajek,
    find_communities,
    modularity,
)


def record(link, u, year=2010):
    cls = Classification(u < 0, u < 0, False, False, Monotone.NON_MONOTONE)
    return TransitionRecord(link, year, 0.2, 0.3, 0.4, u, u, 0.0, cls)


def graph_from_edges(edges, year=2010, u=-0.01):
    records = [record(link, u) for link in edges]
    return build_critical_graph(records, threshold_bits=-1.0 * MBIT)


def bfs_components(nodes, edges):
    adj = {n: set() for n in nodes}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {}
    next_id = 0
    for start in sorted(nodes):
        if start in seen:
            continue
        queue = [start]
        seen[start] = next_id
        while queue:
            n = queue.pop()
            for nb in adj[n]:
                if nb not in seen:
                    seen[nb] = next_id
                    queue.append(nb)
        next_id += 1
    return seen


class TestBuildCriticalGraph:
    def test_nothing_below_threshold_gives_empty_graph(self):
        records = [record(("A", "B"), -0.0005)]
        graph = build_critical_graph(records, threshold_bits=-1.0 * MBIT)
        assert graph.edges == [] and graph.nodes == []

    def test_two_components(self):
        graph = graph_from_edges([("A", "B"), ("B", "C"), ("D", "E")])
        cids = graph.component_id
        assert cids["A"] == cids["B"] == cids["C"]
        assert cids["D"] == cids["E"] != cids["A"]
        assert graph.component_sizes() == [3, 2]

    def test_matches_bfs_oracle(self):
        rng = np.random.default_rng(1)
        names = [f"N{i:02d}" for i in range(40)]
        edges = set()
        while len(edges) < 60:
            a, b = rng.choice(names, 2, replace=False)
            edges.add((a, b))
        graph = graph_from_edges(sorted(edges))
        oracle = bfs_components(graph.nodes, [(a, b) for a, b, _ in graph.edges])
        # same partition, up to labeling
        for a in graph.nodes:
            for b in graph.nodes:
                same_ours = graph.component_id[a] == graph.component_id[b]
                same_oracle = oracle[a] == oracle[b]
                assert same_ours == same_oracle

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(2)
        records = [
            record((f"N{i}", f"M{i}"), -abs(rng.normal(scale=0.002))) for i in range(100)
        ]
        loose = build_critical_graph(records, threshold_bits=-0.5 * MBIT)
        tight = build_critical_graph(records, threshold_bits=-2.0 * MBIT)
        loose_set = {(a, b) for a, b, _ in loose.edges}
        tight_set = {(a, b) for a, b, _ in tight.edges}
        assert tight_set <= loose_set

    def test_non_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            build_critical_graph([], threshold_bits=0.0)


class TestCommunities:
    def clique_edges(self, names):
        return [(a, b) for i, a in enumerate(names) for b in names[i + 1 :]]

    def test_two_cliques_one_bridge(self):
        left = [f"A{i}" for i in range(5)]
        right = [f"B{i}" for i in range(5)]
        edges = self.clique_edges(left) + self.clique_edges(right) + [(left[0], right[0])]
        graph = graph_from_edges(edges)
        comm = find_communities(graph)
        assert len({comm[n] for n in left}) == 1
        assert len({comm[n] for n in right}) == 1
        assert comm[left[0]] != comm[right[0]]

    def test_single_edge_one_community(self):
        graph = graph_from_edges([("A", "B")])
        comm = find_communities(graph)
        assert comm == {"A": 0, "B": 0}

    def test_deterministic_across_runs(self):
        rng = np.random.default_rng(3)
        names = [f"N{i:02d}" for i in range(30)]
        edges = sorted({tuple(sorted(rng.choice(names, 2, replace=False))) for _ in range(80)})
        a = find_communities(graph_from_edges(edges))
        b = find_communities(graph_from_edges(edges))
        assert a == b

    def test_planted_partition_recovered(self):
        rng = np.random.default_rng(4)
        blocks = [[f"A{i:02d}" for i in range(10)],
                  [f"B{i:02d}" for i in range(10)],
                  [f"C{i:02d}" for i in range(10)]]
        edges = set()
        for block in blocks:
            for i, a in enumerate(block):
                for b in block[i + 1 :]:
                    if rng.random() < 0.8:
                        edges.add((a, b))
        flat = [n for block in blocks for n in block]
        for i, a in enumerate(flat):
            for b in flat[i + 1 :]:
                if a[0] != b[0] and rng.random() < 0.05:
                    edges.add((a, b))
        graph = graph_from_edges(sorted(edges))
        comm = find_communities(graph)
        planted = {n: n[0] for n in flat}
        # Rand index against the planted blocks
        agree = total = 0
        for i, a in enumerate(flat):
            for b in flat[i + 1 :]:
                total += 1
                same_found = comm[a] == comm[b]
                same_planted = planted[a] == planted[b]
                agree += same_found == same_planted
        assert agree / total >= 0.9

    def test_partition_beats_singletons(self):
        rng = np.random.default_rng(5)
        names = [f"N{i:02d}" for i in range(20)]
        edges = sorted({tuple(sorted(rng.choice(names, 2, replace=False))) for _ in range(50)})
        graph = graph_from_edges(edges)
        comm = find_communities(graph)
        adj = graph.undirected_weights()
        singletons = {n: i for i, n in enumerate(graph.nodes)}
        assert modularity(adj, comm) >= modularity(adj, singletons) - 1e-12

    def test_empty_graph_rejected(self):
        graph = CriticalGraph(2010, -0.001, [], [], {})
        with pytest.raises(ValueError):
            find_communities(graph)


class TestCompareCommunities:
    def test_identical_graphs_full_overlap(self):
        edges = [("A", "B"), ("B", "C"), ("D", "E")]
        ga = graph_from_edges(edges)
        gb = graph_from_edges(edges)
        overlap = compare_communities(ga, gb, {"A"})
        assert overlap.jaccard == 1.0
        assert overlap.intersection_size == len(overlap.community_a)

    def test_disjoint_communities(self):
        ga = graph_from_edges([("A", "B"), ("ANCHOR", "A")])
        gb = graph_from_edges([("X", "Y"), ("ANCHOR", "X")])
        overlap = compare_communities(ga, gb, {"ANCHOR"})
        assert overlap.intersection_size == len(overlap.community_a & overlap.community_b)

    def test_missing_anchor_names_year(self):
        ga = graph_from_edges([("A", "B")])
        gb = graph_from_edges([("X", "Y")])
        with pytest.raises(ValueError, match="2010"):
            compare_communities(ga, gb, {"A"})

    def test_empty_anchor_set_rejected(self):
        ga = graph_from_edges([("A", "B")])
        with pytest.raises(ValueError):
            compare_communities(ga, ga, set())


def parse_pajek(text):
    """Minimal reference parser used as a round-trip oracle."""
    lines = text.strip().splitlines()
    assert lines[0].startswith("*Vertices ")
    n = int(lines[0].split()[1])
    labels = {}
    for line in lines[1 : 1 + n]:
        idx, rest = line.split(" ", 1)
        assert rest.startswith('"') and rest.endswith('"')
        labels[int(idx)] = rest[1:-1]
    arcs = []
    if len(lines) > 1 + n:
        assert lines[1 + n] == "*Arcs"
        for line in lines[2 + n :]:
            s, t, w = line.split()
            arcs.append((labels[int(s)], labels[int(t)], float(w)))
    return labels, arcs


class TestExportPajek:
    def test_empty_graph(self):
        graph = CriticalGraph(2010, -0.001, [], [], {})
        assert export_pajek(graph) == "*Vertices 0\n"

    def test_round_trip_through_reference_parser(self):
        graph = graph_from_edges([("A", "B")], u=-0.002)
        text = export_pajek(graph)
        labels, arcs = parse_pajek(text)
        assert set(labels.values()) == {"A", "B"}
        assert len(arcs) == 1
        src, dst, weight = arcs[0]
        assert (src, dst) == ("A", "B")
        assert weight == pytest.approx(2.0)  # |u| in millibit

    def test_labels_with_spaces_quoted(self):
        graph = graph_from_edges([("RENEW ENERG", "ENERG POLICY")], u=-0.002)
        text = export_pajek(graph)
        labels, arcs = parse_pajek(text)
        assert "RENEW ENERG" in labels.values()
        assert arcs[0][:2] == ("RENEW ENERG", "ENERG POLICY") or arcs[0][:2] == (
            "ENERG POLICY",
            "RENEW ENERG",
        )
