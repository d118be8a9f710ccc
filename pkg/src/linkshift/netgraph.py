"""Critical-link graphs: extraction by threshold, connected components,
deterministic greedy modularity communities, cross-year overlap, and Pajek
export.

Connectivity and communities work on the undirected projection with edge
weight |u|; direction is preserved in the stored edges and in the export.
Community finding is a two-phase greedy modularity optimization (local
moves until no gain, then contraction, repeated to a fixed point) with a
fixed canonical node visiting order, so results are reproducible without a
random seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .detector import TransitionRecord
from .entropy import MBIT
from .ingest import Link


class UnionFind:
    """Disjoint sets with path compression and union by size."""

    def __init__(self, items):
        self.parent = {x: x for x in items}
        self.size = {x: 1 for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


@dataclass
class CriticalGraph:
    eval_year: int
    threshold_bits: float
    edges: list[tuple[str, str, float]]          # (citing, cited, u_bits)
    nodes: list[str] = field(default_factory=list)  # canonical order
    component_id: dict[str, int] = field(default_factory=dict)
    community_id: Optional[dict[str, int]] = None

    def undirected_weights(self) -> dict[str, dict[str, float]]:
        """Undirected projection with weight |u|, parallel edges summed,
        self-loops dropped."""
        adj: dict[str, dict[str, float]] = {n: {} for n in self.nodes}
        for citing, cited, u in self.edges:
            if citing == cited:
                continue
            w = abs(u)
            adj[citing][cited] = adj[citing].get(cited, 0.0) + w
            adj[cited][citing] = adj[cited].get(citing, 0.0) + w
        return adj

    def component_sizes(self) -> list[int]:
        sizes: dict[int, int] = {}
        for cid in self.component_id.values():
            sizes[cid] = sizes.get(cid, 0) + 1
        return sorted(sizes.values(), reverse=True)


@dataclass(frozen=True)
class CommunityOverlap:
    year_a: int
    year_b: int
    community_a: frozenset[str]
    community_b: frozenset[str]
    intersection_size: int
    jaccard: float


def build_critical_graph(
    records: Sequence[TransitionRecord],
    threshold_bits: float = -1.0 * MBIT,
    field_name: str = "u",
) -> CriticalGraph:
    """Graph of links whose indicator falls below the (negative) threshold.

    Components are labeled immediately; ids are assigned in order of each
    component's canonically-smallest node. An empty graph is valid.
    """
    if threshold_bits >= 0:
        raise ValueError("threshold_bits must be negative")
    edges = [
        (r.link[0], r.link[1], getattr(r, field_name))
        for r in records
        if getattr(r, field_name) < threshold_bits
    ]
    edges.sort(key=lambda e: (e[0], e[1]))
    nodes = sorted({n for citing, cited, _ in edges for n in (citing, cited)})
    eval_year = records[0].eval_year if records else 0
    uf = UnionFind(nodes)
    for citing, cited, _ in edges:
        uf.union(citing, cited)
    component_id: dict[str, int] = {}
    root_to_id: dict[str, int] = {}
    for node in nodes:
        root = uf.find(node)
        if root not in root_to_id:
            root_to_id[root] = len(root_to_id)
        component_id[node] = root_to_id[root]
    return CriticalGraph(
        eval_year=eval_year,
        threshold_bits=threshold_bits,
        edges=edges,
        nodes=nodes,
        component_id=component_id,
    )


def modularity(adj: dict[str, dict[str, float]], partition: dict[str, int]) -> float:
    """Newman modularity of a partition on a weighted undirected graph."""
    m = sum(w for nbrs in adj.values() for w in nbrs.values()) / 2.0
    if m == 0:
        return 0.0
    degree = {n: sum(nbrs.values()) for n, nbrs in adj.items()}
    q = 0.0
    sum_in: dict[int, float] = {}
    sum_tot: dict[int, float] = {}
    for n, nbrs in adj.items():
        c = partition[n]
        sum_tot[c] = sum_tot.get(c, 0.0) + degree[n]
        for nb, w in nbrs.items():
            if partition[nb] == c:
                sum_in[c] = sum_in.get(c, 0.0) + w
    for c, tot in sum_tot.items():
        q += sum_in.get(c, 0.0) / (2.0 * m) - (tot / (2.0 * m)) ** 2
    return q


def _one_level(nodes, adj, self_weight, degree, m, partition):
    """Greedy local moves in canonical order until no positive gain.

    Returns True when at least one node moved.
    """
    community_tot = {}
    for n in nodes:
        community_tot[partition[n]] = community_tot.get(partition[n], 0.0) + degree[n]
    moved_any = False
    improved = True
    while improved:
        improved = False
        for n in nodes:
            old = partition[n]
            k_n = degree[n]
            community_tot[old] -= k_n
            links_to: dict[int, float] = {}
            for nb, w in adj[n].items():
                if nb == n:
                    continue
                c = partition[nb]
                links_to[c] = links_to.get(c, 0.0) + w
            links_to.setdefault(old, 0.0)
            best_c, best_gain = old, links_to[old] - community_tot[old] * k_n / (2.0 * m)
            for c in sorted(links_to):
                gain = links_to[c] - community_tot.get(c, 0.0) * k_n / (2.0 * m)
                if gain > best_gain + 1e-12 or (
                    abs(gain - best_gain) <= 1e-12 and c < best_c
                ):
                    best_c, best_gain = c, gain
            community_tot[best_c] = community_tot.get(best_c, 0.0) + k_n
            if best_c != old:
                partition[n] = best_c
                improved = True
                moved_any = True
    return moved_any


def _louvain(adj: dict[str, dict[str, float]]) -> dict[str, int]:
    nodes = sorted(adj)
    if not nodes:
        return {}
    # membership of original nodes through contraction levels
    member: dict[str, int] = {n: i for i, n in enumerate(nodes)}
    level_adj: dict[int, dict[int, float]] = {}
    self_weight: dict[int, float] = {i: 0.0 for i in range(len(nodes))}
    for n, nbrs in adj.items():
        i = member[n]
        level_adj[i] = {}
        for nb, w in nbrs.items():
            if nb == n:
                self_weight[i] += w
            else:
                level_adj[i][member[nb]] = w
    m = (
        sum(w for nbrs in level_adj.values() for w in nbrs.values()) / 2.0
        + sum(self_weight.values())
    )
    if m == 0:
        return {n: i for i, n in enumerate(nodes)}
    while True:
        level_nodes = sorted(level_adj)
        degree = {
            i: sum(level_adj[i].values()) + 2.0 * self_weight[i] for i in level_nodes
        }
        partition = {i: i for i in level_nodes}
        moved = _one_level(level_nodes, level_adj, self_weight, degree, m, partition)
        if not moved:
            break
        # renumber communities by first appearance in canonical order
        renum: dict[int, int] = {}
        for i in level_nodes:
            c = partition[i]
            if c not in renum:
                renum[c] = len(renum)
        partition = {i: renum[c] for i, c in partition.items()}
        member = {n: partition[member[n]] for n in nodes}
        # contract
        new_adj: dict[int, dict[int, float]] = {c: {} for c in set(partition.values())}
        new_self: dict[int, float] = {c: 0.0 for c in new_adj}
        for i in level_nodes:
            ci = partition[i]
            new_self[ci] += self_weight[i]
            for j, w in level_adj[i].items():
                cj = partition[j]
                if ci == cj:
                    new_self[ci] += w / 2.0
                else:
                    new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + w
        if len(new_adj) == len(level_adj):
            break
        level_adj = new_adj
        self_weight = new_self
    return {n: member[n] for n in nodes}


def find_communities(graph: CriticalGraph) -> dict[str, int]:
    """Deterministic greedy modularity communities on the |u|-weighted
    undirected projection. Ids are assigned by each community's
    canonically-smallest member. The result is stored on the graph."""
    if not graph.nodes:
        raise ValueError("cannot find communities in an empty graph")
    adj = graph.undirected_weights()
    raw = _louvain(adj)
    renum: dict[int, int] = {}
    out: dict[str, int] = {}
    for node in graph.nodes:
        c = raw[node]
        if c not in renum:
            renum[c] = len(renum)
        out[node] = renum[c]
    graph.community_id = out
    return out


def compare_communities(
    graph_a: CriticalGraph,
    graph_b: CriticalGraph,
    anchor_nodes: set[str],
) -> CommunityOverlap:
    """Overlap of the anchor-containing community across two years.

    In each graph the community holding the most anchors is selected
    (ties broken by the community with the canonically-smallest member).
    """
    if not anchor_nodes:
        raise ValueError("anchor_nodes must be non-empty")
    selections = []
    for graph in (graph_a, graph_b):
        missing = sorted(a for a in anchor_nodes if a not in set(graph.nodes))
        if missing:
            raise ValueError(
                f"anchor {missing[0]!r} absent from the {graph.eval_year} graph"
            )
        if graph.community_id is None:
            find_communities(graph)
        votes: dict[int, int] = {}
        for a in sorted(anchor_nodes):
            votes.setdefault(graph.community_id[a], 0)
            votes[graph.community_id[a]] += 1
        chosen = min(votes, key=lambda c: (-votes[c], c))
        members = frozenset(n for n, c in graph.community_id.items() if c == chosen)
        selections.append(members)
    comm_a, comm_b = selections
    inter = len(comm_a & comm_b)
    union = len(comm_a | comm_b)
    return CommunityOverlap(
        year_a=graph_a.eval_year,
        year_b=graph_b.eval_year,
        community_a=comm_a,
        community_b=comm_b,
        intersection_size=inter,
        jaccard=inter / union if union else 0.0,
    )


def export_pajek(graph: CriticalGraph) -> str:
    """Pajek .net text: quoted vertex labels, then directed arcs with
    weight |u| in millibits (1-based vertex indices)."""
    lines = [f"*Vertices {len(graph.nodes)}"]
    index = {}
    for i, node in enumerate(graph.nodes, start=1):
        index[node] = i
        label = node.replace('"', "'")
        lines.append(f'{i} "{label}"')
    if graph.edges:
        lines.append("*Arcs")
        for citing, cited, u in graph.edges:
            lines.append(f"{index[citing]} {index[cited]} {abs(u) / MBIT!r}")
    return "\n".join(lines) + "\n"


def graph_report_json(graph: CriticalGraph) -> str:
    """Component and community report as JSON."""
    report = {
        "eval_year": graph.eval_year,
        "threshold_bits": graph.threshold_bits,
        "n_nodes": len(graph.nodes),
        "n_edges": len(graph.edges),
        "component_sizes": graph.component_sizes(),
        "component_id": graph.component_id,
        "community_id": graph.community_id,
    }
    return json.dumps(report, indent=2, sort_keys=True)
