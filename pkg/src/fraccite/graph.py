"""Homogeneity graph: units joined when their impact is NOT significantly different."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence
from xml.sax.saxutils import escape, quoteattr

import networkx as nx

from .stats.inference import PairwiseComparison

FORMATS = ("dot", "graphml", "net")


@dataclass(frozen=True)
class HomogeneityGraph:
    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    alpha: float | None = None

    def __post_init__(self):
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ValueError("duplicate node labels")
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on {a!r}")
            if a not in known or b not in known:
                raise ValueError(f"edge ({a!r}, {b!r}) uses an unknown node")
        object.__setattr__(self, "edges", frozenset(_edge(a, b) for a, b in self.edges))

    def has_edge(self, a: str, b: str) -> bool:
        return _edge(a, b) in self.edges

    def sorted_edges(self) -> list[tuple[str, str]]:
        pos = {n: i for i, n in enumerate(self.nodes)}
        return sorted(self.edges, key=lambda e: tuple(sorted((pos[e[0]], pos[e[1]]))))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g


def _edge(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def build_graph(comparisons: Sequence[PairwiseComparison], nodes: Sequence[str] | None = None) -> HomogeneityGraph:
    """Edge for every pair that is not significantly different.

    Every unordered pair over the node set must be compared exactly once.
    """
    if nodes is None:
        nodes = list(dict.fromkeys(x for c in comparisons for x in (c.unit_a, c.unit_b)))
    seen = set()
    edges = set()
    for c in comparisons:
        if c.unit_a == c.unit_b:
            raise ValueError(f"comparison of {c.unit_a!r} with itself")
        e = _edge(c.unit_a, c.unit_b)
        if e in seen:
            raise ValueError(f"duplicate comparison for pair {e}")
        seen.add(e)
        if not c.significant:
            edges.add(e)
    n = len(nodes)
    if len(seen) != n * (n - 1) // 2:
        raise ValueError(f"expected {n * (n - 1) // 2} pairwise comparisons, got {len(seen)}")
    alphas = {c.alpha for c in comparisons}
    return HomogeneityGraph(tuple(nodes), frozenset(edges), alphas.pop() if len(alphas) == 1 else None)


def components(graph: HomogeneityGraph) -> list[list[str]]:
    """Connected components, each sorted; largest first, ties by first label."""
    adjacency = {n: set() for n in graph.nodes}
    for a, b in graph.edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    seen: set[str] = set()
    out = []
    for start in graph.nodes:
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            node = stack.pop()
            comp.append(node)
            for nb in adjacency[node]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        out.append(sorted(comp))
    return sorted(out, key=lambda c: (-len(c), c[0]))


def maximal_cliques(graph: HomogeneityGraph) -> list[list[str]]:
    """Maximal cliques (sets of mutually non-different units), largest first."""
    cliques = [sorted(c) for c in nx.find_cliques(graph.to_networkx())]
    return sorted(cliques, key=lambda c: (-len(c), c))


def density(graph: HomogeneityGraph) -> float:
    n = len(graph.nodes)
    if n < 2:
        raise ValueError("density needs at least two nodes")
    return 2.0 * len(graph.edges) / (n * (n - 1))


def _dot_id(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: HomogeneityGraph) -> str:
    lines = ["graph homogeneity {\n"]
    if graph.alpha is not None:
        lines.append(f'  label="not significantly different at alpha={graph.alpha:g}";\n')
    for n in graph.nodes:
        lines.append(f"  {_dot_id(n)};\n")
    for a, b in graph.sorted_edges():
        lines.append(f"  {_dot_id(a)} -- {_dot_id(b)};\n")
    lines.append("}\n")
    return "".join(lines)


def to_graphml(graph: HomogeneityGraph) -> str:
    ids = {n: f"n{i}" for i, n in enumerate(graph.nodes)}
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">\n',
        '  <key id="label" for="node" attr.name="label" attr.type="string"/>\n',
        '  <graph id="homogeneity" edgedefault="undirected">\n',
    ]
    for n in graph.nodes:
        lines.append(f'    <node id="{ids[n]}"><data key="label">{escape(n)}</data></node>\n')
    for i, (a, b) in enumerate(graph.sorted_edges()):
        lines.append(f'    <edge id="e{i}" source={quoteattr(ids[a])} target={quoteattr(ids[b])}/>\n')
    lines.append("  </graph>\n</graphml>\n")
    return "".join(lines)


def to_pajek(graph: HomogeneityGraph) -> str:
    pos = {n: i + 1 for i, n in enumerate(graph.nodes)}
    lines = [f"*Vertices {len(graph.nodes)}\n"]
    for n in graph.nodes:
        lines.append(f'{pos[n]} "{n.replace(chr(34), chr(39))}"\n')
    lines.append("*Edges\n")
    for a, b in graph.sorted_edges():
        i, j = sorted((pos[a], pos[b]))
        lines.append(f"{i} {j}\n")
    return "".join(lines)


def export_graph(graph: HomogeneityGraph, fmt: str) -> str:
    fmt = fmt.lower()
    if fmt == "dot":
        return to_dot(graph)
    if fmt == "graphml":
        return to_graphml(graph)
    if fmt in ("net", "pajek"):
        return to_pajek(graph)
    raise ValueError(f"unknown graph format {fmt!r}; expected one of {FORMATS}")


def graph_from_edges(nodes: Iterable[str], edges: Iterable[tuple[str, str]], alpha: float | None = None) -> HomogeneityGraph:
    return HomogeneityGraph(tuple(nodes), frozenset(edges), alpha)
