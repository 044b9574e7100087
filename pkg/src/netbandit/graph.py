"""Relation graphs over arms: construction, ER generation, edge-list IO and clique covers."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from netbandit.errors import InputError


class RelationGraph:
    """Undirected simple graph over ``num_arms`` arms labelled ``0..K-1``.

    Edges are stored once as ``(i, j)`` with ``i < j``. The object is
    immutable after construction and safe to share between episodes.
    """

    def __init__(self, num_arms: int, edges: Iterable[tuple[int, int]] = ()):
        num_arms = int(num_arms)
        if num_arms < 0:
            raise InputError(f"num_arms must be non-negative, got {num_arms}")
        canon = set()
        for e in edges:
            i, j = (int(v) for v in e)
            if not (0 <= i < num_arms and 0 <= j < num_arms):
                raise InputError(f"edge ({i}, {j}) has an endpoint outside [0, {num_arms})")
            if i == j:
                raise InputError(f"self-loop ({i}, {i}) is not allowed")
            canon.add((i, j) if i < j else (j, i))
        self._num_arms = num_arms
        self._edges = tuple(sorted(canon))
        adj: list[set[int]] = [set() for _ in range(num_arms)]
        for i, j in self._edges:
            adj[i].add(j)
            adj[j].add(i)
        self._adj = tuple(frozenset(a) for a in adj)
        self._closed = tuple(
            np.array(sorted(a | {i}), dtype=np.intp) for i, a in enumerate(adj)
        )
        for arr in self._closed:
            arr.flags.writeable = False

    @property
    def num_arms(self) -> int:
        return self._num_arms

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self._edges

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def neighbors(self, i: int) -> frozenset[int]:
        """Open neighborhood N(i)."""
        return self._adj[i]

    def closed_neighborhood(self, i: int) -> np.ndarray:
        """Sorted read-only array of ``{i} | N(i)``."""
        return self._closed[i]

    def has_edge(self, i: int, j: int) -> bool:
        return j in self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RelationGraph):
            return NotImplemented
        return self._num_arms == other._num_arms and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._num_arms, self._edges))

    def __repr__(self) -> str:
        return f"RelationGraph(num_arms={self._num_arms}, num_edges={len(self._edges)})"


def build_graph(num_arms: int, edges: Iterable[tuple[int, int]]) -> RelationGraph:
    return RelationGraph(num_arms, edges)


def complete_graph(num_arms: int) -> RelationGraph:
    return RelationGraph(num_arms, ((i, j) for i in range(num_arms) for j in range(i + 1, num_arms)))


def path_graph(num_arms: int) -> RelationGraph:
    return RelationGraph(num_arms, ((i, i + 1) for i in range(num_arms - 1)))


def generate_er(num_arms: int, p: float, seed: int) -> RelationGraph:
    """Erdos-Renyi G(K, p): each unordered pair kept independently with probability ``p``.

    Pairs are visited in row-major upper-triangular order with one uniform draw
    each, so the result depends only on ``(num_arms, p, seed)``.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InputError(f"edge probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(int(num_arms), k=1)
    keep = rng.random(rows.size) < p
    return RelationGraph(num_arms, zip(rows[keep].tolist(), cols[keep].tolist()))


def induced_subgraph(
    g: RelationGraph, vertices: Iterable[int]
) -> tuple[RelationGraph, dict[int, int]]:
    """Subgraph on ``vertices``, relabelled ``0..len-1`` in increasing original order.

    Returns the new graph and the old->new index map.
    """
    keep = sorted(set(int(v) for v in vertices))
    for v in keep:
        if not 0 <= v < g.num_arms:
            raise InputError(f"vertex {v} outside [0, {g.num_arms})")
    relabel = {old: new for new, old in enumerate(keep)}
    edges = [(relabel[i], relabel[j]) for i, j in g.edges if i in relabel and j in relabel]
    return RelationGraph(len(keep), edges), relabel


@dataclass(frozen=True)
class CliqueCover:
    cliques: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.cliques)

    def covered(self) -> set[int]:
        return {v for c in self.cliques for v in c}


def greedy_clique_cover(g: RelationGraph) -> CliqueCover:
    """Partition all vertices into cliques greedily.

    Repeatedly seeds a clique with the lowest-indexed uncovered vertex and
    extends it with every later uncovered vertex adjacent to all members,
    scanning in index order. Not minimum in general.
    """
    uncovered = set(range(g.num_arms))
    cliques = []
    for seed in range(g.num_arms):
        if seed not in uncovered:
            continue
        clique = [seed]
        uncovered.discard(seed)
        for v in sorted(uncovered & g.neighbors(seed)):
            if all(g.has_edge(v, u) for u in clique):
                clique.append(v)
        uncovered.difference_update(clique)
        cliques.append(tuple(clique))
    return CliqueCover(tuple(cliques))


def is_clique(g: RelationGraph, vertices: Sequence[int]) -> bool:
    vs = list(vertices)
    return all(g.has_edge(a, b) for k, a in enumerate(vs) for b in vs[k + 1 :])


# ---------------------------------------------------------------------------
# edge-list files: first line K, then "i j" per line; '#' starts a comment


def parse_edge_list(text: str) -> RelationGraph:
    num_arms = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise InputError(f"line {lineno}: expected integers, got {raw!r}") from None
        if num_arms is None:
            if len(values) != 1:
                raise InputError(f"line {lineno}: first entry must be the arm count")
            num_arms = values[0]
        else:
            if len(values) != 2:
                raise InputError(f"line {lineno}: expected an 'i j' pair, got {raw!r}")
            edges.append((values[0], values[1]))
    if num_arms is None:
        raise InputError("edge list is empty: missing arm count")
    return RelationGraph(num_arms, edges)


def format_edge_list(g: RelationGraph) -> str:
    lines = [str(g.num_arms)]
    lines.extend(f"{i} {j}" for i, j in g.edges)
    return "\n".join(lines) + "\n"


def read_edge_list(path: str | os.PathLike) -> RelationGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def write_edge_list(g: RelationGraph, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(g))


def parse_graph_spec(spec: str, num_arms: int, seed: int = 0) -> RelationGraph:
    """Build a graph from ``er:<p>``, ``complete``, ``path``, ``empty`` or ``file:<path>``."""
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "er":
        try:
            p = float(arg)
        except ValueError:
            raise InputError(f"bad ER probability in graph spec {spec!r}") from None
        return generate_er(num_arms, p, seed)
    if kind == "complete":
        return complete_graph(num_arms)
    if kind == "path":
        return path_graph(num_arms)
    if kind == "empty":
        return RelationGraph(num_arms)
    if kind == "file":
        g = read_edge_list(arg)
        if g.num_arms != num_arms:
            raise InputError(f"graph file {arg!r} has {g.num_arms} arms, expected {num_arms}")
        return g
    raise InputError(f"unknown graph spec {spec!r}; use er:<p>, complete, path, empty or file:<path>")
