"""Feasible strategy sets, neighbor unions and the strategy relation graph."""

from __future__ import annotations

import math
import os
from itertools import combinations
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from netbandit.errors import CapacityError, InputError
from netbandit.graph import RelationGraph

DEFAULT_CAP = 10**6

CONSTRAINTS = ("subsets", "exact", "independent", "explicit")


class StrategySet:
    """An ordered list of arm subsets (com-arms) over a relation graph.

    Each strategy is a sorted tuple of distinct arms. ``y_sets[x]`` is the
    union of closed neighborhoods of the arms in strategy ``x``.
    """

    def __init__(self, g: RelationGraph, strategies: Iterable[Iterable[int]]):
        K = g.num_arms
        strats = []
        seen = set()
        for s in strategies:
            arms = tuple(sorted(int(i) for i in s))
            if not arms:
                raise InputError("strategies must be non-empty")
            if len(set(arms)) != len(arms):
                raise InputError(f"strategy {arms} repeats an arm")
            if arms[0] < 0 or arms[-1] >= K:
                raise InputError(f"strategy {arms} has an arm outside [0, {K})")
            if arms in seen:
                raise InputError(f"strategy {arms} listed twice")
            seen.add(arms)
            strats.append(arms)
        if not strats:
            raise InputError("no feasible strategies")
        self.graph = g
        self.num_arms = K
        self.strategies: tuple[tuple[int, ...], ...] = tuple(strats)
        self.y_sets: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(set().union(*(g.closed_neighborhood(i).tolist() for i in s))))
            for s in strats
        )
        self.max_size = max(len(s) for s in strats)
        self.max_y = max(len(y) for y in self.y_sets)
        # padded index tables; column value K points at a zero/neutral slot
        self.component_index = _pad(self.strategies, K)
        self.y_index = _pad(self.y_sets, K)

    # short aliases
    @property
    def M(self) -> int:
        return self.max_size

    @property
    def N(self) -> int:
        return self.max_y

    def __len__(self) -> int:
        return len(self.strategies)

    def __getitem__(self, x: int) -> tuple[int, ...]:
        return self.strategies[x]

    def __repr__(self) -> str:
        return f"StrategySet(size={len(self)}, num_arms={self.num_arms}, M={self.M}, N={self.N})"


def _pad(sets: Sequence[tuple[int, ...]], fill: int) -> np.ndarray:
    width = max(len(s) for s in sets)
    out = np.full((len(sets), width), fill, dtype=np.intp)
    for x, s in enumerate(sets):
        out[x, : len(s)] = s
    return out


def enumerate_feasible(
    g: RelationGraph,
    constraint: str,
    M: int = 1,
    explicit: Optional[Iterable[Iterable[int]]] = None,
    cap: int = DEFAULT_CAP,
) -> StrategySet:
    """Enumerate every strategy allowed by ``constraint``.

    Constraints: ``subsets`` (all subsets of size 1..M), ``exact`` (size
    exactly M), ``independent`` (independent sets of size 1..M in ``g``) and
    ``explicit`` (the given list, order preserved). Generated sets are
    ordered by size, then lexicographically.
    """
    if constraint not in CONSTRAINTS:
        raise InputError(f"unknown constraint {constraint!r}; expected one of {CONSTRAINTS}")
    K = g.num_arms
    if constraint == "explicit":
        if explicit is None:
            raise InputError("explicit constraint needs a strategy list")
        items = [tuple(s) for s in explicit]
        if len(items) > cap:
            raise CapacityError(f"strategy set has {len(items)} entries, exceeding the cap of {cap}")
        return StrategySet(g, items)
    M = int(M)
    if M < 1:
        raise InputError(f"M must be >= 1, got {M}")
    M = min(M, K)
    if constraint == "exact":
        sizes = [M]
    else:
        sizes = list(range(1, M + 1))
    if constraint in ("subsets", "exact"):
        total = sum(math.comb(K, r) for r in sizes)
        if total > cap:
            raise CapacityError(f"strategy set would have {total} entries, exceeding the cap of {cap}")
        return StrategySet(g, (c for r in sizes for c in combinations(range(K), r)))
    strats: list[tuple[int, ...]] = []
    for r in sizes:
        for s in _independent_sets(g, r):
            strats.append(s)
            if len(strats) > cap:
                raise CapacityError(f"strategy set exceeds the cap of {cap} entries")
    return StrategySet(g, strats)


def _independent_sets(g: RelationGraph, size: int):
    K = g.num_arms

    def extend(chosen: list[int], start: int):
        if len(chosen) == size:
            yield tuple(chosen)
            return
        for v in range(start, K):
            if any(g.has_edge(v, u) for u in chosen):
                continue
            chosen.append(v)
            yield from extend(chosen, v + 1)
            chosen.pop()

    yield from extend([], 0)


class StrategyGraph:
    """Relation graph over strategies.

    With ``rule="mutual"`` (default) strategies ``x != y`` are adjacent when
    each one's arms lie inside the other's neighbor union. With
    ``rule="observed"`` the neighborhood of ``x`` is every ``y`` whose arms lie
    inside ``Y_x`` (possibly asymmetric).
    """

    def __init__(self, fs: StrategySet, rule: str = "mutual"):
        if rule not in ("mutual", "observed"):
            raise InputError(f"unknown strategy-graph rule {rule!r}")
        self.base = fs
        self.rule = rule
        F = len(fs)
        ysets = [frozenset(y) for y in fs.y_sets]
        covers = [[set(fs.strategies[y]) <= ysets[x] for y in range(F)] for x in range(F)]
        out: list[list[int]] = []
        edges = []
        for x in range(F):
            nbrs = []
            for y in range(F):
                if x == y:
                    continue
                linked = covers[x][y] and covers[y][x] if rule == "mutual" else covers[x][y]
                if linked:
                    nbrs.append(y)
                    if rule == "mutual" and x < y:
                        edges.append((x, y))
            out.append(nbrs)
        if rule == "observed":
            edges = sorted({(min(x, y), max(x, y)) for x in range(F) for y in out[x] if x in out[y]})
        self._neighbors = tuple(tuple(n) for n in out)
        self._closed = tuple(tuple(sorted(n + [x])) for x, n in enumerate(out))
        self.edges = tuple(edges)

    @property
    def num_strategies(self) -> int:
        return len(self.base)

    def neighbors(self, x: int) -> tuple[int, ...]:
        return self._neighbors[x]

    def closed_neighborhood(self, x: int) -> tuple[int, ...]:
        return self._closed[x]

    def has_edge(self, x: int, y: int) -> bool:
        return y in self._neighbors[x]

    def as_relation_graph(self) -> RelationGraph:
        """Undirected graph on strategy indices (mutually linked pairs only)."""
        return RelationGraph(len(self.base), self.edges)


def build_strategy_graph(fs: StrategySet, g: Optional[RelationGraph] = None, rule: str = "mutual") -> StrategyGraph:
    if g is not None and g is not fs.graph and g != fs.graph:
        raise InputError("strategy set was built over a different relation graph")
    return StrategyGraph(fs, rule)


def strategy_scores(
    fs: StrategySet, per_arm_scores: np.ndarray, score_mode: str = "sum-over-y"
) -> tuple[np.ndarray, np.ndarray]:
    """Per-strategy ``(sentinel_count, finite_sum)`` for the given arm scores.

    A ``+inf`` arm score counts as a sentinel; strategies compare first by how
    many sentinel arms they include, then by the sum of finite scores. Sums
    run left to right in arm order.
    """
    scores = np.asarray(per_arm_scores, dtype=float)
    if scores.shape != (fs.num_arms,):
        raise InputError(f"expected {fs.num_arms} arm scores, got shape {scores.shape}")
    if np.isnan(scores).any() or np.isneginf(scores).any():
        raise InputError("arm scores must be finite or +inf")
    if score_mode == "sum-over-y":
        table = fs.y_index
    elif score_mode == "sum-over-components":
        table = fs.component_index
    else:
        raise InputError(f"unknown score_mode {score_mode!r}")
    inf = np.isinf(scores)
    padded_inf = np.append(inf, False)
    padded = np.append(np.where(inf, 0.0, scores), 0.0)
    counts = padded_inf[table].sum(axis=1)
    gathered = padded[table]
    sums = gathered[:, 0].copy()
    for c in range(1, gathered.shape[1]):
        sums += gathered[:, c]
    return counts, sums


def argmax_strategy(
    fs: StrategySet,
    per_arm_scores: np.ndarray,
    score_mode: str = "sum-over-y",
    rng: Optional[np.random.Generator] = None,
) -> int:
    """Exhaustive argmax over the strategy set; ties broken uniformly by ``rng``.

    Without ``rng`` the lowest tied index is returned.
    """
    if len(fs) == 0:
        raise InputError("empty strategy set")
    counts, sums = strategy_scores(fs, per_arm_scores, score_mode)
    return break_ties(maximizers(counts, sums), rng)


def maximizers(counts: np.ndarray, sums: np.ndarray) -> np.ndarray:
    top = counts.max()
    cand = counts == top
    best = sums[cand].max()
    return np.flatnonzero(cand & (sums == best))


def break_ties(ties: np.ndarray, rng: Optional[np.random.Generator]) -> int:
    """Pick one of ``ties``; the generator is consulted only for real ties."""
    if ties.size == 1 or rng is None:
        return int(ties[0])
    return int(ties[rng.integers(ties.size)])


# an oracle maps per-arm scores to a strategy index
Oracle = Callable[[np.ndarray, Optional[np.random.Generator]], int]


def exhaustive_oracle(fs: StrategySet) -> Oracle:
    def oracle(scores: np.ndarray, rng: Optional[np.random.Generator] = None) -> int:
        return argmax_strategy(fs, scores, "sum-over-y", rng)

    return oracle


# ---------------------------------------------------------------------------
# strategy files: one strategy per line, space-separated 0-based arms


def read_strategy_list(path: str | os.PathLike) -> list[tuple[int, ...]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                out.append(tuple(int(v) for v in line.split()))
            except ValueError:
                raise InputError(f"{path}:{lineno}: expected arm indices, got {raw.strip()!r}") from None
    return out


def write_strategy_list(fs: StrategySet, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in fs.strategies:
            fh.write(" ".join(str(i) for i in s) + "\n")


def parse_strategy_spec(spec: str, g: RelationGraph, cap: int = DEFAULT_CAP) -> StrategySet:
    """``independent:<M>``, ``subsets:<M>``, ``exact:<M>`` or ``file:<path>``."""
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "file":
        return enumerate_feasible(g, "explicit", explicit=read_strategy_list(arg), cap=cap)
    if kind not in ("independent", "subsets", "exact"):
        raise InputError(f"unknown strategy spec {spec!r}; use independent:<M>, subsets:<M>, exact:<M> or file:<path>")
    try:
        M = int(arg)
    except ValueError:
        raise InputError(f"bad M in strategy spec {spec!r}") from None
    return enumerate_feasible(g, kind, M, cap=cap)
