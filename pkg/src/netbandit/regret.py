"""Regret accounting and closed-form regret bounds for the four DFL policies."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from netbandit.env import Scenario, ScenarioOptimum
from netbandit.errors import ContractError, InputError
from netbandit.graph import RelationGraph, greedy_clique_cover, induced_subgraph

ALPHA = math.e


class RegretTrace:
    """Per-round realized and pseudo regret for one episode.

    Instantaneous realized regret is ``optimal_value - realized_reward``;
    instantaneous pseudo regret is the gap of the chosen action. Cumulative
    arrays are running prefix sums accumulated in round order.
    """

    def __init__(self, scenario: "Scenario | str", optimum: ScenarioOptimum, horizon: int):
        scenario = Scenario.parse(scenario)
        if optimum.scenario is not scenario:
            raise ContractError(f"optimum is for {optimum.scenario.value}, trace is for {scenario.value}")
        if horizon < 1:
            raise InputError("horizon must be >= 1")
        self.scenario = scenario
        self.optimum = optimum
        self.horizon = int(horizon)
        self.actions = np.full(horizon, -1, dtype=np.int64)
        self.rewards = np.zeros(horizon)
        self.instant_realized = np.zeros(horizon)
        self.instant_pseudo = np.zeros(horizon)
        self.cum_realized = np.zeros(horizon)
        self.cum_pseudo = np.zeros(horizon)
        self.length = 0
        self.env_checksum: Optional[str] = None

    def record_step(
        self,
        scenario: "Scenario | str",
        optimum: ScenarioOptimum,
        action: int,
        realized_reward: float,
        gap: Optional[float] = None,
    ) -> "RegretTrace":
        if Scenario.parse(scenario) is not self.scenario or optimum.scenario is not self.scenario:
            raise ContractError("scenario/optimum mismatch while recording regret")
        if self.length >= self.horizon:
            raise ContractError(f"trace already holds {self.horizon} rounds")
        if gap is None:
            gap = float(optimum.gaps[action])
        k = self.length
        realized = optimum.optimal_value - realized_reward
        self.actions[k] = action
        self.rewards[k] = realized_reward
        self.instant_realized[k] = realized
        self.instant_pseudo[k] = gap
        prev_r = self.cum_realized[k - 1] if k else 0.0
        prev_p = self.cum_pseudo[k - 1] if k else 0.0
        self.cum_realized[k] = prev_r + realized
        self.cum_pseudo[k] = prev_p + gap
        self.length = k + 1
        return self

    def values(self, measure: str = "pseudo") -> tuple[np.ndarray, np.ndarray]:
        """``(instant, cumulative)`` arrays over recorded rounds."""
        n = self.length
        if measure == "pseudo":
            return self.instant_pseudo[:n], self.cum_pseudo[:n]
        if measure == "realized":
            return self.instant_realized[:n], self.cum_realized[:n]
        raise InputError(f"unknown regret measure {measure!r}")

    def average(self, measure: str = "pseudo") -> np.ndarray:
        _, cum = self.values(measure)
        return cum / np.arange(1, cum.size + 1)


def record_step(trace: RegretTrace, scenario, opt, action, realized_reward, gap=None) -> RegretTrace:
    return trace.record_step(scenario, opt, action, realized_reward, gap)


# ---------------------------------------------------------------------------
# bounds


def bound_sso(n: float, K: int, clique_count: int) -> float:
    """``15.94 sqrt(nK) + 0.74 |C| sqrt(n/K)``."""
    return 15.94 * math.sqrt(n * K) + 0.74 * clique_count * math.sqrt(n / K)


def bound_cso(n: float, num_strategies: int, clique_count: int) -> float:
    """SSO bound with the strategy count in place of the arm count."""
    return bound_sso(n, num_strategies, clique_count)


def bound_moss(n: float, num_actions: int) -> float:
    return 49.0 * math.sqrt(n * num_actions)


def bound_ssr(n: float, K: int) -> float:
    return 49.0 * K * math.sqrt(n * K)


def bound_csr(n: float, K: int, N: int) -> float:
    if not 1 <= N <= K:
        raise InputError(f"need 1 <= N <= K, got N={N}, K={K}")
    return (
        N * K
        + (math.sqrt(math.e * K) + 8.0 * (1 + N) * N**3) * n ** (2.0 / 3.0)
        + (1.0 + 4.0 * math.sqrt(K) * N**2 / math.e) * N**2 * K * n ** (5.0 / 6.0)
    )


def clique_count_for_bound(
    g: RelationGraph, gaps: Sequence[float], n: float, alpha: float = ALPHA
) -> int:
    """Greedy clique-cover size of the subgraph on actions with gap above ``alpha sqrt(K/n)``.

    ``g`` is the relation graph over the same actions as ``gaps`` (arms for
    SSO, strategies for CSO).
    """
    gaps = np.asarray(gaps, dtype=float)
    K = g.num_arms
    if gaps.shape != (K,):
        raise InputError(f"expected {K} gaps, got shape {gaps.shape}")
    threshold = alpha * math.sqrt(K / n)
    heavy = np.flatnonzero(gaps > threshold)
    sub, _ = induced_subgraph(g, heavy.tolist())
    return greedy_clique_cover(sub).size
