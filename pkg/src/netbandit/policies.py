"""Index policies for networked bandits plus MOSS / UCB1 / uniform baselines.

Every policy exposes ``select(t) -> action`` and ``update(t, action, obs)``
with rounds numbered from 1. Ties are broken uniformly with the policy's own
generator, which is only consulted when more than one action attains the
maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from netbandit.env import Scenario
from netbandit.errors import ContractError, InputError
from netbandit.graph import RelationGraph
from netbandit.strategies import (
    StrategyGraph,
    StrategySet,
    break_ties,
    maximizers,
    strategy_scores,
)

POLICY_NAMES = ("dfl-sso", "dfl-cso", "dfl-ssr", "dfl-csr", "moss", "ucb1", "random")


# ---------------------------------------------------------------------------
# index formulas (scalars or arrays; zero counts map to +inf)


def _bonus(ratio_num, const, counts):
    counts = np.asarray(counts)
    safe = np.maximum(counts, 1)
    bonus = np.sqrt(np.maximum(np.log(ratio_num / (const * safe)), 0.0) / safe)
    return np.where(counts > 0, bonus, np.inf)


def _out(values):
    return float(values) if np.ndim(values) == 0 else values


def sso_index(xbar, O, t, K):
    """``xbar + sqrt(log+(t / (K O)) / O)``."""
    return _out(np.asarray(xbar, dtype=float) + _bonus(float(t), K, O))


def cso_index(rbar, O, t, num_strategies):
    """CSO index on the normalized com-arm mean ``rbar`` (already divided by M)."""
    return _out(np.asarray(rbar, dtype=float) + _bonus(float(t), num_strategies, O))


def ssr_index(bbar, Ob, t, K, normalize=True):
    """``bbar / K + sqrt(log+(t / (K Ob)) / Ob)``; ``bbar`` is the summed neighborhood mean."""
    b = np.asarray(bbar, dtype=float)
    if normalize:
        b = b / K
    return _out(b + _bonus(float(t), K, Ob))


def csr_arm_score(xbar, O, t, K):
    """Per-arm score ``xbar + sqrt(max(ln(t^(2/3) / (K O)), 0) / O)``."""
    return _out(np.asarray(xbar, dtype=float) + _bonus(float(t) ** (2.0 / 3.0), K, O))


def moss_index(xbar, T, n, K):
    return _out(np.asarray(xbar, dtype=float) + _bonus(float(n), K, T))


def ucb1_index(xbar, T, t):
    T = np.asarray(T)
    bonus = np.sqrt(2.0 * math.log(t) / np.maximum(T, 1))
    return _out(np.asarray(xbar, dtype=float) + np.where(T > 0, bonus, np.inf))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Observation:
    """What the learner sees after playing at round ``t``.

    ``visible`` holds sorted arm indices and ``values`` their rewards
    ``X[j, t]``; ``reward`` is the scenario's realized reward.
    """

    t: int
    visible: np.ndarray
    values: np.ndarray
    reward: float


def _argmax(values: np.ndarray, rng: Optional[np.random.Generator]) -> int:
    return break_ties(np.flatnonzero(values == values.max()), rng)


def _means(sums: np.ndarray, counts: np.ndarray) -> np.ndarray:
    # sums stay 0 while counts are 0
    return sums / np.maximum(counts, 1)


class Policy:
    """Shared bookkeeping: round counter, per-action pull counts, tie-break RNG."""

    name = "policy"

    def __init__(self, num_actions: int, rng: Optional[np.random.Generator] = None):
        if num_actions < 1:
            raise InputError("a policy needs at least one action")
        self.num_actions = int(num_actions)
        self.rng = rng if rng is not None else np.random.default_rng()
        self.rounds = 0
        self.pull_counts = np.zeros(self.num_actions, dtype=np.int64)

    def select(self, t: int) -> int:
        raise NotImplementedError

    def update(self, t: int, action: int, obs: Observation) -> None:
        if t != self.rounds + 1:
            raise ContractError(f"update for round {t} after {self.rounds} rounds")
        if not 0 <= action < self.num_actions:
            raise ContractError(f"action {action} outside [0, {self.num_actions})")
        self._observe(action, obs)
        self.pull_counts[action] += 1
        self.rounds = t

    def _observe(self, action: int, obs: Observation) -> None:
        raise NotImplementedError

    def get_params(self) -> dict:
        return {}


class _ArmObserver(Policy):
    """Per-arm observation counts O and reward sums for single-play or CSR."""

    def __init__(self, num_actions: int, num_arms: int, rng=None, horizon: Optional[int] = None):
        super().__init__(num_actions, rng)
        self.num_arms = int(num_arms)
        self.horizon = horizon
        self.obs_counts = np.zeros(self.num_arms, dtype=np.int64)
        self.obs_sums = np.zeros(self.num_arms)

    @property
    def means(self) -> np.ndarray:
        return _means(self.obs_sums, self.obs_counts)

    def _clock(self, t: int) -> int:
        return self.horizon if self.horizon is not None else t

    def _expected_visible(self, action: int) -> np.ndarray:
        raise NotImplementedError

    def _observe(self, action: int, obs: Observation) -> None:
        expected = self._expected_visible(action)
        if not np.array_equal(np.asarray(obs.visible), expected):
            raise ContractError(
                f"{self.name}: visible arms {list(obs.visible)} differ from {expected.tolist()}"
            )
        self.obs_counts[expected] += 1
        self.obs_sums[expected] += obs.values

    def get_params(self) -> dict:
        return {"horizon": self.horizon}


class DFLSSO(_ArmObserver):
    """Single play with side observations: playing ``i`` reveals every arm of N_i."""

    name = "dfl-sso"

    def __init__(self, graph: RelationGraph, rng=None, horizon: Optional[int] = None):
        super().__init__(graph.num_arms, graph.num_arms, rng, horizon)
        self.graph = graph

    def indices(self, t: int) -> np.ndarray:
        return sso_index(self.means, self.obs_counts, self._clock(t), self.num_arms)

    def select(self, t: int) -> int:
        return _argmax(self.indices(t), self.rng)

    def _expected_visible(self, action: int) -> np.ndarray:
        return self.graph.closed_neighborhood(action)


class DFLSSR(_ArmObserver):
    """Single play with side rewards: learns neighborhood sums from per-arm means.

    ``side_counts[i]`` is ``min_{j in N_i} O_j``; it grows by one exactly when
    that minimum changes, i.e. when every arm of N_i has a fresh reward.
    """

    name = "dfl-ssr"

    def __init__(self, graph: RelationGraph, rng=None, horizon: Optional[int] = None, normalize: bool = True):
        super().__init__(graph.num_arms, graph.num_arms, rng, horizon)
        self.graph = graph
        self.normalize = normalize
        K = graph.num_arms
        width = max(len(graph.closed_neighborhood(i)) for i in range(K))
        self._nb = np.full((K, width), K, dtype=np.intp)
        for i in range(K):
            nb = graph.closed_neighborhood(i)
            self._nb[i, : nb.size] = nb
        self.side_counts = np.zeros(K, dtype=np.int64)
        self._mean_buf = np.zeros(K + 1)
        self._count_buf = np.full(K + 1, np.iinfo(np.int64).max, dtype=np.int64)

    def side_means(self) -> np.ndarray:
        """``B[i] = sum_{j in N_i} xbar_j``, summed left to right in arm order."""
        self._mean_buf[:-1] = self.means
        padded = self._mean_buf[self._nb]
        total = padded[:, 0].copy()
        for c in range(1, padded.shape[1]):
            total += padded[:, c]
        return total

    def _min_counts(self) -> np.ndarray:
        self._count_buf[:-1] = self.obs_counts
        return self._count_buf[self._nb].min(axis=1)

    def indices(self, t: int) -> np.ndarray:
        return ssr_index(self.side_means(), self.side_counts, self._clock(t), self.num_arms, self.normalize)

    def select(self, t: int) -> int:
        return _argmax(self.indices(t), self.rng)

    def _expected_visible(self, action: int) -> np.ndarray:
        return self.graph.closed_neighborhood(action)

    def _observe(self, action: int, obs: Observation) -> None:
        super()._observe(action, obs)
        self.side_counts = self._min_counts()

    def get_params(self) -> dict:
        return {"horizon": self.horizon, "normalize": self.normalize}


class DFLCSR(_ArmObserver):
    """Combinatorial play with side rewards: per-arm scores summed over ``Y_x``."""

    name = "dfl-csr"

    def __init__(self, strategies: StrategySet, rng=None, horizon: Optional[int] = None):
        super().__init__(len(strategies), strategies.num_arms, rng, horizon)
        self.strategies = strategies
        self._y = [np.asarray(y, dtype=np.intp) for y in strategies.y_sets]

    def arm_scores(self, t: int) -> np.ndarray:
        return csr_arm_score(self.means, self.obs_counts, self._clock(t), self.num_arms)

    def select(self, t: int) -> int:
        counts, sums = strategy_scores(self.strategies, self.arm_scores(t), "sum-over-y")
        return break_ties(maximizers(counts, sums), self.rng)

    def _expected_visible(self, action: int) -> np.ndarray:
        return self._y[action]


class DFLCSO(Policy):
    """Combinatorial play with side observations, run as single play on the strategy graph.

    Playing ``x`` refreshes every strategy in the closed strategy-graph
    neighborhood of ``x``; its com-arm reward is rebuilt from the revealed arms.
    ``index_constant`` selects ``|F|`` (``"strategies"``, default) or ``K``
    (``"arms"``) inside the logarithm.
    """

    name = "dfl-cso"

    def __init__(
        self,
        strategy_graph: StrategyGraph,
        rng=None,
        horizon: Optional[int] = None,
        index_constant: str = "strategies",
    ):
        fs = strategy_graph.base
        super().__init__(len(fs), rng)
        if index_constant not in ("strategies", "arms"):
            raise InputError(f"unknown index_constant {index_constant!r}")
        self.strategy_graph = strategy_graph
        self.strategies = fs
        self.horizon = horizon
        self.index_constant = index_constant
        self.scale = fs.max_size
        self.obs_counts = np.zeros(len(fs), dtype=np.int64)
        self.obs_sums = np.zeros(len(fs))

    @property
    def normalized_means(self) -> np.ndarray:
        return _means(self.obs_sums, self.obs_counts) / self.scale

    def indices(self, t: int) -> np.ndarray:
        clock = self.horizon if self.horizon is not None else t
        const = len(self.strategies) if self.index_constant == "strategies" else self.strategies.num_arms
        return cso_index(self.normalized_means, self.obs_counts, clock, const)

    def select(self, t: int) -> int:
        return _argmax(self.indices(t), self.rng)

    def _observe(self, action: int, obs: Observation) -> None:
        seen = dict(zip(np.asarray(obs.visible).tolist(), np.asarray(obs.values).tolist()))
        for y in self.strategy_graph.closed_neighborhood(action):
            total = 0.0
            for i in self.strategies.strategies[y]:
                if i not in seen:
                    raise ContractError(
                        f"dfl-cso: arm {i} of strategy {y} was not observed after playing {action}"
                    )
                total += seen[i]
            self.obs_counts[y] += 1
            self.obs_sums[y] += total

    def get_params(self) -> dict:
        return {"horizon": self.horizon, "index_constant": self.index_constant}


class _RewardOnly(Policy):
    """Baselines that learn only from the scenario reward of the played action."""

    def __init__(self, num_actions: int, rng=None, reward_scale: float = 1.0):
        super().__init__(num_actions, rng)
        self.reward_scale = float(reward_scale)
        self.sums = np.zeros(self.num_actions)

    @property
    def means(self) -> np.ndarray:
        return _means(self.sums, self.pull_counts) / self.reward_scale

    def _observe(self, action: int, obs: Observation) -> None:
        self.sums[action] += obs.reward

    def get_params(self) -> dict:
        return {"reward_scale": self.reward_scale}


class MOSS(_RewardOnly):
    name = "moss"

    def __init__(self, num_actions: int, horizon: int, rng=None, reward_scale: float = 1.0):
        super().__init__(num_actions, rng, reward_scale)
        if horizon < 1:
            raise InputError("MOSS needs a horizon >= 1")
        self.horizon = int(horizon)

    def select(self, t: int) -> int:
        return _argmax(moss_index(self.means, self.pull_counts, self.horizon, self.num_actions), self.rng)

    def get_params(self) -> dict:
        return {"horizon": self.horizon, "reward_scale": self.reward_scale}


class UCB1(_RewardOnly):
    name = "ucb1"

    def select(self, t: int) -> int:
        return _argmax(ucb1_index(self.means, self.pull_counts, t), self.rng)


class UniformRandom(_RewardOnly):
    name = "random"

    def select(self, t: int) -> int:
        return int(self.rng.integers(self.num_actions))


_NATIVE = {
    "dfl-sso": Scenario.SSO,
    "dfl-cso": Scenario.CSO,
    "dfl-ssr": Scenario.SSR,
    "dfl-csr": Scenario.CSR,
}


_OPTION_KEYS = {
    "dfl-sso": {"anytime"},
    "dfl-csr": {"anytime"},
    "dfl-cso": {"anytime", "index_constant"},
    "dfl-ssr": {"anytime", "normalize"},
}


def options_for(name: str, options: dict) -> dict:
    """Subset of ``options`` that policy ``name`` understands."""
    keys = _OPTION_KEYS.get(name.lower(), set())
    return {k: v for k, v in options.items() if k in keys}


def reward_scale(scenario: Scenario, graph: RelationGraph, strategies: Optional[StrategySet]) -> float:
    """Upper end of the scenario reward range used to normalize baseline means."""
    if scenario is Scenario.SSO:
        return 1.0
    if scenario is Scenario.SSR:
        return float(graph.num_arms)
    if scenario is Scenario.CSO:
        return float(strategies.max_size)
    return float(strategies.max_y)


def make_policy(
    name: str,
    scenario: "Scenario | str",
    *,
    graph: RelationGraph,
    strategies: Optional[StrategySet] = None,
    strategy_graph: Optional[StrategyGraph] = None,
    horizon: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    **options,
) -> Policy:
    """Instantiate a policy by name for a scenario.

    ``options`` are forwarded: ``anytime`` (DFL policies, default True; False
    makes them use the horizon instead of the current round),
    ``normalize`` (dfl-ssr) and ``index_constant`` (dfl-cso).
    """
    scenario = Scenario.parse(scenario)
    name = name.lower()
    if name not in POLICY_NAMES:
        raise InputError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")
    if name in _NATIVE and _NATIVE[name] is not scenario:
        raise InputError(f"policy {name} only runs in the {_NATIVE[name].value} scenario")
    if scenario.combinatorial and strategies is None:
        raise InputError(f"scenario {scenario.value} needs a strategy set")
    options = dict(options)
    anytime = options.pop("anytime", True)
    dfl_horizon = None if anytime else horizon
    if name == "dfl-sso":
        policy = DFLSSO(graph, rng, dfl_horizon)
    elif name == "dfl-ssr":
        policy = DFLSSR(graph, rng, dfl_horizon, normalize=options.pop("normalize", True))
    elif name == "dfl-csr":
        policy = DFLCSR(strategies, rng, dfl_horizon)
    elif name == "dfl-cso":
        if strategy_graph is None:
            raise InputError("dfl-cso needs the strategy relation graph")
        policy = DFLCSO(strategy_graph, rng, dfl_horizon, options.pop("index_constant", "strategies"))
    else:
        num_actions = len(strategies) if scenario.combinatorial else graph.num_arms
        scale = reward_scale(scenario, graph, strategies)
        if name == "moss":
            if horizon is None:
                raise InputError("moss needs the horizon")
            policy = MOSS(num_actions, horizon, rng, scale)
        elif name == "ucb1":
            policy = UCB1(num_actions, rng, scale)
        else:
            policy = UniformRandom(num_actions, rng, scale)
    if options:
        raise InputError(f"unused policy options for {name}: {sorted(options)}")
    return policy
