"""Episode runner and paired Monte-Carlo batches."""

from __future__ import annotations

import hashlib
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from netbandit.env import BanditEnv, Scenario, compute_optimum, read_means, uniform_means
from netbandit.errors import ContractError, InputError
from netbandit.graph import RelationGraph, parse_graph_spec
from netbandit.policies import Observation, Policy, make_policy, options_for
from netbandit.regret import (
    RegretTrace,
    bound_cso,
    bound_csr,
    bound_sso,
    bound_ssr,
    clique_count_for_bound,
)
from netbandit.strategies import DEFAULT_CAP, StrategyGraph, StrategySet, build_strategy_graph, parse_strategy_spec

DEFAULT_CHECKPOINTS = 200
THREADS_ENV = "NETBANDIT_THREADS"
_CHUNK = 4096


def derive_seed(master: int, *keys) -> int:
    """64-bit seed for ``(master, *keys)``; string keys are hashed with CRC-32.

    Seeds for distinct key tuples come from independent ``SeedSequence``
    spawn keys, so adding a new role or policy never shifts existing streams.
    """
    spawn = tuple(zlib.crc32(k.encode()) if isinstance(k, str) else int(k) for k in keys)
    ss = np.random.SeedSequence(int(master), spawn_key=spawn)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class EpisodeConfig:
    """Everything needed to replay one episode bit for bit.

    ``means`` is ``uniform`` (i.i.d. U[0,1] from ``means_seed``),
    ``file:<path>`` or a comma-separated list of values. ``graph`` and
    ``strategies`` use the ``er:<p>``/``independent:<M>`` style specs.
    """

    scenario: str
    policy: str
    horizon: int
    num_arms: int
    graph: str = "er:0.3"
    strategies: Optional[str] = None
    dist: str = "bernoulli"
    means: str = "uniform"
    means_seed: int = 0
    graph_seed: int = 0
    env_seed: int = 0
    tiebreak_seed: int = 0
    strategy_rule: str = "mutual"
    policy_options: dict = field(default_factory=dict)
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        scenario = Scenario.parse(self.scenario)
        object.__setattr__(self, "scenario", scenario.value)
        if self.horizon < 1:
            raise InputError(f"horizon must be >= 1, got {self.horizon}")
        if self.num_arms < 1:
            raise InputError(f"num_arms must be >= 1, got {self.num_arms}")
        if scenario.combinatorial and not self.strategies:
            raise InputError(f"scenario {scenario.value} needs a strategy spec")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EpisodeConfig":
        return cls(**data)


class Problem:
    """The policy-independent part of an episode: graph, env, strategies, optimum."""

    def __init__(
        self,
        scenario: Scenario,
        graph: RelationGraph,
        env: BanditEnv,
        strategies: Optional[StrategySet] = None,
        strategy_rule: str = "mutual",
    ):
        self.scenario = scenario
        self.graph = graph
        self.env = env
        self.strategies = strategies
        self.strategy_graph: Optional[StrategyGraph] = None
        if scenario is Scenario.CSO:
            self.strategy_graph = build_strategy_graph(strategies, graph, strategy_rule)
        self.optimum = compute_optimum(env, graph, strategies, scenario)
        self._visible = [self._visible_for(a) for a in range(self.num_actions)]
        if scenario is Scenario.CSO:
            self._reward_index = [np.asarray(s, dtype=np.intp) for s in strategies.strategies]
        elif scenario is Scenario.SSO:
            self._reward_index = [np.array([i], dtype=np.intp) for i in range(graph.num_arms)]
        else:
            self._reward_index = self._visible

    @property
    def num_actions(self) -> int:
        return len(self.strategies) if self.scenario.combinatorial else self.graph.num_arms

    def _visible_for(self, a: int) -> np.ndarray:
        if self.scenario in (Scenario.SSO, Scenario.SSR):
            return self.graph.closed_neighborhood(a)
        if self.scenario is Scenario.CSR:
            return np.asarray(self.strategies.y_sets[a], dtype=np.intp)
        arms = set()
        for y in self.strategy_graph.closed_neighborhood(a):
            arms.update(self.strategies.strategies[y])
        return np.array(sorted(arms), dtype=np.intp)

    def visible(self, action: int) -> np.ndarray:
        return self._visible[action]

    def observe(self, t: int, action: int, rewards: np.ndarray) -> Observation:
        vis = self._visible[action]
        reward = 0.0
        for i in self._reward_index[action]:
            reward += float(rewards[i])
        return Observation(t, vis, rewards[vis], reward)

    def make_policy(self, name: str, horizon: int, rng: np.random.Generator, options: Optional[dict] = None) -> Policy:
        return make_policy(
            name,
            self.scenario,
            graph=self.graph,
            strategies=self.strategies,
            strategy_graph=self.strategy_graph,
            horizon=horizon,
            rng=rng,
            **options_for(name, options or {}),
        )


def resolve_means(cfg: EpisodeConfig) -> np.ndarray:
    spec = cfg.means.strip()
    if spec == "uniform":
        return uniform_means(cfg.num_arms, cfg.means_seed)
    if spec.startswith("file:"):
        mu = read_means(spec[5:])
    else:
        try:
            mu = np.array([float(v) for v in spec.split(",")])
        except ValueError:
            raise InputError(f"bad means spec {cfg.means!r}") from None
    if mu.size != cfg.num_arms:
        raise InputError(f"means spec gives {mu.size} values for {cfg.num_arms} arms")
    return mu


def build_problem(cfg: EpisodeConfig) -> Problem:
    scenario = Scenario.parse(cfg.scenario)
    graph = parse_graph_spec(cfg.graph, cfg.num_arms, cfg.graph_seed)
    env = BanditEnv(resolve_means(cfg), cfg.dist, cfg.env_seed)
    strategies = None
    if cfg.strategies:
        strategies = parse_strategy_spec(cfg.strategies, graph, cfg.cap)
    return Problem(scenario, graph, env, strategies, cfg.strategy_rule)


StepCallback = Callable[[int, Policy, Observation], None]


def _play(
    problem: Problem,
    policy: Policy,
    horizon: int,
    rewards: Optional[np.ndarray] = None,
    callback: Optional[StepCallback] = None,
) -> RegretTrace:
    opt = problem.optimum
    trace = RegretTrace(problem.scenario, opt, horizon)
    digest = hashlib.blake2b(digest_size=16)
    chunk = None
    for t in range(1, horizon + 1):
        if rewards is not None:
            X = rewards[t - 1]
        else:
            k = (t - 1) % _CHUNK
            if k == 0:
                chunk = problem.env.sample_rounds(min(_CHUNK, horizon - t + 1), start=t)
            X = chunk[k]
        digest.update(np.ascontiguousarray(X).tobytes())
        try:
            action = policy.select(t)
            obs = problem.observe(t, action, X)
            policy.update(t, action, obs)
        except ContractError as exc:
            raise ContractError(f"round {t}: {exc}") from exc
        trace.record_step(problem.scenario, opt, action, obs.reward)
        if callback is not None:
            callback(t, policy, obs)
    trace.env_checksum = digest.hexdigest()
    return trace


def run_episode(cfg: EpisodeConfig, callback: Optional[StepCallback] = None) -> RegretTrace:
    """Run one episode; deterministic in ``cfg``.

    ``callback(t, policy, obs)`` runs after every policy update.
    """
    problem = build_problem(cfg)
    policy = problem.make_policy(cfg.policy, cfg.horizon, np.random.default_rng(cfg.tiebreak_seed), cfg.policy_options)
    return _play(problem, policy, cfg.horizon, callback=callback)


# ---------------------------------------------------------------------------
# batches


def checkpoint_rounds(n: int, count: int = DEFAULT_CHECKPOINTS) -> np.ndarray:
    """Up to ``count`` distinct log-spaced rounds in ``[1, n]``, always including ``1`` and ``n``."""
    if n <= 1:
        return np.array([1], dtype=np.int64)
    pts = np.rint(np.logspace(0.0, math.log10(n), count)).astype(np.int64)
    pts = np.clip(pts, 1, n)
    pts[-1] = n
    return np.unique(pts)


def scenario_bound(problem: Problem, n: int) -> float:
    """Closed-form regret bound for ``problem`` at horizon ``n`` (analysis only; uses true gaps)."""
    sc = problem.scenario
    opt = problem.optimum
    if sc is Scenario.SSO:
        K = problem.graph.num_arms
        return bound_sso(n, K, clique_count_for_bound(problem.graph, opt.gaps, n))
    if sc is Scenario.CSO:
        F = len(problem.strategies)
        return bound_cso(n, F, clique_count_for_bound(problem.strategy_graph.as_relation_graph(), opt.gaps, n))
    if sc is Scenario.SSR:
        return bound_ssr(n, problem.graph.num_arms)
    return bound_csr(n, problem.graph.num_arms, problem.strategies.max_y)


def seed_config(template: EpisodeConfig, seed: int, policy: str) -> EpisodeConfig:
    """Per-seed, per-policy config; everything except the tie-break seed is policy-independent."""
    return replace(
        template,
        policy=policy,
        means_seed=derive_seed(seed, "means"),
        graph_seed=derive_seed(seed, "graph"),
        env_seed=derive_seed(seed, "env"),
        tiebreak_seed=derive_seed(seed, "tiebreak", policy),
    )


@dataclass
class RunSummary:
    """One (policy, seed) episode reduced to checkpoint values."""

    policy: str
    seed: int
    instant_pseudo: np.ndarray
    cum_pseudo: np.ndarray
    instant_realized: np.ndarray
    cum_realized: np.ndarray
    env_checksum: str

    def instant(self, measure: str = "pseudo") -> np.ndarray:
        return self.instant_pseudo if measure == "pseudo" else self.instant_realized

    def cumulative(self, measure: str = "pseudo") -> np.ndarray:
        return self.cum_pseudo if measure == "pseudo" else self.cum_realized


@dataclass
class BatchResult:
    scenario: str
    horizon: int
    policies: list
    seeds: list
    checkpoints: np.ndarray
    runs: dict = field(default_factory=dict)  # (policy, seed) -> RunSummary
    bounds: dict = field(default_factory=dict)  # seed -> bound at each checkpoint
    traces: Optional[dict] = None  # (policy, seed) -> RegretTrace when kept

    def summary(self, policy: str, seed: int) -> RunSummary:
        return self.runs[(policy, seed)]

    def per_seed(self, policy: str, quantity: str = "average", measure: str = "pseudo") -> np.ndarray:
        """Array ``(num_seeds, num_checkpoints)`` of ``instant``, ``cumulative`` or ``average`` regret."""
        rows = []
        for s in self.seeds:
            run = self.runs[(policy, s)]
            if quantity == "instant":
                rows.append(run.instant(measure))
            elif quantity == "cumulative":
                rows.append(run.cumulative(measure))
            elif quantity == "average":
                rows.append(run.cumulative(measure) / self.checkpoints)
            else:
                raise InputError(f"unknown quantity {quantity!r}")
        return np.array(rows).reshape(len(self.seeds), self.checkpoints.size)

    def mean_std(self, policy: str, quantity: str = "average", measure: str = "pseudo"):
        data = self.per_seed(policy, quantity, measure)
        return data.mean(axis=0), data.std(axis=0)

    def mean_bound(self) -> np.ndarray:
        return np.mean([self.bounds[s] for s in self.seeds], axis=0)


def _run_seed(
    template: EpisodeConfig,
    seed: int,
    policies: Sequence[str],
    checkpoints: np.ndarray,
    keep_traces: bool,
    with_bounds: bool,
):
    problem = build_problem(seed_config(template, seed, policies[0]))
    rewards = problem.env.sample_rounds(template.horizon)
    idx = checkpoints - 1
    out = []
    for p in policies:
        cfg = seed_config(template, seed, p)
        policy = problem.make_policy(p, cfg.horizon, np.random.default_rng(cfg.tiebreak_seed), cfg.policy_options)
        trace = _play(problem, policy, cfg.horizon, rewards)
        summary = RunSummary(
            p,
            seed,
            trace.instant_pseudo[idx].copy(),
            trace.cum_pseudo[idx].copy(),
            trace.instant_realized[idx].copy(),
            trace.cum_realized[idx].copy(),
            trace.env_checksum,
        )
        out.append((summary, trace if keep_traces else None))
    bound = None
    if with_bounds:
        bound = np.array([scenario_bound(problem, int(t)) for t in checkpoints])
    return seed, out, bound


def worker_count(workers: Optional[int] = None) -> int:
    if workers is None:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            workers = int(raw)
        except ValueError:
            raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, int(workers))


def run_batch(
    template: EpisodeConfig,
    seeds: Sequence[int],
    policies: Sequence[str],
    workers: Optional[int] = None,
    num_checkpoints: int = DEFAULT_CHECKPOINTS,
    keep_traces: bool = False,
    with_bounds: bool = True,
) -> BatchResult:
    """Run every policy on every seed with paired randomness.

    For a given seed all policies share the graph, the means and the reward
    stream; only their tie-break generators differ. Seeds run independently,
    optionally in ``workers`` processes (default: ``$NETBANDIT_THREADS`` or 1);
    results do not depend on the worker count.
    """
    seeds = [int(s) for s in seeds]
    policies = list(policies)
    if not seeds:
        raise InputError("run_batch needs at least one seed")
    if not policies:
        raise InputError("run_batch needs at least one policy")
    checkpoints = checkpoint_rounds(template.horizon, num_checkpoints)
    args = [(template, s, policies, checkpoints, keep_traces, with_bounds) for s in seeds]
    n_workers = min(worker_count(workers), len(seeds))
    if n_workers == 1:
        results = [_run_seed(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_seed, *zip(*args)))
    batch = BatchResult(template.scenario, template.horizon, policies, seeds, checkpoints,
                        traces={} if keep_traces else None)
    for seed, per_policy, bound in results:
        for summary, trace in per_policy:
            batch.runs[(summary.policy, seed)] = summary
            if keep_traces:
                batch.traces[(summary.policy, seed)] = trace
        if bound is not None:
            batch.bounds[seed] = bound
    return batch
