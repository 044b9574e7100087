"""Stochastic reward environments and scenario-specific optima."""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from netbandit.errors import InputError

if TYPE_CHECKING:
    from netbandit.graph import RelationGraph
    from netbandit.strategies import StrategySet

DIST_KINDS = ("bernoulli", "uniform", "point")

_MASK128 = (1 << 128) - 1
_INV_2_53 = 1.0 / 9007199254740992.0


class Scenario(str, Enum):
    """The four play/bonus combinations."""

    SSO = "sso"  # single play, side observation
    CSO = "cso"  # combinatorial play, side observation
    SSR = "ssr"  # single play, side reward
    CSR = "csr"  # combinatorial play, side reward

    @property
    def combinatorial(self) -> bool:
        return self in (Scenario.CSO, Scenario.CSR)

    @classmethod
    def parse(cls, value: "str | Scenario") -> "Scenario":
        try:
            return cls(str(value.value if isinstance(value, Scenario) else value).lower())
        except ValueError:
            raise InputError(f"unknown scenario {value!r}; expected one of sso, cso, ssr, csr") from None


class BanditEnv:
    """K arms with means in [0, 1] and a counter-based reward stream.

    The reward vector of round ``t`` is a pure function of ``(seed, t)``: a
    Philox stream keyed by the seed is cut into fixed-width blocks of
    ``ceil(K/4)`` counter steps and round ``t`` reads block ``t-1``. Any round
    can be regenerated by advancing the counter, and whole episodes can be
    drawn in one call.

    :param means: per-arm expected rewards, each in [0, 1]
    :param dist_kind: ``bernoulli`` (default), ``uniform`` (symmetric interval
        around the mean, clipped to stay inside [0, 1]) or ``point``
    :param seed: trajectory seed
    """

    def __init__(self, means: Sequence[float], dist_kind: str = "bernoulli", seed: int = 0):
        mu = np.asarray(means, dtype=float)
        if mu.ndim != 1 or mu.size == 0:
            raise InputError("means must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(mu)) or mu.min() < 0.0 or mu.max() > 1.0:
            raise InputError("every mean must lie in [0, 1]")
        if dist_kind not in DIST_KINDS:
            raise InputError(f"unknown dist_kind {dist_kind!r}; expected one of {DIST_KINDS}")
        self.means = mu
        self.means.flags.writeable = False
        self.dist_kind = dist_kind
        self.seed = int(seed)
        self._half_width = np.minimum(mu, 1.0 - mu)

    @property
    def num_arms(self) -> int:
        return self.means.size

    def _raw(self, start: int, n: int) -> np.ndarray:
        stride = (self.num_arms + 3) // 4
        bg = np.random.Philox(key=self.seed & _MASK128)
        if start > 1:
            bg.advance((start - 1) * stride)
        raw = bg.random_raw(n * stride * 4).reshape(n, stride * 4)
        return raw[:, : self.num_arms]

    def _transform(self, raw: np.ndarray) -> np.ndarray:
        if self.dist_kind == "point":
            return np.broadcast_to(self.means, raw.shape).copy()
        u = (raw >> np.uint64(11)).astype(np.float64) * _INV_2_53
        if self.dist_kind == "bernoulli":
            return (u < self.means).astype(float)
        return np.clip(self.means + self._half_width * (2.0 * u - 1.0), 0.0, 1.0)

    def sample_round(self, t: int) -> np.ndarray:
        """Reward vector ``X[., t]`` for round ``t >= 1``."""
        if t < 1:
            raise InputError(f"rounds are 1-indexed, got t={t}")
        return self._transform(self._raw(t, 1))[0]

    def sample_rounds(self, n: int, start: int = 1) -> np.ndarray:
        """Rows ``sample_round(t)`` for ``t = start .. start+n-1`` (shape ``(n, K)``)."""
        if start < 1:
            raise InputError(f"rounds are 1-indexed, got start={start}")
        return self._transform(self._raw(start, n))


@dataclass(frozen=True)
class ScenarioOptimum:
    """Optimal value and gaps for one scenario.

    ``values``/``gaps`` are indexed by arm (SSO, SSR) or by strategy (CSO, CSR).
    ``delta_min`` is ``None`` when every gap is zero.
    """

    scenario: Scenario
    optimal_value: float
    optimal_index: int
    values: np.ndarray
    gaps: np.ndarray
    delta_min: Optional[float]


def compute_optimum(
    env: "BanditEnv | Sequence[float]",
    g: "RelationGraph | None",
    strategies: "StrategySet | None",
    scenario: "Scenario | str",
) -> ScenarioOptimum:
    scenario = Scenario.parse(scenario)
    mu = env.means if isinstance(env, BanditEnv) else np.asarray(env, dtype=float)
    if scenario is Scenario.SSO:
        values = mu.copy()
    elif scenario is Scenario.SSR:
        if g is None:
            raise InputError("SSR optimum needs the relation graph")
        if g.num_arms != mu.size:
            raise InputError("graph and means disagree on the arm count")
        values = np.array([_ordered_sum(mu, g.closed_neighborhood(i)) for i in range(mu.size)])
    else:
        if strategies is None:
            raise InputError(f"{scenario.value.upper()} optimum needs a strategy set")
        if strategies.num_arms != mu.size:
            raise InputError("strategy set and means disagree on the arm count")
        sets = strategies.strategies if scenario is Scenario.CSO else strategies.y_sets
        values = np.array([_ordered_sum(mu, s) for s in sets])
    best = int(np.argmax(values))
    opt = float(values[best])
    gaps = opt - values
    positive = gaps[gaps > 0]
    delta_min = float(positive.min()) if positive.size else None
    return ScenarioOptimum(scenario, opt, best, values, gaps, delta_min)


def _ordered_sum(values: np.ndarray, idx) -> float:
    # left-to-right sum in index order so equal index sets give equal floats
    total = 0.0
    for i in idx:
        total += float(values[i])
    return total


def uniform_means(num_arms: int, seed: int) -> np.ndarray:
    """I.i.d. U[0, 1] means from a dedicated generator."""
    return np.random.default_rng(seed).random(int(num_arms))


def read_means(path: str | os.PathLike) -> np.ndarray:
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise InputError(f"{path}:{lineno}: not a number: {raw.strip()!r}") from None
    return np.array(values)


def write_means(means: Sequence[float], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for m in means:
            fh.write(f"{float(m)!r}\n")
