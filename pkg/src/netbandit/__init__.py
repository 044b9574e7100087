"""Graph-aware stochastic multi-armed bandits with side observations and side rewards."""

from netbandit.errors import CapacityError, ContractError, InputError
from netbandit.graph import (
    CliqueCover,
    RelationGraph,
    build_graph,
    generate_er,
    greedy_clique_cover,
    induced_subgraph,
)
from netbandit.env import BanditEnv, Scenario, ScenarioOptimum, compute_optimum
from netbandit.strategies import (
    StrategyGraph,
    StrategySet,
    argmax_strategy,
    build_strategy_graph,
    enumerate_feasible,
)
from netbandit.policies import make_policy, POLICY_NAMES
from netbandit.regret import (
    RegretTrace,
    bound_csr,
    bound_cso,
    bound_sso,
    bound_ssr,
    clique_count_for_bound,
)
from netbandit.sim import BatchResult, EpisodeConfig, run_batch, run_episode

__version__ = "0.1.0"

__all__ = [
    "BanditEnv",
    "BatchResult",
    "CapacityError",
    "CliqueCover",
    "ContractError",
    "EpisodeConfig",
    "InputError",
    "POLICY_NAMES",
    "RegretTrace",
    "RelationGraph",
    "Scenario",
    "ScenarioOptimum",
    "StrategyGraph",
    "StrategySet",
    "argmax_strategy",
    "bound_cso",
    "bound_csr",
    "bound_sso",
    "bound_ssr",
    "build_graph",
    "build_strategy_graph",
    "clique_count_for_bound",
    "compute_optimum",
    "enumerate_feasible",
    "generate_er",
    "greedy_clique_cover",
    "induced_subgraph",
    "make_policy",
    "run_batch",
    "run_episode",
]
