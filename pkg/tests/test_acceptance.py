"""Acceptance criteria, one test each; every test prints and records a PASS/FAIL line."""

import io
import itertools
import math

import mpmath as mp
import numpy as np
import pytest

from netbandit.cli import PRESETS, main
from netbandit.env import BanditEnv, Scenario
from netbandit.graph import build_graph
from netbandit.policies import DFLSSR, csr_arm_score, moss_index, sso_index, ssr_index
from netbandit.regret import bound_csr, bound_sso, bound_ssr, clique_count_for_bound
from netbandit.sim import EpisodeConfig, Problem, _play, build_problem, run_batch, seed_config
from netbandit.strategies import build_strategy_graph, enumerate_feasible
from oracles import (
    mp_bound_csr,
    mp_csr_score,
    mp_moss_index,
    mp_sso_index,
    mp_ssr_index,
    ref_cso,
    ref_csr,
    ref_moss,
    ref_sso,
    ref_ssr,
)

REPORT = []
SEEDS = list(range(20))
SSO_TEMPLATE = EpisodeConfig("sso", "dfl-sso", 10_000, 100, graph="er:0.3")


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    REPORT.append(line)
    assert ok, line


def _close(got, want, tol=1e-12):
    if mp.isinf(want):
        return math.isinf(got) and got > 0
    return abs(got - float(want)) <= tol


def _random_tuples(rng, count):
    """(xbar, O, t, K) draws mixing generic values, clamp boundaries and zero counts."""
    out = []
    for k in range(count):
        K = int(rng.integers(1, 200))
        xbar = float(rng.random())
        kind = k % 5
        if kind == 0:
            O = 0
            t = int(rng.integers(1, 10**6))
        elif kind == 1:
            O = int(rng.integers(1, 500))
            t = K * O  # log argument exactly 1
        elif kind == 2:
            O = int(rng.integers(1, 500))
            t = int(rng.integers(1, K * O + 1))  # clamped side
        else:
            O = int(rng.integers(1, 10**4))
            t = int(rng.integers(1, 10**7))
        out.append((xbar, O, t, K))
    return out


def test_criterion_1_index_oracles():
    rng = np.random.default_rng(20240601)
    tuples = _random_tuples(rng, 1000)
    worst = 0.0
    bad = []
    for xbar, O, t, K in tuples:
        cases = [
            (sso_index(xbar, O, t, K), mp_sso_index(xbar, O, t, K)),
            (ssr_index(xbar * K, O, t, K), mp_ssr_index(xbar * K, O, t, K)),
            (csr_arm_score(xbar, O, t, K), mp_csr_score(xbar, O, t, K)),
            (moss_index(xbar, O, t, K), mp_moss_index(xbar, O, t, K)),
        ]
        for name, (got, want) in zip(("sso", "ssr", "csr", "moss"), cases):
            if not _close(got, want):
                bad.append((name, xbar, O, t, K, got, want))
            elif not mp.isinf(want):
                worst = max(worst, abs(got - float(want)))
    # the CSR clamp boundary at t^(2/3) = K O for perfect cubes
    for O, K in [(4, 4), (9, 1), (2, 8), (25, 4)]:
        t = round((K * O) ** 1.5)
        if not _close(csr_arm_score(0.25, O, t, K), mp_csr_score(0.25, O, t, K)):
            bad.append(("csr-boundary", O, t, K))
    record(1, not bad, f"4x1000 index evaluations vs 50-digit reference, max abs err {worst:.2e}, mismatches {len(bad)}")


def test_criterion_2_worked_example():
    g = build_graph(4, [(0, 1), (1, 2), (2, 3)])
    fs = enumerate_feasible(g, "independent", 2)
    sg = build_strategy_graph(fs, g)
    want_s = [(0,), (1,), (2,), (3,), (0, 2), (0, 3), (1, 3)]
    want_y = [(0, 1), (0, 1, 2), (1, 2, 3), (2, 3), (0, 1, 2, 3), (0, 1, 2, 3), (0, 1, 2, 3)]
    ok = list(fs.strategies) == want_s and list(fs.y_sets) == want_y and sg.has_edge(1, 4) and not sg.has_edge(0, 3)
    record(2, ok, f"7 strategies and Y-sets exact; s2-s5 edge {sg.has_edge(1, 4)}, s1-s4 edge {sg.has_edge(0, 3)}")


def test_criterion_3_observation_accounting():
    rng = np.random.default_rng(3)
    combos = [("sso", "dfl-sso", None), ("ssr", "dfl-ssr", None),
              ("csr", "dfl-csr", "independent:2"), ("cso", "dfl-cso", "independent:2")]
    graphs = ["er:0.1", "er:0.3", "er:0.7", "path", "complete", "empty"]
    failures = []
    for ep in range(50):
        scenario, policy, strat = combos[ep % 4]
        K = int(rng.integers(1, 31))
        if scenario in ("csr", "cso"):
            K = min(K, 20)
        cfg = EpisodeConfig(scenario, policy, 2000, K, graph=graphs[int(rng.integers(len(graphs)))],
                            strategies=strat, means_seed=ep, graph_seed=ep + 100, env_seed=ep + 200,
                            tiebreak_seed=ep + 300,
                            policy_options={"anytime": bool(ep % 3)})
        problem = build_problem(cfg)
        checks = {int(t) for t in np.unique(np.geomspace(1, 2000, 40).astype(int))}
        state = {"visible": 0, "ssr_ok": True}

        def cb(t, pol, obs):
            state["visible"] += obs.visible.size
            if isinstance(pol, DFLSSR) and t in checks:
                for i in range(K):
                    if pol.side_counts[i] != pol.obs_counts[problem.graph.closed_neighborhood(i)].min():
                        state["ssr_ok"] = False

        policy_obj = problem.make_policy(policy, 2000, np.random.default_rng(cfg.tiebreak_seed), cfg.policy_options)
        trace = _play(problem, policy_obj, 2000, callback=cb)
        if scenario == "cso":
            sg = problem.strategy_graph
            expected = sum(len(sg.closed_neighborhood(int(a))) for a in trace.actions)
            got = int(policy_obj.obs_counts.sum())
        else:
            expected = sum(problem.visible(int(a)).size for a in trace.actions)
            got = int(policy_obj.obs_counts.sum())
            if state["visible"] != expected:
                failures.append((ep, "visible"))
        if got != expected:
            failures.append((ep, scenario, got, expected))
        if not state["ssr_ok"]:
            failures.append((ep, "ssr-min"))
    record(3, not failures, f"50 episodes (K<=30, n=2000): sum O equals visibility sum; SSR min-count checks; failures {failures}")


@pytest.fixture(scope="module")
def sso_batch():
    return run_batch(SSO_TEMPLATE, SEEDS, ["dfl-sso", "moss"], num_checkpoints=50)


def test_criterion_4_sso_beats_moss(sso_batch):
    dfl = sso_batch.per_seed("dfl-sso")[:, -1]
    moss = sso_batch.per_seed("moss")[:, -1]
    wins = int((dfl < moss).sum())
    ok = dfl.mean() < 0.05 and wins >= 18
    record(4, ok, f"K=100 ER 0.3 n=1e4: DFL-SSO avg regret {dfl.mean():.4f} (<0.05), MOSS {moss.mean():.4f}, "
                  f"DFL-SSO lower in {wins}/20 seeds (>=18)")


def test_criterion_5_bound_domination(sso_batch):
    n = 10_000
    worst = 0.0
    ok = True
    for s in SEEDS:
        problem = build_problem(seed_config(SSO_TEMPLATE, s, "dfl-sso"))
        cliques = clique_count_for_bound(problem.graph, problem.optimum.gaps, n)
        bound = bound_sso(n, 100, cliques)
        cum = sso_batch.runs[("dfl-sso", s)].cum_pseudo[-1]
        worst = max(worst, cum / bound)
        ok &= cum <= bound
    record(5, ok, f"cumulative pseudo-regret <= bound_sso in every seed; largest ratio {worst:.4f}")


def test_criterion_6_cso_density():
    vals = {}
    for p in ("0.3", "0.6"):
        template = EpisodeConfig("cso", "dfl-cso", 10_000, 15, graph=f"er:{p}", strategies="independent:2")
        batch = run_batch(template, SEEDS, ["dfl-cso"], num_checkpoints=20, with_bounds=False)
        vals[p] = batch.per_seed("dfl-cso")[:, -1].mean()
    record(6, vals["0.6"] < vals["0.3"],
           f"K=15 independent<=2 n=1e4: avg regret ER0.3 {vals['0.3']:.4f}, ER0.6 {vals['0.6']:.4f} (dense lower)")


def test_criterion_7_ssr_optimum_shift():
    n = 20_000
    template = EpisodeConfig("ssr", "dfl-ssr", n, 3, graph="path", means="0.9,0.5,0.4")
    batch = run_batch(template, SEEDS, ["dfl-ssr"], num_checkpoints=10, keep_traces=True, with_bounds=False)
    fracs = []
    for s in SEEDS:
        tail = batch.traces[("dfl-ssr", s)].actions[-n // 10:]
        fracs.append(float(np.mean(tail == 1)))
    record(7, min(fracs) >= 0.9, f"3-arm path, n=2e4: arm 1 share in last 10% of rounds, min over seeds {min(fracs):.4f} (>=0.9)")


def test_criterion_8_csr_convergence():
    n = 10_000
    template = EpisodeConfig("csr", "dfl-csr", n, 4, graph="path", strategies="independent:2",
                             means="0.7,0.2,0.3,0.6")
    problem = build_problem(template)
    sigma = np.sort(np.unique(problem.optimum.values))[::-1]
    gap = sigma[0] - sigma[1]
    batch = run_batch(template, SEEDS, ["dfl-csr"], num_checkpoints=10)
    avg = batch.per_seed("dfl-csr")[:, -1].mean()
    bound = bound_csr(n, 4, problem.strategies.max_y)
    cum_p = batch.per_seed("dfl-csr", "cumulative")[:, -1]
    cum_r = batch.per_seed("dfl-csr", "cumulative", "realized")[:, -1]
    ok = gap >= 0.3 and avg < 0.05 and (cum_p <= bound).all() and (cum_r <= bound).all()
    record(8, ok, f"sigma gap {gap:.2f}; avg pseudo-regret {avg:.5f} (<0.05); max cum pseudo {cum_p.max():.2f}, "
                  f"realized {cum_r.max():.2f} vs bound {bound:.1f}")


def test_criterion_9_bound_values():
    ssr = bound_ssr(100, 4)
    sso = bound_sso(100, 4, 2)
    csr = bound_csr(64, 4, 2)
    ref = float(mp_bound_csr(64, 4, 2))
    ok = ssr == 3920 and abs(sso - 326.2) <= 1e-9 and abs(csr - ref) / ref <= 1e-6
    record(9, ok, f"bound_ssr(100,4)={ssr:g}, bound_sso(100,4,2)={sso:.10g}, bound_csr(64,4,2)={csr:.10g} (ref {ref:.10g})")


def test_criterion_10_preset_determinism(tmp_path):
    same = []
    for name in sorted(PRESETS):
        outs = []
        for rep in range(2):
            d = tmp_path / f"{name}-{rep}"
            code = main(["preset", name, "--horizon", "300", "--seeds", "3", "--master-seed", "7", "--out", str(d)],
                        out=io.StringIO())
            assert code == 0
            outs.append((d / "results.csv").read_bytes())
        same.append(outs[0] == outs[1])
    record(10, all(same), f"{sum(same)}/{len(same)} presets byte-identical on rerun (n=300, 3 seeds)")


def _small_instance(rng):
    K = int(rng.integers(1, 5))
    edges = [(i, j) for i in range(K) for j in range(i + 1, K) if rng.random() < 0.5]
    g = build_graph(K, edges)
    pool = [tuple(c) for r in range(1, K + 1) for c in itertools.combinations(range(K), r)]
    F = int(rng.integers(1, min(10, len(pool)) + 1))
    picks = sorted(rng.choice(len(pool), F, replace=False).tolist())
    strategies = [pool[p] for p in picks]
    mu = rng.random(K)
    dist = ["bernoulli", "uniform", "point"][int(rng.integers(3))]
    return g, strategies, mu, dist


def _reward_fn(problem):
    def reward(a, x):
        total = 0.0
        for i in problem._reward_index[a]:
            total += float(x[i])
        return total
    return reward


def test_criterion_11_reference_learners():
    rng = np.random.default_rng(11)
    mismatches = []
    runs = 0
    for inst in range(200):
        g, strategies, mu, dist = _small_instance(rng)
        n = int(rng.integers(1, 51))
        env = BanditEnv(mu, dist, seed=inst)
        X = env.sample_rounds(n)
        rows = [list(map(float, r)) for r in X]
        fs = enumerate_feasible(g, "explicit", explicit=strategies)
        for scenario in Scenario:
            problem = Problem(scenario, g, env, fs if scenario.combinatorial else None)
            K = g.num_arms
            for name in (f"dfl-{scenario.value}", "moss"):
                seed = 1000 * inst + (0 if name == "moss" else 1)
                policy = problem.make_policy(name, n, np.random.default_rng(seed))
                got = _play(problem, policy, n, X).actions.tolist()
                ref_rng = np.random.default_rng(seed)
                if name == "moss":
                    want = ref_moss(problem.num_actions, _reward_fn(problem), n, policy.reward_scale, rows, ref_rng)
                elif scenario is Scenario.SSO:
                    want = ref_sso(K, g.edges, rows, ref_rng)
                elif scenario is Scenario.SSR:
                    want = ref_ssr(K, g.edges, rows, ref_rng)
                elif scenario is Scenario.CSO:
                    want = ref_cso(K, g.edges, list(fs.strategies), rows, ref_rng)
                else:
                    want = ref_csr(K, g.edges, list(fs.strategies), rows, ref_rng)
                runs += 1
                if got != want:
                    mismatches.append((inst, scenario.value, name))
    record(11, not mismatches, f"{runs} engine runs (K<=4, |F|<=10, n<=50) vs straight-line references; "
                               f"mismatches {mismatches[:5]}")
