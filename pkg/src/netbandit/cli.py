"""Command-line front end: ``run``, ``bounds``, ``preset`` and ``graph`` subcommands.

Exit codes: 0 success, 1 usage or input error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import os
import sys
from typing import Optional, Sequence

import numpy as np

from netbandit import __version__
from netbandit.env import Scenario
from netbandit.errors import CapacityError, ContractError, InputError
from netbandit.graph import greedy_clique_cover, parse_graph_spec, read_edge_list, write_edge_list
from netbandit.policies import POLICY_NAMES
from netbandit.regret import (
    bound_cso,
    bound_csr,
    bound_moss,
    bound_sso,
    bound_ssr,
    clique_count_for_bound,
)
from netbandit.report import RunManifest, emit_csv, emit_plot_script, ensure_dir, fmt
from netbandit.sim import EpisodeConfig, build_problem, derive_seed, run_batch

PRESETS = {
    "fig-sso-vs-moss": dict(scenario="sso", policies="dfl-sso,moss", arms=100, graph="er:0.3"),
    "fig-cso-sparse": dict(scenario="cso", policies="dfl-cso", arms=15, graph="er:0.3", strategies="independent:2"),
    "fig-cso-dense": dict(scenario="cso", policies="dfl-cso", arms=15, graph="er:0.6", strategies="independent:2"),
    "fig-ssr": dict(scenario="ssr", policies="dfl-ssr", arms=20, graph="er:0.3"),
    "fig-csr": dict(scenario="csr", policies="dfl-csr", arms=20, graph="er:0.3", strategies="independent:2"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def expand_seeds(master_seed: int, count: int) -> list[int]:
    return [derive_seed(master_seed, "seed", r) for r in range(count)]


def _add_run_options(p: argparse.ArgumentParser, preset: bool = False) -> None:
    if not preset:
        p.add_argument("--scenario", choices=[s.value for s in Scenario])
        p.add_argument("--policy", dest="policies", help="comma-separated policy names: " + ", ".join(POLICY_NAMES))
        p.add_argument("--arms", type=int)
        p.add_argument("--graph", default=None, help="er:<p>, complete, path, empty or file:<path>")
        p.add_argument("--strategies", default=None, help="independent:<M>, subsets:<M>, exact:<M> or file:<path>")
        p.add_argument("--means", default="uniform", help="uniform, file:<path> or comma-separated values")
        p.add_argument("--dist", default="bernoulli", choices=["bernoulli", "uniform", "point"])
        p.add_argument("--strategy-rule", default="mutual", choices=["mutual", "observed"])
        p.add_argument("--index-constant", default=None, choices=["strategies", "arms"], help="dfl-cso log constant")
        p.add_argument("--no-normalize", action="store_true", help="dfl-ssr: skip dividing side means by K")
        p.add_argument("--horizon-aware", action="store_true", help="DFL policies use the horizon instead of t")
        p.add_argument("--manifest", default=None, help="re-run the batch described by a manifest file")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--seeds", type=int, default=None, help="number of Monte-Carlo seeds (default 20)")
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--measure", default="pseudo", choices=["pseudo", "realized"])
    p.add_argument("--checkpoints", type=int, default=200)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default $NETBANDIT_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netbandit", description="Networked stochastic bandits with side observations and rewards.")
    parser.add_argument("--version", action="version", version=f"netbandit {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="run a Monte-Carlo batch and write CSV, manifest and plot script")
    _add_run_options(run)

    preset = sub.add_parser("preset", help="run a named experiment")
    preset.add_argument("name", choices=sorted(PRESETS))
    _add_run_options(preset, preset=True)

    bounds = sub.add_parser("bounds", help="print regret bounds for a configuration")
    bounds.add_argument("--scenario", required=True, choices=[s.value for s in Scenario])
    bounds.add_argument("--arms", type=int, required=True)
    bounds.add_argument("--horizon", type=int, required=True)
    bounds.add_argument("--graph", default="er:0.3")
    bounds.add_argument("--strategies", default=None)
    bounds.add_argument("--means", default="uniform")
    bounds.add_argument("--seed", type=int, default=0, help="seed used for the graph and uniform means")
    bounds.add_argument("--cliques", type=int, default=None, help="override the clique-cover size")

    graph = sub.add_parser("graph", help="generate or inspect relation graphs")
    gsub = graph.add_subparsers(dest="graph_command", parser_class=_Parser)
    gen = gsub.add_parser("generate", help="write an edge-list file")
    gen.add_argument("--arms", type=int, required=True)
    gen.add_argument("--graph", default="er:0.3")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=None, help="edge-list path (stdout if omitted)")
    ins = gsub.add_parser("inspect", help="summarize an edge-list file")
    ins.add_argument("path")
    return parser


def _policy_options(args) -> dict:
    opts = {}
    if getattr(args, "index_constant", None):
        opts["index_constant"] = args.index_constant
    if getattr(args, "no_normalize", False):
        opts["normalize"] = False
    if getattr(args, "horizon_aware", False):
        opts["anytime"] = False
    return opts


def _execute(manifest: RunManifest, workers: Optional[int], out=sys.stdout) -> int:
    template = manifest.template
    batch = run_batch(template, manifest.seeds, manifest.policies, workers=workers,
                      num_checkpoints=manifest.num_checkpoints)
    outdir = ensure_dir(manifest.output_dir)
    emit_csv(batch, os.path.join(outdir, "results.csv"), manifest.measure)
    emit_plot_script(batch, os.path.join(outdir, "plot.gp"), manifest.measure)
    manifest.write(os.path.join(outdir, "manifest.json"))
    n = template.horizon
    for p in manifest.policies:
        mean, std = batch.mean_std(p, "average", manifest.measure)
        cum, _ = batch.mean_std(p, "cumulative", manifest.measure)
        print(
            f"{p:8s} n={n} mean avg regret={fmt(mean[-1])} (std {fmt(std[-1])}) mean cum regret={fmt(cum[-1])}",
            file=out,
        )
    print(f"wrote {os.path.join(outdir, 'results.csv')}", file=out)
    return 0


def _manifest_from_args(args, spec: dict) -> RunManifest:
    for key in ("scenario", "policies", "arms"):
        if spec.get(key) in (None, ""):
            raise UsageError(f"--{'policy' if key == 'policies' else key} is required")
    horizon = args.horizon if args.horizon is not None else 10000
    count = args.seeds if args.seeds is not None else 20
    if count < 1:
        raise UsageError("--seeds must be >= 1")
    policies = [p.strip() for p in spec["policies"].split(",") if p.strip()]
    for p in policies:
        if p not in POLICY_NAMES:
            raise UsageError(f"unknown policy {p!r}; expected one of {', '.join(POLICY_NAMES)}")
    template = EpisodeConfig(
        scenario=spec["scenario"],
        policy=policies[0],
        horizon=horizon,
        num_arms=spec["arms"],
        graph=spec.get("graph") or "er:0.3",
        strategies=spec.get("strategies"),
        dist=spec.get("dist", "bernoulli"),
        means=spec.get("means", "uniform"),
        strategy_rule=spec.get("strategy_rule", "mutual"),
        policy_options=spec.get("policy_options", {}),
    )
    return RunManifest(
        template=template,
        policies=policies,
        seeds=expand_seeds(args.master_seed, count),
        master_seed=args.master_seed,
        output_dir=args.out or ".",
        measure=args.measure,
        num_checkpoints=args.checkpoints,
        version=__version__,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    )


def cmd_run(args, out) -> int:
    if args.manifest:
        manifest = RunManifest.read(args.manifest)
        if args.out:
            manifest.output_dir = args.out
        manifest.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return _execute(manifest, args.workers, out)
    spec = dict(
        scenario=args.scenario,
        policies=args.policies,
        arms=args.arms,
        graph=args.graph,
        strategies=args.strategies,
        dist=args.dist,
        means=args.means,
        strategy_rule=args.strategy_rule,
        policy_options=_policy_options(args),
    )
    return _execute(_manifest_from_args(args, spec), args.workers, out)


def cmd_preset(args, out) -> int:
    spec = dict(PRESETS[args.name])
    if args.out is None:
        args.out = args.name
    return _execute(_manifest_from_args(args, spec), args.workers, out)


def cmd_bounds(args, out) -> int:
    scenario = Scenario.parse(args.scenario)
    n, K = args.horizon, args.arms
    if n < 1 or K < 1:
        raise UsageError("--horizon and --arms must be >= 1")
    if scenario is Scenario.SSR:
        print(f"bound_ssr(n={n}, K={K}) = {fmt(bound_ssr(n, K))}", file=out)
        return 0
    cfg = EpisodeConfig(
        scenario=scenario.value,
        policy="random",
        horizon=n,
        num_arms=K,
        graph=args.graph,
        strategies=args.strategies,
        means=args.means,
        means_seed=derive_seed(args.seed, "means"),
        graph_seed=derive_seed(args.seed, "graph"),
    )
    problem = build_problem(cfg)
    if scenario is Scenario.SSO:
        cliques = args.cliques
        if cliques is None:
            cliques = clique_count_for_bound(problem.graph, problem.optimum.gaps, n)
        print(f"clique cover size = {cliques}", file=out)
        print(f"bound_sso(n={n}, K={K}, cliques={cliques}) = {fmt(bound_sso(n, K, cliques))}", file=out)
        print(f"moss bound 49*sqrt(nK) = {fmt(bound_moss(n, K))}", file=out)
    elif scenario is Scenario.CSO:
        F = len(problem.strategies)
        cliques = args.cliques
        if cliques is None:
            cliques = clique_count_for_bound(problem.strategy_graph.as_relation_graph(), problem.optimum.gaps, n)
        print(f"strategies |F| = {F}, clique cover size = {cliques}", file=out)
        print(f"bound_cso(n={n}, F={F}, cliques={cliques}) = {fmt(bound_cso(n, F, cliques))}", file=out)
        print(f"moss bound 49*sqrt(n|F|) = {fmt(bound_moss(n, F))}", file=out)
    else:
        N = problem.strategies.max_y
        print(f"strategies |F| = {len(problem.strategies)}, N = max|Y_x| = {N}", file=out)
        print(f"bound_csr(n={n}, K={K}, N={N}) = {fmt(bound_csr(n, K, N))}", file=out)
    return 0


def cmd_graph(args, out) -> int:
    if args.graph_command == "generate":
        g = parse_graph_spec(args.graph, args.arms, args.seed)
        if args.out:
            write_edge_list(g, args.out)
            print(f"wrote {args.out}: {g.num_arms} arms, {g.num_edges} edges", file=out)
        else:
            from netbandit.graph import format_edge_list

            out.write(format_edge_list(g))
        return 0
    if args.graph_command == "inspect":
        g = read_edge_list(args.path)
        degrees = np.array([g.degree(i) for i in range(g.num_arms)]) if g.num_arms else np.zeros(1)
        K = g.num_arms
        density = 2 * g.num_edges / (K * (K - 1)) if K > 1 else 0.0
        print(f"arms: {K}", file=out)
        print(f"edges: {g.num_edges}", file=out)
        print(f"density: {fmt(density)}", file=out)
        print(f"degree min/mean/max: {degrees.min()}/{fmt(degrees.mean())}/{degrees.max()}", file=out)
        print(f"isolated arms: {int((degrees == 0).sum()) if K else 0}", file=out)
        print(f"greedy clique cover size: {greedy_clique_cover(g).size}", file=out)
        return 0
    raise UsageError("graph needs a subcommand: generate or inspect")


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage())
        handler = {"run": cmd_run, "preset": cmd_preset, "bounds": cmd_bounds, "graph": cmd_graph}[args.command]
        return handler(args, out)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ContractError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
