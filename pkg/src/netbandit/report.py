"""CSV, gnuplot script and run-manifest emission for batch results."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from netbandit.sim import BatchResult, EpisodeConfig, seed_config

CSV_HEADER = ("policy", "seed", "t", "instant_regret", "cum_regret", "avg_regret")


def fmt(x: float) -> str:
    """Decimal with 10 significant digits."""
    return format(float(x), ".10g")


def emit_csv(result: BatchResult, path, measure: str = "pseudo") -> None:
    """One row per (policy, seed, checkpoint); header always written."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for p in result.policies:
            for s in result.seeds:
                run = result.runs[(p, s)]
                inst = run.instant(measure)
                cum = run.cumulative(measure)
                for k, t in enumerate(result.checkpoints):
                    writer.writerow((p, s, int(t), fmt(inst[k]), fmt(cum[k]), fmt(cum[k] / t)))


def read_csv(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "policy": row["policy"],
                    "seed": int(row["seed"]),
                    "t": int(row["t"]),
                    "instant_regret": float(row["instant_regret"]),
                    "cum_regret": float(row["cum_regret"]),
                    "avg_regret": float(row["avg_regret"]),
                }
            )
    return rows


def emit_plot_script(result: BatchResult, path, measure: str = "pseudo", image: str = "regret.png") -> None:
    """Self-contained gnuplot script: mean +- std of time-averaged regret per policy, bound/t dashed."""
    lines = [
        "# time-averaged regret per policy (mean +- std over seeds)",
        f"# scenario={result.scenario} horizon={result.horizon} seeds={len(result.seeds)} measure={measure}",
        "set terminal pngcairo size 900,600",
        f"set output '{image}'",
        "set logscale x",
        "set key top right",
        "set xlabel 'round t'",
        f"set ylabel 'time-averaged {measure} regret'",
    ]
    plots = []
    top = 0.0
    for k, p in enumerate(result.policies):
        if not result.seeds:
            break
        mean, std = result.mean_std(p, "average", measure)
        top = max(top, float(np.max(mean + std)))
        lines.append(f"$p{k} << EOD")
        lines.extend(f"{int(t)} {fmt(m)} {fmt(sd)}" for t, m, sd in zip(result.checkpoints, mean, std))
        lines.append("EOD")
        plots.append(f"$p{k} using 1:($2-$3):($2+$3) with filledcurves lc {k + 1} fs transparent solid 0.2 notitle")
        plots.append(f"$p{k} using 1:2 with lines lc {k + 1} lw 2 title '{p}'")
    if result.bounds and result.seeds:
        bound = result.mean_bound() / result.checkpoints
        lines.append("$bound << EOD")
        lines.extend(f"{int(t)} {fmt(b)}" for t, b in zip(result.checkpoints, bound))
        lines.append("EOD")
        plots.append("$bound using 1:2 with lines dt 2 lc rgb 'black' title 'regret bound / t'")
    if top > 0:
        lines.append(f"set yrange [0:{fmt(1.2 * top)}]")
    if plots:
        lines.append("plot " + ", \\\n     ".join(plots))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class RunManifest:
    """Enough to re-resolve every episode config of a batch run."""

    template: EpisodeConfig
    policies: list
    seeds: list
    master_seed: int
    output_dir: str
    measure: str = "pseudo"
    num_checkpoints: int = 200
    version: str = ""
    timestamp: str = ""
    configs: list = field(default_factory=list)

    def resolve(self) -> list[EpisodeConfig]:
        return [seed_config(self.template, s, p) for p in self.policies for s in self.seeds]

    def to_dict(self) -> dict:
        return {
            "tool": "netbandit",
            "version": self.version,
            "timestamp": self.timestamp,
            "master_seed": self.master_seed,
            "output_dir": self.output_dir,
            "measure": self.measure,
            "num_checkpoints": self.num_checkpoints,
            "policies": list(self.policies),
            "seeds": list(self.seeds),
            "template": self.template.to_dict(),
            "configs": [c.to_dict() for c in self.resolve()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunManifest":
        return cls(
            template=EpisodeConfig.from_dict(data["template"]),
            policies=list(data["policies"]),
            seeds=[int(s) for s in data["seeds"]],
            master_seed=int(data["master_seed"]),
            output_dir=data.get("output_dir", ""),
            measure=data.get("measure", "pseudo"),
            num_checkpoints=int(data.get("num_checkpoints", 200)),
            version=data.get("version", ""),
            timestamp=data.get("timestamp", ""),
            configs=[EpisodeConfig.from_dict(c) for c in data.get("configs", [])],
        )

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read(cls, path) -> "RunManifest":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def ensure_dir(path: Optional[str]) -> str:
    path = path or "."
    os.makedirs(path, exist_ok=True)
    return path
