#!/usr/bin/env python3
"""Static obstacle avoidance with the three potential fields, including the
far-goal case in which the inverse-square field fails."""

import argparse
from pathlib import Path

from asvsim import scenarios
from asvsim.engine import run
from asvsim.mmg import ShipModel
from asvsim.plots import plot_paths, plot_series
from asvsim.serialize import write_trajectory_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/static_avoidance")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = ShipModel.default_kcs()

    cases = [
        ("inverse", scenarios.static_avoidance("apf_inverse")),
        ("sinkvortex", scenarios.static_avoidance("apf_sinkvortex")),
        ("mvortex", scenarios.static_avoidance("apf_mvortex")),
        ("inverse_far_goal", scenarios.static_avoidance("apf_inverse", goal_x=60.0)),
    ]
    for name, scenario in cases:
        result = run(scenario, model=model, record=True)
        own = result.agents[0]
        rows = {a.agent_id: t for a, t in zip(result.agents, result.trajectories)}
        write_trajectory_csv(result, str(out / f"{name}.csv"))
        plot_paths(rows, scenario, str(out / f"{name}_path.svg"))
        plot_series(rows, "rudder", str(out / f"{name}_rudder.svg"))
        print(f"{name:18s} outcome={own.outcome:9s} CE={own.ce:.4f} "
              f"min_clearance={own.min_static_clearance:.2f}L t={result.t_end:.1f}")
    print(f"wrote {out}/")


if __name__ == "__main__":
    main()
