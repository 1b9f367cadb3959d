#!/usr/bin/env python3
"""COLREGS encounter suite (overtaking, head-on, crossing), the three-ship
conflicting-responsibility case and the narrow channel, for any method."""

import argparse
from pathlib import Path

from asvsim import scenarios
from asvsim.engine import run
from asvsim.mmg import ShipModel
from asvsim.plots import plot_distances, plot_paths
from asvsim.serialize import resolve_method, write_trajectory_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/colregs")
    ap.add_argument("--method", default="mvortex",
                    help="mvortex | sinkvortex | inverse | vo")
    args = ap.parse_args()
    method = resolve_method(args.method)
    out = Path(args.out) / args.method
    out.mkdir(parents=True, exist_ok=True)
    model = ShipModel.default_kcs()

    cases = [
        ("overtaking", scenarios.overtaking(method)),
        ("head_on", scenarios.head_on(method)),
        ("crossing", scenarios.crossing(method)),
        ("three_ship", scenarios.three_ship(method)),
        ("narrow_channel", scenarios.narrow_channel(method)),
    ]
    for name, scenario in cases:
        result = run(scenario, model=model, record=True)
        rows = {a.agent_id: t for a, t in zip(result.agents, result.trajectories)}
        write_trajectory_csv(result, str(out / f"{name}.csv"))
        plot_paths(rows, scenario, str(out / f"{name}_path.svg"))
        try:
            plot_distances(rows, str(out / f"{name}_dist.svg"),
                           r_safe=scenario.config.R_safe)
        except ValueError:
            pass
        min_sep = min(a.min_ship_distance for a in result.agents)
        print(f"{name:15s} outcomes={[a.outcome for a in result.agents]} "
              f"min_separation={min_sep:.2f}L t={result.t_end:.1f}")
    print(f"wrote {out}/")


if __name__ == "__main__":
    main()
