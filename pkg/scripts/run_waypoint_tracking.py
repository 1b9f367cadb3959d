#!/usr/bin/env python3
"""Square waypoint-tracking experiment: trajectory, rudder, heading and
cross-track plots plus the CE/MCTE metrics."""

import argparse
from pathlib import Path

from asvsim import scenarios
from asvsim.engine import run
from asvsim.mmg import ShipModel
from asvsim.plots import plot_paths, plot_series
from asvsim.serialize import dumps_canonical, result_to_dict, write_trajectory_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/waypoint_tracking")
    ap.add_argument("--side", type=float, default=30.0, help="square side (L)")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scenario = scenarios.square_tracking(side=args.side)
    result = run(scenario, model=ShipModel.default_kcs(), record=True)

    write_trajectory_csv(result, str(out / "trajectory.csv"))
    (out / "result.json").write_text(dumps_canonical(result_to_dict(result, scenario)))
    rows = {a.agent_id: t for a, t in zip(result.agents, result.trajectories)}
    plot_paths(rows, scenario, str(out / "path.svg"))
    for kind in ("rudder", "heading", "crosstrack"):
        plot_series(rows, kind, str(out / f"{kind}.svg"))

    own = result.agents[0]
    print(f"outcome={own.outcome} waypoints={own.waypoints_reached} "
          f"CE={own.ce:.4f} MCTE={own.mcte:.4f} t_end={result.t_end:.1f}")
    print(f"wrote {out}/")


if __name__ == "__main__":
    main()
