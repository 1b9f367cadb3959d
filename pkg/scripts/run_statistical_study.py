#!/usr/bin/env python3
"""Monte Carlo robustness study across the five environments.

Desk-scale default: 200 runs per (environment, method) cell.  Pass
--runs 5000 for the full-scale replication if you have the cores and the
patience; results are deterministic for a given master seed at any jobs
count.
"""

import argparse
import json
from pathlib import Path

from asvsim.montecarlo import BatchSpec, EnvSpec, aggregate, run_batch
from asvsim.serialize import (
    batch_summary_dict,
    batch_timing_dict,
    dumps_canonical,
    resolve_method,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/statistics")
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--jobs", type=int, default=2)
    ap.add_argument("--envs", default="1,2,3,4,5")
    ap.add_argument("--methods", default="mvortex,inverse,vo")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    envs = [int(e) for e in args.envs.split(",")]
    methods = [resolve_method(m.strip()) for m in args.methods.split(",")]

    table = {}
    for env_id in envs:
        for method in methods:
            spec = BatchSpec(env=EnvSpec.by_id(env_id), method=method,
                             n_runs=args.runs, master_seed=args.seed, jobs=args.jobs)
            records = run_batch(spec)
            agg = aggregate(records)
            cell = out / f"env{env_id}_{method}"
            cell.mkdir(exist_ok=True)
            (cell / "summary.json").write_text(dumps_canonical(
                batch_summary_dict(env_id, method, args.runs, args.seed, records, agg)))
            (cell / "timing.json").write_text(dumps_canonical(
                batch_timing_dict(records, agg)))
            table[f"env{env_id}:{method}"] = {
                "success_rate": agg.success_rate,
                "success_ci95": agg.success_ci,
                "mean_ce": agg.mean_ce,
                "mean_mcte": agg.mean_mcte,
                "mean_time_to_goal": agg.mean_time_to_goal,
                "mean_guidance_call_us": agg.mean_guidance_call_us,
            }
            print(f"env{env_id} {method:18s} success={agg.success_rate:.3f} "
                  f"+/-{agg.success_ci:.3f} ce={agg.mean_ce:.4f} "
                  f"mcte={agg.mean_mcte:.3f} "
                  f"guidance={agg.mean_guidance_call_us:.1f}us", flush=True)
    (out / "table.json").write_text(json.dumps(table, indent=2, sort_keys=True))
    print(f"wrote {out}/")


if __name__ == "__main__":
    main()
