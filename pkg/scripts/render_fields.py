#!/usr/bin/env python3
"""Render the three reactive vector fields (inverse-square, sink-vortex,
modified sink-vortex) around a single obstacle/goal pair."""

import argparse
from pathlib import Path

from asvsim.plots import plot_field


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/fields")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for kind in ("inverse", "sinkvortex", "mvortex"):
        plot_field(kind, str(out / f"{kind}.svg"))
        print(f"wrote {out / (kind + '.svg')}")


if __name__ == "__main__":
    main()
