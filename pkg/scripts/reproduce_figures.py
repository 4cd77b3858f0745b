#!/usr/bin/env python3
"""Regenerate every figure preset as CSV plus gnuplot script.

    python3 scripts/reproduce_figures.py --out-dir figures --render

``--render`` calls gnuplot (if it is on PATH) to turn each script into a PNG.
"""
import argparse
import shutil
import subprocess
import sys
import time
from pathlib import Path

from jcteleport import sweeps


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="figures")
    ap.add_argument("--only", nargs="*", help="preset ids, default all")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--render", action="store_true")
    args = ap.parse_args(argv)

    ids = args.only or sorted(sweeps.PRESETS, key=lambda s: (int(s[3:-1]), s[-1]))
    out = Path(args.out_dir)
    gnuplot = shutil.which("gnuplot") if args.render else None
    if args.render and gnuplot is None:
        print("gnuplot not found; writing scripts only", file=sys.stderr)

    t0 = time.perf_counter()
    for fid in ids:
        _, csv_path, script = sweeps.run_figure(fid, out, workers=args.workers)
        line = f"{fid:7s} {csv_path}"
        if gnuplot:
            png = script.with_suffix(".png")
            cmd = [gnuplot, "-e", f"set terminal pngcairo size 800,560; set output '{png.name}'", script.name]
            subprocess.run(cmd, cwd=script.parent, check=True)
            line += f" -> {png}"
        print(line)
    print(f"{len(ids)} figures in {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
