#!/usr/bin/env python3
"""Peak normalized single-copy fidelity over tau in [0, 20] as a function of nbar.

Resonant channel, n = 2, excited-heavy input (theta = pi/2). Prints a small
table and optionally writes it as CSV.
"""
import argparse
import math

import numpy as np

from jcteleport import sweeps


def peak_fidelity(nbar, theta=math.pi / 2, delta=0.0, n=2, count=2000):
    spec = sweeps.SweepSpec(
        protocol="ftp", nbar=(nbar,), delta=(delta,), n=n, theta=theta, tau_count=count,
    )
    res = sweeps.run_sweep(spec)
    col = res.column(res.series_columns("norm")[0])
    k = int(np.argmax(col))
    return float(col[k]), float(res.column("tau")[k])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nbar", default="1,2,4,6,10,30,100,400,800,1000")
    ap.add_argument("--delta", type=float, default=0.0)
    ap.add_argument("--out", help="optional CSV path")
    args = ap.parse_args(argv)

    rows = []
    print(f"{'nbar':>8} {'max F':>12} {'at tau':>10}")
    for nbar in (float(x) for x in args.nbar.split(",")):
        f, t = peak_fidelity(nbar, delta=args.delta)
        rows.append((nbar, f, t))
        print(f"{nbar:8g} {f:12.8f} {t:10.4f}")
    if args.out:
        np.savetxt(args.out, rows, delimiter=",", header="nbar,max_fidelity,tau_at_max", comments="", fmt="%.17g")


if __name__ == "__main__":
    main()
