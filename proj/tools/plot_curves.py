#!/usr/bin/env python3
"""Plot the error curves and quadratic fits emitted by `fcdelay delay`.

Usage:
    plot_curves.py RESULTS_DIR [-o out.png]

Reads every curve_M*.csv (and matching fit_M*.csv, when present) in
RESULTS_DIR and renders err_re_inf against the scaled trial delay on a
log-log axis. The delay estimate for each M is where the fitted branch
meets the truncation tolerance, so the fits are overlaid as dashed lines.
"""

import argparse
import csv
import glob
import os
import re
import sys


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("results_dir")
    ap.add_argument("-o", "--out", help="write PNG instead of opening a window")
    args = ap.parse_args()

    curves = sorted(glob.glob(os.path.join(args.results_dir, "curve_M*.csv")))
    if not curves:
        sys.exit(f"no curve_M*.csv files in {args.results_dir}")

    import matplotlib

    if args.out:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    for path in curves:
        m = re.search(r"curve_M(\d+)\.csv$", path).group(1)
        data = read_csv(path)
        ts = data["t_scaled"]
        (line,) = ax.loglog(ts[1:], data["err_re_inf"][1:], ".-", label=f"M={m}")
        fit_path = os.path.join(args.results_dir, f"fit_M{m}.csv")
        if os.path.exists(fit_path):
            # fit files tabulate the fitted T(err) relation
            fit = read_csv(fit_path)
            ax.loglog(fit["t_fitted"], fit["err"], "--",
                      color=line.get_color(), alpha=0.7)

    ax.set_xlabel("scaled trial delay t")
    ax.set_ylabel(r"$\|E_R\|_\infty$")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=150)
        print(f"wrote {args.out}")
    else:
        plt.show()


if __name__ == "__main__":
    main()
