#!/usr/bin/env python3
"""Quick look at superinfect CSV output. Needs pandas and matplotlib.

    python3 scripts/plot.py boundary OUT_DIR
    python3 scripts/plot.py compare OUT_DIR
    python3 scripts/plot.py heatmap OUT_DIR
"""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd


def read(path):
    return pd.read_csv(path, comment="#")


def boundary(out):
    d = read(out / "boundary.csv")
    plt.loglog(d.phi, d.c_star, label="c*")
    plt.loglog(d.phi, d.l, "--", label="l")
    plt.loglog(d.phi, d.u, "--", label="u")
    plt.xlabel("phi")
    plt.ylabel("c")
    plt.legend()


def compare(out):
    d = read(out / "compare.csv")
    plt.errorbar(d.phi, d.network_p, d.network_p_stderr, label="network p")
    plt.errorbar(d.phi, d.branching_p, d.branching_p_stderr, label="branching")
    plt.plot(d.phi, d.network_fraction, label="mean fraction")
    plt.xscale("log")
    plt.xlabel("phi")
    plt.legend()


def heatmap(out):
    d = read(out / "heatmap.csv").pivot(index="c", columns="phi", values="p_outbreak")
    o = read(out / "boundary_overlay.csv")
    plt.pcolormesh(d.columns, d.index, d.values, shading="nearest")
    plt.plot(o.phi, o.c_star, "r")
    plt.xscale("log")
    plt.ylim(d.index.min(), d.index.max())
    plt.xlabel("phi")
    plt.ylabel("c")
    plt.colorbar(label="p_outbreak")


if __name__ == "__main__":
    mode, out = sys.argv[1], Path(sys.argv[2])
    {"boundary": boundary, "compare": compare, "heatmap": heatmap}[mode](out)
    plt.savefig(out / f"{mode}.png", dpi=150)
