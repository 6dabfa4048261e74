"""Plots from cotrap output directories (split, collapse-mc, exclusion).

usage: python3 scripts/plot_figures.py OUT_DIR [OUT_DIR ...]
Writes PNGs next to the CSVs it finds.
"""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def read(path):
    return pd.read_csv(path, comment="#")


def plot_split(path):
    df = read(path)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for mode, ax in zip(("in_phase", "out_of_phase"), axes):
        d = df[df["mode"] == mode]
        ax.plot(d["alpha_up_re"], d["alpha_up_im"], label="up")
        ax.plot(d["alpha_down_re"], d["alpha_down_im"], label="down")
        ax.set_title(mode.replace("_", "-"))
        ax.set_xlabel("Re alpha")
        ax.set_ylabel("Im alpha")
        ax.set_aspect("equal", adjustable="datalim")
        ax.legend()
    fig.tight_layout()
    fig.savefig(path.with_suffix(".png"), dpi=150)


def plot_visibility(path):
    df = read(path)
    fig, ax = plt.subplots(figsize=(5, 4))
    t = df["t_int_s"] * 1e3
    ax.errorbar(t, df["V"], yerr=df["V_err"], fmt="o", label="Monte Carlo")
    ax.plot(t, df["V"].iloc[0] * df["V_analytic_rel"], "-", label="analytic rate")
    ax.set_yscale("log")
    ax.set_xlabel("t_int [ms]")
    ax.set_ylabel("V")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path.with_suffix(".png"), dpi=150)


def plot_exclusion(path):
    df = read(path)
    sig = np.sort(df["sigma_m"].unique())
    tau = np.sort(df["tau_e_s"].unique())
    mask = df.pivot(index="sigma_m", columns="tau_e_s", values="excluded").loc[sig, tau].to_numpy()
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.pcolormesh(tau, sig, mask, shading="nearest", cmap="Greys", vmin=0, vmax=1.5)
    ax.plot([1e16], [1e-7], "r*", label="GRW")
    ax.plot([1e8], [1e-7], "b*", label="Adler")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("tau_e [s]")
    ax.set_ylabel("sigma [m]")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path.with_suffix(".png"), dpi=150)


def main(dirs):
    plotters = {"split.csv": plot_split, "visibility.csv": plot_visibility, "exclusion.csv": plot_exclusion}
    for d in dirs:
        for name, fn in plotters.items():
            p = Path(d) / name
            if p.exists():
                fn(p)
                print("wrote", p.with_suffix(".png"))


if __name__ == "__main__":
    main(sys.argv[1:] or ["out"])
