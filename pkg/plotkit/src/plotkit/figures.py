"""Figure rendering from the solver's CSV files.

Styling follows the Okabe-Ito palette: solid green for exact solutions, dashed
orange for numerical approximations, blue/orange with circular/square markers
for the two error curves.  Every plot writes a raster (.png) and a vector
(.svg) file; embedded timestamps are suppressed so repeated runs produce
identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import read_errors, read_profile, read_study

__all__ = ["OKABE_ITO", "plot_profile", "plot_error_evolution", "plot_convergence"]

OKABE_ITO = {
    "orange": "#E69F00",
    "skyblue": "#56B4E9",
    "green": "#009E73",
    "yellow": "#F0E442",
    "blue": "#0072B2",
    "vermillion": "#D55E00",
    "purple": "#CC79A7",
    "black": "#000000",
}

_SAVE_OPTS = {"dpi": 110, "bbox_inches": "tight"}


def _save(fig, out_base: str) -> tuple[str, str]:
    plt.rcParams["svg.hashsalt"] = "timobeam-plotkit"
    raster = f"{out_base}.png"
    vector = f"{out_base}.svg"
    fig.savefig(raster, metadata={"Software": "timobeam-plotkit"}, **_SAVE_OPTS)
    fig.savefig(vector, metadata={"Date": None}, **_SAVE_OPTS)
    plt.close(fig)
    return raster, vector


def plot_profile(input_path: str, out_base: str) -> tuple[str, str]:
    """Exact versus numerical solution profiles at the final time layer."""
    data = read_profile(input_path)
    fig, axes = plt.subplots(1, 2, figsize=(9.6, 3.6), sharex=True)
    for ax, name, label in ((axes[0], "u", "transverse displacement u"),
                            (axes[1], "v", "rotation v")):
        ax.plot(data["x"], data[f"{name}_exact"], color=OKABE_ITO["green"],
                linewidth=1.6, label="exact")
        ax.plot(data["x"], data[f"{name}_num"], color=OKABE_ITO["orange"],
                linewidth=1.4, linestyle="--", label="numerical")
        ax.set_xlabel("x")
        ax.set_ylabel(label)
        ax.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, out_base)


def plot_error_evolution(input_path: str, out_base: str) -> tuple[str, str]:
    """The two per-layer L2 errors over all time layers."""
    data = read_errors(input_path)
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    stride = max(1, len(data["t"]) // 128)
    ax.plot(data["t"], data["E1"], color=OKABE_ITO["blue"], marker="o",
            markersize=2.5, markevery=stride, linewidth=1.0, label="error in u")
    ax.plot(data["t"], data["E2"], color=OKABE_ITO["orange"], marker="s",
            markersize=2.5, markevery=stride, linewidth=1.0, label="error in v")
    ax.set_xlabel("t")
    ax.set_ylabel("L2 error")
    positive = np.concatenate([data["E1"], data["E2"]])
    if np.any(positive > 0):
        ax.set_yscale("log")
    ax.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, out_base)


def plot_convergence(input_path: str, out_base: str) -> tuple[str, str]:
    """Study errors against the refinement axis with a slope-2 reference."""
    data = read_study(input_path)
    fig, ax = plt.subplots(figsize=(5.4, 3.8))
    errors = np.maximum(data["max_E1"], data["max_E2"])
    if data["axis"] == "n":
        tau = data["tau"]
        ax.loglog(tau, errors, color=OKABE_ITO["blue"], marker="o",
                  linewidth=1.0, label="max error")
        reference = errors[-1] * (tau / tau[-1]) ** 2
        ax.loglog(tau, reference, color=OKABE_ITO["black"], linestyle=":",
                  linewidth=1.0, label="slope 2")
        ax.set_xlabel("time step")
    else:
        values = data["value"]
        ax.semilogy(values, errors, color=OKABE_ITO["blue"], marker="o",
                    linewidth=1.0, label="max error")
        ax.set_xlabel("number of trial functions")
    ax.set_ylabel("max L2 error")
    ax.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, out_base)
