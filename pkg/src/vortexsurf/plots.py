"""Figure rendering for experiment reports.

All functions write PNG files with the Agg backend and return the path,
so they are safe to call headless alongside the CSV/JSON emitters.
"""

from __future__ import annotations

from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_trajectory(rows: List[dict], path: str) -> str:
    """Chart-plane vortex paths from trajectory rows (t, k, chart, x, y)."""
    fig, ax = plt.subplots(figsize=(6, 6))
    ks = sorted({r["k"] for r in rows})
    for k in ks:
        pts = [(r["x"], r["y"]) for r in rows if r["k"] == k]
        xs, ys = zip(*pts)
        ax.plot(xs, ys, ".", markersize=2, label=f"vortex {k}")
        ax.plot(xs[0], ys[0], "o", color="black", markersize=5)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("vortex trajectories (chart coordinates)")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_energy(times: Sequence[float], hams: Sequence[float], path: str) -> str:
    """Relative Hamiltonian deviation from its initial value over time."""
    t = np.asarray(times)
    h = np.asarray(hams)
    href = max(abs(h[0]), 1e-30)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(t, (h - h[0]) / href, lw=1)
    ax.set_xlabel("t")
    ax.set_ylabel("relative H deviation")
    ax.set_title("energy conservation")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_deviation(eps: Sequence[float], devs: Sequence[float], path: str) -> str:
    """Log-log geodesic-deviation table over the separation sweep."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(eps, devs, "o-")
    ax.set_xlabel("separation")
    ax.set_ylabel("max geodesic deviation")
    ax.set_title("pair center vs geodesic")
    ax.grid(True, which="both", alpha=0.3)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_path(xs: Sequence[float], ys: Sequence[float], path: str, title: str = "geodesic path") -> str:
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(xs, ys, lw=1)
    ax.plot(xs[0], ys[0], "o", color="black")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    ax.set_title(title)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_residuals(ns: Sequence[int], residuals: Dict[str, Sequence[float]], path: str) -> str:
    """Residual-vs-resolution curves, one line per labelled scheme."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, vals in residuals.items():
        positive = [max(v, 1e-17) for v in vals]
        ax.loglog(ns, positive, "o-", label=label)
    ax.set_xlabel("samples")
    ax.set_ylabel("residual")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    ax.set_title("boundary geodesic residual")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_green_contour(xs: np.ndarray, ys: np.ndarray, vals: np.ndarray, path: str) -> str:
    """Filled contours of the Green function on a chart grid."""
    fig, ax = plt.subplots(figsize=(6, 5))
    levels = 31
    cf = ax.contourf(xs, ys, vals, levels=levels, cmap="RdBu_r")
    fig.colorbar(cf, ax=ax)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    ax.set_title("Green function")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
