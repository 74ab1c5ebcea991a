"""SVG figures for the command-line outputs (presentation only)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Date": None}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def psos_svg(points, path, separatrix=None, p_c=None, title=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(points[:, 0], points[:, 1], ",", color="k")
    if separatrix is not None:
        for col in separatrix.p.T:
            ax.plot(separatrix.s, col, color="c", lw=1)
    if p_c is not None:
        ax.axhline(p_c, color="r", lw=1)
        ax.axhline(-p_c, color="r", lw=1)
    ax.set(xlim=(0, 1), ylim=(-1, 1), xlabel="s", ylabel="p = sin chi", title=title)
    _save(fig, path)


def husimi_svg(h, path, overlay=None, separatrix=None, p_c=None, title=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.imshow(h.weights.T, origin="lower", extent=(0, 1, -1, 1), aspect="auto", cmap="gray_r")
    if overlay is not None:
        ax.plot(overlay[:, 0], overlay[:, 1], ",", color="b", alpha=0.4)
    if separatrix is not None:
        for col in separatrix.p.T:
            ax.plot(separatrix.s, col, color="c", lw=1)
    if p_c is not None:
        ax.axhline(p_c, color="r", lw=1)
        ax.axhline(-p_c, color="r", lw=1)
    ax.set(xlim=(0, 1), ylim=(-1, 1), xlabel="s", ylabel="p", title=title)
    _save(fig, path)


def lines_svg(series, path, xlabel="e", ylabel="", title="", logy=False):
    """``series`` is a list of ``(x, y, label)``."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for x, y, lab in series:
        ax.plot(x, y, marker=".", lw=1, label=lab)
    if logy:
        ax.set_yscale("log")
    ax.set(xlabel=xlabel, ylabel=ylabel, title=title)
    if series:
        ax.legend(fontsize=6)
    _save(fig, path)


def pair_overview_svg(comparisons, path):
    fig, axes = plt.subplots(3, 1, figsize=(6, 9), sharex=True)
    for c in comparisons:
        lab = " / ".join(f"({x.m},{x.l})" for x in c.labels)
        axes[0].plot(c.e_grid, c.delta_se, marker=".", lw=1, label=lab)
        axes[1].plot(c.e_grid, c.d_b, marker=".", lw=1, label=lab)
        axes[2].semilogy(c.e_grid, c.q_j, lw=1)
        axes[2].semilogy(c.e_grid, c.q_k, lw=1, ls="--")
    axes[0].set_ylabel("|Delta S_e|")
    axes[1].set_ylabel("D_B")
    axes[2].set_ylabel("Q")
    axes[2].set_xlabel("e")
    if comparisons:
        axes[0].legend(fontsize=6)
    _save(fig, path)
