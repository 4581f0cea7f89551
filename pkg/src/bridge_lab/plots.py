"""Figure rendering for run outputs, file-based only."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from bridge_lab.bridge_stats import PathEnsemble


def render_figures(
    ens: PathEnsemble, scale: float | None, outdir, title: str
) -> dict[str, Path]:
    """Write a spaghetti plot and a midpoint histogram next to the CSV."""
    outdir = Path(outdir)
    paths = {}

    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    shown = min(40, ens.m)
    for r in range(shown):
        ax.plot(ens.grid, ens.matrix[r], lw=0.6, alpha=0.3, color="tab:blue")
    mean = ens.matrix.mean(axis=0)
    sd = ens.matrix.std(axis=0)
    ax.plot(ens.grid, mean, color="black", lw=1.4, label="ensemble mean")
    ax.fill_between(ens.grid, mean - 2 * sd, mean + 2 * sd, alpha=0.15, color="gray")
    ax.set_xlabel("t")
    ax.set_ylabel("path value")
    ax.set_title(f"{title}: {shown} of {ens.m} paths")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    paths["paths_png"] = outdir / "paths.png"
    fig.savefig(paths["paths_png"], dpi=110)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    j = int(np.argmin(np.abs(ens.grid - 0.5)))
    col = ens.matrix[:, j]
    ax.hist(col, bins=40, density=True, alpha=0.55, color="tab:blue")
    if scale and scale > 0:
        sd_mid = scale * 0.5
        if ens.folded:
            xs = np.linspace(0.0, max(col.max(), 3 * sd_mid), 300)
            pdf = (
                2.0
                / (sd_mid * math.sqrt(2 * math.pi))
                * np.exp(-0.5 * (xs / sd_mid) ** 2)
            )
        else:
            lim = max(np.abs(col).max(), 3 * sd_mid)
            xs = np.linspace(-lim, lim, 300)
            pdf = np.exp(-0.5 * (xs / sd_mid) ** 2) / (
                sd_mid * math.sqrt(2 * math.pi)
            )
        ax.plot(xs, pdf, color="black", lw=1.2, label="target marginal")
        ax.legend(fontsize=8)
    ax.set_xlabel(f"value at t={float(ens.grid[j]):g}")
    ax.set_ylabel("density")
    ax.set_title(f"{title}: midpoint marginal")
    fig.tight_layout()
    paths["marginal_png"] = outdir / "marginal.png"
    fig.savefig(paths["marginal_png"], dpi=110)
    plt.close(fig)
    return paths
