"""Optional figures for CLI runs.  Rendering never touches the data files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_populations(table, path, title=""):
    """Site occupation (up plus down) versus step as an image."""
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(table, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xlabel("site x")
    ax.set_ylabel("step")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label="P(x)")
    return _save(fig, path)


def plot_bands(k, eps, n, path, title=""):
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax0.plot(k / np.pi, eps / np.pi, "k-")
    ax0.plot(k / np.pi, -eps / np.pi, "k--")
    ax0.set_xlabel(r"$k/\pi$")
    ax0.set_ylabel(r"$\epsilon/\pi$")
    for i, lbl in enumerate("xyz"):
        ax1.plot(k / np.pi, n[:, i], label=f"$n_{lbl}$")
    ax1.set_xlabel(r"$k/\pi$")
    ax1.legend(loc=0, frameon=False)
    fig.suptitle(title)
    return _save(fig, path)


def plot_grid(grid, path, title=""):
    spec = grid.spec
    fig, ax = plt.subplots(figsize=(5, 4))
    vmax = np.abs(grid.values).max() or 1.0
    cmap, vmin = ("RdBu_r", -vmax) if grid.kind == "W" else ("viridis", 0.0)
    im = ax.imshow(
        grid.values,
        origin="lower",
        extent=(spec.re_min, spec.re_max, spec.im_min, spec.im_max),
        cmap=cmap,
        vmin=vmin,
        vmax=vmax,
    )
    ax.set_xlabel(r"Re $\alpha$")
    ax.set_ylabel(r"Im $\alpha$")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label=grid.kind)
    return _save(fig, path)


def plot_refocus(steps, fidelity, control, path, title=""):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(steps, fidelity, "o-", label="Bloch")
    ax.plot(steps, control, "s--", label="no Bloch")
    ax.set_xlabel("step")
    ax.set_ylabel("fidelity to initial state")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc=0, frameon=False)
    ax.set_title(title)
    return _save(fig, path)
