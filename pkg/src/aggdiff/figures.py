"""Static figure rendering for run outputs.

Figures are written as PNG files next to the delimited outputs; nothing is
shown interactively. Rendering is deterministic for a fixed matplotlib
version, so replayed runs reproduce the image bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)
import numpy as np  # noqa: E402

__all__ = [
    "save_run_figures",
    "save_characteristics_figure",
    "save_sweep_figure",
    "save_convergence_figure",
]

_DPI = 110


def _finish(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_run_figures(fig_dir: Path, nodes, u0, u_final, snapshots, records) -> list[Path]:
    """Solution profiles and diagnostic time series for one run."""
    fig_dir.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(nodes, u0, label="t = 0", color="0.45", lw=1.2)
    for t_req, vals in snapshots:
        ax.plot(nodes, vals, lw=1.0, label=f"t = {t_req:g}")
    ax.plot(nodes, u_final, label="final", color="C3", lw=1.6)
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(loc="best", fontsize=8)
    path = fig_dir / "solution.png"
    _finish(fig, path)
    written.append(path)

    t = np.array([r.t for r in records])
    fig, axes = plt.subplots(2, 2, figsize=(9.0, 6.0), sharex=True)
    ax = axes[0, 0]
    for name in ("norm_1", "norm_2", "norm_inf"):
        ax.plot(t, [getattr(r, name) for r in records], label=name)
    ax.set_ylabel("norms")
    ax.legend(fontsize=8)
    ax = axes[0, 1]
    ax.semilogy(t, np.maximum([r.grad_inf for r in records], 1e-300), color="C3")
    ax.set_ylabel("max |du/dx|")
    ax = axes[1, 0]
    mass0 = records[0].mass
    ax.plot(t, [r.mass - mass0 for r in records], color="C2")
    ax.set_ylabel("mass drift")
    ax.set_xlabel("t")
    ax = axes[1, 1]
    ax.plot(t, [r.min_u for r in records], color="C4")
    ax.set_ylabel("min u")
    ax.set_xlabel("t")
    path = fig_dir / "diagnostics.png"
    _finish(fig, path)
    written.append(path)
    return written


def save_characteristics_figure(fig_dir: Path, history) -> Path:
    """Particle fan: position of every tracked characteristic against time."""
    fig_dir.mkdir(parents=True, exist_ok=True)
    t = np.array([snap[0] for snap in history])
    pos = np.vstack([snap[1] for snap in history])
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    for k in range(pos.shape[1]):
        ax.plot(t, pos[:, k], lw=0.6, color="C0", alpha=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("X(t, alpha)")
    path = fig_dir / "characteristics.png"
    _finish(fig, path)
    return path


def save_sweep_figure(fig_dir: Path, eps_pairs, distances) -> Path:
    """Regularization-distance decay: ||u_eps - u_eps/2||_2 against eps."""
    fig_dir.mkdir(parents=True, exist_ok=True)
    eps_hi = [p[0] for p in eps_pairs]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(eps_hi, distances, "o-", color="C0")
    ax.set_xlabel("eps")
    ax.set_ylabel("final L2 distance to eps/2 run")
    path = fig_dir / "eps_sweep.png"
    _finish(fig, path)
    return path


def save_convergence_figure(fig_dir: Path, n_list, errors) -> Path:
    """Grid-refinement errors against the fine reference, with a slope-2 guide."""
    fig_dir.mkdir(parents=True, exist_ok=True)
    n = np.asarray(n_list, dtype=float)
    e = np.asarray(errors, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(n, e, "o-", color="C0", label="L2 error vs reference")
    guide = e[0] * (n / n[0]) ** -2.0
    ax.loglog(n, guide, "--", color="0.6", label="slope -2")
    ax.set_xlabel("n_nodes")
    ax.set_ylabel("L2 error")
    ax.legend(fontsize=8)
    path = fig_dir / "convergence.png"
    _finish(fig, path)
    return path
