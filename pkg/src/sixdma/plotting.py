"""Figure rendering for the report paths (written next to the CSV outputs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SCHEME_STYLE = {
    "offline": dict(color="tab:blue", marker="o"),
    "online": dict(color="tab:orange", marker="s"),
    "fpa": dict(color="tab:gray", marker="^"),
    "circular": dict(color="tab:green", marker="v"),
    "rotations": dict(color="tab:red", marker="d"),
}

_AXIS_LABEL = {
    "power": "transmit power per user (W)",
    "mu": "average number of users",
    "xi": "proportion of regular users",
    "n_positions": "number of discrete positions",
    "n_rotations": "number of discrete rotations",
}


def plot_sweep(rows, path, config_hash: str = "") -> None:
    """Mean capacity vs the swept parameter, one line per scheme."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    schemes = sorted({r.scheme for r in rows}, key=lambda s: list(_SCHEME_STYLE).index(s) if s in _SCHEME_STYLE else 99)
    axis = rows[0].sweep_axis if rows else ""
    for scheme in schemes:
        sub = sorted((r for r in rows if r.scheme == scheme), key=lambda r: r.sweep_value)
        x = [r.sweep_value for r in sub]
        y = [r.mean_capacity for r in sub]
        err = [r.std_capacity / np.sqrt(max(r.n_seeds, 1)) for r in sub]
        style = _SCHEME_STYLE.get(scheme, {})
        ax.errorbar(x, y, yerr=err, label=scheme, capsize=3, **style)
    ax.set_xlabel(_AXIS_LABEL.get(axis, axis))
    ax.set_ylabel("average network capacity (bits/s/Hz)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": f"config={config_hash}"})
    plt.close(fig)


def plot_offline_trace(result, path, config_hash: str = "") -> None:
    """Relaxed objective per iteration of the winning restart."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(range(len(result.relaxed_trace)), result.relaxed_trace, marker="o")
    ax.axhline(result.rounded_objective, color="tab:red", linestyle="--",
               label=f"rounded = {result.rounded_objective:.3f}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("relaxed objective (bits/s/Hz)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": f"config={config_hash}"})
    plt.close(fig)


def plot_codebook(book, path, state=None, config_hash: str = "") -> None:
    """3D scatter of candidate positions with outward normals; optionally
    highlights a selected pose set."""
    fig = plt.figure(figsize=(6.0, 5.0))
    ax = fig.add_subplot(111, projection="3d")
    pts = book.positions
    ax.scatter(pts[:, 0], pts[:, 1], pts[:, 2], s=18, alpha=0.6, label="positions")
    scale = 0.15 * float(np.ptp(pts)) if len(pts) > 1 else 0.1
    normals = book.normals[:, 0, :]
    ax.quiver(
        pts[:, 0], pts[:, 1], pts[:, 2],
        normals[:, 0], normals[:, 1], normals[:, 2],
        length=scale, color="tab:gray", alpha=0.4, linewidth=0.7,
    )
    if state is not None:
        sel = pts[state.positions]
        sel_n = book.normals[state.positions, state.rotations]
        ax.scatter(sel[:, 0], sel[:, 1], sel[:, 2], s=60, color="tab:red",
                   label="selected")
        ax.quiver(
            sel[:, 0], sel[:, 1], sel[:, 2],
            sel_n[:, 0], sel_n[:, 1], sel_n[:, 2],
            length=1.8 * scale, color="tab:red", linewidth=1.5,
        )
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_zlabel("z (m)")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": f"config={config_hash}"})
    plt.close(fig)


def plot_csm_table(table, path, config_hash: str = "") -> None:
    """Heatmap of the conditional sample means over (position, rotation)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    means = table.means
    im = ax.imshow(means.T, aspect="auto", origin="lower", cmap="viridis")
    ax.set_xlabel("position index")
    ax.set_ylabel("rotation index")
    fig.colorbar(im, ax=ax, label="conditional mean sum-rate (bits/s/Hz)")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": f"config={config_hash}"})
    plt.close(fig)
