"""Overlay figures for suite outputs, rendered with matplotlib to SVG.

The CSV files remain the ground truth; these plots exist to eyeball a
sweep in one glance (output on top, controller output below).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def overlay_plot(title, labelled_trajectories, path, saturation_limit=None):
    """Write one two-panel SVG: y(t) per sweep value, u(t) below.

    When a saturation limit is active the raw controller output is drawn
    dashed next to the limited one.
    """
    fig, (ax_y, ax_u) = plt.subplots(2, 1, figsize=(8.0, 6.0), sharex=True)
    first = True
    for label, traj in labelled_trajectories:
        line, = ax_y.plot(traj.t, traj.y_clean, linewidth=1.1, label=str(label))
        ax_u.plot(traj.t, traj.u_lim, linewidth=1.1, color=line.get_color())
        if saturation_limit is not None:
            ax_u.plot(traj.t, traj.u_raw, linewidth=0.8, linestyle="--",
                      color=line.get_color(), alpha=0.7)
        if first:
            ax_y.plot(traj.t, traj.r, linewidth=0.9, linestyle=":",
                      color="black", label="r")
            first = False
    if saturation_limit is not None:
        for level in (saturation_limit, -saturation_limit):
            ax_u.axhline(level, color="grey", linewidth=0.6, linestyle=":")
    ax_y.set_ylabel("y")
    ax_u.set_ylabel("u")
    ax_u.set_xlabel("time (s)")
    ax_y.grid(True, alpha=0.3)
    ax_u.grid(True, alpha=0.3)
    ax_y.set_title(title)
    ax_y.legend(loc="best", fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
