"""Path overlays on the differential-drive cost terrain.

Renders the terrain cost field as a heatmap, the analytic lowest-cost
sinusoid, and one or more trajectories read from planner CSVs.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schemas import default_labels, read_trajectory

FIGSIZE = (8.0, 6.4)
DPI = 150
WORKSPACE = (0.0, 100.0)


def terrain_cost(x, y):
    """Cost field of the terrain experiment; lowest along the sinusoid."""
    return -2.0 * np.abs(20.0 * np.sin(2.0 * np.pi * (x / 100.0)) - y + 50.0) - 1.0


def optimal_curve(xs):
    return 50.0 + 20.0 * np.sin(2.0 * np.pi * xs / 100.0)


def build_figure(traj_paths, labels=None, title="Terrain paths"):
    labels = default_labels(traj_paths, labels)
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    grid = np.linspace(WORKSPACE[0], WORKSPACE[1], 200)
    xs, ys = np.meshgrid(grid, grid)
    mesh = ax.imshow(
        terrain_cost(xs, ys),
        origin="lower",
        extent=(*WORKSPACE, *WORKSPACE),
        cmap="viridis",
        aspect="equal",
    )
    fig.colorbar(mesh, ax=ax, label="terrain cost")

    curve_x = np.linspace(WORKSPACE[0], WORKSPACE[1], 400)
    analytic = ax.plot(
        curve_x, optimal_curve(curve_x), "w--", linewidth=1.5, label="lowest-cost sinusoid"
    )[0]

    path_lines = []
    for path, label in zip(traj_paths, labels):
        states, _, _ = read_trajectory(path)
        line = ax.plot(states[:, 0], states[:, 1], linewidth=1.8, label=label)[0]
        path_lines.append(line)

    ax.set_xlim(*WORKSPACE)
    ax.set_ylim(*WORKSPACE)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    ax.legend(loc="upper right", framealpha=0.9)
    return fig, ax, analytic, path_lines


def render(traj_paths, out_path, labels=None, title="Terrain paths"):
    fig, _, _, _ = build_figure(traj_paths, labels, title)
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-terrain", description="Overlay trajectories on the cost terrain."
    )
    parser.add_argument("--traj", nargs="+", required=True, help="trajectory CSV files")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--labels", nargs="*", default=None)
    parser.add_argument("--title", default="Terrain paths")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        render(args.traj, args.out, args.labels, args.title)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
