"""Strict readers for the planner's CSV artifacts.

This package talks to the planner only through these files; headers must
match the documented schemas exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

SUMMARY_COLUMNS = ["episode", "n_seeds", "median_best_return", "q1_best_return", "q3_best_return"]


def trajectory_columns(state_dim: int, action_dim: int) -> list[str]:
    return (
        ["step"]
        + [f"s{i}" for i in range(state_dim)]
        + [f"a{i}" for i in range(action_dim)]
        + ["trans_cost"]
    )


def read_trajectory(path):
    """Trajectory CSV -> (states, actions, trans_costs) arrays."""
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trajectory file")
    header = rows[0]
    state_dim = sum(1 for h in header if h.startswith("s") and h[1:].isdigit())
    action_dim = sum(1 for h in header if h.startswith("a") and h[1:].isdigit())
    if header != trajectory_columns(state_dim, action_dim):
        raise ValueError(f"{path}: unexpected trajectory header {header}")
    if len(rows) < 2:
        raise ValueError(f"{path}: trajectory has no steps")
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    states = data[:, 1 : 1 + state_dim]
    actions = data[:, 1 + state_dim : 1 + state_dim + action_dim]
    return states, actions, data[:, -1]


def read_summary(path):
    """Summary CSV -> (episodes, medians, q1, q3) arrays."""
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != SUMMARY_COLUMNS:
        raise ValueError(f"{path}: unexpected summary header {rows[0] if rows else '<empty>'}")
    if len(rows) < 2:
        raise ValueError(f"{path}: summary has no episodes")
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    return data[:, 0].astype(int), data[:, 2], data[:, 3], data[:, 4]


def default_labels(paths, labels):
    if labels:
        if len(labels) != len(paths):
            raise ValueError(f"{len(labels)} labels for {len(paths)} inputs")
        return list(labels)
    return [Path(p).stem if len(paths) > 1 else Path(p).parent.name or Path(p).stem for p in paths]
