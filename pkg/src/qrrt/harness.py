"""Seeded experiment runner and CSV artifacts.

Every artifact is a plain CSV with a fixed header and floats printed with
17 significant digits, so reruns with the same config are byte-identical.
Wall-clock timing is measured but kept out of the deterministic files; it
goes to run_meta.txt instead, and the per-episode wall_ms column is NaN.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .config import ExperimentConfig, emit_config
from .planner import PlannerResult, RunRecord, TrajStep, baseline_plan, qrrt_plan

EPISODE_COLUMNS = [
    "episode",
    "iteration",
    "tree_size",
    "best_return",
    "greedy_return",
    "greedy_success",
    "value_loss",
    "policy_loss",
    "wall_ms",
]

SUMMARY_COLUMNS = ["episode", "n_seeds", "median_best_return", "q1_best_return", "q3_best_return"]


def _fmt(v: float) -> str:
    return "%.17g" % float(v)


def write_episodes_csv(path, records: list[RunRecord]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EPISODE_COLUMNS)
        for r in records:
            w.writerow(
                [
                    r.episode,
                    r.iteration,
                    r.tree_size,
                    _fmt(r.best_return),
                    _fmt(r.greedy_return),
                    int(r.greedy_success),
                    _fmt(r.value_loss),
                    _fmt(r.policy_loss),
                    _fmt(r.wall_ms),
                ]
            )


def read_episodes_csv(path) -> list[RunRecord]:
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != EPISODE_COLUMNS:
        raise ValueError(f"{path}: bad episode CSV header {rows[0] if rows else '<empty>'}")
    records = []
    for row in rows[1:]:
        records.append(
            RunRecord(
                episode=int(row[0]),
                iteration=int(row[1]),
                tree_size=int(row[2]),
                best_return=float(row[3]),
                greedy_return=float(row[4]),
                greedy_success=bool(int(row[5])),
                value_loss=float(row[6]),
                policy_loss=float(row[7]),
                wall_ms=float(row[8]),
            )
        )
    return records


def trajectory_columns(state_dim: int, action_dim: int) -> list[str]:
    return (
        ["step"]
        + [f"s{i}" for i in range(state_dim)]
        + [f"a{i}" for i in range(action_dim)]
        + ["trans_cost"]
    )


def write_trajectory_csv(path, steps: list[TrajStep]) -> None:
    if not steps:
        raise ValueError("empty trajectory")
    state_dim = steps[0].state.shape[0]
    action_dim = next((s.action.shape[0] for s in steps if s.action is not None), 0)
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trajectory_columns(state_dim, action_dim))
        for i, s in enumerate(steps):
            action = s.action if s.action is not None else [math.nan] * action_dim
            w.writerow([i] + [_fmt(x) for x in s.state] + [_fmt(x) for x in action] + [_fmt(s.trans_cost)])


def read_trajectory_csv(path):
    """Returns (states, actions, trans_costs); row 0 actions are NaN."""
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    state_dim = sum(1 for h in header if h.startswith("s") and h[1:].isdigit())
    action_dim = sum(1 for h in header if h.startswith("a") and h[1:].isdigit())
    if header != trajectory_columns(state_dim, action_dim):
        raise ValueError(f"{path}: bad trajectory CSV header")
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    states = data[:, 1 : 1 + state_dim]
    actions = data[:, 1 + state_dim : 1 + state_dim + action_dim]
    costs = data[:, -1]
    return states, actions, costs


def write_tree_csv(path, tree) -> None:
    state_dim = tree.state_dim
    action_dim = tree.action_dim or 0
    header = (
        ["id", "parent", "sample_type", "trans_cost"]
        + [f"s{i}" for i in range(state_dim)]
        + [f"a{i}" for i in range(action_dim)]
    )
    states = tree.states
    parents = tree.parents
    costs = tree.trans_costs
    actions = tree.actions if action_dim else None
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(len(tree)):
            row = [i, int(parents[i]), tree.sample_types[i].value, _fmt(costs[i])]
            row += [_fmt(x) for x in states[i]]
            if actions is not None:
                row += [_fmt(x) for x in actions[i]]
            w.writerow(row)


@dataclass
class SummaryStats:
    episodes: np.ndarray
    n_seeds: np.ndarray
    median_best_return: np.ndarray
    q1_best_return: np.ndarray
    q3_best_return: np.ndarray
    first_solution_iteration: float
    final_over_first_return: float


def summarize(per_seed_records: list[list[RunRecord]]) -> SummaryStats:
    """Per-episode cross-seed quartiles of the running best return."""
    completed = [recs for recs in per_seed_records if recs]
    if not completed:
        return SummaryStats(
            np.empty(0, dtype=int), np.empty(0, dtype=int),
            np.empty(0), np.empty(0), np.empty(0),
            float("nan"), float("nan"),
        )
    horizon = max(len(recs) for recs in completed)
    episodes = np.arange(horizon)
    med = np.full(horizon, np.nan)
    q1 = np.full(horizon, np.nan)
    q3 = np.full(horizon, np.nan)
    n = np.zeros(horizon, dtype=int)
    for e in range(horizon):
        vals = [recs[e].best_return for recs in completed if len(recs) > e]
        n[e] = len(vals)
        med[e] = float(np.median(vals))
        q1[e] = float(np.percentile(vals, 25))
        q3[e] = float(np.percentile(vals, 75))
    first_iter = float(np.median([recs[0].iteration for recs in completed]))
    ratio = float(med[-1] / med[0]) if med[0] != 0 else float("nan")
    return SummaryStats(episodes, n, med, q1, q3, first_iter, ratio)


def write_summary_csv(path, stats: SummaryStats) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for i, e in enumerate(stats.episodes):
            w.writerow(
                [
                    int(e),
                    int(stats.n_seeds[i]),
                    _fmt(stats.median_best_return[i]),
                    _fmt(stats.q1_best_return[i]),
                    _fmt(stats.q3_best_return[i]),
                ]
            )


def read_summary_csv(path):
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != SUMMARY_COLUMNS:
        raise ValueError(f"{path}: bad summary CSV header")
    data = [
        (int(r[0]), int(r[1]), float(r[2]), float(r[3]), float(r[4])) for r in rows[1:]
    ]
    return data


@dataclass
class SeedOutcome:
    seed: int
    directory: Path
    n_episodes: int
    iterations: int
    best_return: float


def _run_one_seed(args) -> tuple[int, PlannerResult]:
    planner_cfg, seed, baseline = args
    cfg = replace(planner_cfg, seed=seed)
    try:
        result = baseline_plan(cfg) if baseline else qrrt_plan(cfg)
    except Exception as exc:
        raise RuntimeError(f"seed {seed}: planner run failed: {exc}") from exc
    return seed, result


def run_experiment(cfg: ExperimentConfig, baseline: bool = False) -> tuple[SummaryStats, list[SeedOutcome]]:
    """Run the planner for every seed and write all artifacts.

    Layout: <outputDir>/effective_config.cfg, summary.csv, run_meta.txt and
    one seed_<n>/ directory per seed with episodes.csv plus trajectory,
    tree, and network files as configured.
    """
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    emit_config(cfg, out / "effective_config.cfg")

    jobs = [(cfg.planner, seed, baseline) for seed in cfg.seeds]
    t0 = time.perf_counter()
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_one_seed, jobs))
    else:
        results = [_run_one_seed(j) for j in jobs]
    elapsed = time.perf_counter() - t0

    outcomes = []
    per_seed_records = []
    for seed, result in results:
        seed_dir = out / f"seed_{seed}"
        seed_dir.mkdir(parents=True, exist_ok=True)
        write_episodes_csv(seed_dir / "episodes.csv", result.episode_records)
        if result.best_steps:
            write_trajectory_csv(seed_dir / "best_trajectory.csv", result.best_steps)
        if result.first_solution_steps:
            write_trajectory_csv(seed_dir / "first_trajectory.csv", result.first_solution_steps)
        if cfg.emit_tree_dump:
            write_tree_csv(seed_dir / "tree.csv", result.tree)
        if cfg.emit_checkpoints and result.value_net is not None:
            result.value_net.mlp.save(seed_dir / "value_net.txt")
            result.policy_net.mlp.save(seed_dir / "policy_net.txt")
        per_seed_records.append(result.episode_records)
        outcomes.append(
            SeedOutcome(
                seed=seed,
                directory=seed_dir,
                n_episodes=len(result.episode_records),
                iterations=result.iterations,
                best_return=result.best_return,
            )
        )

    stats = summarize(per_seed_records)
    write_summary_csv(out / "summary.csv", stats)
    meta = [
        f"label {cfg.label}",
        f"mode {'baseline' if baseline else 'qrrt'}",
        f"seeds {','.join(str(s) for s in cfg.seeds)}",
        f"wall_seconds_total {elapsed:.3f}",
    ]
    (out / "run_meta.txt").write_text("\n".join(meta) + "\n", encoding="ascii")
    return stats, outcomes


@dataclass
class Comparison:
    episodes: np.ndarray
    median_a: np.ndarray
    median_b: np.ndarray
    first_a_dominates: Optional[int]
    first_b_dominates: Optional[int]


def compare_runs(dir_a, dir_b) -> Comparison:
    """Paired per-episode medians of two runs with equal episode horizons."""
    rows_a = read_summary_csv(Path(dir_a) / "summary.csv")
    rows_b = read_summary_csv(Path(dir_b) / "summary.csv")
    eps_a = [r[0] for r in rows_a]
    eps_b = [r[0] for r in rows_b]
    if eps_a != eps_b:
        raise ValueError(
            f"episode horizons differ: {len(eps_a)} episodes in {dir_a}, {len(eps_b)} in {dir_b}"
        )
    med_a = np.array([r[2] for r in rows_a])
    med_b = np.array([r[2] for r in rows_b])
    first_a = next((int(e) for e, a, b in zip(eps_a, med_a, med_b) if a > b), None)
    first_b = next((int(e) for e, a, b in zip(eps_a, med_a, med_b) if b > a), None)
    return Comparison(np.array(eps_a), med_a, med_b, first_a, first_b)


def comparison_lines(cmp: Comparison, label_a: str = "A", label_b: str = "B") -> list[str]:
    lines = [f"episode,median_{label_a},median_{label_b},difference"]
    for e, a, b in zip(cmp.episodes, cmp.median_a, cmp.median_b):
        lines.append(f"{int(e)},{_fmt(a)},{_fmt(b)},{_fmt(a - b)}")
    lines.append(f"# first episode where {label_a} dominates: {cmp.first_a_dominates}")
    lines.append(f"# first episode where {label_b} dominates: {cmp.first_b_dominates}")
    return lines
