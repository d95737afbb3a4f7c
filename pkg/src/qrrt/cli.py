"""Command-line experiment runner.

Subcommands: plan (full planner), baseline (goal-biased tree search only),
compare (paired medians of two finished runs), eval-greedy (re-run the
greedy rollout from saved networks). Exit codes: 0 success, 1 usage or
config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import (
    ConfigError,
    build_experiment,
    parse_config_text,
    preset_path,
)
from .harness import compare_runs, comparison_lines, run_experiment, write_trajectory_csv
from .learning import evaluate_greedy
from .mlp import AdaptiveNet, Mlp, TrainSettings
from .planner import TrajStep
from .systems import make_system


def _add_run_options(sub):
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="path to a key=value config file")
    group.add_argument("--preset", help="packaged preset name, e.g. diffdrive-paper")
    sub.add_argument("--seed", type=int, help="run a single seed instead of the configured list")
    sub.add_argument("--out", help="output directory (overrides outputDir)")
    sub.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key; repeatable",
    )


def _load_run_config(args):
    path = preset_path(args.preset) if args.preset else Path(args.config)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values = parse_config_text(path.read_text(encoding="utf-8"), str(path))
    for item in args.override:
        if "=" not in item:
            raise ConfigError(f"--override expects KEY=VALUE, got {item!r}")
        values.update(parse_config_text(item, "<override>"))
    if args.seed is not None:
        values["seeds"] = [args.seed]
    if args.out is not None:
        values["outputDir"] = args.out
    return build_experiment(values)


def _cmd_run(args, baseline: bool) -> int:
    cfg = _load_run_config(args)
    stats, outcomes = run_experiment(cfg, baseline=baseline)
    for oc in outcomes:
        print(
            f"seed {oc.seed}: {oc.n_episodes} episodes, {oc.iterations} iterations, "
            f"best return {oc.best_return:.6g}"
        )
    if stats.episodes.size:
        print(f"median final best return: {stats.median_best_return[-1]:.6g}")
    else:
        print("no episodes completed")
    print(f"artifacts in {cfg.output_dir}")
    return 0


def _cmd_compare(args) -> int:
    cmp = compare_runs(args.dir_a, args.dir_b)
    lines = comparison_lines(cmp, args.label_a, args.label_b)
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="ascii")
        print(f"comparison written to {args.out}")
    else:
        for line in lines:
            print(line)
    return 0


def _cmd_eval_greedy(args) -> int:
    cfg = _load_run_config(args)
    system = make_system(cfg.planner.system_name, **cfg.planner.system_params)
    Mlp.load(args.checkpoint[0])  # validate the value checkpoint too
    policy = AdaptiveNet(Mlp.load(args.checkpoint[1]), TrainSettings(), replay=False)
    rollout = evaluate_greedy(policy, system, cfg.planner.learn, cfg.planner.greedy_rollout_steps)
    status = "reached goal" if rollout.success else "budget exhausted"
    print(f"greedy rollout: {status} after {len(rollout.actions)} steps")
    if rollout.success:
        print(f"discounted return: {rollout.total_return:.6g}")
    if args.traj_out:
        steps = [TrajStep(rollout.states[0], None, 0.0)]
        steps += [
            TrajStep(s, a, r)
            for s, a, r in zip(rollout.states[1:], rollout.actions, rollout.rewards)
        ]
        write_trajectory_csv(args.traj_out, steps)
        print(f"trajectory written to {args.traj_out}")
    # A failed rollout is a normal outcome, not a runtime error.
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrrt", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("plan", help="run the quality-biased planner")
    _add_run_options(sub)

    sub = subs.add_parser("baseline", help="run the goal-biased baseline")
    _add_run_options(sub)

    sub = subs.add_parser("compare", help="compare two finished run directories")
    sub.add_argument("dir_a")
    sub.add_argument("dir_b")
    sub.add_argument("--label-a", default="A")
    sub.add_argument("--label-b", default="B")
    sub.add_argument("--out", help="write the comparison CSV here instead of stdout")

    sub = subs.add_parser("eval-greedy", help="greedy rollout from saved networks")
    sub.add_argument(
        "--checkpoint",
        nargs=2,
        required=True,
        metavar=("VALUE_NET", "POLICY_NET"),
        help="value and policy checkpoint files",
    )
    sub.add_argument("--traj-out", help="optional trajectory CSV output path")
    _add_run_options(sub)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if args.command == "plan":
            return _cmd_run(args, baseline=False)
        if args.command == "baseline":
            return _cmd_run(args, baseline=True)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "eval-greedy":
            return _cmd_eval_greedy(args)
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
