"""Learning-curve comparisons from run summaries.

One curve per summary CSV: median best return per episode with the
interquartile band shaded.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .schemas import default_labels, read_summary

FIGSIZE = (8.0, 5.0)
DPI = 150


def build_figure(summary_paths, labels=None, title="Best return per episode"):
    labels = default_labels(summary_paths, labels)
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    lines = []
    for path, label in zip(summary_paths, labels):
        episodes, median, q1, q3 = read_summary(path)
        line = ax.plot(episodes, median, linewidth=1.8, label=label)[0]
        ax.fill_between(episodes, q1, q3, alpha=0.25, color=line.get_color())
        lines.append(line)
    ax.set_xlabel("episode")
    ax.set_ylabel("median best return")
    ax.set_title(title)
    ax.legend(loc="lower right")
    ax.grid(True, alpha=0.3)
    return fig, ax, lines


def render(summary_paths, out_path, labels=None, title="Best return per episode"):
    fig, _, _ = build_figure(summary_paths, labels, title)
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-curves", description="Compare learning curves from run summaries."
    )
    parser.add_argument("--summary", nargs="+", required=True, help="summary CSV files")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--labels", nargs="*", default=None)
    parser.add_argument("--title", default="Best return per episode")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        render(args.summary, args.out, args.labels, args.title)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
