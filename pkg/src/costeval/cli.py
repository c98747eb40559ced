"""Command-line interface.

Subcommands:
  run    full comparative experiment, aggregates over seeds
  scale  learning curves over training-set sizes
  hist   signed-cost histogram of the configured dataset
  gen    emit the configured synthetic dataset as CSV
  eval   score an external predictions file against the configured dataset
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .data import save_csv
from .harness import (
    ExperimentConfig,
    emit_reports,
    load_config,
    load_source_dataset,
    read_predictions,
    render_aggregate_text,
    run_experiment,
    run_scaling,
)
from .metrics import delta_histogram, evaluate


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="path to the config file")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument("--seed", type=int, help="base seed (overrides seeds.base)")
    parser.add_argument(
        "--format", help="comma list of csv,text,json (overrides output.formats)"
    )


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    mapping = load_config(args.config)
    if args.out is not None:
        mapping["output.dir"] = args.out
    if args.seed is not None:
        mapping["seeds.base"] = str(args.seed)
    if args.format is not None:
        mapping["output.formats"] = args.format
    if getattr(args, "bins", None) is not None:
        mapping["hist.bins"] = str(args.bins)
    return ExperimentConfig.from_mapping(mapping)


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    records, aggregates = run_experiment(cfg)
    histogram = delta_histogram(load_source_dataset(cfg), cfg.hist_bins)
    paths = emit_reports(
        records,
        aggregates,
        cfg.out_dir,
        cfg.formats,
        cfg.to_mapping(),
        histogram=histogram,
    )
    print(render_aggregate_text(aggregates), end="")
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return 0


def _cmd_scale(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    records, table = run_scaling(cfg)
    paths = emit_reports(
        records, [], cfg.out_dir, cfg.formats, cfg.to_mapping(), scaling=table
    )
    for size, method, agg in table:
        ratio = f"{agg.ratio:.2f}" if agg.ratio is not None else "-"
        print(
            f"N={size} {method}: nec={100 * agg.nec.mean:.2f}% "
            f"error={100 * agg.error_rate.mean:.2f}% ratio={ratio}"
        )
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return 0


def _cmd_hist(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    dataset = load_source_dataset(cfg)
    histogram = delta_histogram(dataset, cfg.hist_bins)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["bin_low,bin_high,count"]
    for low, high, count in histogram:
        lines.append(f"{low!r},{high!r},{count}")
    path = out / "delta_hist.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    if cfg.source != "synthetic":
        print("gen requires data.source = synthetic", file=sys.stderr)
        return 2
    dataset = load_source_dataset(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "synthetic.csv"
    save_csv(dataset, path)
    print(f"wrote {path}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    dataset = load_source_dataset(cfg)
    score_kind = None if args.score_kind == "none" else args.score_kind
    preds = read_predictions(args.preds, len(dataset), score_kind=score_kind)
    report = evaluate(dataset, preds)
    print(f"n {report.n}")
    print(f"nec {report.nec!r}")
    print(f"error_rate {report.error_rate!r}")
    print(f"ratio {report.ratio!r}" if report.ratio is not None else "ratio undefined")
    if report.delta_mae is not None:
        print(f"delta_mae {report.delta_mae!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="costeval",
        description="Cost-sensitive classifier evaluation and training harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the comparative experiment")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_scale = sub.add_parser("scale", help="learning curves over train sizes")
    _add_common(p_scale)
    p_scale.set_defaults(func=_cmd_scale)

    p_hist = sub.add_parser("hist", help="signed-cost histogram")
    _add_common(p_hist)
    p_hist.add_argument("--bins", type=int, help="histogram bin count")
    p_hist.set_defaults(func=_cmd_hist)

    p_gen = sub.add_parser("gen", help="emit the synthetic dataset as CSV")
    _add_common(p_gen)
    p_gen.set_defaults(func=_cmd_gen)

    p_eval = sub.add_parser("eval", help="score an external predictions file")
    _add_common(p_eval)
    p_eval.add_argument("--preds", required=True, help="predictions CSV path")
    p_eval.add_argument(
        "--score-kind",
        choices=("none", "probability", "delta"),
        default="none",
        help="how to interpret the optional score column",
    )
    p_eval.set_defaults(func=_cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
