"""Experiment harness: comparative study of cost-aware training methods.

A run takes one dataset source (CSV or synthetic), re-splits it per seed,
trains every configured method on the identical train split, and evaluates
each on the untouched test split. Per-method metrics are aggregated over
seeds into mean +- 95% CI and emitted as plot-ready CSV plus an aligned text
table. Everything is driven by a flat key=value config file; every resolved
default is serialized back into a manifest, which is itself a loadable
config, so reruns are reproducible byte for byte.

Methods:
  standard    cross-entropy on the cost-sign labels, unit weights
  weighted    cross-entropy with per-example weights |delta|, mean-normalized
  p_up        cost-proportional resampling, then standard training
  tdownK      keep the top K% of each class by |delta|, then standard training
  regression  least squares on the signed cost, classify by its sign
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .data import Dataset, SplitSpec, load_csv, split, subsample_train
from .learners import Standardizer, TrainConfig, fit_delta_regression, fit_logistic, predict
from .metrics import MetricReport, Predictions, aggregate, evaluate
from .sampling import p_up_resample, tdown_filter
from .synthetic import SyntheticConfig, generate

CANONICAL_METHODS = (
    "standard",
    "weighted",
    "p_up",
    "tdown30",
    "tdown50",
    "tdown70",
    "regression",
)

FORMATS = ("csv", "text", "json")

# Sub-stream tags for deriving purpose-specific seeds from one run seed.
TAG_SYNTHETIC = 0
TAG_SPLIT = 1
TAG_SAMPLING = 2
TAG_SUBSAMPLE = 3

DEFAULT_CONFIG = {
    "data.source": "synthetic",
    "data.path": "",
    "data.schema": "",
    "data.tau": "",
    "data.midpoint": "",
    "data.orientation": "",
    "data.name": "",
    "synthetic.n": "10000",
    "synthetic.dim": "10",
    "synthetic.weight_norm": "1.0",
    "synthetic.noise_sigma": "0.15",
    "synthetic.seed": "0",
    "split.train": "0.8",
    "split.validation": "0.1",
    "split.test": "0.1",
    "split.stratify": "true",
    "methods": "standard,weighted",
    "seeds.base": "42",
    "seeds.count": "10",
    "train.l2_lambda": "1.0",
    "train.learning_rate": "1.0",
    "train.max_iters": "5000",
    "train.grad_tol": "1e-06",
    "train.weight_normalization": "true",
    "train.standardize": "false",
    "scaling.sizes": "",
    "hist.bins": "20",
    "output.dir": "out",
    "output.formats": "csv,text",
}


def derive_seed(seed: int, tag: int) -> int:
    """Purpose-specific sub-seed so split/sampling/generation streams differ."""
    seq = np.random.SeedSequence([int(seed), int(tag)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def parse_config_text(text: str, origin: str = "<config>") -> dict[str, str]:
    """Parse a flat key=value document; '#' starts a comment line."""
    mapping: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{origin}:{line_no}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ValueError(f"{origin}:{line_no}: empty key")
        if key in mapping:
            raise ValueError(f"{origin}:{line_no}: duplicate key {key!r}")
        mapping[key] = value.strip()
    return mapping


def load_config(path) -> dict[str, str]:
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), origin=str(path))


def _parse_bool(value: str, key: str) -> bool:
    if value == "true":
        return True
    if value == "false":
        return False
    raise ValueError(f"config key {key!r}: expected true/false, got {value!r}")


def _parse_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def validate_method(method: str) -> None:
    if method in ("standard", "weighted", "p_up", "regression"):
        return
    if method.startswith("tdown"):
        try:
            k = int(method[len("tdown"):])
        except ValueError:
            raise ValueError(f"unknown method {method!r}")
        if 1 <= k <= 100:
            return
        raise ValueError(f"method {method!r}: k must be in [1, 100]")
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    source: str
    data_path: str | None
    data_schema: str | None
    data_tau: float | None
    data_midpoint: float | None
    data_orientation: str | None
    data_name: str | None
    synthetic: SyntheticConfig
    split_fractions: tuple[float, float, float]
    stratify: bool
    methods: tuple[str, ...]
    seeds: tuple[int, ...]
    train: TrainConfig
    standardize: bool
    scaling_sizes: tuple[int, ...]
    hist_bins: int
    out_dir: str
    formats: tuple[str, ...]

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "ExperimentConfig":
        merged = dict(DEFAULT_CONFIG)
        for key, value in mapping.items():
            if key.startswith("info."):
                continue
            if key not in DEFAULT_CONFIG:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = value

        source = merged["data.source"]
        if source not in ("synthetic", "csv"):
            raise ValueError("data.source must be 'synthetic' or 'csv'")
        if source == "csv":
            if not merged["data.path"]:
                raise ValueError("data.path required for csv source")
            if not merged["data.schema"]:
                raise ValueError("data.schema required for csv source")

        methods = tuple(_parse_list(merged["methods"]))
        if not methods:
            raise ValueError("methods must be non-empty")
        for m in methods:
            validate_method(m)
        if len(set(methods)) != len(methods):
            raise ValueError("methods must be unique")

        base = int(merged["seeds.base"])
        count = int(merged["seeds.count"])
        if count < 2:
            raise ValueError("seeds.count must be >= 2 for confidence intervals")
        seeds = tuple(range(base, base + count))

        fractions = (
            float(merged["split.train"]),
            float(merged["split.validation"]),
            float(merged["split.test"]),
        )
        train_cfg = TrainConfig(
            l2_lambda=float(merged["train.l2_lambda"]),
            learning_rate=float(merged["train.learning_rate"]),
            max_iters=int(merged["train.max_iters"]),
            grad_tol=float(merged["train.grad_tol"]),
            weight_normalization=_parse_bool(
                merged["train.weight_normalization"], "train.weight_normalization"
            ),
        )
        synth = SyntheticConfig(
            n=int(merged["synthetic.n"]),
            dim=int(merged["synthetic.dim"]),
            weight_norm=float(merged["synthetic.weight_norm"]),
            noise_sigma=float(merged["synthetic.noise_sigma"]),
            seed=int(merged["synthetic.seed"]),
        )
        sizes = tuple(int(s) for s in _parse_list(merged["scaling.sizes"]))
        formats = tuple(_parse_list(merged["output.formats"]))
        if not formats:
            raise ValueError("output.formats must be non-empty")
        for fmt in formats:
            if fmt not in FORMATS:
                raise ValueError(f"unknown output format {fmt!r}")
        hist_bins = int(merged["hist.bins"])
        if hist_bins < 1:
            raise ValueError("hist.bins must be >= 1")

        return cls(
            source=source,
            data_path=merged["data.path"] or None,
            data_schema=merged["data.schema"] or None,
            data_tau=float(merged["data.tau"]) if merged["data.tau"] else None,
            data_midpoint=(
                float(merged["data.midpoint"]) if merged["data.midpoint"] else None
            ),
            data_orientation=merged["data.orientation"] or None,
            data_name=merged["data.name"] or None,
            synthetic=synth,
            split_fractions=fractions,
            stratify=_parse_bool(merged["split.stratify"], "split.stratify"),
            methods=methods,
            seeds=seeds,
            train=train_cfg,
            standardize=_parse_bool(merged["train.standardize"], "train.standardize"),
            scaling_sizes=sizes,
            hist_bins=hist_bins,
            out_dir=merged["output.dir"],
            formats=formats,
        )

    def to_mapping(self) -> dict[str, str]:
        """Every resolved setting, as loadable config text values."""
        return {
            "data.source": self.source,
            "data.path": self.data_path or "",
            "data.schema": self.data_schema or "",
            "data.tau": repr(self.data_tau) if self.data_tau is not None else "",
            "data.midpoint": (
                repr(self.data_midpoint) if self.data_midpoint is not None else ""
            ),
            "data.orientation": self.data_orientation or "",
            "data.name": self.data_name or "",
            "synthetic.n": str(self.synthetic.n),
            "synthetic.dim": str(self.synthetic.dim),
            "synthetic.weight_norm": repr(self.synthetic.weight_norm),
            "synthetic.noise_sigma": repr(self.synthetic.noise_sigma),
            "synthetic.seed": str(self.synthetic.seed),
            "split.train": repr(self.split_fractions[0]),
            "split.validation": repr(self.split_fractions[1]),
            "split.test": repr(self.split_fractions[2]),
            "split.stratify": "true" if self.stratify else "false",
            "methods": ",".join(self.methods),
            "seeds.base": str(self.seeds[0]),
            "seeds.count": str(len(self.seeds)),
            "train.l2_lambda": repr(self.train.l2_lambda),
            "train.learning_rate": repr(self.train.learning_rate),
            "train.max_iters": str(self.train.max_iters),
            "train.grad_tol": repr(self.train.grad_tol),
            "train.weight_normalization": (
                "true" if self.train.weight_normalization else "false"
            ),
            "train.standardize": "true" if self.standardize else "false",
            "scaling.sizes": ",".join(str(s) for s in self.scaling_sizes),
            "hist.bins": str(self.hist_bins),
            "output.dir": self.out_dir,
            "output.formats": ",".join(self.formats),
        }


@dataclass(frozen=True)
class RunRecord:
    """One (method, seed) evaluation plus the config that produced it."""

    method: str
    seed: int
    n_train: int
    report: MetricReport
    config: dict


def load_source_dataset(cfg: ExperimentConfig, synthetic_seed: int | None = None) -> Dataset:
    """The configured dataset; synthetic generation seed may be overridden."""
    if cfg.source == "synthetic":
        scfg = cfg.synthetic
        if synthetic_seed is not None:
            scfg = replace(scfg, seed=synthetic_seed)
        dataset, _ = generate(scfg)
        return dataset
    return load_csv(
        cfg.data_path,
        cfg.data_schema,
        tau=cfg.data_tau,
        midpoint=cfg.data_midpoint,
        orientation=cfg.data_orientation,
        name=cfg.data_name,
    )


def _weighted_weights(train: Dataset) -> np.ndarray:
    weights = np.abs(train.deltas)
    total = float(weights.sum())
    if total <= 0.0:
        raise ValueError("all costs are zero; weighted training is undefined")
    return weights * (len(train) / total)


def run_method(
    method: str,
    train: Dataset,
    test: Dataset,
    train_cfg: TrainConfig,
    seed: int,
    config: dict | None = None,
) -> RunRecord:
    """Train one method and evaluate it on the test split.

    The cost-weighted method rescales its |delta| weights to mean one so the
    L2 pressure matches the standard run; sampling methods transform only the
    train split, never test.
    """
    validate_method(method)
    try:
        if method == "regression":
            model = fit_delta_regression(train, train_cfg)
        else:
            fit_train = train
            if method == "p_up":
                fit_train = p_up_resample(train, derive_seed(seed, TAG_SAMPLING))
            elif method.startswith("tdown"):
                fit_train = tdown_filter(train, int(method[len("tdown"):]))
            if method == "weighted":
                weights = _weighted_weights(fit_train)
            else:
                weights = np.ones(len(fit_train))
            model = fit_logistic(fit_train, weights, train_cfg)

        labels, scores = predict(model, test.features)
        score_kind = "delta" if model.kind == "linear" else "probability"
        preds = Predictions(labels=labels, scores=scores, score_kind=score_kind)
        report = evaluate(test, preds)
    except Exception as exc:
        raise RuntimeError(f"method '{method}' failed on seed {seed}: {exc}") from exc
    return RunRecord(
        method=method,
        seed=seed,
        n_train=len(train),
        report=report,
        config=config if config is not None else {},
    )


def _seed_splits(cfg: ExperimentConfig, base_dataset: Dataset | None, seed: int):
    if cfg.source == "synthetic":
        dataset = load_source_dataset(cfg, synthetic_seed=derive_seed(seed, TAG_SYNTHETIC))
    else:
        dataset = base_dataset
    spec = SplitSpec(
        fractions=cfg.split_fractions,
        seed=derive_seed(seed, TAG_SPLIT),
        stratify_on_sign=cfg.stratify,
    )
    train, validation, test = split(dataset, spec)
    if cfg.standardize:
        std = Standardizer().fit(train)
        train = std.transform(train)
        validation = std.transform(validation)
        test = std.transform(test)
    return train, validation, test


def run_experiment(cfg: ExperimentConfig):
    """Run every method on every seed; returns (records, per-method aggregates).

    Within one seed every method sees the identical train/validation/test
    partition; the validation split is carried but not consumed.
    """
    resolved = cfg.to_mapping()
    base = load_source_dataset(cfg) if cfg.source == "csv" else None
    records: list[RunRecord] = []
    for seed in cfg.seeds:
        train, _validation, test = _seed_splits(cfg, base, seed)
        for method in cfg.methods:
            records.append(
                run_method(method, train, test, cfg.train, seed, config=resolved)
            )
    aggregates = [
        (
            method,
            aggregate([r.report for r in records if r.method == method]),
        )
        for method in cfg.methods
    ]
    return records, aggregates


def run_scaling(cfg: ExperimentConfig):
    """Learning-curve runs over the configured train sizes.

    The test split is fixed across sizes within a seed. Returns (records,
    table rows (n_train, method, AggregateReport)).
    """
    if not cfg.scaling_sizes:
        raise ValueError("scaling.sizes is empty")
    resolved = cfg.to_mapping()
    base = load_source_dataset(cfg) if cfg.source == "csv" else None
    records: list[RunRecord] = []
    for seed in cfg.seeds:
        train, _validation, test = _seed_splits(cfg, base, seed)
        sub_seed = derive_seed(seed, TAG_SUBSAMPLE)
        for size in cfg.scaling_sizes:
            sub = subsample_train(train, size, sub_seed)
            for method in cfg.methods:
                records.append(
                    run_method(method, sub, test, cfg.train, seed, config=resolved)
                )
    table = []
    for size in cfg.scaling_sizes:
        for method in cfg.methods:
            cell = [
                r.report
                for r in records
                if r.method == method and r.n_train == size
            ]
            table.append((size, method, aggregate(cell)))
    return records, table


# ---------------------------------------------------------------------------
# report emission


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def format_percent_ci(ci) -> str:
    """Percent with one decimal, as in '1.8±0.0'."""
    return f"{100.0 * ci.mean:.1f}±{100.0 * ci.half_width:.1f}"


def _aggregate_rows(aggregates):
    rows = []
    for method, agg in aggregates:
        rows.append(
            {
                "method": method,
                "n_seeds": agg.n_seeds,
                "nec_mean": agg.nec.mean,
                "nec_hw": agg.nec.half_width,
                "error_mean": agg.error_rate.mean,
                "error_hw": agg.error_rate.half_width,
                "ratio": agg.ratio,
                "mae_mean": agg.delta_mae.mean if agg.delta_mae else None,
                "mae_hw": agg.delta_mae.half_width if agg.delta_mae else None,
            }
        )
    return rows


def render_aggregate_text(aggregates) -> str:
    """Aligned table: method, NEC %, error %, their ratio, optional MAE."""
    has_mae = any(agg.delta_mae is not None for _, agg in aggregates)
    header = ["method", "NEC%", "Error%", "Err/NEC"]
    if has_mae:
        header.append("MAE")
    body = []
    for method, agg in aggregates:
        row = [
            method,
            format_percent_ci(agg.nec),
            format_percent_ci(agg.error_rate),
            f"{agg.ratio:.2f}" if agg.ratio is not None else "-",
        ]
        if has_mae:
            row.append(
                f"{agg.delta_mae.mean:.3f}±{agg.delta_mae.half_width:.3f}"
                if agg.delta_mae is not None
                else "-"
            )
        body.append(row)
    widths = [
        max(len(header[j]), *(len(row[j]) for row in body))
        for j in range(len(header))
    ]
    lines = ["  ".join(h.ljust(widths[j]) for j, h in enumerate(header)).rstrip()]
    for row in body:
        lines.append(
            "  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip()
        )
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def render_manifest(resolved: dict[str, str]) -> str:
    lines = [f"{key} = {resolved[key]}" for key in sorted(resolved)]
    info = {
        "info.gaussian_transform": "numpy standard_normal (ziggurat)",
        "info.rng": "numpy PCG64",
        "info.seed_derivation": (
            "SeedSequence([seed, tag]); tags: synthetic=0 split=1 sampling=2 subsample=3"
        ),
        "info.tool": f"costeval {__version__}",
    }
    lines += [f"{key} = {value}" for key, value in sorted(info.items())]
    return "\n".join(lines) + "\n"


def emit_reports(
    records,
    aggregates,
    out_dir,
    formats,
    resolved_config: dict[str, str],
    histogram=None,
    scaling=None,
) -> dict[str, Path]:
    """Write run, aggregate, histogram, scaling, and manifest files.

    Output bytes are a pure function of the inputs: floats are serialized
    with shortest round-trip formatting and no timestamps are recorded.
    """
    records = list(records)
    if not records:
        raise ValueError("no run records to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    manifest_path = out / "manifest.cfg"
    _write(manifest_path, render_manifest(resolved_config))
    paths["manifest"] = manifest_path

    run_lines = ["method,seed,n_train,n_test,nec,error_rate,ratio,delta_mae"]
    for r in records:
        rep = r.report
        run_lines.append(
            ",".join(
                [
                    r.method,
                    str(r.seed),
                    str(r.n_train),
                    str(rep.n),
                    _fmt(rep.nec),
                    _fmt(rep.error_rate),
                    _fmt(rep.ratio),
                    _fmt(rep.delta_mae),
                ]
            )
        )
    runs_path = out / "runs.csv"
    _write(runs_path, "\n".join(run_lines) + "\n")
    paths["runs"] = runs_path

    if aggregates:
        rows = _aggregate_rows(aggregates)
        if "csv" in formats:
            lines = [
                "method,n_seeds,nec_mean,nec_hw,error_mean,error_hw,ratio,mae_mean,mae_hw"
            ]
            for row in rows:
                lines.append(
                    ",".join(
                        [
                            row["method"],
                            str(row["n_seeds"]),
                            _fmt(row["nec_mean"]),
                            _fmt(row["nec_hw"]),
                            _fmt(row["error_mean"]),
                            _fmt(row["error_hw"]),
                            _fmt(row["ratio"]),
                            _fmt(row["mae_mean"]),
                            _fmt(row["mae_hw"]),
                        ]
                    )
                )
            path = out / "aggregate.csv"
            _write(path, "\n".join(lines) + "\n")
            paths["aggregate_csv"] = path
        if "text" in formats:
            path = out / "aggregate.txt"
            _write(path, render_aggregate_text(aggregates))
            paths["aggregate_text"] = path
        if "json" in formats:
            path = out / "aggregate.json"
            _write(
                path,
                json.dumps(rows, indent=2, sort_keys=True) + "\n",
            )
            paths["aggregate_json"] = path

    if histogram is not None:
        lines = ["bin_low,bin_high,count"]
        for low, high, count in histogram:
            lines.append(f"{_fmt(low)},{_fmt(high)},{count}")
        path = out / "delta_hist.csv"
        _write(path, "\n".join(lines) + "\n")
        paths["histogram"] = path

    if scaling is not None:
        lines = [
            "n_train,method,n_seeds,nec_mean,nec_hw,error_mean,error_hw,ratio,mae_mean,mae_hw"
        ]
        for size, method, agg in scaling:
            lines.append(
                ",".join(
                    [
                        str(size),
                        method,
                        str(agg.n_seeds),
                        _fmt(agg.nec.mean),
                        _fmt(agg.nec.half_width),
                        _fmt(agg.error_rate.mean),
                        _fmt(agg.error_rate.half_width),
                        _fmt(agg.ratio),
                        _fmt(agg.delta_mae.mean if agg.delta_mae else None),
                        _fmt(agg.delta_mae.half_width if agg.delta_mae else None),
                    ]
                )
            )
        path = out / "scaling.csv"
        _write(path, "\n".join(lines) + "\n")
        paths["scaling"] = path

    return paths


def read_predictions(path, n_expected: int, score_kind: str | None = None) -> Predictions:
    """Read an external predictions CSV: ``index,label[,score]``.

    Indices must cover 0..n-1 exactly once; labels are -1/+1. The score
    column is used only when a score_kind is given.
    """
    path = Path(path)
    display = str(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"{display}:1: empty predictions file")
    header = [c.strip() for c in lines[0].split(",")]
    if header == ["index", "label"]:
        has_score = False
    elif header == ["index", "label", "score"]:
        has_score = True
    else:
        raise ValueError(
            f"{display}:1: header must be 'index,label' or 'index,label,score'"
        )
    labels = np.zeros(n_expected, dtype=np.int64)
    scores = np.zeros(n_expected, dtype=float) if has_score else None
    seen = np.zeros(n_expected, dtype=bool)
    for line_no, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cells = [c.strip() for c in raw.split(",")]
        if len(cells) != len(header):
            raise ValueError(
                f"{display}:{line_no}: expected {len(header)} columns, got {len(cells)}"
            )
        try:
            index = int(cells[0])
            label = int(cells[1])
        except ValueError:
            raise ValueError(f"{display}:{line_no}: bad index or label")
        if not (0 <= index < n_expected):
            raise ValueError(
                f"{display}:{line_no}: index {index} outside 0..{n_expected - 1}"
            )
        if seen[index]:
            raise ValueError(f"{display}:{line_no}: duplicate index {index}")
        if label not in (-1, 1):
            raise ValueError(f"{display}:{line_no}: label must be -1 or +1")
        seen[index] = True
        labels[index] = label
        if has_score:
            try:
                scores[index] = float(cells[2])
            except ValueError:
                raise ValueError(f"{display}:{line_no}: bad score")
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0])
        raise ValueError(f"{display}: missing prediction for index {missing}")
    if score_kind is not None and has_score:
        return Predictions(labels=labels, scores=scores, score_kind=score_kind)
    return Predictions(labels=labels)
