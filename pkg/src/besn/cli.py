"""Command-line entry points: generate, train, eval, benchmark.

Every run setting can come from a plain ``key = value`` config file
(--config) and any key can be overridden by the flag of the same name.
Reports are JSON with all wall clocks isolated in a ``timing`` section, so
the ``results`` section of two identical invocations is byte-identical and
can be hashed.

Exit codes: 0 success, 2 usage errors, 3 data/validation errors,
4 numerical failures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import fields
from pathlib import Path

from .config import ConfigError
from .dataset import (
    DatasetError,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    write_dataset,
)
from .model_io import ModelFormatError, load_pipeline, save_pipeline
from .pipeline import (
    DEFAULT_LAMBDA_GRID,
    RunConfig,
    benchmark_directions,
    evaluate_pipeline,
    render_benchmark_table,
    train_pipeline,
)
from .readout import NumericalError

_RUN_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_FILE_KEY_ALIASES = {"lambda": "lam"}


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_lambda_grid(text: str):
    if text.strip().lower() in ("default", "sweep"):
        return DEFAULT_LAMBDA_GRID
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"bad lambda grid {text!r}: {exc}") from exc


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines ('#' starts a comment) into RunConfig kwargs."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values: dict = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        key = _FILE_KEY_ALIASES.get(key, key)
        value = value.strip()
        if key not in _RUN_FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value
    return values


def _coerce(key: str, value):
    if not isinstance(value, str):
        return value
    kind = _RUN_FIELD_TYPES[key]
    if key == "lambda_grid":
        return _parse_lambda_grid(value)
    if kind == "bool":
        return _parse_bool(value)
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    return value


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < explicit command-line flags."""
    settings: dict = {}
    if getattr(args, "config", None):
        settings.update(parse_config_file(args.config))
    for key in _RUN_FIELD_TYPES:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            settings[key] = flag_value
    coerced = {key: _coerce(key, value) for key, value in settings.items()}
    return RunConfig(**coerced)


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value file mirroring the run settings")
    parser.add_argument("--direction", choices=("uni", "bi"))
    parser.add_argument("--units", type=int, help="total state width across directions")
    parser.add_argument("--spectral-radius", dest="spectral_radius", type=float)
    parser.add_argument("--input-scaling", dest="input_scaling", type=float)
    parser.add_argument("--leak-rate", dest="leak_rate", type=float)
    parser.add_argument("--density", type=float)
    parser.add_argument("--bias-scale", dest="bias_scale", type=float)
    parser.add_argument("--noise-level", dest="noise_level", type=float)
    parser.add_argument("--washout", type=int)
    parser.add_argument("--agg", choices=("final", "mean", "mean_plus_final"))
    parser.add_argument("--lambda", dest="lam", type=float, help="ridge penalty")
    parser.add_argument(
        "--lambda-grid",
        dest="lambda_grid",
        type=_parse_lambda_grid,
        help="comma-separated sweep values, or 'default' for 1e-6..1e2",
    )
    parser.add_argument("--seeds", type=int, help="number of seeds for multi-seed runs")
    parser.add_argument("--seed", type=int, help="base seed; all randomness flows from it")
    parser.add_argument("--threads", type=int, help="worker pool size (0 = auto)")
    parser.add_argument(
        "--shared-weights",
        dest="shared_weights",
        type=_parse_bool,
        help="share one weight set across directions (default true)",
    )


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def results_sha256(report: dict) -> str:
    canonical = json.dumps(report["results"], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def cmd_generate(args: argparse.Namespace) -> int:
    if args.spec:
        spec_path = Path(args.spec)
        if not spec_path.exists():
            raise DatasetError(f"spec file not found: {spec_path}")
        try:
            payload = json.loads(spec_path.read_text())
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{spec_path}: invalid JSON ({exc})") from exc
        unknown = set(payload) - {f.name for f in fields(SyntheticSpec)}
        if unknown:
            raise ConfigError(f"{spec_path}: unknown spec keys {sorted(unknown)}")
        spec = SyntheticSpec(**payload)
    else:
        spec = SyntheticSpec()
    dataset = generate_synthetic(spec)
    manifest_path = write_dataset(dataset, args.out)
    print(f"wrote {dataset.n_samples} samples to {args.out}")
    for split in ("train", "val", "test"):
        print(f"  {split}: {len(dataset.split(split))}")
    print(f"manifest: {manifest_path}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    run_config = build_run_config(args)
    dataset = load_dataset(args.manifest)
    pipeline, train_report = train_pipeline(dataset, run_config)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    model_path = out_dir / "model.besn"
    save_pipeline(model_path, pipeline)

    timing = train_report.pop("timing")
    results = dict(train_report)
    if dataset.val:
        val_report = evaluate_pipeline(
            pipeline,
            dataset.val,
            threads=run_config.threads,
            train_seconds=timing["train_seconds"],
        )
        results["val"] = val_report.to_dict()
        timing["val_eval_seconds"] = val_report.wall_clock_eval_s
        print(f"val accuracy: {val_report.accuracy:.4f}")
    report = {"results": results, "timing": timing}
    _write_json(out_dir / "train_report.json", report)
    print(f"lambda: {results['lambda']}")
    print(f"train epochs: {results['epochs']} (single linear solve)")
    print(f"train seconds: {timing['train_seconds']:.2f}")
    print(f"model: {model_path}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    model_path = Path(args.model)
    if not model_path.exists():
        raise DatasetError(f"model file not found: {model_path}")
    pipeline = load_pipeline(model_path)
    dataset = load_dataset(args.manifest)
    if dataset.feature_dim != pipeline.featurizer.weights.input_dim:
        raise DatasetError(
            f"model/pipeline width mismatch: model expects input_dim "
            f"{pipeline.featurizer.weights.input_dim}, dataset provides {dataset.feature_dim}"
        )
    samples = dataset.split(args.split)
    if not samples:
        raise DatasetError(f"split {args.split!r} is empty")
    report = evaluate_pipeline(pipeline, samples, threads=args.threads or 0)
    payload = {
        "results": {"split": args.split, **report.to_dict()},
        "timing": {"eval_seconds": report.wall_clock_eval_s},
    }
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_json(out_dir / f"eval_{args.split}.json", payload)
    print(f"{args.split} accuracy: {report.accuracy:.4f} ({report.n_samples} samples)")
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    run_config = build_run_config(args)
    if run_config.seeds == 1:
        print("warning: single seed; SD is reported as 0", file=sys.stderr)
    dataset = load_dataset(args.manifest)
    report = benchmark_directions(dataset, run_config)

    table = render_benchmark_table(report)
    print(table)
    print(f"results_sha256 {results_sha256(report)}")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_json(out_dir / "benchmark.json", report)
        (out_dir / "benchmark_table.txt").write_text(table + "\n")
        print(f"report: {out_dir / 'benchmark.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="besn",
        description="Bidirectional echo state network sequence classifier",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate a synthetic keypoint dataset")
    p_gen.add_argument("--spec", help="JSON file with synthetic task settings")
    p_gen.add_argument("--out", required=True, help="output dataset directory")
    p_gen.set_defaults(func=cmd_generate)

    p_train = sub.add_parser("train", help="train a model on a dataset manifest")
    p_train.add_argument("--manifest", required=True)
    p_train.add_argument("--out", required=True, help="output directory for model and report")
    _add_run_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a saved model on one split")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--split", choices=("train", "val", "test"), default="test")
    p_eval.add_argument("--threads", type=int)
    p_eval.add_argument("--out", help="optional directory for the JSON report")
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("benchmark", help="compare bi vs uni at equal total units")
    p_bench.add_argument("--manifest", required=True)
    p_bench.add_argument("--out", help="optional directory for JSON report and table")
    _add_run_flags(p_bench)
    p_bench.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, FileNotFoundError) as exc:
        # ConfigError, DatasetError and ModelFormatError are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
