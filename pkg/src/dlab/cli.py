"""``dlab <experiment> --config <path>`` entry point."""

from __future__ import annotations

import argparse
import csv
import inspect
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, svgplot
from .errors import ConfigError, DlabError
from .experiments import EXPERIMENTS, ExperimentResult
from .fieldio import read_manifest, write_manifest

# keys that the CLI flags map onto, per experiment
RESOLUTION_KEY = {
    "nls-line": "num_points",
    "embed-residual": "num_points",
    "smalldispersion": "num_points",
    "kdv-endpoint": "num_points",
}
REQUIRED = {
    "nls-periodic": ("s", "N_list"),
    "mkdv-periodic": ("s", "N_list"),
    "nls-line": ("s", "N", "a", "a_prime"),
    "embed-residual": ("N_list", "eps"),
    "muchado-decay": ("N", "eps", "t_list"),
    "smalldispersion": ("delta_list", "a"),
    "kdv-endpoint": ("norm", "T"),
    "decoherence": ("eps", "a", "a_prime_list"),
    "supercritical": ("s", "kappa", "delta_list"),
}


def format_value(v) -> str:
    """Deterministic text for report cells: repr-exact floats, plain ints and strings."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12e}"
    if isinstance(v, (tuple, list)):
        return ",".join(format_value(x) for x in v)
    return str(v)


def _parse_like(text: str, default, key: str):
    try:
        if isinstance(default, bool):
            low = text.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            items = [x for x in text.replace(" ", "").split(",") if x]
            return tuple(int(x) if x.lstrip("+-").isdigit() else float(x) for x in items)
    except ValueError:
        raise ConfigError(f"config key '{key}': cannot parse {text!r}") from None
    return text


def load_config(path: str | Path, experiment: str) -> dict:
    """Read key=value lines (``#`` comments) and type them by the experiment's defaults."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment '{experiment}'")
    try:
        raw = read_manifest(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    raw.pop("experiment", None)
    defaults = {k: p.default for k, p in inspect.signature(EXPERIMENTS[experiment]).parameters.items()}
    for key in REQUIRED[experiment]:
        if key not in raw:
            raise ConfigError(f"config for '{experiment}' is missing required key '{key}'")
    params = {}
    for key, text in raw.items():
        if key not in defaults:
            raise ConfigError(f"config key '{key}' is not a parameter of '{experiment}'")
        params[key] = _parse_like(text, defaults[key], key)
    return params


def write_outputs(result: ExperimentResult, out: Path, params: dict, seed: int | None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(result.columns)
        for row in result.rows:
            wr.writerow([format_value(v) for v in row])
        fh.write("\n")
        wr.writerow(["summary_key", "value"])
        for key, val in result.summary.items():
            wr.writerow([key, format_value(val)])
    manifest = {"experiment": result.name, "version": __version__, "seed": "none" if seed is None else seed}
    manifest.update({f"param.{k}": format_value(v) for k, v in sorted(params.items())})
    manifest.update({f"tolerance.{k}": format_value(v) for k, v in result.tolerances.items()})
    manifest["valid"] = format_value(result.valid)
    write_manifest(out / "manifest.txt", manifest)
    plots = out / "plots"
    plots.mkdir(exist_ok=True)
    for name, chart in result.charts.items():
        svgplot.write(chart, plots / f"{name}.svg")


def _help_epilog() -> str:
    lines = ["config keys per experiment (required keys marked *):"]
    for name, fn in EXPERIMENTS.items():
        keys = []
        for key, p in inspect.signature(fn).parameters.items():
            mark = "*" if key in REQUIRED[name] else ""
            shown = ",".join(f"{x:g}" for x in p.default) if isinstance(p.default, tuple) else p.default
            keys.append(f"{key}{mark}={shown}")
        lines.append(f"  {name}: " + " ".join(keys))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dlab",
        description="Run a named dispersive-PDE experiment and write report.csv, manifest.txt, plots/*.svg.",
        epilog=_help_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("experiment", choices=sorted(EXPERIMENTS))
    ap.add_argument("--config", required=True, help="key=value file")
    ap.add_argument("--out", default="out", help="output directory (default: out)")
    ap.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (kdv-endpoint)")
    ap.add_argument("--resolution", type=int, default=None, help="override num_points where applicable")
    ap.add_argument("--exact", action="store_true", help="use exact fixed-point solutions where available")
    return ap


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one run; written back out as manifest.txt."""

    experiment: str
    params: dict = field(default_factory=dict)
    out: Path = Path("out")
    seed: int | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "ExperimentConfig":
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        params = load_config(args.config, args.experiment)
        accepted = inspect.signature(EXPERIMENTS[args.experiment]).parameters
        if args.resolution is not None:
            key = RESOLUTION_KEY.get(args.experiment)
            if key is None:
                raise ConfigError(f"'{args.experiment}' has no resolution control")
            params[key] = args.resolution
        if args.exact:
            if "exact" not in accepted:
                raise ConfigError(f"'{args.experiment}' has no exact variant")
            params["exact"] = True
        if args.seed is not None:
            if "seed" not in accepted:
                raise ConfigError(f"'{args.experiment}' takes no seed")
            params["seed"] = args.seed
        return cls(args.experiment, params, Path(args.out), params.get("seed"))


def execute(config: ExperimentConfig) -> ExperimentResult:
    result = EXPERIMENTS[config.experiment](**config.params)
    write_outputs(result, config.out, config.params, config.seed)
    return result


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        execute(ExperimentConfig.from_args(args))
    except ConfigError as exc:
        print(f"dlab: usage error: {exc}", file=sys.stderr)
        return 2
    except DlabError as exc:
        print(f"dlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
