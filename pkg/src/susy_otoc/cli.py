"""Command-line front end.

Example::

    susy-otoc compute --model ho --nmax 40 --order 2 --beta 1.0 \\
        --t-start 0 --t-end 10 --t-steps 201 --mode bosonic-only --out r.csv

Exit statuses: 0 ok, 1 usage or I/O error, 2 model validation error,
3 eigensum/oracle deviation above the gate.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .basis import SusyState
from .models import (GridSolveError, ModelValidationError, SpectralModel, _atomic_write_text,
                     grid_model, load_grid_spec, load_model, save_model, susy_ho_model)
from .operators import OperatorContent
from .otoc import (DEFAULT_TAIL_EPSILON, ConvergenceWarning, OtocRequest, OtocResult,
                   TruncationError, microcanonical_sweep, thermal_otoc)

log = logging.getLogger("susy_otoc")

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_DEVIATION = 0, 1, 2, 3
DEVIATION_GATE = 1e-6
CSV_HEADER = ["t1", "t2", "beta", "N", "re_C", "im_C", "method", "mode"]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    model: Optional[str] = None
    model_file: Optional[str] = None
    grid_file: Optional[str] = None
    nmax: int = 40
    omega: float = 1.0
    mode: str = "bosonic-only"
    method: str = "eigensum"
    order: int = 2
    beta: list = field(default_factory=list)
    state: list = field(default_factory=list)
    t_start: float = 0.0
    t_end: float = 10.0
    t_steps: int = 201
    t2: float = 0.0
    out: Optional[str] = None
    format: Optional[str] = None
    tail_epsilon: float = DEFAULT_TAIL_EPSILON
    substitution_factor: float = 1.0
    inject_deviation: float = 0.0

    def time_pairs(self) -> list[tuple[float, float]]:
        t1 = np.linspace(self.t_start, self.t_end, self.t_steps)
        return [(float(t), float(self.t2)) for t in t1]

    @property
    def output_format(self) -> str:
        if self.format:
            return self.format
        return "json" if self.out and self.out.endswith(".json") else "csv"


_DEFAULTS = RunConfig()
_CONFIG_KEYS = {f.replace("_", "-"): f for f in asdict(_DEFAULTS)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _parse_state(text: str) -> SusyState:
    try:
        n_B, n_F = (int(v) for v in str(text).split(","))
    except ValueError:
        raise UsageError(f"--state expects n_B,n_F, got {text!r}") from None
    return SusyState(n_B, n_F)


def _parse_betas(values) -> list[float]:
    out = []
    for v in values:
        for part in str(v).split(","):
            try:
                out.append(float(part))
            except ValueError:
                raise UsageError(f"--beta expects numbers, got {part!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="susy-otoc", description="OTOCs of SUSY quantum mechanics in the tensor-product basis")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="sweep OTOC values over a time grid")
    c.add_argument("--config", help="JSON file whose keys mirror the long flags")
    c.add_argument("--model", choices=["ho"], help="analytic SUSY harmonic oscillator")
    c.add_argument("--model-file", help="JSON model file")
    c.add_argument("--grid-file", help="JSON grid description for the finite-difference solver")
    c.add_argument("--nmax", type=int, help="bosonic truncation for --model ho (default 40)")
    c.add_argument("--omega", type=float, help="oscillator frequency (default 1)")
    c.add_argument("--mode", choices=["full", "bosonic-only"])
    c.add_argument("--method", choices=["eigensum", "oracle", "both"])
    c.add_argument("--order", type=int, help="power N of the commutator (N=2 is the 4-point OTOC)")
    c.add_argument("--beta", action="append", help="inverse temperature; repeatable or comma separated")
    c.add_argument("--state", action="append", help="microcanonical state n_B,n_F; repeatable")
    c.add_argument("--t-start", type=float)
    c.add_argument("--t-end", type=float)
    c.add_argument("--t-steps", type=int)
    c.add_argument("--t2", type=float, help="fixed second time (default 0)")
    c.add_argument("--out", help="output file")
    c.add_argument("--format", choices=["csv", "json"])
    c.add_argument("--tail-epsilon", type=float)
    c.add_argument("--substitution-factor", type=float,
                   help="coefficient phi in p_km = i phi x_km E^km (default 1)")
    c.add_argument("--inject-deviation", type=float, help=argparse.SUPPRESS)

    v = sub.add_parser("validate-model", help="check a model file")
    v.add_argument("path")

    e = sub.add_parser("export-model", help="write an analytic or grid model to a file")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", choices=["ho"])
    src.add_argument("--grid-file")
    e.add_argument("--nmax", type=int, default=40)
    e.add_argument("--omega", type=float, default=1.0)
    e.add_argument("--out", required=True)
    return ap


def _merge(args: argparse.Namespace) -> dict:
    sources = ("model", "model_file", "grid_file")
    values: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must contain a JSON object")
        unknown = sorted(k for k in data if k.replace("_", "-") not in _CONFIG_KEYS)
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        values = {_CONFIG_KEYS[k.replace("_", "-")]: v for k, v in data.items()}
        for key in ("beta", "state"):
            if key in values and not isinstance(values[key], list):
                values[key] = [values[key]]
    cli = {k: getattr(args, k) for k in asdict(_DEFAULTS) if getattr(args, k, None) is not None}
    cli_sources = [k for k in sources if k in cli]
    if len(cli_sources) > 1:
        raise UsageError("conflicting model sources: " + ", ".join("--" + k.replace("_", "-") for k in cli_sources))
    if cli_sources:
        for k in sources:
            values.pop(k, None)
    values.update(cli)
    return values


def _validate(cfg: RunConfig) -> None:
    errors = []
    sources = [k for k in ("model", "model_file", "grid_file") if getattr(cfg, k)]
    if not sources:
        errors.append("missing model source (--model ho, --model-file or --grid-file)")
    elif len(sources) > 1:
        errors.append("conflicting model sources: " + ", ".join(sources))
    if cfg.model not in (None, "ho"):
        errors.append(f"model: unknown value {cfg.model!r}")
    if not isinstance(cfg.nmax, int) or cfg.nmax < 1:
        errors.append(f"nmax: must be an integer >= 1, got {cfg.nmax!r}")
    if not (isinstance(cfg.omega, (int, float)) and math.isfinite(cfg.omega) and cfg.omega > 0):
        errors.append(f"omega: must be positive, got {cfg.omega!r}")
    if cfg.mode not in ("full", "bosonic-only"):
        errors.append(f"mode: must be full or bosonic-only, got {cfg.mode!r}")
    if cfg.method not in ("eigensum", "oracle", "both"):
        errors.append(f"method: must be eigensum, oracle or both, got {cfg.method!r}")
    if not isinstance(cfg.order, int) or cfg.order < 1:
        errors.append(f"order: N must be an integer >= 1, got {cfg.order!r}")
    if any(not (math.isfinite(b) and b > 0) for b in cfg.beta):
        errors.append(f"beta: values must be positive, got {cfg.beta}")
    if not isinstance(cfg.t_steps, int) or cfg.t_steps < 1:
        errors.append(f"t-steps: must be an integer >= 1, got {cfg.t_steps!r}")
    if not all(math.isfinite(v) for v in (cfg.t_start, cfg.t_end, cfg.t2)):
        errors.append("time grid: values must be finite")
    elif cfg.t_start > cfg.t_end:
        errors.append(f"t-start={cfg.t_start} must be <= t-end={cfg.t_end}")
    if cfg.t_steps == 1 and cfg.t_start != cfg.t_end:
        errors.append("t-steps=1 requires t-start == t-end")
    if not cfg.out:
        errors.append("out: output path is required")
    if cfg.format not in (None, "csv", "json"):
        errors.append(f"format: must be csv or json, got {cfg.format!r}")
    if not (cfg.tail_epsilon > 0):
        errors.append(f"tail-epsilon: must be positive, got {cfg.tail_epsilon!r}")
    if not (math.isfinite(cfg.substitution_factor) and cfg.substitution_factor > 0):
        errors.append(f"substitution-factor: must be positive, got {cfg.substitution_factor!r}")
    if errors:
        raise UsageError("invalid configuration:\n  " + "\n  ".join(errors))


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Parse ``compute`` arguments (with optional ``--config``) into a validated RunConfig."""
    args = build_parser().parse_args(list(argv))
    if args.command != "compute":
        raise UsageError(f"parse_config handles 'compute', got {args.command!r}")
    values = _merge(args)
    try:
        if "beta" in values:
            values["beta"] = _parse_betas(values["beta"])
        if "state" in values:
            values["state"] = [_parse_state(s) if not isinstance(s, (list, tuple)) else SusyState(*s)
                               for s in values["state"]]
        for key in ("t_start", "t_end", "t2", "omega", "tail_epsilon", "substitution_factor",
                    "inject_deviation"):
            if key in values:
                values[key] = float(values[key])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration value: {exc}") from exc
    cfg = RunConfig(**values)
    if not cfg.beta and not cfg.state:
        cfg.beta = [1.0]
    _validate(cfg)
    return cfg


def build_model(cfg) -> SpectralModel:
    if getattr(cfg, "model_file", None):
        return load_model(cfg.model_file)
    if cfg.grid_file:
        spec, opts = load_grid_spec(cfg.grid_file)
        return grid_model(spec, opts["omega_F"], opts["n_keep"], opts["stencil_order"])
    return susy_ho_model(cfg.nmax, cfg.omega)


def _compute(model: SpectralModel, cfg: RunConfig, method: str) -> list[OtocResult]:
    content = OperatorContent.from_mode(cfg.mode, cfg.substitution_factor)
    pairs = cfg.time_pairs()
    rows: list[OtocResult] = []
    if cfg.beta:
        rows += thermal_otoc(model, OtocRequest(cfg.order, cfg.beta, pairs, content, method, cfg.tail_epsilon))
    if cfg.state:
        rows += microcanonical_sweep(model, OtocRequest(cfg.order, [], pairs, content, method), cfg.state)
    return rows


def _beta_label(r: OtocResult) -> str:
    if r.state is not None:
        return f"inf-state:{r.state.n_B},{r.state.n_F}"
    return repr(float(r.beta))


def render_csv(rows: Sequence[OtocResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([repr(r.t1), repr(r.t2), _beta_label(r), r.order_N,
                    repr(float(r.value.real)), repr(float(r.value.imag)), r.method, r.mode])
    return buf.getvalue()


def render_json(rows: Sequence[OtocResult], cfg: RunConfig) -> str:
    records = [{
        "t1": r.t1, "t2": r.t2, "beta": _beta_label(r), "N": r.order_N,
        "re_C": float(r.value.real), "im_C": float(r.value.imag),
        "method": r.method, "mode": r.mode, "truncation_weight": r.truncation_weight,
    } for r in rows]
    config = {k: v for k, v in asdict(cfg).items() if k != "inject_deviation"}
    config["state"] = [list(s) for s in cfg.state]
    return json.dumps({"config": config, "results": records}, indent=1) + "\n"


def _deviation_summary(a: Sequence[OtocResult], b: Sequence[OtocResult]) -> tuple[float, OtocResult, int]:
    devs = [abs(x.value - y.value) for x, y in zip(a, b)]
    worst = int(np.argmax(devs))
    n_bad = sum(d > DEVIATION_GATE for d in devs)
    return devs[worst], a[worst], n_bad


def run(cfg: RunConfig) -> int:
    """Execute a compute run; returns the process exit status."""
    try:
        model = build_model(cfg)
    except (ModelValidationError, GridSolveError) as exc:
        log.error("model error: %s", exc)
        return EXIT_MODEL
    except OSError as exc:
        log.error("cannot read model: %s", exc)
        return EXIT_USAGE
    methods = ["eigensum", "oracle"] if cfg.method == "both" else [cfg.method]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        try:
            results = {m: _compute(model, cfg, m) for m in methods}
        except TruncationError as exc:
            log.error("%s", exc)
            return EXIT_USAGE
    for msg in dict.fromkeys(str(w.message) for w in caught):
        log.warning("%s", msg)

    status = EXIT_OK
    if cfg.method == "both":
        if cfg.inject_deviation:
            results["oracle"] = [OtocResult(r.t1, r.t2, r.beta, r.order_N, r.value + cfg.inject_deviation,
                                            r.method, r.mode, r.state, r.truncation_weight)
                                 for r in results["oracle"]]
        worst, at, n_bad = _deviation_summary(results["eigensum"], results["oracle"])
        where = f"state {at.state}" if at.state is not None else f"beta={at.beta}"
        print(f"eigensum vs oracle: max deviation {worst:.3e} at t1={at.t1!r}, t2={at.t2!r}, {where}; "
              f"{n_bad} of {len(results['eigensum'])} points above {DEVIATION_GATE:g}")
        if n_bad:
            status = EXIT_DEVIATION
    rows = [r for m in methods for r in results[m]]
    text = render_csv(rows) if cfg.output_format == "csv" else render_json(rows, cfg)
    try:
        _atomic_write_text(Path(cfg.out), text)
    except OSError as exc:
        log.error("cannot write %s: %s", cfg.out, exc)
        return EXIT_USAGE
    return status


def _validate_model_cmd(path: str) -> int:
    try:
        m = load_model(path)
    except ModelValidationError as exc:
        log.error("%s: %s", path, exc)
        return EXIT_MODEL
    except OSError as exc:
        log.error("cannot read %s: %s", path, exc)
        return EXIT_USAGE
    print(f"{path}: ok (n_max={m.n_max}, dimension={m.dimension}, omega_F={m.omega_F!r})")
    return EXIT_OK


def _export_model_cmd(args) -> int:
    try:
        model = build_model(args)
    except (ModelValidationError, GridSolveError) as exc:
        log.error("model error: %s", exc)
        return EXIT_MODEL
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    try:
        save_model(model, args.out)
    except OSError as exc:
        log.error("cannot write %s: %s", args.out, exc)
        return EXIT_USAGE
    print(f"wrote {args.out} (n_max={model.n_max}, {model.provenance})")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s", stream=sys.stderr)
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "validate-model":
            return _validate_model_cmd(args.path)
        if args.command == "export-model":
            return _export_model_cmd(args)
        cfg = parse_config(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
