"""Command-line entry point: ``marangoni-vim {momentum,temperature,compare,params}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .bvp import BlowupError, ShootingError
from .pade import DegeneratePadeError, NoClosureRootError, SpuriousPoleError
from .params import (
    DegenerateForcingError,
    DomainError,
    PhysicalParams,
    derive_exponents,
    scaling_constants,
)
from .pipeline import RunConfig, run_compare, run_momentum, run_temperature

log = logging.getLogger("marangoni_vim")

EXIT_CONFIG = 2
EXIT_CLOSURE = 3
EXIT_SHOOTING = 4


class ConfigError(ValueError):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _interval(text: str) -> tuple:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from exc
    if not hi > lo:
        raise argparse.ArgumentTypeError(f"empty interval {text!r}")
    return lo, hi


# key -> (parser, RunConfig attribute)
_KEYS = {
    "k": (_fraction, "k"),
    "pr": (_fraction, "Pr"),
    "m": (_fraction, "m"),
    "pade_l": (int, "pade_l"),
    "pade_l_temp": (int, "pade_l_temp"),
    "iterations": (int, "iterations"),
    "temp_iterations": (int, "temp_iterations"),
    "coupling": (str, "coupling"),
    "eta_max": (float, "eta_max"),
    "step": (float, "step"),
    "samples": (int, "samples"),
    "range": (_interval, "range"),
    "bracket": (_interval, "bracket"),
    "temp_bracket": (_interval, "temp_bracket"),
    "shoot_bracket": (_interval, "shoot_bracket"),
    "threshold": (float, "threshold"),
}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _KEYS[key][0](val)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return values


def build_config(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in _KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    cfg = RunConfig()
    for key, v in values.items():
        setattr(cfg, _KEYS[key][1], v)
    try:
        cfg.validate()
        cfg.params
    except (ValueError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(cols: dict, stream):
    names = list(cols)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(names)
    for row in zip(*(cols[n] for n in names)):
        w.writerow([_fmt(v) for v in row])


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(args, report: dict, cols: dict):
    timings = report.pop("timings", None)
    if timings:
        log.info("timings (s): %s", ", ".join(f"{k}={v:.3f}" for k, v in timings.items()))
    if args.format == "json":
        text = _dump_json({**report, "columns": list(cols), "profile": {k: [float(v) for v in c] for k, c in cols.items()}})
        _write(args.out, text)
        return
    buf = io.StringIO()
    write_csv(cols, buf)
    _write(args.out, buf.getvalue())
    report_path = Path(args.out).with_suffix(".json") if args.out else None
    if report_path is not None:
        report_path.write_text(_dump_json(report))
    else:
        sys.stderr.write(_dump_json(report))


def _write(path, text):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_momentum(args):
    report, cols = run_momentum(build_config(args), with_oracle=not args.no_oracle)
    _emit(args, report, cols)


def cmd_temperature(args):
    report, cols = run_temperature(build_config(args), with_oracle=not args.no_oracle)
    _emit(args, report, cols)


def cmd_compare(args):
    summary, cols = run_compare(build_config(args), temperature=args.temperature)
    _emit(args, summary, cols)


def cmd_params(args):
    k = args.k if args.k is not None else Fraction(0)
    a, b, t = derive_exponents(k)
    phys = PhysicalParams(float(args.dsigma_dt), float(args.m if args.m is not None else 1), float(args.rho), float(args.mu))
    c1, c2 = scaling_constants(phys)
    out = {"C1": c1, "C2": c2, "a": str(a), "b": str(b), "t": str(t), "k": str(Fraction(k))}
    _write(args.out, _dump_json(out))


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--k", type=_fraction, help="surface-temperature power-law exponent (>= -1)")
    p.add_argument("--pr", type=_fraction, help="Prandtl number")
    p.add_argument("--m", type=_fraction, help="surface-temperature gradient coefficient; adds a theta column")
    p.add_argument("--pade-l", dest="pade_l", type=int, help="momentum closure order L of [L/L] (default 2)")
    p.add_argument("--pade-l-temp", dest="pade_l_temp", type=int, help="temperature closure order (default 3)")
    p.add_argument("--iterations", type=int, help="momentum correction steps (default 1)")
    p.add_argument("--temp-iterations", dest="temp_iterations", type=int, help="temperature correction steps (default 2)")
    p.add_argument("--coupling", choices=["initial", "solution"], help="velocity field in the temperature residual")
    p.add_argument("--eta-max", dest="eta_max", type=float, help="far-field truncation for shooting (default 10)")
    p.add_argument("--step", type=float, help="RK4 step (default 1e-3)")
    p.add_argument("--samples", type=int, help="profile sample count (default 101)")
    p.add_argument("--range", type=_interval, help="profile range LO:HI")
    p.add_argument("--bracket", type=_interval, help="momentum closure bracket LO:HI (default 0:3)")
    p.add_argument("--temp-bracket", dest="temp_bracket", type=_interval, help="temperature closure bracket (default -2:2)")
    p.add_argument("--shoot-bracket", dest="shoot_bracket", type=_interval, help="F'(0) shooting bracket (default 0:3)")
    p.add_argument("--threshold", type=float, help="|dg_vim - dg_rk4| marking the limited range (default 0.05)")
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="marangoni-vim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("momentum", help="velocity profile F, F', F''")
    _common(p)
    p.add_argument("--no-oracle", action="store_true", help="skip the RK4 comparison")
    p.set_defaults(func=cmd_momentum)

    p = sub.add_parser("temperature", help="temperature profile g, g'")
    _common(p)
    p.add_argument("--no-oracle", action="store_true", help="skip the RK4 comparison")
    p.set_defaults(func=cmd_temperature)

    p = sub.add_parser("compare", help="VIM and RK4 side by side")
    _common(p)
    p.add_argument("--temperature", action="store_true", help="add dg_vim, dg_rk4 columns")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("params", help="similarity constants C1, C2, a, b, t")
    p.add_argument("--k", type=_fraction)
    p.add_argument("--m", type=_fraction)
    p.add_argument("--dsigma-dt", dest="dsigma_dt", type=_fraction, default=Fraction(1))
    p.add_argument("--rho", type=_fraction, default=Fraction(1))
    p.add_argument("--mu", type=_fraction, default=Fraction(1))
    p.add_argument("--out")
    p.set_defaults(func=cmd_params)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except DegenerateForcingError as exc:
        print(f"error: degenerate forcing in C1/C2 scaling: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoClosureRootError, SpuriousPoleError, DegeneratePadeError) as exc:
        print(f"closure failed: {exc}", file=sys.stderr)
        return EXIT_CLOSURE
    except (ShootingError, BlowupError) as exc:
        print(f"shooting failed: {exc}", file=sys.stderr)
        return EXIT_SHOOTING
    return 0


if __name__ == "__main__":
    sys.exit(main())
