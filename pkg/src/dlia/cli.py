"""Command-line front end.

Usage::

    dlia run --config exp.cfg [--out DIR] [--seed N]
    dlia preset fig5_hex19 [--seed N] [--out DIR]
    dlia sweep-kappa --layout hex19 --snr-db 20
    dlia list-presets

Exit status is 0 on success, 2 for configuration errors and 3 for runtime
failures.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import DliaError, InfeasibleConfig, InvalidParam, OutOfRange, ParseError, ValidationError
from .layout import LAYOUT_KINDS, parse_kappa_mode
from .presets import PRESETS, curve_rows, kappa_sweep, run_preset, write_csv
from .schemes import SCHEME_KINDS, SchemeConfig
from .simulator import ExperimentSpec, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

LAYOUT_ALIASES = {"hex19": "hex19_wraparound", "hex": "hex19_wraparound"}

DEFAULTS = {
    "layout": "two_cell",
    "scheme": "unified_ia",
    "m_dims": 4,
    "n_dims": 4,
    "k_users": 10,
    "streams": 3,
    "snr_db": tuple(float(x) for x in range(0, 41, 5)),
    "drops": 500,
    "seed": 0,
    "kappa": "auto",
    "iterations": 0,
    "gamma_override": None,
    "d_over_r": None,
    "dominant_count": 1,
}

INT_KEYS = {"m_dims", "n_dims", "k_users", "streams", "drops", "seed", "iterations", "dominant_count"}
FLOAT_KEYS = {"gamma_override", "d_over_r"}


def parse_snr_grid(text):
    """``'a:step:b'`` (inclusive) or ``'x, y, z'`` -> tuple of floats."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("range must look like start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("range step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(start + i * step) for i in range(count))
    return tuple(float(p) for p in text.split(",") if p.strip())


def _convert(key, raw):
    try:
        if key in INT_KEYS:
            return int(raw)
        if key in FLOAT_KEYS:
            return None if raw.lower() == "none" else float(raw)
        if key == "snr_db":
            return parse_snr_grid(raw)
        if key == "kappa":
            return parse_kappa_mode(raw)
    except (ValueError, OutOfRange) as exc:
        raise ValidationError(key, str(exc)) from None
    if key == "layout":
        value = LAYOUT_ALIASES.get(raw, raw)
        if value not in LAYOUT_KINDS:
            raise ValidationError(key, f"unknown layout {raw!r}")
        return value
    if key == "scheme":
        if raw not in SCHEME_KINDS:
            raise ValidationError(key, f"unknown scheme {raw!r}")
        return raw
    return raw


def parse_config(text):
    """Parse ``key = value`` lines into a validated :class:`ExperimentSpec`."""
    values = dict(DEFAULTS)
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(lineno, "expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ParseError(lineno, f"unknown key {key!r}")
        if key in seen:
            raise ParseError(lineno, f"duplicate key {key!r}")
        if not raw:
            raise ParseError(lineno, f"missing value for {key!r}")
        seen.add(key)
        values[key] = _convert(key, raw)
    return spec_from_values(values)


def spec_from_values(values):
    v = values
    m, n = v["m_dims"], v["n_dims"]
    if v["streams"] > min(m, n):
        raise ValidationError("streams", f"S={v['streams']} exceeds min(M, N)={min(m, n)}")
    if v["layout"] == "macro_pico" and v["d_over_r"] is None:
        raise ValidationError("d_over_r", "macro_pico requires d_over_r")
    if v["layout"] != "macro_pico" and v["d_over_r"] is not None:
        raise ValidationError("d_over_r", "only valid for macro_pico")
    try:
        scheme = SchemeConfig(
            v["scheme"], streams=v["streams"], iterations=v["iterations"],
            kappa_mode=v["kappa"], dominant_count=v["dominant_count"],
        )
    except OutOfRange as exc:
        raise ValidationError("scheme", str(exc)) from None
    try:
        return ExperimentSpec(
            v["layout"], scheme, k_users=v["k_users"], m_dims=m, n_dims=n, snr_db=v["snr_db"],
            drops=v["drops"], seed=v["seed"], gamma_override=v["gamma_override"], d_over_r=v["d_over_r"],
        )
    except (InvalidParam, InfeasibleConfig) as exc:
        raise ValidationError("config", str(exc)) from None


def _cmd_run(args):
    spec = parse_config(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        spec = spec_from_values({**_values_of(spec), "seed": args.seed})
    curve = run_experiment(spec, args.workers)
    text = write_csv(curve_rows(curve, spec))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{spec.scheme.kind}.csv"
        path.write_text(text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _values_of(spec):
    return {
        "layout": spec.layout, "scheme": spec.scheme.kind, "m_dims": spec.m_dims, "n_dims": spec.n_dims,
        "k_users": spec.k_users, "streams": spec.streams, "snr_db": spec.snr_db, "drops": spec.drops,
        "seed": spec.seed, "kappa": spec.scheme.kappa_mode, "iterations": spec.scheme.iterations,
        "gamma_override": spec.gamma_override, "d_over_r": spec.d_over_r,
        "dominant_count": spec.scheme.dominant_count,
    }


def _cmd_preset(args):
    paths = run_preset(args.name, args.seed, args.out, drops=args.drops, workers=args.workers)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _cmd_sweep(args):
    layout = LAYOUT_ALIASES.get(args.layout, args.layout)
    if layout not in LAYOUT_KINDS:
        raise ValidationError("layout", f"unknown layout {args.layout!r}")
    kappas, rows = kappa_sweep(layout, args.snr_db, args.drops, args.seed, args.workers, args.d_over_r)
    text = write_csv(rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "kappa_sweep.csv").write_text(text)
    else:
        sys.stdout.write(text)
    best = kappas[int(np.argmax([r[9] for r in rows]))]
    print(f"peak at kappa={best:g}", file=sys.stderr)
    return EXIT_OK


def _cmd_list(args):
    for name in PRESETS:
        print(name)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="dlia", description="Downlink interference alignment link-level simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("preset", help="run a named experiment preset")
    p.add_argument("name")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.add_argument("--drops", type=int, default=500)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_preset)

    p = sub.add_parser("sweep-kappa", help="unified_ia rate versus fixed kappa")
    p.add_argument("--layout", required=True)
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--d-over-r", type=float)
    p.add_argument("--drops", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("list-presets", help="print preset names")
    p.set_defaults(func=_cmd_list)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, DliaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
