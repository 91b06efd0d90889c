"""Command line harness: ``percolab <kind> [flags]``.

Settings are merged as defaults <- ``--config`` file <- flags. Every run writes
into ``--out``:

``<kind>.csv``
    data rows; the header is documented per kind in the README.
``summary.json``
    schema version, code version, the full config, results and named checks.
``plot_<kind>.py``
    standalone matplotlib script reading the CSV (never run here).

Exit codes: 0 all checks pass, 1 some check failed, 2 config error,
3 validation error, 4 resource limit, 5 divergence, 6 precision, 7 numeric
failure, 8 other experiment error. Failures also write ``error.json``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import (DivergenceError, ExperimentError, NumericError, PrecisionError, ResourceError,
               ValidationError, __version__)
from .config import ExperimentConfig
from .experiments import run_experiment, validate, with_defaults
from .fixtures import write_fixtures

SCHEMA_VERSION = 1
SUBCOMMANDS = ("growth", "rates", "genfun", "tauberian", "diffineq", "ks", "zeta", "cheeger",
               "variance", "triangle", "fixtures", "validate")
ALIASES = {"kesten-stigum": "ks", "oracle-fixtures": "fixtures"}

EXIT_OK, EXIT_CHECKS, EXIT_CONFIG, EXIT_VALIDATION = 0, 1, 2, 3
EXIT_CODES = [(ResourceError, 4), (DivergenceError, 5), (PrecisionError, 6), (NumericError, 7),
              (ValidationError, 3), (ExperimentError, 8)]

_PLOT_TEMPLATE = '''"""Plot {csv} ({kind}). Needs matplotlib; not used by any test."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv}"
with open(path, newline="") as fh:
    rows = [r for r in csv.DictReader(fh) if r["{x}"] and r["{y}"]]
x = [float(r["{x}"]) for r in rows]
y = [float(r["{y}"]) for r in rows]
plt.plot(x, y, "o-")
plt.xlabel("{x}")
plt.ylabel("{y}")
{logy}plt.title("{kind}")
plt.savefig("{kind}.png", dpi=120)
'''


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="percolab",
                                     description="Slightly supercritical percolation experiments.")
    parser.add_argument("--version", action="version", version=f"percolab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS + tuple(ALIASES):
        sp = sub.add_parser(name)
        if name == "validate":
            sp.add_argument("--kind", default=None, help="experiment kind to validate (default growth)")
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--family", help='e.g. "tree:d=3" or "treez:d=3,pc=0.37"')
        sp.add_argument("--p", type=float)
        sp.add_argument("--p-grid", type=_floats, dest="p_grid")
        sp.add_argument("--r-max", type=int, dest="r_max")
        sp.add_argument("--samples", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--r-inf", type=int, dest="r_inf")
        sp.add_argument("--cap", type=int)
        sp.add_argument("--out")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--engine", choices=("auto", "bfs", "gw"))
        sp.add_argument("--alpha-fracs", type=_floats, dest="alpha_fracs")
        sp.add_argument("--r-list", type=_ints, dest="r_list")
        sp.add_argument("--k-list", type=_ints, dest="k_list")
        sp.add_argument("--size-grid", type=_ints, dest="size_grid")
        sp.add_argument("--L", type=int, dest="L")
        sp.add_argument("--p-tilt", type=float, dest="p_tilt")
        sp.add_argument("--max-edges", type=int, dest="max_edges")
        sp.add_argument("--min-survivors", type=int, dest="min_survivors")
        sp.add_argument("--delta", type=float)
    return parser


_CONFIG_KEYS = ("family", "p", "p_grid", "r_max", "samples", "seed", "r_inf", "cap", "out",
                "threads", "engine", "alpha_fracs", "r_list", "k_list", "size_grid", "L",
                "p_tilt", "max_edges", "min_survivors", "delta")


def config_from_args(args) -> ExperimentConfig:
    kind = ALIASES.get(args.command, args.command)
    if kind == "validate":
        kind = args.kind
    base = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if kind is not None:
        base = base.updated(kind=ALIASES.get(kind, kind))
    return base.updated(**{k: getattr(args, k) for k in _CONFIG_KEYS})


def _clean(obj):
    """JSON-safe copy: numpy scalars and arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _clean(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=1, sort_keys=True) + "\n", encoding="utf-8")


def csv_bytes(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def run(cfg: ExperimentConfig) -> int:
    """Run one experiment and write its artifacts; returns the exit status."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.kind == "fixtures":
        paths = write_fixtures(out)
        _write_json(out / "summary.json", {
            "schema_version": SCHEMA_VERSION, "code_version": __version__,
            "config": cfg.to_dict(), "results": {"files": [p.name for p in paths]},
            "checks": {}, "passed": True})
        return EXIT_OK
    cfg = with_defaults(cfg)
    diags = validate(cfg)
    if diags:
        raise ValidationError("; ".join(diags))
    res = run_experiment(cfg)
    name = f"{cfg.kind}.csv"
    (out / name).write_text(csv_bytes(res.header, res.rows), encoding="utf-8")
    checks = {k: bool(v) for k, v in res.checks.items()}
    passed = all(checks.values())
    _write_json(out / "summary.json", {
        "schema_version": SCHEMA_VERSION, "code_version": __version__, "config": cfg.to_dict(),
        "results": res.results, "checks": checks, "passed": passed})
    if res.plot:
        (out / f"plot_{cfg.kind}.py").write_text(_PLOT_TEMPLATE.format(
            csv=name, kind=cfg.kind, x=res.plot["x"], y=res.plot["y"],
            logy='plt.yscale("log")\n' if res.plot.get("logy") else ""), encoding="utf-8")
    return EXIT_OK if passed else EXIT_CHECKS


def _error(out, code: int, exc: BaseException) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("attained", "alpha_p"):
        if getattr(exc, attr, None) is not None:
            payload[attr] = getattr(exc, attr)
    try:
        Path(out).mkdir(parents=True, exist_ok=True)
        _write_json(Path(out) / "error.json", payload)
    except OSError:
        pass
    print(f"percolab: {payload['error']}: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out or "out"
    try:
        cfg = config_from_args(args)
    except (ValidationError, OSError) as exc:
        return _error(out, EXIT_CONFIG, exc)
    if args.command == "validate":
        diags = validate(cfg)
        for d in diags:
            print(d)
        return EXIT_OK if not diags else EXIT_VALIDATION
    try:
        return run(cfg)
    except Exception as exc:  # map library errors to exit codes
        for cls, code in EXIT_CODES:
            if isinstance(exc, cls):
                return _error(cfg.out, code, exc)
        if isinstance(exc, (ValueError, ArithmeticError)):
            return _error(cfg.out, 8, exc)
        raise


if __name__ == "__main__":
    sys.exit(main())
