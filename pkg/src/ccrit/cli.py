"""Command-line interface: ``ccrit <command> [options]``.

Commands: constants, tc, gap, epstein, sweep, verify.  Data goes to stdout
and diagnostics to stderr.  Exit codes: 0 success, 1 verification failure,
2 usage error, 3 computation error.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

import numpy as np

from . import checks
from . import criticality as crit
from . import lattice_sums as ls
from .errors import CcritError, NoSolutionError
from .gap import GapProblem, solve_gap
from .specfun import TruncationPolicy

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2, 3

# Defaults for options that a config file may also set.
_DEFAULTS = {
    "format": "text", "precision": 12, "max_index": None, "rel_tol": None,
    "alpha": None, "lambda": None, "t0": None,
    "film": None, "wire_area": None, "grain_volume": None, "wire_sides": None,
    "D": 3.0, "d": None, "lengths": None, "m0sq": None, "solver_tol": 1e-12,
    "nu": None, "method": "recurrence",
    "geometry": None, "from": None, "to": None, "steps": None,
    "check": False,
}
_INT_KEYS = {"precision", "max_index", "d", "steps"}
_FLOAT_KEYS = {"rel_tol", "alpha", "lambda", "t0", "film", "wire_area", "grain_volume", "D", "m0sq",
               "solver_tol", "nu", "from", "to"}
_BOOL_KEYS = {"check"}


class UsageError(Exception):
    """Invalid combination of options or config values."""


# --------------------------------------------------------------------------
# formatting


def fmt(x, digits):
    """Shortest representation of ``x`` that round-trips, capped at ``digits`` significant digits."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0"
    for k in range(1, digits + 1):
        s = f"{x:.{k}g}"
        if float(s) == x:
            return s
    return f"{x:.{digits}g}"


def _jsonable(obj, digits):
    if isinstance(obj, dict):
        return {k: _jsonable(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v, digits) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return float(fmt(obj, digits))


def _flatten(record, prefix=""):
    out = {}
    for k, v in record.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[prefix + k] = v
    return out


def emit(record, cfg, out):
    """Write a flat or nested mapping in the configured format."""
    digits = cfg["precision"]
    if cfg["format"] == "json":
        out.write(json.dumps(_jsonable(record, digits), indent=2) + "\n")
        return
    flat = _flatten(record)
    if cfg["format"] == "csv":
        out.write(",".join(flat) + "\n")
        out.write(",".join(_cell(v, digits) for v in flat.values()) + "\n")
        return
    for k, v in flat.items():
        out.write(f"{k} = {_cell(v, digits)}\n")


def _cell(v, digits):
    if isinstance(v, str):
        return v
    return fmt(v, digits)


# --------------------------------------------------------------------------
# configuration


def _coerce(key, value):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _BOOL_KEYS:
            if str(value).lower() in ("1", "true", "yes", "on"):
                return True
            if str(value).lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
    except ValueError:
        raise UsageError(f"invalid value for {key}: {value!r}") from None
    return value


def read_config(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    return values


def resolve(args):
    """Merge defaults, config file and flags (flags win) into one mapping."""
    cfg = dict(_DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key in _DEFAULTS:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            cfg[key] = v
    if cfg["format"] not in ("text", "json", "csv"):
        raise UsageError(f"format must be text, json or csv, got {cfg['format']!r}")
    if not 4 <= cfg["precision"] <= 15:
        raise UsageError(f"precision must lie in [4, 15], got {cfg['precision']}")
    if cfg["max_index"] is None and os.environ.get("CCRIT_MAX_INDEX"):
        cfg["max_index"] = _coerce("max_index", os.environ["CCRIT_MAX_INDEX"])
    return cfg


# Direct power sums carry conservative bounds; this keeps them interactive.
DIRECT_REL_TOL = 1e-9


def policy(cfg, rel_tol=None):
    """TruncationPolicy from --rel-tol and --max-index, else ``rel_tol``, else defaults."""
    kwargs = {}
    if cfg["rel_tol"] is not None:
        kwargs["rel_tol"] = cfg["rel_tol"]
    elif rel_tol is not None:
        kwargs["rel_tol"] = rel_tol
    if cfg["max_index"] is not None:
        kwargs["max_index"] = cfg["max_index"]
    try:
        return TruncationPolicy(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _require(cfg, *keys):
    missing = [k for k in keys if cfg[k] is None]
    if missing:
        raise UsageError("missing required option(s): "
                         + ", ".join("--" + k.replace("_", "-") for k in missing))


def _gl(cfg):
    _require(cfg, "alpha", "lambda", "t0")
    try:
        return crit.GLParams(cfg["alpha"], cfg["lambda"], cfg["t0"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _lengths(text):
    try:
        vals = tuple(float(x) for x in str(text).split(","))
    except ValueError:
        raise UsageError(f"lengths must be comma-separated numbers, got {text!r}") from None
    return vals


# --------------------------------------------------------------------------
# commands


def cmd_constants(cfg, out):
    t = policy(cfg)
    c1 = crit.c1_constant()
    c2 = crit.c2_constant(t)
    c3 = crit.c3_constant(t)
    record = {
        "C1": {"value": c1, "error_bound": 0.0, "terms_used": 1, "published": crit.PUBLISHED_C1},
        "C2": {**c2.as_dict(), "published": crit.PUBLISHED_C2},
        "C3": {**c3.as_dict(), "published": crit.PUBLISHED_C3,
               "published_alt": crit.PUBLISHED_C3_ALT},
    }
    if cfg["format"] == "text":
        d = cfg["precision"]
        for name, r in record.items():
            line = (f"{name} = {fmt(r['value'], d)}  (error_bound {fmt(r['error_bound'], d)},"
                    f" terms_used {r['terms_used']}; published {fmt(r['published'], d)}")
            if "published_alt" in r:
                line += f", also published as {fmt(r['published_alt'], d)}"
            out.write(line + ")\n")
    else:
        emit(record, cfg, out)
    if cfg["check"] and abs(c2.value - crit.PUBLISHED_C2) > 5e-4:
        print(f"C2 = {c2.value} deviates from {crit.PUBLISHED_C2} by more than 5e-4", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _tc_geometry(cfg):
    chosen = [k for k in ("film", "wire_area", "grain_volume", "wire_sides") if cfg[k] is not None]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --film, --wire-area, --grain-volume, --wire-sides")
    return chosen[0]


def cmd_tc(cfg, out):
    g = _gl(cfg)
    t = policy(cfg)
    kind = _tc_geometry(cfg)
    if kind == "wire_sides":
        sides = _lengths(cfg["wire_sides"])
        if len(sides) != 2 or min(sides) <= 0.0:
            raise UsageError("--wire-sides takes two positive lengths L1,L2")
        res = crit.tc_wire_general(g, *sides, t=t)
    else:
        size = cfg[kind]
        if not size > 0.0:
            raise UsageError(f"--{kind.replace('_', '-')} must be > 0")
        if kind == "film":
            res = crit.tc_film(g, size)
        elif kind == "wire_area":
            res = crit.tc_wire_square(g, size, t)
        else:
            res = crit.tc_grain_cubic(g, size, t)
    emit(res.as_dict(), cfg, out)
    return EXIT_OK


def cmd_gap(cfg, out):
    _require(cfg, "d", "lengths", "m0sq", "lambda")
    lengths = _lengths(cfg["lengths"])
    try:
        p = GapProblem(cfg["D"], cfg["d"], lengths, cfg["m0sq"], cfg["lambda"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sol = solve_gap(p, policy(cfg), cfg["solver_tol"])
    emit(sol.as_dict(), cfg, out)
    return EXIT_OK


def _epstein(method, nu, lengths, cfg):
    d = len(lengths)
    if method == "direct":
        return ls.epstein_d_direct(nu, lengths, policy(cfg, DIRECT_REL_TOL))
    t = policy(cfg)
    if method == "recurrence":
        return ls.epstein_d_recurrence(nu, lengths, t)
    D = 2.0 * nu + 2.0
    if d == 2:
        return ls.e2_continued(D, lengths[0], lengths[1], t)
    return ls.e3_continued(D, lengths, t)


def cmd_epstein(cfg, out):
    _require(cfg, "nu", "lengths")
    lengths = _lengths(cfg["lengths"])
    if len(lengths) not in (2, 3) and cfg["method"] != "direct":
        raise UsageError("recurrence and continued methods need 2 or 3 lengths")
    if cfg["method"] not in ("direct", "recurrence", "continued", "both"):
        raise UsageError(f"unknown method {cfg['method']!r}")
    if cfg["method"] == "both":
        a = _epstein("direct", cfg["nu"], lengths, cfg)
        b = _epstein("recurrence", cfg["nu"], lengths, cfg)
        record = {"direct": a.as_dict(), "recurrence": b.as_dict(),
                  "difference": a.value - b.value}
    else:
        record = _epstein(cfg["method"], cfg["nu"], lengths, cfg).as_dict()
    emit(record, cfg, out)
    return EXIT_OK


_SWEEP_POWER = {"film": 1, "wire": 2, "grain": 3}


def sweep_rows(g, geometry, lo, hi, steps, t):
    """(size, 1/linear size, tc, transition_exists) on an even grid of sizes."""
    power = _SWEEP_POWER[geometry]
    rows = []
    for size in np.linspace(lo, hi, steps):
        size = float(size)
        if geometry == "film":
            res = crit.tc_film(g, size)
        elif geometry == "wire":
            res = crit.tc_wire_square(g, size, t)
        else:
            res = crit.tc_grain_cubic(g, size, t)
        rows.append((size, 1.0 / size ** (1.0 / power), res.tc, res.transition_exists))
    return rows


def cmd_sweep(cfg, out):
    _require(cfg, "geometry", "from", "to", "steps")
    if cfg["geometry"] not in _SWEEP_POWER:
        raise UsageError("--geometry must be film, wire or grain")
    if not 0.0 < cfg["from"] < cfg["to"]:
        raise UsageError("need 0 < --from < --to")
    if cfg["steps"] < 2:
        raise UsageError("--steps must be >= 2")
    g = _gl(cfg)
    rows = sweep_rows(g, cfg["geometry"], cfg["from"], cfg["to"], cfg["steps"], policy(cfg))
    d = cfg["precision"]
    if cfg["format"] == "json":
        keys = ("size", "inv_linear_size", "tc", "transition_exists")
        out.write(json.dumps([_jsonable(dict(zip(keys, r)), d) for r in rows], indent=2) + "\n")
        return EXIT_OK
    buf = io.StringIO()
    buf.write("size,inv_linear_size,tc,transition_exists\n")
    for r in rows:
        buf.write(",".join(fmt(v, d) for v in r) + "\n")
    out.write(buf.getvalue())
    return EXIT_OK


def cmd_verify(cfg, out):
    results = checks.run_checks(cfg["max_index"])
    d = min(cfg["precision"], 8)
    if cfg["format"] == "json":
        record = {"checks": [{"name": c.name, "passed": c.passed, "detail": c.detail,
                              "seconds": c.seconds} for c in results],
                  "passed": all(c.passed for c in results)}
        out.write(json.dumps(_jsonable(record, d), indent=2) + "\n")
    else:
        width = max(len(c.name) for c in results)
        for i, c in enumerate(results, 1):
            out.write(f"{i:2d}  {'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.detail}\n")
        n_pass = sum(c.passed for c in results)
        out.write(f"{n_pass}/{len(results)} checks passed\n")
        if all(c.passed for c in results):
            out.write("diagnostics (not checked):\n")
            for name, value, residual in checks.diagnostics(policy(cfg)):
                out.write(f"    {name}: {fmt(value, d)} (extrapolation residual {fmt(residual, 2)})\n")
    return EXIT_OK if all(c.passed for c in results) else EXIT_VERIFY


COMMANDS = {
    "constants": cmd_constants, "tc": cmd_tc, "gap": cmd_gap,
    "epstein": cmd_epstein, "sweep": cmd_sweep, "verify": cmd_verify,
}


# --------------------------------------------------------------------------
# argument parsing


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default=argparse.SUPPRESS)
    common.add_argument("--precision", type=int, default=argparse.SUPPRESS, help="significant digits, 4 to 15")
    common.add_argument("--config", default=argparse.SUPPRESS, help="flat key=value file; flags override it")
    common.add_argument("--max-index", dest="max_index", type=int, default=argparse.SUPPRESS,
                        help="per-index summation cap (also CCRIT_MAX_INDEX)")
    common.add_argument("--rel-tol", dest="rel_tol", type=float, default=argparse.SUPPRESS,
                        help="relative truncation tolerance (default 1e-12; 1e-9 for direct"
                             " Epstein sums)")

    gl = argparse.ArgumentParser(add_help=False)
    gl.add_argument("--alpha", type=float, default=None)
    gl.add_argument("--lambda", dest="lambda", type=float, default=None)
    gl.add_argument("--t0", type=float, default=None)

    parser = argparse.ArgumentParser(
        prog="ccrit", parents=[common],
        description="Size-dependent critical temperatures and the lattice sums behind them.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="print C1, C2, C3")
    p.add_argument("--check", action="store_true", help="exit 1 if C2 is off its published value")

    p = sub.add_parser("tc", parents=[common, gl], help="critical temperature of one sample")
    p.add_argument("--film", type=float, default=None, help="film thickness L")
    p.add_argument("--wire-area", dest="wire_area", type=float, default=None)
    p.add_argument("--grain-volume", dest="grain_volume", type=float, default=None)
    p.add_argument("--wire-sides", dest="wire_sides", default=None,
                   help="L1,L2 of a rectangular wire (diagnostic)")

    p = sub.add_parser("gap", parents=[common], help="solve the gap equation")
    p.add_argument("--D", dest="D", type=float, default=None)
    p.add_argument("--d", dest="d", type=int, default=None)
    p.add_argument("--lengths", default=None, help="comma-separated L_i")
    p.add_argument("--m0sq", type=float, default=None)
    p.add_argument("--lambda", dest="lambda", type=float, default=None)
    p.add_argument("--solver-tol", dest="solver_tol", type=float, default=None)

    p = sub.add_parser("epstein", parents=[common], help="Epstein zeta sum E_d(nu; L)")
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--lengths", default=None, help="comma-separated L_i")
    p.add_argument("--method", choices=("direct", "recurrence", "continued", "both"), default=None)

    p = sub.add_parser("sweep", parents=[common, gl], help="T_c over a range of sizes as CSV")
    p.add_argument("--geometry", choices=tuple(_SWEEP_POWER), default=None)
    p.add_argument("--from", dest="from", type=float, default=None)
    p.add_argument("--to", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)

    sub.add_parser("verify", parents=[common], help="run the verification suite")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg, out)
    except UsageError as exc:
        print(f"ccrit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoSolutionError as exc:
        print(f"ccrit {args.command}: no solution: {exc} (defect {exc.defect!r})", file=sys.stderr)
        return EXIT_COMPUTE
    except CcritError as exc:
        print(f"ccrit {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
