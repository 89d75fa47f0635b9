"""Command-line front end.

Subcommands: constants, norm, counterexample, bollobas, verify. Every JSON
document carries ``"schema": "1"``. Exit codes: 0 success, 1 verification
failure, 2 domain error, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from . import constants as C
from .bollobas import PRACTICAL, bollobas_correct, cauchy_monitor, make_schedule
from .counterexamples import verify_fN, verify_Pr, verify_Q
from .errors import DomainError, GuaranteeFailed, NoConvergence, VerificationFailure
from .norms import OptimizerConfig, s_norm, sup_norm, v_norm
from .polynomial import Polynomial
from .verify import run_suite

SCHEMA = "1"
EXIT_OK, EXIT_FAIL, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2, 64
CSV_COLUMNS = ("s", "numeric", "exact", "gap", "escape_index")

DEFAULTS = {
    "seed": 0,
    "restarts": 32,
    "max_iters": 2000,
    "step_tol": 1e-10,
    "s_grid": 257,
    "format": "json",
    "output": None,
    "verbose": False,
    # per-subcommand
    "N_max": 10,
    "kind": "v",
    "s": None,
    "family": "Q",
    "p": 2.0,
    "k": 2,
    "r": 0.9,
    "n_trunc": 64,
    "N": 2,
    "n": 4,
    "eps": 0.1,
    "mode": PRACTICAL,
    "filter": None,
    "space": None,
    "poly": None,
    "x": None,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _p_value(text):
    t = str(text).strip().lower()
    return math.inf if t in ("inf", "infinity") else float(t)


def _common(parser):
    g = parser.add_argument_group("common options")
    g.add_argument("--config", help="JSON file of option values; flags override it")
    g.add_argument("--seed", type=int, help="base seed (default: $WNL_SEED or 0)")
    g.add_argument("--restarts", type=int)
    g.add_argument("--max-iters", dest="max_iters", type=int)
    g.add_argument("--step-tol", dest="step_tol", type=float)
    g.add_argument("--s-grid", dest="s_grid", type=int)
    g.add_argument("--format", choices=("json", "csv"))
    g.add_argument("--output", help="write to this path instead of stdout")
    g.add_argument("--verbose", action="store_true", default=None)


def build_parser():
    parser = _Parser(prog="wnl", description="Weighted norms of polynomials on complex l_p^n.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("constants", help="table of delta_N, s(N), s(1/2,N), M_N")
    c.add_argument("--N-max", dest="N_max", type=int)
    _common(c)

    n = sub.add_parser("norm", help="s-, sup- or weighted norm of a polynomial")
    n.add_argument("--poly", required=True, help="polynomial JSON file ('-' for stdin)")
    n.add_argument("--kind", choices=("s", "sup", "v"))
    n.add_argument("--s", type=float, help="radius for --kind s")
    n.add_argument("--space", help="n,p; checked against the polynomial's space")
    _common(n)

    e = sub.add_parser("counterexample", help="verify P_r, Q or f_N")
    e.add_argument("--family", choices=("Pr", "Q", "fN"))
    e.add_argument("--p", type=_p_value)
    e.add_argument("--k", type=int)
    e.add_argument("--r", type=float)
    e.add_argument("--n-trunc", dest="n_trunc", type=int)
    e.add_argument("--N", type=int)
    e.add_argument("--n", type=int, help="dimension for fN")
    _common(e)

    b = sub.add_parser("bollobas", help="run the norm-attainment correction")
    b.add_argument("--poly", required=True)
    b.add_argument("--x", required=True, help="JSON file with the starting point")
    b.add_argument("--eps", type=float)
    b.add_argument("--mode", choices=("faithful", "practical"))
    b.add_argument("--space", help="n,p; checked against the polynomial's space")
    _common(b)

    v = sub.add_parser("verify", help="run the property suite")
    v.add_argument("--filter", help="comma-separated substrings of property names")
    _common(v)
    return parser


def resolve(args) -> dict:
    """defaults < $WNL_SEED < config file < flags."""
    opts = dict(DEFAULTS)
    if os.environ.get("WNL_SEED"):
        try:
            opts["seed"] = int(os.environ["WNL_SEED"])
        except ValueError as e:
            raise UsageError(f"WNL_SEED must be an integer: {e}") from None
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_opts = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}") from None
        if not isinstance(file_opts, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(file_opts) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        opts.update(file_opts)
    for k, val in vars(args).items():
        if val is not None and k != "config":
            opts[k] = val
    if "p" in opts and isinstance(opts["p"], str):
        opts["p"] = _p_value(opts["p"])
    return opts


def optimizer_config(opts) -> OptimizerConfig:
    return OptimizerConfig(
        restarts=int(opts["restarts"]),
        max_iters=int(opts["max_iters"]),
        step_tol=float(opts["step_tol"]),
        seed=int(opts["seed"]),
        s_grid=int(opts["s_grid"]),
    )


def clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isfinite(f):
            return f
        return "inf" if f > 0 else ("-inf" if f < 0 else "nan")
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), separators=(", ", ": "))


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_poly(path, space_arg=None) -> Polynomial:
    try:
        P = Polynomial.from_json(_read_text(path))
    except OSError as e:
        raise UsageError(f"cannot read polynomial {path}: {e}") from None
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise UsageError(f"malformed polynomial JSON in {path}: {e}") from None
    if space_arg:
        n, p = _parse_space(space_arg)
        if n != P.space.dim or p != P.space.p:
            raise UsageError(f"--space {space_arg} does not match the polynomial's l_{P.space.p}^{P.space.dim}")
    return P


def _parse_space(text):
    try:
        n, p = str(text).split(",")
        return int(n), _p_value(p)
    except ValueError:
        raise UsageError(f"--space expects 'n,p', got {text!r}") from None


def _load_point(path, dim):
    try:
        data = json.loads(_read_text(path))
    except OSError as e:
        raise UsageError(f"cannot read point {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"malformed point JSON in {path}: {e}") from None
    if isinstance(data, dict):
        data = data.get("x", data.get("witness"))
    try:
        x = np.array([complex(*z) if isinstance(z, list) else complex(z) for z in data], dtype=np.complex128)
    except (TypeError, ValueError):
        raise UsageError("point must be a list of numbers or [re, im] pairs") from None
    if x.shape != (dim,):
        raise UsageError(f"point has {x.size} coordinates, polynomial lives in dimension {dim}")
    return x


# commands: each returns (text, exit_code)


def cmd_constants(opts):
    rows = C.constants_table(int(opts["N_max"]))
    if opts["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(C.COLUMNS)
        for r in rows:
            w.writerow([repr(getattr(r, c)) for c in C.COLUMNS])
        return buf.getvalue(), EXIT_OK
    doc = {"schema": SCHEMA, "columns": list(C.COLUMNS), "rows": [{c: getattr(r, c) for c in C.COLUMNS} for r in rows]}
    return dumps(doc) + "\n", EXIT_OK


def cmd_norm(opts):
    if not opts["poly"]:
        raise UsageError("--poly is required")
    P = _load_poly(opts["poly"], opts.get("space"))
    cfg = optimizer_config(opts)
    kind = opts["kind"]
    if kind == "s":
        if opts["s"] is None:
            raise UsageError("--kind s needs --s")
        res = s_norm(P, float(opts["s"]), cfg)
    elif kind == "sup":
        res = sup_norm(P, cfg)
    else:
        res = v_norm(P, cfg)
    doc = {"schema": SCHEMA, "command": "norm", "seed": cfg.seed, **res.to_dict()}
    return dumps(doc) + "\n", EXIT_OK


def cmd_counterexample(opts):
    cfg = optimizer_config(opts)
    fam = opts["family"]
    if fam == "Pr":
        rep = verify_Pr(opts["p"], opts["k"], opts["r"], opts["n_trunc"], cfg)
    elif fam == "Q":
        rep = verify_Q(opts["p"], opts["k"], opts["n_trunc"], cfg, seeds=(cfg.seed,))
    elif fam == "fN":
        rep = verify_fN(opts["p"], opts["N"], opts["n"], cfg)
    else:
        raise UsageError(f"unknown family {fam!r}")
    code = EXIT_OK if rep["passed"] else EXIT_FAIL
    if opts["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in rep["rows"]:
            w.writerow([repr(clean(row[c])) if isinstance(row[c], float) else row[c] for c in CSV_COLUMNS])
        return buf.getvalue(), code
    return dumps({"schema": SCHEMA, "command": "counterexample", "seed": cfg.seed, **rep}) + "\n", code


def cmd_bollobas(opts):
    if not opts["poly"] or not opts["x"]:
        raise UsageError("--poly and --x are required")
    P = _load_poly(opts["poly"], opts.get("space"))
    x = _load_point(opts["x"], P.space.dim)
    cfg = optimizer_config(opts)
    lines = []
    code = EXIT_OK
    try:
        _, _, trace = bollobas_correct(P, x, float(opts["eps"]), opts["mode"], cfg)
    except GuaranteeFailed as e:
        trace = e.report
        code = EXIT_FAIL
    records = trace.json_records()
    monitor = cauchy_monitor(trace, raise_on_fail=False)
    records[-1]["cauchy_monitor"] = monitor
    if monitor["status"] == "violated" or not trace.ok:
        records[-1]["passed"] = False
        code = EXIT_FAIL
    for rec in records:
        lines.append(dumps({"schema": SCHEMA, **rec}))
    return "\n".join(lines) + "\n", code


def cmd_verify(opts):
    results = run_suite(int(opts["seed"]), opts.get("filter"))
    failed = [r for r in results if not r["passed"]]
    code = EXIT_FAIL if failed else EXIT_OK
    if opts["format"] == "json":
        doc = {
            "schema": SCHEMA,
            "command": "verify",
            "seed": int(opts["seed"]),
            "results": results,
            "passed": len(results) - len(failed),
            "failed": len(failed),
        }
        return dumps(doc) + "\n", code
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("name", "passed", "detail"))
    for r in results:
        w.writerow((r["name"], "PASS" if r["passed"] else "FAIL", r["detail"]))
    return buf.getvalue(), code


COMMANDS = {
    "constants": cmd_constants,
    "norm": cmd_norm,
    "counterexample": cmd_counterexample,
    "bollobas": cmd_bollobas,
    "verify": cmd_verify,
}


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        opts = resolve(args)
        logging.basicConfig(level=logging.INFO if opts["verbose"] else logging.WARNING, stream=sys.stderr)
        text, code = COMMANDS[args.command](opts)
    except UsageError as e:
        print(f"wnl: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as e:
        print(f"wnl: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except (VerificationFailure, NoConvergence) as e:
        print(f"wnl: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL
    _emit(text, opts["output"])
    # verify also prints one human-readable pass/fail line per property, on stderr
    if args.command == "verify":
        for line in _verify_lines(text, opts["format"]):
            print(line, file=sys.stderr)
    return code


def _verify_lines(text, fmt):
    if fmt != "json":
        return []
    doc = json.loads(text)
    out = [f"{'PASS' if r['passed'] else 'FAIL'} {r['name']}: {r['detail']}" for r in doc["results"]]
    out.append(f"{doc['passed']} passed, {doc['failed']} failed")
    return out


if __name__ == "__main__":
    sys.exit(main())
