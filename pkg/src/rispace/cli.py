"""Command line front end: ``rispace <subcommand> ...``.

Function arguments accept either a path to a JSON file or inline JSON.
Exit status is 0 on success, 1 when a certification or suite check fails
and 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .harness import SUITES, run_suite, summing_ratio
from .mixed2d import (CounterexampleParams, StepFn2D, build_counterexample, mixed_norm,
                      transpose_lower_bound)
from .norms import SpaceSpec, norm
from .rademacher import head_equivalence_sides
from .signselect import CertificationError, SignSearchError, select_signs
from .stepfn import StepFn1D, rearrange


class CertificationFailed(Exception):
    """Raised to turn a failed check into exit status 1 after printing output."""


def _load_json(text: str):
    s = text.strip()
    if s[:1] in "[{" or s[:1].isdigit() or s[:1] == "-":
        return json.loads(s)
    return json.loads(Path(text).read_text())


def _load_funcs(text: str) -> list[StepFn1D]:
    data = _load_json(text)
    if isinstance(data, dict):
        data = data.get("functions", [data])
    return [StepFn1D.from_dict(d) for d in data]


def _round(obj, precision):
    if precision is None:
        return obj
    if isinstance(obj, float) and math.isfinite(obj):
        return float(f"{obj:.{precision}g}")
    if isinstance(obj, dict):
        return {k: _round(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, precision) for v in obj]
    return obj


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _emit(result, args, rows=None) -> None:
    result = _round(_plain(result), args.precision)
    if args.out == "json":
        print(json.dumps(result, sort_keys=True))
        return
    rows = _round(_plain(rows), args.precision) if rows is not None else [result]
    buf = io.StringIO()
    keys = sorted({k for r in rows for k in r})
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v
                    for k, v in r.items()})
    sys.stdout.write(buf.getvalue())


# -- subcommands -------------------------------------------------------------


def cmd_norm(args):
    f = StepFn1D.from_dict(_load_json(args.func))
    space = SpaceSpec.parse(args.space)
    _emit({"space": str(space), "norm": norm(f, space)}, args)


def cmd_rearrange(args):
    g = rearrange(StepFn1D.from_dict(_load_json(args.func)))
    rows = [{"left": float(a), "right": float(b), "value": float(v)}
            for a, b, v in zip(g.breakpoints[:-1], g.breakpoints[1:], g.values)]
    _emit(g.to_dict(), args, rows)


def cmd_rad_equiv(args):
    a = np.asarray(_load_json(args.coeffs), dtype=float)
    lhs, rhs = head_equivalence_sides(a, args.i)
    _emit({"i": args.i, "n": int(a.size), "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs}, args)


def cmd_select_signs(args):
    g = _load_funcs(args.funcs)
    try:
        eps, cert = select_signs(g, args.i, seed=args.seed)
    except (CertificationError, SignSearchError) as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        raise CertificationFailed from exc
    _emit({"signs": eps.tolist(), "certificate": cert.to_dict()}, args)


def cmd_counterexample(args):
    P = CounterexampleParams(args.n, args.p)
    K = build_counterexample(P, args.mode)
    if args.mode == "analytic":
        sup = K.sup_norm()
        col = K.column_norm()
        exact, bound = transpose_lower_bound(P)
    else:
        xp = SpaceSpec.xp(P.p)
        sup = mixed_norm(K, SpaceSpec.lp(math.inf), xp)
        col = mixed_norm(K.transpose(), SpaceSpec.lp(1.0), xp)
        exact, bound = col ** P.p, transpose_lower_bound(P)[1]
    ok = sup <= 1 + 1e-12 and exact >= bound * (1 - 1e-12)
    _emit({"p": P.p, "n": P.n, "mode": args.mode, "col_norm": col,
           "col_norm_p": exact, "bound": bound, "sup_norm": sup,
           "sup_norm_check": bool(sup <= 1 + 1e-12)}, args)
    if not ok:
        raise CertificationFailed


def cmd_mixed_norm(args):
    F = StepFn2D.from_dict(_load_json(args.func2d))
    outer, inner = SpaceSpec.parse(args.outer), SpaceSpec.parse(args.inner)
    if args.transpose:
        F = F.transpose()
    _emit({"outer": str(outer), "inner": str(inner), "transposed": args.transpose,
           "norm": mixed_norm(F, outer, inner)}, args)


def cmd_summing(args):
    f = _load_funcs(args.funcs)
    seq, target, domain = (SpaceSpec.parse(s) for s in (args.seq, args.target, args.domain))
    r = summing_ratio(f, seq, target, domain, seed=args.seed)
    _emit({"seq": str(seq), "target": str(target), "domain": str(domain),
           "n": len(f), "ratio": r}, args)


def _param_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def cmd_suite(args):
    params = {}
    for item in args.param or []:
        key, _, val = item.partition("=")
        params[key] = _param_value(val)
    if args.trials is not None:
        params["trials"] = args.trials
    report = run_suite(args.id, args.seed, params, workers=args.workers)
    if args.out == "json":
        d = _round(report.to_dict(), args.precision)
        print(json.dumps(d, sort_keys=True))
    else:
        sys.stdout.write(report.to_csv())
    if not report.aggregate.get("all_passed", True):
        raise CertificationFailed


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def flags(defaults: bool) -> argparse.ArgumentParser:
        # subcommands repeat the global flags without defaults so that a
        # flag given before the subcommand is not overwritten
        p = argparse.ArgumentParser(add_help=False)
        d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
        p.add_argument("--seed", type=int, default=d(0))
        p.add_argument("--trials", type=int, default=d(None))
        p.add_argument("--out", choices=("json", "csv"), default=d("json"))
        p.add_argument("--precision", type=int, default=d(None),
                       help="significant digits for floats in the output")
        return p

    common, sub_common = flags(True), flags(False)

    ap = argparse.ArgumentParser(prog="rispace", parents=[common],
                                 description="Norms, rearrangements and sign-selection "
                                             "experiments on step functions.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[sub_common], help=help_)
        p.set_defaults(handler=func)
        return p

    p = add("norm", cmd_norm, "norm of a step function")
    p.add_argument("--func", required=True)
    p.add_argument("--space", required=True, help="e.g. Lp:2, Xp:1.5, M:phi_p:1.5, ExpL:2")

    p = add("rearrange", cmd_rearrange, "decreasing rearrangement")
    p.add_argument("--func", required=True)

    p = add("rad-equiv", cmd_rad_equiv, "both sides of the Rademacher head estimate")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--i", type=int, required=True)

    p = add("select-signs", cmd_select_signs, "certified sign selection at level 2^-i")
    p.add_argument("--funcs", required=True)
    p.add_argument("--i", type=int, required=True)

    p = add("counterexample", cmd_counterexample, "transposition counterexample K_n")
    p.add_argument("--p", type=float, default=1.5)
    p.add_argument("--n", type=int, default=14)
    p.add_argument("--mode", choices=("analytic", "materialized"), default="analytic")

    p = add("mixed-norm", cmd_mixed_norm, "mixed norm of a 2D step function")
    p.add_argument("--func2d", required=True)
    p.add_argument("--outer", required=True)
    p.add_argument("--inner", required=True)
    p.add_argument("--transpose", action="store_true", default=False)

    p = add("summing", cmd_summing, "summing ratio of a family")
    p.add_argument("--funcs", required=True)
    p.add_argument("--seq", required=True, help="Lp:q for l^q, weak:q[:average]")
    p.add_argument("--target", required=True)
    p.add_argument("--domain", required=True)

    p = add("suite", cmd_suite, "run a randomized inequality suite")
    p.add_argument("id", choices=sorted(SUITES))
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--workers", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.handler(args)
    except CertificationFailed:
        return 1
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
