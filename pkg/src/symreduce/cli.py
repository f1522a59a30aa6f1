"""Command-line front end: ``python -m symreduce <command> <file> ...``.

Exit codes: 0 ok, 1 counterexample or failed consistency check, 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from . import __version__
from .bounds import (BoundNotApplicable, applicable_bounds, best_kappa, fit_simplex, kappa_simplex,
                     kappa_weighted)
from .convexity import (e_gf_profile, fit_h_simplex, h_profile, hessian_bounds, hessian_form,
                        kappa_hessian_simplex, quadratic_is_convex)
from .expr import ExprSyntaxError, load_polynomial
from .multisym import NotSymmetricError, exponent_profile, is_k_symmetric
from .poly import PolyFormatError, Polynomial, ShapeError, TermFormatCache
from .reduce import Restrictor, enumerate_partitions, enumerate_subspaces_up_to, plan_size
from .verify import (CounterexampleAt, NoCounterexampleFound, check_instances,
                     kappa_consistency_experiment)

EXIT_OK, EXIT_FOUND, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _radii(text: str) -> List[Fraction]:
    try:
        out = [Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated radii, got {text!r}") from None
    if not out or any(r <= 0 for r in out):
        raise argparse.ArgumentTypeError("radii must be positive")
    return out


def _profile_json(profile) -> list:
    return [list(a) for a in sorted(profile, reverse=True)]


def _read(path: str) -> Polynomial:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    return load_polynomial(text)


def _emit(args, payload: dict, lines: List[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, default=str))
    else:
        print("\n".join(lines))


def _bound_line(b) -> str:
    clamp = f" (raw {b.raw_value}, clamped to n)" if b.n_clamped else ""
    wit = b.witness.as_json() if hasattr(b.witness, "as_json") else b.witness
    note = f" [{b.notes}]" if b.notes else ""
    return f"  {b.method.value:<16} kappa <= {b.value}{clamp}  witness={wit}{note}"


# ---------------------------------------------------------------------------
# commands

def cmd_analyze(args) -> int:
    f = _read(args.file)
    sym = is_k_symmetric(f)
    payload = {"shape": list(f.shape), "terms": len(f), "symmetric": sym,
               "degree": f.degree() if not f.is_zero() else None,
               "column_degrees": list(f.column_degrees())}
    lines = [f"shape: n={f.n} k={f.k}, {len(f)} terms",
             f"k-symmetric: {'yes' if sym else 'no'}",
             f"degree: {payload['degree']}",
             f"column degrees: {tuple(f.column_degrees())}"]
    if sym:
        prof = exponent_profile(f)
        bounds = applicable_bounds(f, args.cap)
        payload["E_f"] = _profile_json(prof)
        payload["bounds"] = [b.as_json() for b in bounds]
        lines.append(f"E_f: {sorted(prof, reverse=True)}")
        lines.append("kappa bounds:")
        lines.extend(_bound_line(b) for b in bounds)
        if bounds:
            best = min(bounds, key=lambda b: b.value)
            payload["best"] = best.as_json()
            lines.append(f"best: kappa <= {best.value} ({best.method.value})")
    else:
        lines.append("kappa bounds withheld: the input is not k-symmetric")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_kappa(args) -> int:
    f = _read(args.file)
    if not is_k_symmetric(f):
        raise UsageError("kappa bounds need a k-symmetric polynomial")
    if args.weights:
        bounds = [kappa_weighted(f, args.weights)]
    else:
        bounds = applicable_bounds(f, args.cap)
        if not bounds:
            raise BoundNotApplicable("no bound applies")
    best = min(bounds, key=lambda b: b.value)
    payload = {"best": best.as_json(), "bounds": [b.as_json() for b in bounds]}
    lines = [_bound_line(b) for b in bounds] + [f"kappa <= {best.value}"]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_hessform(args) -> int:
    f = _read(args.file)
    text = hessian_form(f).to_text()
    if args.output:
        Path(args.output).write_text(text)
        print(f"wrote {args.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_hf(args) -> int:
    f = _read(args.file)
    if not is_k_symmetric(f):
        raise UsageError("H_f needs a k-symmetric polynomial")
    hf = h_profile(f)
    egf = e_gf_profile(f)
    min_int = 2 if args.strict else 1
    bounds = hessian_bounds(f, args.cap, min_int)
    payload = {"H_f": _profile_json(hf), "E_gf": _profile_json(egf),
               "bounds": [b.as_json() for b in bounds]}
    lines = [f"H_f: {sorted(hf, reverse=True)}",
             f"E_(g_f): {sorted(egf, reverse=True)}",
             "kappa(g_f) bounds:"] + [_bound_line(b) for b in bounds]
    if args.simplex:
        b = kappa_hessian_simplex(f, args.simplex)
        payload["given_simplex"] = b.as_json()
        lines.append(_bound_line(b) + "  (given simplex)")
    _emit(args, payload, lines)
    return EXIT_OK


def _instance_name(lam) -> str:
    return "lambda_" + "-".join(map(str, lam)) + ".poly"


def cmd_reduce(args) -> int:
    f = _read(args.file)
    if args.hessian:
        f = hessian_form(f).g
    m = min(args.m, f.n)
    restrictor = Restrictor(f, provenance=args.file)
    parts = enumerate_partitions(f.n, m) if args.maximal_only else enumerate_subspaces_up_to(f.n, m)
    out_dir = Path(args.output) if args.output else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    count, per_level = 0, {}
    fmt = TermFormatCache(f.k)
    for lam in parts:
        inst = restrictor(lam)
        count += 1
        per_level[len(lam)] = per_level.get(len(lam), 0) + 1
        if out_dir:
            (out_dir / _instance_name(lam)).write_text(inst.to_text(fmt))
        elif not args.json:
            sys.stdout.write(inst.to_text(fmt) + "\n")
    expected = plan_size(f.n, m, args.maximal_only)
    assert count == expected
    summary = {"instances": count, "per_level": per_level, "m": m,
               "directory": str(out_dir) if out_dir else None}
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        levels = ", ".join(f"l={ell}: {c}" for ell, c in sorted(per_level.items()))
        print(f"{count} reduced instances ({levels})", file=sys.stderr if not out_dir else sys.stdout)
    return EXIT_OK


def cmd_verify(args) -> int:
    f = _read(args.file)
    if args.m is None:
        if not is_k_symmetric(f):
            raise UsageError("--m is required for a non-symmetric input")
        bound = best_kappa(f, args.cap)
        m = bound.value
    else:
        m = args.m
    if not 1 <= m <= f.n:
        raise UsageError(f"--m must lie in 1..{f.n}")
    report = kappa_consistency_experiment(f, m, args.radii, args.starts, args.seed, args.tol)
    summary = report.as_json()
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print("\n".join(report.lines()))
        print("# summary")
        print(json.dumps(summary))
    return EXIT_OK if report.passed else EXIT_FOUND


def cmd_convexity(args) -> int:
    f = _read(args.file)
    lines: List[str] = []
    payload: dict = {"shape": list(f.shape)}
    if f.degree() <= 2:
        convex = quadratic_is_convex(f)
        payload.update(method="exact constant-Hessian test", convex=convex)
        lines.append(f"degree <= 2: Hessian is constant; exact test says "
                     f"{'convex' if convex else 'not convex'}")
        _emit(args, payload, lines)
        return EXIT_OK if convex else EXIT_FOUND
    g = hessian_form(f).g
    if is_k_symmetric(f):
        bounds = hessian_bounds(f, args.cap, 2 if args.strict else 1)
        bound = min(bounds, key=lambda b: b.value)
        m = bound.value if args.m is None else min(args.m, f.n)
        payload["bound"] = bound.as_json()
        lines.append(f"kappa(g_f) <= {bound.value} ({bound.method.value})")
    else:
        m = f.n
        lines.append("input is not k-symmetric: no reduction, checking g_f directly")
    levels = range(1, m + 1) if args.all_levels else [m]
    restrictor = Restrictor(g, provenance=args.file)
    lams = [lam for ell in levels for lam in enumerate_partitions(f.n, ell)]
    lines.append(f"{len(lams)} reduced instances of g_f at l in {list(levels)}, "
                 f"each in {2 * f.k * m} variables")
    results = check_instances((restrictor(lam) for lam in lams), args.radii, args.starts, args.seed)
    records = []
    confirmed = unconfirmed = 0
    for inst, verdict in results:
        if isinstance(verdict, CounterexampleAt):
            confirmed += verdict.confirmed
            unconfirmed += not verdict.confirmed
        records.append({"lambda": list(inst.lam), "verdict": type(verdict).__name__,
                        "value": getattr(verdict, "best_value", getattr(verdict, "value", None)),
                        "confirmed": getattr(verdict, "confirmed", None)})
        lines.append(f"lambda={inst.lam} {verdict}")
    clean = sum(isinstance(v, NoCounterexampleFound) for _, v in results)
    if confirmed:
        overall = "g_f takes a negative value: f is not convex (confirmed in exact arithmetic)"
    elif unconfirmed:
        overall = "negative values seen in floating point only; no confirmed counterexample"
    else:
        overall = "no counterexample to convexity (heuristic search, not a certificate)"
    payload.update(instances=len(results), no_counterexample=clean, confirmed_counterexamples=confirmed,
                   verdict=overall, records=records)
    lines.append(f"NoCounterexampleFound on {clean}/{len(results)} instances")
    lines.append(f"verdict: {overall}")
    if not args.json:
        lines.append("# summary")
        lines.append(json.dumps({k: v for k, v in payload.items() if k != "records"}, default=str))
    _emit(args, payload, lines)
    return EXIT_FOUND if confirmed else EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symreduce", description="Certified dimension reduction for k-symmetric polynomials.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="expression or canonical polynomial file ('-' for stdin)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(func=func)
        return p

    p = add("analyze", cmd_analyze, "symmetry, degrees, E_f and every applicable kappa bound")
    p.add_argument("--cap", type=int, default=8, help="weight cap for the simplex fit")

    p = add("kappa", cmd_kappa, "kappa bounds only")
    p.add_argument("--weights", type=_int_list, help="comma-separated positive column weights")
    p.add_argument("--cap", type=int, default=8, help="weight cap for the simplex fit")

    p = add("hessform", cmd_hessform, "write the Hessian form g_f")
    p.add_argument("-o", "--output", help="write here instead of stdout")

    p = add("hf", cmd_hf, "H_f, E_(g_f) and kappa(g_f) bounds")
    p.add_argument("--cap", type=int, default=8, help="weight cap for the simplex fit")
    p.add_argument("--strict", action="store_true", help="keep every simplex intercept >= 2")
    p.add_argument("--simplex", type=lambda s: [Fraction(x) for x in s.split(",")],
                   help="also evaluate the 3^k bound for these intercepts")

    p = add("reduce", cmd_reduce, "write every reduced instance up to level m")
    p.add_argument("--m", type=int, required=True, help="largest number of distinct rows")
    p.add_argument("-o", "--output", help="directory for the instance files")
    p.add_argument("--hessian", action="store_true", help="reduce g_f instead of f")
    p.add_argument("--maximal-only", action="store_true", help="only partitions with exactly m parts")

    for name, func, help_text in [("verify", cmd_verify, "kappa-consistency experiment"),
                                  ("convexity", cmd_convexity, "convexity pipeline on g_f")]:
        p = add(name, func, help_text)
        p.add_argument("--m", type=int, default=None, help="reduction level (default: best bound)")
        p.add_argument("--radii", type=_radii, default=[Fraction(1), Fraction(4), Fraction(16)],
                       help="comma-separated squared radii (default 1,4,16)")
        p.add_argument("--starts", type=int, default=None, help="random starts per sphere")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--cap", type=int, default=8, help="weight cap for the simplex fit")
        if name == "verify":
            p.add_argument("--tol", type=float, default=1e-5, help="relative agreement tolerance")
        else:
            p.add_argument("--strict", action="store_true", help="keep every simplex intercept >= 2")
            p.add_argument("--all-levels", action="store_true",
                           help="check every l <= m, not just l = m")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ExprSyntaxError, PolyFormatError, ShapeError, UsageError, NotSymmetricError,
            BoundNotApplicable, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
