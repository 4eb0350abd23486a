"""Command-line front-end.

Exit status: 0 when every check passes, 1 when a mathematical check fails,
2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import fflab
from .flex import (
    FIRST_PARTIALS_AT_WITNESS,
    H_PARTIALS_AT_WITNESS,
    SECOND_PARTIALS_AT_WITNESS,
    THIRD_PARTIALS_AT_WITNESS,
    alpha_first,
    build_f,
    build_h,
    derivative_table,
    hessian_det,
    index_label,
    verify_certificate,
    witness_point,
)
from .multicone import BlockPoint, MultiConeSystem, NotOnCone, orbit_curve, orbit_limit
from .poly import (
    FLEX_GROUPING,
    X_NAMES,
    NotHomogeneous,
    ParseError,
    UnknownVariable,
    ZeroPolynomialError,
    isotypic_decompose,
    multidegree,
    parse,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

REFERENCE_TABLES = {**FIRST_PARTIALS_AT_WITNESS, **SECOND_PARTIALS_AT_WITNESS, **THIRD_PARTIALS_AT_WITNESS}


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(text_lines))


def _parse_expr(text: str):
    try:
        return parse(text)
    except (ParseError, UnknownVariable) as exc:
        raise UsageError(f"parse error: {exc}") from None


def _degree_fields(p) -> tuple[list[int] | None, list[int] | None]:
    try:
        d = multidegree(p, FLEX_GROUPING)
    except (NotHomogeneous, ZeroPolynomialError):
        return None, None
    return list(d), list(alpha_first(d))


def cmd_certificate(args) -> int:
    point = witness_point()
    if args.corrupt_witness:
        point["x1"] = 1
    report = verify_certificate(point)
    lines = []
    for rec in report.records:
        mark = "PASS" if rec.passed else "FAIL"
        data = rec.to_json()
        lines.append(f"[{mark}] {rec.id}: computed {json.dumps(data['computed'])}"
                     f"; expected {json.dumps(data['expected'])}  ({rec.ref})")
    h = report["h_partials"].computed
    minor = report["jacobian_minor"].computed
    lines.append(f"h_(0)(c)={h['h_(0)']}, h_(1)(c)={h['h_(1)']}, minor={minor}")
    lines.append(f"verdict: {report.verdict}")
    _emit(args, report.to_json(), lines)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_tables(args) -> int:
    point = witness_point()
    rows = []
    for order in (1, 2, 3):
        for idx, poly in derivative_table(order).items():
            value = poly.evaluate(point)
            rows.append({
                "label": index_label("f", idx),
                "order": order,
                "polynomial": str(poly),
                "value": value,
                "expected": REFERENCE_TABLES[idx],
                "pass": value == REFERENCE_TABLES[idx],
            })
    h = build_h()
    for idx, expected in H_PARTIALS_AT_WITNESS.items():
        value = h.diff(X_NAMES[idx[0]]).evaluate(point)
        rows.append({
            "label": index_label("h", idx),
            "order": 1,
            "polynomial": None,
            "value": value,
            "expected": expected,
            "pass": value == expected,
        })
    ok = all(r["pass"] for r in rows)
    width = max(len(r["polynomial"] or "") for r in rows)
    lines = [f"{'index':8} {'partial':{width}}  {'at c':>6} {'expected':>9}"]
    for r in rows:
        lines.append(f"{r['label']:8} {r['polynomial'] or '(from h)':{width}}  {r['value']:>6} "
                     f"{r['expected']:>9}{'' if r['pass'] else '  MISMATCH'}")
    _emit(args, {"rows": rows, "pass": ok}, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_decompose(args) -> int:
    g = _parse_expr(args.expr)
    comps = isotypic_decompose(g, FLEX_GROUPING)
    payload = {
        "input": str(g),
        "components": [
            {"multidegree": list(d), "alpha_first": list(alpha_first(d)), "polynomial": str(p)}
            for d, p in comps
        ],
    }
    if not comps:
        lines = ["zero polynomial; empty decomposition"]
    else:
        lines = [f"(x, a) = {d}  [(a, x) = {alpha_first(d)}]: {p}" for d, p in comps]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_hessian(args) -> int:
    p = _parse_expr(args.expr)
    hess = hessian_det(p)
    d, d_alpha = _degree_fields(hess)
    payload = {
        "input": str(p),
        "hessian": str(hess),
        "terms": len(hess),
        "multidegree": d,
        "alpha_first": d_alpha,
    }
    lines = [str(hess), f"terms: {len(hess)}"]
    if d is not None:
        lines.append(f"multidegree (x, a) = {tuple(d)}  [(a, x) = {tuple(d_alpha)}]")
    else:
        lines.append("multidegree: not multi-homogeneous")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_orbit(args) -> int:
    try:
        t = Fraction(args.t)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad rational parameter {args.t!r}") from None
    if t == 0:
        raise UsageError("orbit parameter must be nonzero")
    if args.block not in (1, 2):
        raise UsageError("block must be 1 (x) or 2 (alpha)")
    i = args.block - 1
    f, h = build_f(), build_h()
    system = MultiConeSystem(FLEX_GROUPING, [f, h])
    c = BlockPoint(FLEX_GROUPING, witness_point())
    try:
        point = orbit_curve(system, c, i, t)
    except NotOnCone as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    limit = orbit_limit(c, i)
    values = {"f": str(point.evaluate(f)), "h": str(point.evaluate(h))}
    limit_values = {"f": str(limit.evaluate(f)), "h": str(limit.evaluate(h))}
    ok = all(v == "0" for v in (*values.values(), *limit_values.values()))
    payload = {
        "block": args.block,
        "t": str(t),
        "point": point.to_json()["blocks"],
        "values": values,
        "limit_point": limit.to_json()["blocks"],
        "limit_values": limit_values,
        "pass": ok,
    }
    lines = [
        f"orbit point (block {args.block}, t = {t}): {payload['point']}",
        f"f = {values['f']}, h = {values['h']}",
        f"limit t -> 0: {payload['limit_point']}",
        f"f = {limit_values['f']}, h = {limit_values['h']}",
        f"verdict: {'pass' if ok else 'fail'}",
    ]
    _emit(args, payload, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sample(args) -> int:
    try:
        field = fflab.PrimeField(args.prime)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    reports = []
    lines = []
    if field.p <= fflab.MAX_ENUMERATION_PRIME:
        rep = fflab.check_projection_surjectivity_to_PL(field)
        reports.append(rep)
        lines.append(f"P(L) coverage {rep.coverage}")
    if field.p <= max(fflab.DEFAULT_PRIMES) and args.cubics:
        rep = fflab.random_cubic_flex_scan(field, args.cubics, args.seed)
        reports.append(rep)
        lines.append(f"random cubics with a rational flex: {rep.coverage} "
                     f"(empty: {rep.details['empty']}, seed {args.seed})")
    rep, points = fflab.sampling_report(field, args.count, args.seed)
    reports.append(rep)
    lines.append(f"C-points sampled: {rep.coverage} (seed {args.seed})")
    for k, pt in enumerate(points):
        x, a = pt.to_json()["blocks"]
        lines.append(f"  #{k}: x = ({', '.join(x)}), a = ({', '.join(a)})")
    payload = {
        "prime": field.p,
        "seed": args.seed,
        "reports": [r.to_json() for r in reports],
        "points": [pt.to_json()["blocks"] for pt in points],
    }
    _emit(args, payload, lines)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS,
                        help="output format (default: text)")

    parser = argparse.ArgumentParser(
        prog="flexcert", parents=[common],
        description="Exact checks for the variety of flexes of plane cubics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certificate", parents=[common], help="run the full smoothness certificate")
    p.add_argument("--corrupt-witness", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_certificate)

    p = sub.add_parser("tables", parents=[common], help="derivative tables of f and their values at c")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("decompose", parents=[common], help="split a polynomial into isotypic components")
    p.add_argument("expr")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("hessian", parents=[common], help="Hessian determinant in x0, x1, x2")
    p.add_argument("expr")
    p.set_defaults(func=cmd_hessian)

    p = sub.add_parser("orbit", parents=[common], help="orbit curve of the witness under one block scaling")
    p.add_argument("--block", type=int, required=True, help="1 scales x, 2 scales the coefficients")
    p.add_argument("--t", required=True, help="nonzero rational parameter, e.g. 3/2")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("sample", parents=[common], help="finite-field coverage and C-point sampling")
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--count", type=int, default=5, help="number of C-points to sample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cubics", type=int, default=200,
                   help="random cubics to scan for flexes (primes <= 101 only; 0 disables)")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if not hasattr(args, "format"):
        args.format = "text"
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"flexcert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
