"""``tautres`` command line: integrate, series, oracle, residue, positivity, selftest.

Every document read or written carries ``"schema_version": 1``.  Output is
JSON with sorted keys and exact rationals as ``"p/q"`` strings.  Exit codes:
0 success, 2 invalid input, 3 internal consistency failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from .chern import AsymmetryError, BundleSpec, PhiSyntaxError, parse_phi
from .poly import frac_str

SCHEMA_VERSION = 1
EXIT_OK, EXIT_SPEC, EXIT_CONSISTENCY = 0, 2, 3


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# input documents

def load_document(source: str) -> Dict[str, Any]:
    """Parse a JSON spec from a path, ``-`` (stdin) or an inline ``{...}`` string."""
    try:
        if source == "-":
            text = sys.stdin.read()
        elif source.lstrip().startswith("{"):
            text = source
        else:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        doc = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read spec: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("spec must be a JSON object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {version!r}")
    return doc


def _require(doc: Dict[str, Any], key: str, kind=None):
    if key not in doc:
        raise InputError(f"missing field {key!r}")
    value = doc[key]
    if kind is not None and not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise InputError(f"field {key!r} must be {kind.__name__}")
    return value


def table_from_json(data: Optional[Dict[str, Any]], n: int, rank: int):
    """Intersection tables: ``projective``, ``p1xp1`` or ``explicit`` values."""
    from .tautint import IntersectionTable, p1xp1_table, projective_space_table
    if data is None:
        return None
    kind = data.get("type")
    if kind == "projective":
        degrees = [int(a) for a in data.get("line_degrees", [])]
        if len(degrees) != rank or int(data.get("n", n)) != n:
            raise InputError("projective table must match n and the rank of V")
        return projective_space_table(n, degrees)
    if kind == "p1xp1":
        bideg = [tuple(int(x) for x in b) for b in data.get("bidegrees", [])]
        if n != 2 or len(bideg) != rank:
            raise InputError("p1xp1 table needs n = 2 and one bidegree per rank")
        return p1xp1_table(bideg)
    if kind == "explicit":
        values = {}
        for name, v in data.get("values", {}).items():
            values[_monomial_key(name)] = Fraction(str(v))
        return IntersectionTable(n, values, data.get("name", "explicit"))
    raise InputError(f"unknown table type {kind!r}")


def _monomial_key(name: str):
    """``cX1^2*cV1`` -> table key."""
    from .poly import VarKind
    key = []
    if name.strip() in ("", "1"):
        return ()
    for factor in name.split("*"):
        base, _, exp = factor.strip().partition("^")
        kinds = {"cX": VarKind.CX, "cV": VarKind.CV}
        prefix, idx = base[:2], base[2:]
        if prefix not in kinds or not idx.isdigit():
            raise InputError(f"bad monomial {name!r}")
        key.append((kinds[prefix].value, int(idx), int(exp or 1)))
    return tuple(sorted(key))


def _q_overrides(doc: Dict[str, Any], flags: Sequence[str]) -> Dict[int, str]:
    out = {int(k): str(v) for k, v in doc.get("q_polys", {}).items()}
    for item in flags or []:
        j, sep, text = item.partition("=")
        if not sep or not j.strip().isdigit():
            raise InputError(f"--q-poly expects J=POLY, got {item!r}")
        out[int(j)] = text
    return out


def problem_from_json(doc: Dict[str, Any], q_flags: Sequence[str] = ()):
    from .tautint import Mode, ProblemSpec
    n = _require(doc, "n", int)
    k = _require(doc, "k", int)
    try:
        V = BundleSpec.from_json(_require(doc, "V", dict))
        X = BundleSpec.from_json(doc["X"]) if "X" in doc else None
        phi = parse_phi(str(_require(doc, "phi")))
        mode = Mode(doc.get("mode", "manifold"))
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad spec: {exc}") from exc
    overrides = _q_overrides(doc, q_flags)
    spec = ProblemSpec(n, k, V, phi, mode, X, tuple(sorted(overrides.items())),
                       doc.get("convention", "calibrated"))
    return spec


# ---------------------------------------------------------------------------
# output

def _decimalize(obj, places: int = 12):
    """Add ``<key>_decimal_approx`` next to every ``p/q`` total-like field."""
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            out[k] = _decimalize(v, places)
            if k in ("total", "ordered_total", "value", "direct", "exponential", "connected") \
                    and isinstance(v, str):
                try:
                    out[f"{k}_decimal_approx"] = f"{float(Fraction(v)):.{places}g}"
                except (ValueError, ZeroDivisionError):
                    pass
        return out
    if isinstance(obj, list):
        return [_decimalize(v, places) for v in obj]
    return obj


def emit(doc: Dict[str, Any], args) -> None:
    doc = dict(doc)
    doc["schema_version"] = SCHEMA_VERSION
    if getattr(args, "decimal", False):
        doc = _decimalize(doc)
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_integrate(args) -> Dict[str, Any]:
    from .tautint import Mode, closed_form_k2, closed_form_k3, integrate_equivariant, integrate_ghilb
    doc = load_document(args.spec)
    spec = problem_from_json(doc, args.q_poly)
    if spec.mode is Mode.EQUIVARIANT:
        return {"command": "integrate", "mode": "equivariant",
                "result": integrate_equivariant(spec, prune=args.prune, workers=args.threads).to_json()}
    table = table_from_json(doc.get("table"), spec.n, spec.V.rank)
    result = integrate_ghilb(spec, table, prune=args.prune, workers=args.threads)
    out = {"command": "integrate", "mode": "manifold", "result": result.to_json()}
    if args.closed_form:
        cf = {2: closed_form_k2, 3: closed_form_k3}.get(spec.k)
        if cf is None:
            raise InputError("--closed-form is available for k = 2 and 3")
        other = cf(spec, table)
        out["closed_form"] = other.to_json()
        out["closed_form_agrees"] = (
            [(t.partition, t.value) for t in other.terms] ==
            [(t.partition, t.value) for t in result.terms])
    return out


def cmd_series(args) -> Dict[str, Any]:
    from .genfun import MultiplicativeClassSpec, series_coefficients
    doc = load_document(args.spec)
    n = _require(doc, "n", int)
    V = BundleSpec.from_json(_require(doc, "V", dict))
    if args.cls == "segre":
        cls = MultiplicativeClassSpec.segre(n * args.kmax + 1)
    elif args.cls == "chern":
        cls = MultiplicativeClassSpec.chern()
    else:
        cls = MultiplicativeClassSpec.from_json(load_document(args.class_json))
    table = table_from_json(doc.get("table"), n, V.rank)
    report = series_coefficients(cls, n, V, args.kmax, table, prune=args.prune,
                                 q_overrides=_q_overrides(doc, args.q_poly), workers=args.threads)
    return {"command": "series", "result": report.to_json()}


def _parse_bundle(text: str, surface: str):
    try:
        if surface == "p1xp1":
            return [tuple(int(x) for x in item.split(":")) for item in text.split(",")]
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise InputError(f"bad --bundle {text!r}") from exc


def cmd_oracle(args) -> Dict[str, Any]:
    from .oracle import ab_integrate, affine_chart, compact_integral, p1xp1_chart, p2_chart
    phi = parse_phi(args.phi)
    if args.k < 1:
        raise InputError("--k must be positive")
    bundle = _parse_bundle(args.bundle, args.surface)
    if args.surface == "affine":
        rank = bundle[0] if bundle else 1
        res = ab_integrate(affine_chart(rank), args.k, phi, ordered=args.ordered,
                           keep_contributions=args.contributions)
        r = res.value
        out = {"value": {"numerator": r.num.to_json(),
                         "denominator": [{"factor": str(f), "mult": m}
                                         for f, m in sorted(r.den.items(), key=lambda x: str(x[0]))]},
               "fixed_point_count": res.fixed_point_count}
        if args.contributions:
            out["per_point_contributions"] = [
                {"diagrams": [list(p) for p in d], "value": repr(v)} for d, v in res.contributions]
        return {"command": "oracle", "surface": "affine", "result": out}
    expanded = phi.expand()
    if not expanded.is_zero() and expanded.degrees() != {2 * args.k}:
        raise InputError(f"phi must be homogeneous of degree {2 * args.k} on a surface")
    if args.surface == "p2":
        build, nw = (lambda w: p2_chart(bundle, w)), 3
    else:
        build, nw = (lambda w: p1xp1_chart(bundle, w[:2], w[2:])), 4
    value = compact_integral(build, args.k, phi, nweights=nw, ordered=args.ordered)
    from .oracle import distributions
    count = sum(1 for _ in distributions(args.k, 3 if args.surface == "p2" else 4))
    return {"command": "oracle", "surface": args.surface,
            "result": {"value": frac_str(value), "fixed_point_count": count,
                       "normalization": "ordered" if args.ordered else "unordered"}}


def cmd_residue(args) -> Dict[str, Any]:
    from .residue import RationalTerm, iterated_residue, residue_by_full_expansion, \
        residue_with_pruning, vanishing_precheck
    doc = load_document(args.spec)
    try:
        term = RationalTerm.from_json(doc)
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad rational term: {exc}") from exc
    report = iterated_residue(term, report=True)
    value = residue_with_pruning(term) if args.prune else report.value
    out = {"residue": value.to_json(), "text": str(value),
           "provably_zero": vanishing_precheck(term),
           "truncation": {v.name: b for v, b in report.truncation.items()}}
    if args.reference is not None:
        ref = residue_by_full_expansion(term, args.reference)
        out["reference_agrees"] = ref == value
    return {"command": "residue", "result": out}


def _int_list(text: str) -> List[int]:
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition("-")
        out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    return out


def cmd_positivity(args) -> Dict[str, Any]:
    from .tautint import positivity_scan
    phis = args.phi or None
    report = positivity_scan(_int_list(args.n), _int_list(args.k), _int_list(args.r), phis,
                             args.limit)
    return {"command": "positivity", "result": report}


def cmd_selftest(args) -> Dict[str, Any]:
    from .acceptance import run_all
    select = set(_int_list(args.only)) if args.only else None
    results = run_all(select)
    for r in results:
        print(r.line(), file=sys.stderr)
    return {"command": "selftest",
            "result": {"criteria": [{"criterion": r.number, "title": r.title, "passed": r.passed,
                                     "cases": r.cases, "seconds": round(r.seconds, 3),
                                     "failures": r.failures[:5]} for r in results],
                       "all_passed": all(r.passed for r in results)}}


COMMANDS = {"integrate": cmd_integrate, "series": cmd_series, "oracle": cmd_oracle,
            "residue": cmd_residue, "positivity": cmd_positivity, "selftest": cmd_selftest}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write JSON here instead of stdout")
    common.add_argument("--decimal", action="store_true",
                        help="add labelled decimal approximations next to exact values")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $TAUTRES_THREADS or 1)")
    common.add_argument("--prune", action=argparse.BooleanOptionalAction, default=False,
                        help="drop provably vanishing residue pieces first")
    common.add_argument("--q-poly", action="append", default=[], metavar="J=POLY",
                        help="register Q_J as a polynomial in z1..zJ")

    parser = argparse.ArgumentParser(prog="tautres", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", parents=[common], help="integrate a tautological class")
    p.add_argument("spec", help="JSON spec path, '-' for stdin, or inline JSON")
    p.add_argument("--closed-form", action="store_true", help="also run the k=2/k=3 closed form")

    p = sub.add_parser("series", parents=[common], help="generating series coefficients")
    p.add_argument("spec")
    p.add_argument("--class", dest="cls", choices=["segre", "chern", "custom-json"], default="segre")
    p.add_argument("--class-json", help="multiplicative class document for custom-json")
    p.add_argument("--kmax", type=int, default=3)

    p = sub.add_parser("oracle", parents=[common], help="torus localization on a toric surface")
    p.add_argument("--surface", choices=["p2", "p1xp1", "affine"], required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--bundle", default="1",
                   help="p2: line degrees '1,2'; p1xp1: bidegrees '1:0,0:1'; affine: rank")
    p.add_argument("--phi", required=True)
    p.add_argument("--ordered", action="store_true", help="multiply by k!")
    p.add_argument("--contributions", action="store_true", help="affine: list per-point terms")

    p = sub.add_parser("residue", parents=[common], help="iterated residue of a rational term")
    p.add_argument("spec")
    p.add_argument("--reference", type=int, default=None, metavar="ORDER",
                   help="also compute by full expansion to this order and compare")

    p = sub.add_parser("positivity", parents=[common], help="coefficient sign scan")
    p.add_argument("--n", default="1-2")
    p.add_argument("--k", default="1-2")
    p.add_argument("--r", default="1")
    p.add_argument("--phi", action="append", default=[])
    p.add_argument("--limit", type=int, default=None)

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance checks")
    p.add_argument("--only", default=None, help="criterion numbers, e.g. '1-3,9'")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    from .oracle import OracleError
    from .residue import MalformedTerm
    from .tautint import ConsistencyError, SpecError
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SPEC
    if args.threads is None and os.environ.get("TAUTRES_THREADS"):
        try:
            args.threads = int(os.environ["TAUTRES_THREADS"])
        except ValueError:
            print("error: TAUTRES_THREADS must be an integer", file=sys.stderr)
            return EXIT_SPEC
    try:
        doc = COMMANDS[args.command](args)
    except (ConsistencyError, AsymmetryError) as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (InputError, SpecError, PhiSyntaxError, MalformedTerm, OracleError,
            ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    emit(doc, args)
    if args.command == "selftest" and not doc["result"]["all_passed"]:
        return EXIT_CONSISTENCY
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
