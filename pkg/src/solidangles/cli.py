"""Command-line front end. Every command prints one JSON document on stdout.

Exit status: 0 on success, 2 when a checked identity fails (including fits
whose residuals exceed their error bounds), 1 on usage or input errors.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from fractions import Fraction
from typing import Callable, Sequence

from . import families as fam
from .angle import (
    DEFAULT_POLICY,
    EnginePolicy,
    aomoto_calibration_report,
    face_angle,
    prism_angle_bound_check,
    solid_angle,
)
from .ehrhart import InternalConsistencyError, TheoremViolation, fit_ehrhart, hstar, reciprocity_check
from .polytope import PointedCone, Polytope, tangent_cone
from .rational_linalg import format_rational, to_rational
from .solidpoly import (
    EngineAccuracyError,
    SolidPolynomial,
    brianchon_gram_sum,
    fit_solid,
    numerator,
    numerator_checks,
    period_report,
    unimodality_report,
    vertex_sum,
)
from .valuation import (
    HalfOpenParallelepiped,
    g_numerator,
    get_valuation,
    monotonicity_compare,
    nonnegativity_check,
    parallelepiped_numerator,
)

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here 2 is reserved for violations."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item") and callable(x.item):  # numpy scalars
        return _jsonable(x.item())
    return x


# ---------------------------------------------------------------------------
# inputs


def _read_polytope(path: str) -> Polytope:
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object with a 'vertices' key")
    return Polytope.from_json_dict(data)


FAMILY_ALIASES = {"delta": "delta_h", "cube": "unit_cube", "simplex": "standard_simplex",
                  "permutation": "permutation_simplex", "tetrahedron": "regular_tetrahedron",
                  "cross": "cross_polytope", "prism": "half_prism"}


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def _family_from_args(name: str, a) -> Polytope:
    name = FAMILY_ALIASES.get(name, name)
    need = lambda flag, v: v if v is not None else _missing(name, flag)  # noqa: E731
    if name == "reeve":
        return fam.reeve(need("--h", a.h))
    if name == "delta_h":
        d = a.d if a.d is not None else 3
        if a.hs is not None:
            return fam.delta_h(_int_list(a.hs))
        h = need("--h", a.h)
        # the asymptotic family Delta(h, h, 1, ..., 1)
        return fam.delta_h([h, h] + [1] * (d - 3)) if d >= 3 else fam.delta_h([h] * (d - 1))
    if name == "permutation_simplex":
        perm = _int_list(a.perm) if a.perm else list(range(1, (a.d or 3) + 1))
        return fam.permutation_simplex(perm)
    if name == "regular_tetrahedron":
        return fam.regular_tetrahedron()
    if name == "interval":
        return fam.interval(need("--a", a.a), need("--b", a.b))
    if name in ("unit_cube", "standard_simplex", "half_prism", "cross_polytope"):
        return fam.FAMILIES[name](need("--d", a.d))
    raise fam.FamilyValidationError(
        f"unknown family {name!r}; choose from {sorted(fam.FAMILIES)} or aliases {sorted(FAMILY_ALIASES)}")


def _missing(name: str, flag: str):
    raise fam.FamilyValidationError(f"family {name} needs {flag}")


def _polytope(a) -> Polytope:
    if a.file and a.family:
        raise UsageError("give either --file or --family, not both")
    if a.file:
        return _read_polytope(a.file)
    if a.family:
        return _family_from_args(a.family, a)
    raise UsageError("an input polytope is required (--file PATH|- or --family NAME)")


def _policy(a) -> EnginePolicy:
    return EnginePolicy.from_env(mode=a.policy, mc_samples=a.mc_samples, seed=a.seed, tol=a.tol)


def _digest(*polys: Polytope) -> str:
    h = hashlib.sha256()
    for p in polys:
        h.update(p.to_json().encode())
    return h.hexdigest()


def _angle_methods(p: Polytope, policy: EnginePolicy) -> list[str]:
    return sorted({face_angle(p, f, policy).method for f in p.faces})


# ---------------------------------------------------------------------------
# commands; each returns (payload, ok)


def _solid_payload(p: Polytope, policy: EnginePolicy):
    res = fit_solid(p, policy)
    methods = _angle_methods(p, policy)
    if isinstance(res, SolidPolynomial):
        exact = res.poly.exact if res.is_exact else ()
        coeffs = [format_rational(exact[k]) if k < len(exact) else res.coeffs[k]
                  for k in range(p.dim + 1)] if exact else list(res.coeffs)
        prov = [{"degree": k, "value": res.coeffs[k], "abs_error": res.errors[k],
                 "method": "fit(" + "+".join(methods) + ")" + ("+rational-recovery" if exact else "")}
                for k in range(p.dim + 1)]
        return {"coefficients": coeffs, "errors": list(res.errors), "exact": res.is_exact,
                "period": 1, "provenance": prov, "fit": res.to_dict()}
    return {"period": res.period, "quasipolynomial": res.to_dict(),
            "angle_methods": methods, "exact": False}


def cmd_solidpoly(a, policy):
    p = _polytope(a)
    return {"polytope": p.to_json_dict(), **_solid_payload(p, policy)}, True


def cmd_ehrhart(a, policy):
    p = _polytope(a)
    q = fit_ehrhart(p)
    out = {"polytope": p.to_json_dict(), "period": q.period,
           "constituents": [[format_rational(c) for c in poly.exact_coeffs()] for poly in q.constituents],
           "method": "lattice-enumeration+exact-interpolation"}
    if q.period == 1:
        out["coefficients"] = out["constituents"][0]
    return out, True


def cmd_hstar(a, policy):
    p = _polytope(a)
    vec = hstar(p)
    return {"polytope": p.to_json_dict(),
            "hstar": [format_rational(Fraction(x)) for x in vec.entries],
            "method": "binomial-transform(lattice-enumeration)"}, True


def cmd_numerator(a, policy):
    p = _polytope(a)
    vec = numerator(p, policy)
    chk = numerator_checks(vec, a.tol, 10 * a.tol)
    out = {"polytope": p.to_json_dict(), "numerator": vec.to_dict(), "checks": chk,
           "angle_methods": _angle_methods(p, policy)}
    if p.dim == 3:
        out["unimodality"] = unimodality_report(p, policy)
    return out, chk["ok"]


def cmd_vertexsum(a, policy):
    p = _polytope(a)
    s = vertex_sum(p, policy)
    verts = [face_angle(p, f, policy) for f in p.faces if f.dim == 0]
    out = {"polytope": p.to_json_dict(), "vertex_sum": s.to_dict(),
           "vertex_angles": [v.to_dict() for v in verts]}
    ok = True
    if p.is_simplex and p.dim >= 2:
        bound_ok = (abs(s.value - 0.5) <= s.abs_error + a.tol) if p.dim == 2 else (
            0 < s.value < 0.5 + s.abs_error)
        out["simplex_bound"] = {"expected": "= 1/2" if p.dim == 2 else "in (0, 1/2)", "ok": bound_ok}
        ok = bound_ok
    return out, ok


def cmd_gram_check(a, policy):
    p = _polytope(a)
    s = brianchon_gram_sum(p, policy)
    ok = abs(s.value) <= s.abs_error + a.tol
    return {"polytope": p.to_json_dict(), "alternating_sum": s.to_dict(),
            "residual": abs(s.value), "angle_methods": _angle_methods(p, policy), "ok": ok}, ok


def cmd_period(a, policy):
    p = _polytope(a)
    rep = period_report(p, policy, a.tol)
    return {"polytope": p.to_json_dict(), **rep}, rep["ok"]


def cmd_family(a, policy):
    # emits the bare polytope so the output can be fed straight back in
    return _family_from_args(a.name, a).to_json_dict(), True


def cmd_angle(a, policy):
    p = _polytope(a)
    if a.point:
        x = [to_rational(s) for s in a.point.split(",")]
        v = solid_angle(p, x, policy, to_rational(a.t))
        return {"polytope": p.to_json_dict(), "point": [format_rational(c) for c in x],
                "t": a.t, "angle": v.to_dict()}, True
    rows = [{"vertex": [format_rational(c) for c in p.vertices[next(iter(f.vertices))]],
             "angle": face_angle(p, f, policy).to_dict()}
            for f in sorted((f for f in p.faces if f.dim == 0), key=lambda f: min(f.vertices))]
    return {"polytope": p.to_json_dict(), "vertex_angles": rows}, True


def cmd_valuation(a, policy):
    v = get_valuation(a.val, policy)
    if a.action == "numerator":
        p = _polytope(a)
        vec = g_numerator(p, v)
        chk = nonnegativity_check(vec)
        return {"polytope": p.to_json_dict(), "valuation": v.name, "numerator": vec.to_dict(),
                "nonnegativity": chk}, chk["ok"]
    if a.action == "monotone":
        if len(a.paths) != 2:
            raise UsageError("valuation monotone needs two polytope files P Q")
        p, q = (_read_polytope(x) for x in a.paths)
        rep = monotonicity_compare(p, q, v, a.tol)
        return {"inputs": [p.to_json_dict(), q.to_json_dict()], "valuation": v.name, **rep}, rep["ok"]
    if len(a.paths) != 1:
        raise UsageError("valuation pi-numerator needs one simplex file")
    s = _read_polytope(a.paths[0])
    pi = HalfOpenParallelepiped.of_simplex(s)
    vec = parallelepiped_numerator(s, v)
    ref = g_numerator(s, v)
    agree = all(abs(float(x) - float(y)) <= ex + ey + a.tol
                for x, y, ex, ey in zip(vec.entries, ref.entries, vec.errors, ref.errors))
    return {"polytope": s.to_json_dict(), "valuation": v.name, "numerator": vec.to_dict(),
            "reference_numerator": ref.to_dict(), "agree": agree,
            "parallelepiped_points": len(pi.lattice_points()),
            "parallelepiped_volume": format_rational(pi.volume)}, agree


# ---------------------------------------------------------------------------
# verify


def _check(name: str, fn: Callable[[], tuple[bool, object]]) -> dict:
    try:
        ok, detail = fn()
    except (EngineAccuracyError, TheoremViolation, InternalConsistencyError) as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return {"check": name, "ok": bool(ok), "detail": _jsonable(detail)}


def verify_suite(policy: EnginePolicy = DEFAULT_POLICY, tol: float = 1e-9) -> list[dict]:
    """Run the invariant checks on the built-in families."""
    lattice3 = [fam.reeve(1), fam.reeve(2), fam.reeve(12), fam.regular_tetrahedron(),
                fam.standard_simplex(3), fam.unit_cube(3), fam.permutation_simplex([3, 2, 1]),
                fam.cross_polytope(3)]
    lattice2 = [fam.standard_simplex(2), fam.unit_cube(2), Polytope([(0, 0), (3, 1), (1, 2)])]
    lattice = lattice2 + lattice3

    def reeve_ehrhart():
        bad = []
        for h in (1, 2, 12, 20):
            got = fit_ehrhart(fam.reeve(h)).constituents[0].exact_coeffs()
            want = (1, 2 - Fraction(h, 6), 1, Fraction(h, 6))
            if tuple(got) != want:
                bad.append(h)
        return not bad, {"failing_h": bad}

    def reeve_sign():
        rows = []
        for h in (1, 2, 12):
            sp = fit_solid(fam.reeve(h), policy)
            rows.append({"h": h, "cubic": sp.coeffs[3], "linear": sp.coeffs[1]})
        ok = all(abs(r["cubic"] - r["h"] / 6) < tol and r["linear"] < 0 for r in rows)
        return ok, rows

    def solid_numerators():
        reps = [numerator_checks(numerator(p, policy), tol, 10 * tol) for p in lattice]
        return all(r["ok"] for r in reps), [r["violations"] for r in reps if not r["ok"]]

    def stanley():
        vs = [hstar(p).entries for p in lattice]
        return all(x >= 0 for v in vs for x in v), [[str(x) for x in v] for v in vs]

    def reciprocity():
        reps = [reciprocity_check(p) for p in lattice]
        return all(r["ok"] for r in reps), None

    def gram():
        res = [abs(brianchon_gram_sum(p, policy).value) for p in lattice]
        return max(res) < tol, {"max_residual": max(res)}

    def vertex_bounds():
        tri = [vertex_sum(p, policy).value for p in lattice2 if p.is_simplex]
        tets = [vertex_sum(p, policy).value for p in lattice3 if p.is_simplex]
        ok = all(abs(s - 0.5) < 1e-12 for s in tri) and all(0 < s < 0.5 for s in tets)
        return ok, {"triangles": tri, "tetrahedra": tets}

    def permutations_tile():
        sps = [fit_solid(p, policy) for p in fam.all_permutation_simplices(3)]
        ok = all(abs(s.coeffs[3] - 1 / 6) < tol and max(map(abs, s.coeffs[:3])) < tol for s in sps)
        cube = fit_solid(fam.unit_cube(3), policy)
        return ok and abs(cube.coeffs[3] - 1) < tol, {"n": len(sps)}

    def monotone():
        pairs = [(fam.standard_simplex(3), fam.unit_cube(3)),
                 (fam.standard_simplex(2), fam.unit_cube(2)),
                 (fam.permutation_simplex([1, 2, 3]), fam.unit_cube(3))]
        reps = [monotonicity_compare(p, q, get_valuation(n, policy), tol)
                for p, q in pairs for n in ("solid", "indicator")]
        return all(r["ok"] for r in reps), None

    def collapse():
        reps = [period_report(p, policy, tol) for p in
                (fam.half_prism(2), fam.interval(0, Fraction(1, 2)), fam.interval(Fraction(1, 3), Fraction(4, 3)),
                 fam.interval(0, Fraction(1, 3)), fam.interval(Fraction(1, 2), Fraction(3, 4)))]
        ok = all(r["ok"] for r in reps) and reps[0]["collapses"]
        return ok, [{"collapses": r["collapses"], "declared_period": r["declared_period"]} for r in reps]

    def limits():
        rep = fam.asymptotic_vertex_sum_scan([1, 2, 5, 10, 20, 50, 100, -1, -10, -100], 3, policy)
        s = {r["h"]: r["S"] for r in rep["rows"]}
        return rep["ok"] and s[100] < 0.02 and s[-100] > 0.45, {"S(100)": s[100], "S(-100)": s[-100]}

    def non_unimodal():
        for h in range(1, 21):
            p = fam.delta_h([-h, -h])
            rep = unimodality_report(p, policy)
            if rep.get("vertex_sum", {}).get("value", 0) > 1 / 3:
                e = rep["numerator"]["entries"]
                return (e[2] < e[1] and not rep["numerator_unimodal"]), {"h": -h, "numerator": e}
        return False, "no simplex with vertex sum above 1/3 found"

    def prism():
        cones = [PointedCone.from_generators([(1, 0), (1, 1)]),
                 tangent_cone(fam.regular_tetrahedron(), (0, 0, 0))[1]]
        reps = [prism_angle_bound_check(c, n=policy.mc_samples, seed=policy.seed + 2 * i)
                for i, c in enumerate(cones)]
        return all(r["ok"] for r in reps), [{"bound": r["bound"], "low": r["corner_low"]["value"],
                                             "high": r["corner_high"]["value"]} for r in reps]

    def aomoto():
        rep = aomoto_calibration_report(5, seed=policy.seed)
        return rep["calibrated_ok"], {"orthant": rep["orthant"], "summary": rep["summary"]}

    checks = [
        ("ehrhart-reeve-formula", reeve_ehrhart),
        ("reeve-linear-coefficient-negative", reeve_sign),
        ("solid-numerator-nonnegative-palindromic", solid_numerators),
        ("hstar-nonnegative", stanley),
        ("ehrhart-reciprocity", reciprocity),
        ("brianchon-gram", gram),
        ("simplex-vertex-sum-bound", vertex_bounds),
        ("permutation-simplices-tile-cube", permutations_tile),
        ("valuation-monotonicity", monotone),
        ("period-collapse", collapse),
        ("vertex-sum-limits", limits),
        ("non-unimodal-witness", non_unimodal),
        ("prism-corner-bound", prism),
        ("aomoto-calibration", aomoto),
    ]
    return [_check(name, fn) for name, fn in checks]


def cmd_verify(a, policy):
    rows = verify_suite(policy, a.tol)
    return {"checks": rows, "passed": sum(r["ok"] for r in rows), "total": len(rows)}, \
        all(r["ok"] for r in rows)


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    c = _Parser(add_help=False)
    g = c.add_argument_group("engine")
    g.add_argument("--policy", choices=("exact", "aomoto", "mc"), default=None,
                   help="angle engine policy (default: $SOLIDANGLES_POLICY or exact)")
    g.add_argument("--mc-samples", type=int, default=1_000_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=1e-9)
    fmt = c.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", help="compact JSON (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true", help="indented JSON")
    c.add_argument("--timing", action="store_true",
                   help="include wall time (makes output run-dependent)")
    c.set_defaults(pretty=False)
    return c


def _input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--file", help="polytope JSON file, or - for stdin")
    p.add_argument("--family", help="named family, e.g. reeve, delta, unit_cube")
    _family_params(p)


def _family_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--h", type=int)
    p.add_argument("--hs", help="comma-separated heights for delta_h")
    p.add_argument("--d", type=int)
    p.add_argument("--perm", help="comma-separated 1-based permutation")
    p.add_argument("--a", help="left endpoint of an interval (rational)")
    p.add_argument("--b", help="right endpoint of an interval (rational)")


COMMANDS = {
    "solidpoly": (cmd_solidpoly, "solid-angle polynomial A_P(t)"),
    "ehrhart": (cmd_ehrhart, "Ehrhart (quasi)polynomial"),
    "hstar": (cmd_hstar, "h*-vector of a lattice polytope"),
    "numerator": (cmd_numerator, "solid-angle numerator with theorem checks"),
    "vertexsum": (cmd_vertexsum, "sum of vertex solid angles"),
    "gram-check": (cmd_gram_check, "alternating face-angle sum"),
    "period": (cmd_period, "coefficient periods of a rational polytope"),
    "angle": (cmd_angle, "solid angle at a point or at every vertex"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="solidangles", description="Solid-angle and Ehrhart computations.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True
    for name, (fn, help_) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_)
        _input_args(sp)
        if name == "angle":
            sp.add_argument("--point", help="comma-separated rational coordinates")
            sp.add_argument("--t", default="1", help="dilation factor")
        sp.set_defaults(func=fn)
    fp = sub.add_parser("family", parents=[common], help="emit a named polytope as JSON")
    fp.add_argument("name")
    _family_params(fp)
    fp.set_defaults(func=cmd_family)
    vp = sub.add_parser("valuation", help="valuation numerators and comparisons")
    vsub = vp.add_subparsers(dest="action", parser_class=_Parser, metavar="ACTION")
    vsub.required = True
    for action in ("numerator", "monotone", "pi-numerator"):
        ap = vsub.add_parser(action, parents=[common])
        ap.add_argument("--val", choices=("solid", "indicator"), required=True)
        if action == "numerator":
            _input_args(ap)
        else:
            ap.add_argument("paths", nargs="+", help="polytope JSON files")
        ap.set_defaults(func=cmd_valuation)
    ver = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    ver.set_defaults(func=cmd_verify)
    return parser


def _emit(obj, pretty: bool, stream) -> None:
    text = json.dumps(_jsonable(obj), indent=2 if pretty else None, sort_keys=False)
    stream.write(text + "\n")


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    """Parse ``argv``, print a JSON report and return the exit code."""
    stdout = stdout or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_help(sys.stderr)
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    start = time.perf_counter()
    try:
        policy = _policy(args)
        payload, ok = args.func(args, policy)
    except UsageError as exc:
        print(f"solidangles: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EngineAccuracyError, TheoremViolation, InternalConsistencyError) as exc:
        report = {"command": argv, "error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, TheoremViolation):
            report["diagnostics"] = exc.report
        _emit(report, args.pretty, stdout)
        return EXIT_VIOLATION
    except (ValueError, ArithmeticError, OSError, TypeError) as exc:
        print(f"solidangles: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.func is cmd_family:
        _emit(payload, args.pretty, stdout)
        return EXIT_OK
    report = {
        "command": argv,
        "inputs_digest": _digest(*_inputs_of(payload)),
        "policy": {"mode": policy.mode, "mc_samples": policy.mc_samples, "seed": policy.seed,
                   "tol": policy.tol},
        "result": payload,
        "ok": ok,
    }
    if args.timing:
        report["wall_time_s"] = time.perf_counter() - start
    _emit(report, args.pretty, stdout)
    return EXIT_OK if ok else EXIT_VIOLATION


def _inputs_of(payload: dict) -> list[Polytope]:
    if "polytope" in payload:
        return [Polytope.from_json_dict(payload["polytope"])]
    return [Polytope.from_json_dict(d) for d in payload.get("inputs", [])]


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
