"""Command-line entry point: deterministic JSON reports for every check.

Report layout (field order is fixed):
    command, parameters, checks[], status, version, timing
Everything except ``timing`` is reproducible byte for byte.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .algebra import (FAMILY_NAMES, FORMAL, CutoffAlgebra, builtin_family, enumerate_quotient_basis,
                      flatness_report)
from .errors import CheckFailed, FlatDeformError, SpecParseError, UnknownFamily, WindowEscape
from .report import CONJ, FAIL, PASS, CheckReport
from .ring import as_rational

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_NAME = re.compile(r"[a-z][a-z0-9-]*")
_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_VALUE = re.compile(r"[^,\s=]+")


def parse_ideal_params(s: str) -> Tuple[str, Dict[str, str]]:
    """Split ``name(:key=value(,key=value)*)?`` with error positions."""
    m = _NAME.match(s)
    if not m:
        raise SpecParseError("expected a family name", s, 0)
    name = m.group()
    pos = m.end()
    params: Dict[str, str] = {}
    if pos == len(s):
        return name, params
    if s[pos] != ":":
        raise SpecParseError("expected ':' after the family name", s, pos)
    pos += 1
    while True:
        k = _KEY.match(s, pos)
        if not k:
            raise SpecParseError("expected a parameter name", s, pos)
        if k.group() in params:
            raise SpecParseError(f"parameter {k.group()!r} given twice", s, pos)
        pos = k.end()
        if pos >= len(s) or s[pos] != "=":
            raise SpecParseError("expected '='", s, pos)
        pos += 1
        v = _VALUE.match(s, pos)
        if not v:
            raise SpecParseError("expected a value", s, pos)
        params[k.group()] = v.group()
        pos = v.end()
        if pos == len(s):
            return name, params
        if s[pos] != ",":
            raise SpecParseError("expected ',' or end of input", s, pos)
        pos += 1


def parse_ideal_spec(s: str, qorder: int = 8, span: int = 24):
    name, params = parse_ideal_params(s)
    if name not in FAMILY_NAMES:
        raise UnknownFamily(f"unknown family {name!r}; known: {', '.join(FAMILY_NAMES)}")
    return builtin_family(name, params, qorder=qorder, span=span)


# ---------------------------------------------------------------- config


def read_config(path: str) -> Dict[str, str]:
    """key=value lines; '#' starts a comment; repeated keys accumulate comma-separated."""
    out: Dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SpecParseError(f"{path}:{lineno}: expected key=value", line, 0)
            k, v = (x.strip() for x in line.split("=", 1))
            k = k.replace("-", "_")
            out[k] = f"{out[k]},{v}" if k in out else v
    return out


def _rational(text: str):
    try:
        return as_rational(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _qlist(values) -> List[Fraction]:
    out = []
    for v in values or []:
        for part in str(v).split(","):
            if part.strip():
                q = _rational(part.strip())
                if q == 0:
                    raise argparse.ArgumentTypeError("q samples must be nonzero")
                out.append(q)
    return out


def _intlist(text) -> List[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def _pair(text) -> Tuple[int, int]:
    a, b = _intlist(text)
    if a > b:
        raise argparse.ArgumentTypeError("window must be lo,hi with lo <= hi")
    return a, b


# ---------------------------------------------------------------- commands


def _run_check(checks: List[CheckReport], name: str, fn, *args, **kwargs):
    try:
        rep = fn(*args, **kwargs)
    except CheckFailed as exc:
        rep = CheckReport(name, FAIL, {}, exc.counterexample() or {"detail": str(exc)})
    if isinstance(rep, list):
        checks.extend(rep)
    else:
        checks.append(rep)
    return rep


def cmd_theta_verify(a) -> Tuple[dict, List[CheckReport]]:
    from . import theta
    params = {"qorder": a.qorder, "nk_qorder": a.nk_qorder}
    checks: List[CheckReport] = []
    _run_check(checks, "theta identities", theta.check_theta_identities, a.qorder)
    for n, k in ((1, 1), (2, 2), (3, 3), (1, 2), (2, 3)):
        _run_check(checks, f"quasi-periodicity f_{n},{k}", theta.check_fpr, n, k, a.nk_qorder)
    for n, k in ((1, 1), (1, 2), (2, 2), (1, 3), (2, 3)):
        _run_check(checks, f"restriction f_{n + 1},{k}", theta.check_rest2, n, k, a.nk_qorder)
    for k in range(1, 5):
        _run_check(checks, f"f_1,{k}(1) = {k}", theta.check_rest1, k, a.nk_qorder)
    for k in (1, 2, 3):
        _run_check(checks, f"vanishing f_{k + 1},{k}", theta.check_vanishing, k, min(a.nk_qorder, 6 if k < 3 else 4))
        _run_check(checks, f"q->0 limit f_{k},{k}", theta.check_q0_limit, k, k)
    return params, checks


def cmd_feq_check(a):
    from .feq import FamilySpec, RelationVector, check_fa1, check_fah1, theta_relation_vector
    from .funcreal import generator_genfun
    from .theta import f1_series, fnk_series
    from .ring import LaurentPoly
    name, p = parse_ideal_params(a.ideal)
    params = {"ideal": a.ideal, "qorder": a.qorder}
    checks: List[CheckReport] = []
    if name == "theta-k1" and not p:
        fam = FamilySpec([f1_series(a.qorder)], 3, [1])
        _run_check(checks, "three-term functional equation", check_fa1, fam, theta_relation_vector(a.qorder), a.qorder)
    elif name == "monomial-run" and p.get("w", "2") == "2" and set(p) <= {"w"}:
        fam = FamilySpec(generator_genfun({}, [1]), 3, [1])
        g = RelationVector({(0, 0): -1, (0, 1): 1}, 3)
        _run_check(checks, "three-term functional equation", check_fa1, fam, g, a.qorder)
    elif name == "theta-fkk" and set(p) <= {"k"}:
        k = int(p.get("k", "2"))
        f = LaurentPoly.monomial((1,)) if k == 1 else fnk_series(k, k, a.qorder)
        _run_check(checks, f"(k+1)-term functional equation, k={k}", check_fah1, k, f,
                   theta_relation_vector(a.qorder), a.qorder)
    else:
        raise argparse.ArgumentTypeError(
            f"feq-check knows theta-k1, monomial-run:w=2 and theta-fkk:k=K; use relations-solve for {a.ideal!r}")
    return params, checks


def cmd_relations_solve(a):
    from .feq import FamilySpec, family_spec_from_ideal, solve_relation_space
    from .funcreal import generator_genfun
    params = {"ideal": a.ideal, "shifts": a.shifts, "s": a.s, "jwindow": a.jwindow,
              "q": None if a.q is None else str(a.q), "qorder": a.qorder, "mode": a.mode, "expect": a.expect}
    if a.shifts:
        shifts = _intlist(a.shifts)
        fam = FamilySpec(generator_genfun({}, shifts), a.s, shifts)
        conjecture = False
    else:
        ideal = parse_ideal_spec(a.ideal, a.qorder)
        fam = family_spec_from_ideal(ideal, a.s, a.qorder)
        conjecture = ideal.conjecture or ideal.kind == "fermionic" and ideal.deformation is not None
    space = solve_relation_space(fam, a.jwindow, q=a.q, qorder=a.qorder, mode=a.mode)
    window = {"jwindow": a.jwindow, "q_below": "exact" if space.mode != "formal" else space.precision}
    details = space.as_dict()
    if a.expect is not None:
        ok = space.dimension >= a.expect if a.at_least else space.dimension == a.expect
        status = (CONJ if conjecture else PASS) if ok else FAIL
        cex = None if ok else {"dimension": space.dimension, "expected": a.expect}
    else:
        status, cex = (CONJ if conjecture else PASS), None
    return params, [CheckReport(f"relation space s={a.s}", status, window, cex, details)]


def cmd_flatness(a):
    fam = parse_ideal_spec(a.ideal, a.qorder)
    alg = CutoffAlgebra(fam.kind, a.N)
    qs = a.q or [Fraction(1, 3), Fraction(2, 5)]
    n_range = None if a.nmin is None and a.nmax is None else range(
        a.nmin if a.nmin is not None else -a.N * a.lmax, (a.nmax if a.nmax is not None else a.N * a.lmax) + 1)
    mode = a.mode
    if mode == "auto":
        mode = "specialize" if fam.exact else "formal"
    samples = [FORMAL] if mode == "formal" else qs
    params = {"ideal": a.ideal, "N": a.N, "lmax": a.lmax, "n_range": None if n_range is None else
              [n_range.start, n_range.stop - 1], "q": [str(q) for q in qs], "qorder": a.qorder, "mode": mode}
    checks = []
    rep = flatness_report(alg, fam, a.lmax, n_range, samples, a.qorder)
    window = {"N": a.N, "lmax": a.lmax, "q_below": a.qorder if rep.at_truncation else "exact",
              "samples": rep.q_samples, "interior_keys": sum(1 for k in rep.keys if k.interior)}
    cex = None
    if not rep.flat:
        k = next(k for k in rep.keys if k.interior and k.verdict != "flat")
        cex = k.as_dict()
    details = {"at_truncation": rep.at_truncation, "deficient_keys": [list(k) for k in rep.deficient_keys()]}
    if mode == "formal" and a.also_specialize:
        point = flatness_report(alg, fam, a.lmax, n_range, qs, a.qorder)
        details["specialized"] = {"samples": point.q_samples, "flat": point.flat,
                                  "deficient_keys": [list(k) for k in point.deficient_keys()]}
    checks.append(CheckReport(f"flatness {fam.name}", rep.status, window, cex, details))
    w = fam.degree
    if a.enumerate and fam.kind == "bosonic" and fam.reference == (tuple(range(w)),):
        bad = [k for k in rep.keys if enumerate_quotient_basis(alg, w, (k.n, k.l)) != k.reference]
        checks.append(CheckReport("reference dims vs basis enumeration", FAIL if bad else PASS,
                                  {"N": a.N, "lmax": a.lmax}, bad[0].as_dict() if bad else None))
    return params, checks


def cmd_rewrite_confluence(a):
    from .rewrite import confluence_test, exhaustive_check, injectivity_check
    params = {"k": a.k, "samples": a.samples, "seed": a.seed, "max_weight": a.max_weight,
              "window": list(a.window), "exhaustive": a.exhaustive}
    checks: List[CheckReport] = []
    _run_check(checks, f"confluence k={a.k}", confluence_test, a.k, a.samples, a.seed, a.max_weight, a.window)
    if a.exhaustive:
        _run_check(checks, f"exhaustive confluence k={a.k}", exhaustive_check, a.k, 4, (-4, 4))
        _run_check(checks, f"phi injective on reduced k={a.k}", injectivity_check, a.k, 4, (-4, 4))
    return params, checks


def cmd_constraints_derive(a):
    from .constraints import derive_constraints
    window = a.window if a.window is not None else (a.i - 24, a.i + 24)
    params = {"W": a.W, "adeg_cap": a.adeg_cap, "i": a.i, "window": list(window)}
    try:
        cons = derive_constraints(a.W, a.adeg_cap, window, a.i)
    except WindowEscape as exc:
        return params, [CheckReport("constraints", FAIL, {"window": list(window)}, {"detail": str(exc)})]
    deg0 = [c for c in cons if 0 in c.poly.degrees()]
    details = {"count": len(cons),
               "constraints": [{"monomial": list(c.monomial), "poly": repr(c.poly)} for c in cons]}
    ok = bool(cons) and not deg0
    cex = None if ok else ({"monomial": list(deg0[0].monomial)} if deg0 else {"detail": "no constraints"})
    return params, [CheckReport("constraints", PASS if ok else FAIL,
                                {"a_degree_le": a.adeg_cap, "W": a.W}, cex, details)]


def _parse_candidate(text: str, W: int, qorder: int):
    from .constraints import theta_candidate
    from .ring import QSeries
    if text == "theta":
        return theta_candidate(W, qorder)
    out = {}
    for part in text.split(","):
        m = re.fullmatch(r"a(\d+)=(.+)", part.strip())
        if not m:
            raise argparse.ArgumentTypeError(f"bad candidate entry {part!r}; use theta or a1=c,a2=q^2*c,...")
        coef, _, expo = m.group(2).partition("*q^") if "*q^" in m.group(2) else (m.group(2), "", "0")
        if coef.startswith("q^"):
            coef, expo = "1", coef[2:]
        out[int(m.group(1))] = QSeries({int(expo): _rational(coef)})
    return out


def cmd_constraints_check(a):
    from .constraints import check_candidate, check_candidate_direct, derive_constraints
    window = a.window if a.window is not None else (a.i - 24, a.i + 24)
    params = {"candidate": a.candidate, "W": a.W, "adeg_cap": a.adeg_cap, "qorder": a.qorder, "i": a.i,
              "window": list(window)}
    cand = _parse_candidate(a.candidate, a.W, a.qorder)
    checks = [check_candidate(cand, derive_constraints(a.W, a.adeg_cap, window, a.i), a.qorder, a.adeg_cap)]
    depth = None if all(v.valuation() > 0 for v in cand.values()) else a.adeg_cap
    checks.append(check_candidate_direct(cand, a.qorder, a.i, window, max_depth=depth))
    return params, checks


COMMANDS = {
    "theta-verify": cmd_theta_verify,
    "feq-check": cmd_feq_check,
    "relations-solve": cmd_relations_solve,
    "flatness": cmd_flatness,
    "rewrite-confluence": cmd_rewrite_confluence,
    "constraints-derive": cmd_constraints_derive,
    "constraints-check": cmd_constraints_check,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flatdeform", description="Checks for flat deformations of monomial quotients.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp):
        sp.add_argument("--config", help="key=value file; command-line flags win")
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        return sp

    sp = common(sub.add_parser("theta-verify", help="theta identities and f_{n,k} laws"))
    sp.add_argument("--qorder", type=int, default=12)
    sp.add_argument("--nk-qorder", type=int, default=6)

    sp = common(sub.add_parser("feq-check", help="functional equation residuals"))
    sp.add_argument("--ideal", default="theta-k1")
    sp.add_argument("--qorder", type=int, default=8)

    sp = common(sub.add_parser("relations-solve", help="dimension of a relation space"))
    sp.add_argument("--ideal", default="theta-k1")
    sp.add_argument("--shifts", help="undeformed pair family k_a, e.g. 0,1")
    sp.add_argument("--s", type=int, default=3)
    sp.add_argument("--jwindow", type=int, default=6)
    sp.add_argument("--q", type=_rational)
    sp.add_argument("--qorder", type=int, default=8)
    sp.add_argument("--mode", choices=("auto", "exact", "specialize", "formal"), default="auto")
    sp.add_argument("--expect", type=int)
    sp.add_argument("--at-least", action="store_true", help="--expect is a lower bound")

    sp = common(sub.add_parser("flatness", help="graded dimensions against the monomial quotient"))
    sp.add_argument("--ideal", default="theta-k1")
    sp.add_argument("--N", type=int, default=6)
    sp.add_argument("--lmax", type=int, default=3)
    sp.add_argument("--nmin", type=int)
    sp.add_argument("--nmax", type=int)
    sp.add_argument("--q", action="append")
    sp.add_argument("--qorder", type=int, default=8)
    sp.add_argument("--mode", choices=("auto", "specialize", "formal"), default="auto")
    sp.add_argument("--also-specialize", action="store_true",
                    help="in formal mode also report the specialized samples (informational)")
    sp.add_argument("--enumerate", action="store_true", help="cross-check reference dims by enumeration")

    sp = common(sub.add_parser("rewrite-confluence", help="normal forms of the x/ybar rewriting"))
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-weight", type=int, default=6)
    sp.add_argument("--window", type=_pair, default=(-8, 8))
    sp.add_argument("--exhaustive", action="store_true")

    sp = common(sub.add_parser("constraints-derive", help="constraints from the two-route reduction"))
    sp.add_argument("--W", type=int, default=6)
    sp.add_argument("--adeg-cap", type=int, default=3)
    sp.add_argument("--i", type=int, default=0)
    sp.add_argument("--window", type=_pair)

    sp = common(sub.add_parser("constraints-check", help="plug a candidate into the constraints"))
    sp.add_argument("--candidate", default="theta")
    sp.add_argument("--W", type=int, default=6)
    sp.add_argument("--adeg-cap", type=int, default=3)
    sp.add_argument("--qorder", type=int, default=8)
    sp.add_argument("--i", type=int, default=0)
    sp.add_argument("--window", type=_pair)
    return p


def _apply_config(parser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    conf = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {act.dest: act for act in sub._actions}
    defaults = {}
    for k, v in conf.items():
        if k not in known or k in ("config", "help"):
            raise _UsageError(f"config key {k!r} is not an option of {args.command}")
        act = known[k]
        if getattr(args, k) != act.default:
            continue  # given on the command line
        if isinstance(act, argparse._StoreTrueAction):
            defaults[k] = v.lower() in ("1", "true", "yes")
        elif isinstance(act, argparse._AppendAction):
            defaults[k] = v.split(",")
        else:
            defaults[k] = act.type(v) if act.type else v
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _validate(a):
    for name in ("qorder", "nk_qorder", "N", "lmax", "jwindow", "samples", "W", "adeg_cap", "k", "max_weight"):
        v = getattr(a, name, None)
        if v is not None and v < 1:
            raise _UsageError(f"--{name.replace('_', '-')} must be positive")
    if getattr(a, "q", None) is not None and a.command == "flatness":
        a.q = _qlist(a.q)


def overall_status(checks: Sequence[CheckReport]) -> str:
    if any(c.status == FAIL for c in checks):
        return FAIL
    if any(c.status == CONJ for c in checks):
        return CONJ
    return PASS


def render(report: dict) -> str:
    return json.dumps(report, indent=2, default=str) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> Tuple[Optional[dict], int]:
    parser = build_parser()
    try:
        a = _apply_config(parser, list(sys.argv[1:] if argv is None else argv))
        _validate(a)
    except (_UsageError, argparse.ArgumentTypeError, SpecParseError, OSError) as exc:
        print(f"flatdeform: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    t0 = time.perf_counter()
    try:
        params, checks = COMMANDS[a.command](a)
    except (argparse.ArgumentTypeError, SpecParseError, UnknownFamily, ValueError, ZeroDivisionError) as exc:
        print(f"flatdeform: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    except FlatDeformError as exc:
        params, checks = {}, [CheckReport(a.command, FAIL, {}, {"detail": str(exc)})]
    status = overall_status(checks)
    report = {
        "command": a.command,
        "parameters": params,
        "checks": [c.as_dict() for c in checks],
        "status": status,
        "version": __version__,
        "timing": {"seconds": round(time.perf_counter() - t0, 3)},
    }
    text = render(report)
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report, EXIT_FAIL if status == FAIL else EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv)[1]


if __name__ == "__main__":
    sys.exit(main())
