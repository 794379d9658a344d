"""Two-route reduction of x_i x_{i+1} x_{i+2} under the generic deformation
x_j x_{j+1} + sum_m a_m x_{j-m} x_{j+1+m}, and the resulting constraints on a_m.

Coefficients are either symbolic (APoly in a_1..a_W, truncated in a-degree) or
numeric q-series once a candidate is plugged in.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .errors import CheckFailed, WindowEscape
from .report import FAIL, PASS, CheckReport
from .ring import EXACT, QSeries, as_rational

Monomial = Tuple[int, ...]
AExp = Tuple[int, ...]


class APoly:
    """Polynomial in a_1..a_W with rational coefficients, terms of degree > cap dropped."""

    __slots__ = ("W", "cap", "terms")

    def __init__(self, W: int, cap: int, terms: Optional[Mapping[AExp, object]] = None):
        self.W = W
        self.cap = cap
        self.terms: Dict[AExp, Fraction] = {}
        for e, v in (terms or {}).items():
            e = tuple(e)
            if len(e) != W:
                raise ValueError("exponent length must equal W")
            if sum(e) <= cap and v:
                self.terms[e] = self.terms.get(e, 0) + as_rational(v)
        self.terms = {e: v for e, v in self.terms.items() if v}

    @classmethod
    def var(cls, W: int, cap: int, m: int, coef=1) -> "APoly":
        e = [0] * W
        e[m - 1] = 1
        return cls(W, cap, {tuple(e): coef})

    @classmethod
    def one(cls, W: int, cap: int) -> "APoly":
        return cls(W, cap, {(0,) * W: 1})

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> List[int]:
        return sorted({sum(e) for e in self.terms})

    def part(self, d: int) -> "APoly":
        return APoly(self.W, self.cap, {e: v for e, v in self.terms.items() if sum(e) == d})

    def __add__(self, other: "APoly") -> "APoly":
        t = dict(self.terms)
        for e, v in other.terms.items():
            t[e] = t.get(e, 0) + v
        return APoly(self.W, self.cap, t)

    def __neg__(self):
        return APoly(self.W, self.cap, {e: -v for e, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "APoly") -> "APoly":
        t: Dict[AExp, Fraction] = defaultdict(Fraction)
        for e1, v1 in self.terms.items():
            d1 = sum(e1)
            for e2, v2 in other.terms.items():
                if d1 + sum(e2) > self.cap:
                    continue
                t[tuple(a + b for a, b in zip(e1, e2))] += v1 * v2
        return APoly(self.W, self.cap, t)

    def evaluate(self, values: Mapping[int, object], qorder) -> QSeries:
        """Plug a_m -> values[m] (QSeries or rational; missing means 0)."""
        vals = {m: (v if isinstance(v, QSeries) else QSeries.constant(as_rational(v))).truncate(qorder)
                for m, v in values.items()}
        acc = QSeries.zero(qorder)
        for e, c in self.terms.items():
            term = QSeries.constant(c, qorder)
            for m, p in enumerate(e, start=1):
                if p:
                    if m not in vals:
                        term = QSeries.zero(qorder)
                        break
                    for _ in range(p):
                        term = term * vals[m]
            acc = acc + term
        return acc.truncate(qorder)

    def __eq__(self, other):
        return isinstance(other, APoly) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, v in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0])):
            mono = "*".join(f"a{m}" + (f"^{p}" if p > 1 else "") for m, p in enumerate(e, start=1) if p)
            parts.append(f"{v}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def is_mb(m: Monomial) -> bool:
    """No two factors with adjacent indices (repeats allowed)."""
    s = sorted(set(m))
    return all(b - a >= 2 for a, b in zip(s, s[1:]))


def leftmost_pair(m: Monomial) -> Optional[int]:
    s = sorted(set(m))
    for a, b in zip(s, s[1:]):
        if b == a + 1:
            return a
    return None


def rightmost_pair(m: Monomial) -> Optional[int]:
    s = sorted(set(m))
    for a, b in reversed(list(zip(s, s[1:]))):
        if b == a + 1:
            return a
    return None


def _replace(m: Monomial, j: int, off: int) -> Monomial:
    out = list(m)
    out.remove(j)
    out.remove(j + 1)
    out += [j - off, j + 1 + off]
    return tuple(sorted(out))


@dataclass
class ReducedExpansion:
    terms: Dict[Monomial, object] = field(default_factory=dict)
    steps: int = 0

    def __post_init__(self):
        bad = [m for m in self.terms if not is_mb(m)]
        if bad:
            raise ValueError(f"not a reduced monomial: {bad[0]}")


class _Ring:
    """Coefficient arithmetic for one reduction run."""

    def __init__(self, subst, degree_of, keep):
        self.subst = subst          # m -> coefficient of x_{j-m} x_{j+1+m} (already negated)
        self.degree_of = degree_of  # used for the per-step metric
        self.keep = keep            # False for coefficients that are pruned away


def _reduce(start: Dict[Monomial, object], ring: _Ring, window: Tuple[int, int], first: str) -> ReducedExpansion:
    """Rewrite until every monomial is reduced; the first step uses ``first`` pair choice."""
    lo, hi = window
    done: Dict[Monomial, object] = {}
    layer = dict(start)
    steps = 0
    pick = rightmost_pair if first == "right" else leftmost_pair
    while layer:
        nxt: Dict[Monomial, object] = {}
        for m, c in sorted(layer.items()):
            j = pick(m)
            if j is None:
                done[m] = done[m] + c if m in done else c
                continue
            for off, a in ring.subst.items():
                coef = c * a
                if not ring.keep(coef):
                    continue
                new = _replace(m, j, off)
                if new[0] < lo or new[-1] > hi:
                    raise WindowEscape(f"index left [{lo}, {hi}] while rewriting {m}")
                d0, d1 = ring.degree_of(c), ring.degree_of(coef)
                if d0 is not None and d1 is not None and d1 != d0 + 1:
                    raise CheckFailed("a-degree metric", f"step on {m} went from {d0} to {d1}")
                nxt[new] = nxt[new] + coef if new in nxt else coef
                steps += 1
        layer = {m: c for m, c in nxt.items() if ring.keep(c)}
        pick = leftmost_pair
    return ReducedExpansion({m: c for m, c in done.items() if ring.keep(c)}, steps)


def _probe(i: int, length: int = 3) -> Monomial:
    return tuple(range(i, i + length))


def _default_window(i: int, window) -> Tuple[int, int]:
    return (i - 24, i + 24) if window is None else tuple(window)


def _symbolic_ring(W: int, adeg_cap: int) -> _Ring:
    subst = {m: APoly.var(W, adeg_cap, m, -1) for m in range(1, W + 1)}

    def deg(p):
        ds = p.degrees()
        return ds[0] if len(ds) == 1 else None

    return _Ring(subst, deg, lambda p: not p.is_zero())


def reduce_two_ways(i: int = 0, W: int = 6, adeg_cap: int = 3, index_window=None,
                    probe_length: int = 3) -> Tuple[ReducedExpansion, ReducedExpansion]:
    """Route 1 rewrites the leftmost pair of the probe first, route 2 the rightmost."""
    if W < 1:
        raise ValueError("W must be >= 1")
    if adeg_cap < 1:
        raise ValueError("adeg_cap must be >= 1")
    ring = _symbolic_ring(W, adeg_cap)
    window = _default_window(i, index_window)
    start = {_probe(i, probe_length): APoly.one(W, adeg_cap)}
    return (_reduce(start, ring, window, "left"), _reduce(start, ring, window, "right"))


class Constraint(NamedTuple):
    monomial: Monomial
    poly: APoly


def derive_constraints(W: int = 6, adeg_cap: int = 3, index_window=None, i: int = 0,
                       probe_length: int = 3) -> List[Constraint]:
    """Per reduced monomial: route-1 coefficient minus route-2 coefficient (nonzero ones only)."""
    r1, r2 = reduce_two_ways(i, W, adeg_cap, index_window, probe_length)
    zero = APoly(W, adeg_cap)
    out = []
    for m in sorted(set(r1.terms) | set(r2.terms)):
        d = r1.terms.get(m, zero) - r2.terms.get(m, zero)
        if not d.is_zero():
            out.append(Constraint(m, d))
    return out


def _candidate_series(candidate: Mapping[int, object], qorder) -> Dict[int, QSeries]:
    out = {}
    for m, v in candidate.items():
        s = v if isinstance(v, QSeries) else QSeries.constant(as_rational(v))
        s = s.truncate(qorder)
        if not s.is_zero():
            out[int(m)] = s
    return out


def certified_qorder(candidate: Mapping[int, object], adeg_cap: int, qorder: int) -> Optional[int]:
    """Below this q-order the dropped a-degree > cap terms cannot contribute.

    None when some a_m has valuation zero: then only the a-degree truncation
    bounds what was checked.
    """
    vals = [s.valuation() for s in _candidate_series(candidate, qorder).values()]
    if not vals:
        return qorder
    if min(vals) == 0:
        return None
    return min(qorder, (adeg_cap + 1) * min(vals))


def check_candidate(candidate: Mapping[int, object], constraints: Sequence[Constraint], qorder: int,
                    adeg_cap: Optional[int] = None) -> CheckReport:
    """Plug the candidate into every constraint and compare with zero.

    With a truncated a-degree the verdict only covers q-orders below
    (cap + 1) * min valuation of the candidate; the report carries that window.
    For a candidate with a valuation-zero entry the window is the a-degree cap.
    """
    W = constraints[0].poly.W if constraints else max(candidate, default=0)
    if any(m < 1 or m > W for m in candidate):
        raise ValueError(f"candidate support must lie in 1..{W}")
    cap = adeg_cap if adeg_cap is not None else (constraints[0].poly.cap if constraints else 0)
    certified = certified_qorder(candidate, cap, qorder)
    window = qorder if certified is None else certified
    vals = _candidate_series(candidate, qorder)
    first = None
    for con in constraints:
        r = con.poly.evaluate(vals, window)
        if not r.is_zero():
            low = r.valuation()
            if first is None or low < first[0]:
                # smallest a-degree part that already fails on its own
                deg = next((d for d in con.poly.degrees()
                            if not con.poly.part(d).evaluate(vals, window).is_zero()), None)
                first = (low, con.monomial, str(r), deg)
    name = "candidate vs constraints"
    if certified is None:
        win = {"a_degree_le": cap, "q_below": qorder}
    else:
        win = {"q_below": certified, "requested_q_below": qorder, "a_degree_cap": cap}
    if first is None:
        return CheckReport(name, PASS, win)
    return CheckReport(name, FAIL, win, {"q_exp": first[0], "monomial": list(first[1]),
                                         "residual": first[2], "a_degree": first[3]})


def check_candidate_direct(candidate: Mapping[int, object], qorder: int, i: int = 0, index_window=None,
                           probe_length: int = 3, max_depth: Optional[int] = None) -> CheckReport:
    """Both routes run with the candidate's q-series plugged in from the start.

    Terms at q-order >= qorder are dropped as they appear. When every a_m has
    positive valuation this certifies the whole window below q^qorder. A
    candidate with a valuation-zero entry needs ``max_depth``, and then the
    certified window is the corresponding a-degree only.
    """
    vals = _candidate_series(candidate, qorder)
    window = _default_window(i, index_window)
    name = "candidate, direct two-route reduction"
    if not vals:
        return CheckReport(name, PASS, {"q_below": qorder, "probe": i})
    unit = min(s.valuation() for s in vals.values()) == 0
    if unit and max_depth is None:
        raise ValueError("a valuation-zero candidate needs max_depth")
    subst = {m: -s for m, s in vals.items()}

    def keep(c):
        return not c[1].is_zero()

    # coefficients are (depth, series) pairs so the metric can be asserted
    class _C(tuple):
        def __mul__(self, other):
            return _C((self[0] + 1, (self[1] * other).truncate(qorder)))

        def __add__(self, other):
            return _C((max(self[0], other[0]), self[1] + other[1]))

    pruned = []

    def keep_depth(c):
        if max_depth is not None and c[0] > max_depth and keep(c):
            pruned.append(c[0])
            return False
        return keep(c)

    ring = _Ring(subst, lambda c: c[0], keep_depth)
    start = {_probe(i, probe_length): _C((0, QSeries.constant(1, qorder)))}
    r1 = _reduce(start, ring, window, "left")
    r2 = _reduce(start, ring, window, "right")
    worst = None
    for m in sorted(set(r1.terms) | set(r2.terms)):
        a = r1.terms[m][1] if m in r1.terms else QSeries.zero(qorder)
        b = r2.terms[m][1] if m in r2.terms else QSeries.zero(qorder)
        d = (a - b).truncate(qorder)
        if not d.is_zero() and (worst is None or d.valuation() < worst[0]):
            worst = (d.valuation(), m, str(a), str(b))
    win = {"q_below": qorder, "probe": i}
    if pruned:
        # the reduction did not finish within max_depth
        win = {"a_degree_le": max_depth, "q_below": qorder, "probe": i}
    if worst is None:
        return CheckReport(name, PASS, win, details={"terms": len(r1.terms)})
    return CheckReport(name, FAIL, win, {"q_exp": worst[0], "monomial": list(worst[1]),
                                         "route1": worst[2], "route2": worst[3]})


def theta_candidate(W: int = 6, qorder: Optional[int] = None) -> Dict[int, QSeries]:
    """a_{3b-1} = (-1)^b q^{b(3b-1)/2}, a_{3b} = (-1)^b q^{b(3b+1)/2}, b >= 1, up to a_W."""
    out = {}
    b = 1
    while 3 * b - 1 <= W:
        s = -1 if b % 2 else 1
        for m, e in ((3 * b - 1, b * (3 * b - 1) // 2), (3 * b, b * (3 * b + 1) // 2)):
            if m <= W and (qorder is None or e < qorder):
                out[m] = QSeries({e: s}, EXACT)
        b += 1
    return out
