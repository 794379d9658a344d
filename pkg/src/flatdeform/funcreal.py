"""Functional realization: algebra elements as (anti)symmetric Laurent polynomials.

A monomial is a sorted tuple of indices with repetition, so x_0^2 x_3 is
``(0, 0, 3)`` and the fermionic xi_1 xi_2 is ``(1, 2)``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from math import factorial, prod
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import NotAntisymmetric, NotSymmetric
from .ring import EXACT, LaurentPoly, QSeries, as_rational, perm_sign

BOSONIC = "bosonic"
FERMIONIC = "fermionic"
KINDS = (BOSONIC, FERMIONIC)

Monomial = Tuple[int, ...]


def _check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    return kind


def monomial_factors(m: Monomial) -> List[Tuple[int, int]]:
    """(index, exponent) pairs of a monomial."""
    return sorted(Counter(m).items())


def from_factors(factors: Iterable[Tuple[int, int]]) -> Monomial:
    out: List[int] = []
    for i, a in factors:
        if a < 1:
            raise ValueError("exponents must be positive")
        out.extend([i] * a)
    return tuple(sorted(out))


def fermi_sort(indices: Sequence[int]) -> Tuple[int, Optional[Monomial]]:
    """Sort fermionic factors; returns (sign, monomial) or (0, None) on a repeat."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    # insertion sort, counting transpositions
    for a in range(1, len(idx)):
        j = a
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


def mono_mul(m1: Monomial, m2: Monomial, kind: str) -> Tuple[int, Optional[Monomial]]:
    if kind == BOSONIC:
        return 1, tuple(sorted(m1 + m2))
    return fermi_sort(m1 + m2)


@dataclass
class AlgebraElement:
    kind: str
    terms: Dict[Monomial, QSeries] = field(default_factory=dict)

    def __post_init__(self):
        _check_kind(self.kind)
        clean = {}
        for m, v in self.terms.items():
            m = tuple(m)
            if self.kind == FERMIONIC:
                if len(set(m)) != len(m):
                    continue
                s, m = fermi_sort(m)
            else:
                s, m = 1, tuple(sorted(m))
            v = v if isinstance(v, QSeries) else QSeries.constant(as_rational(v))
            v = v * s
            if m in clean:
                v = clean[m] + v
            clean[m] = v
        self.terms = {m: v for m, v in clean.items() if not v.is_zero()}

    @classmethod
    def monomial(cls, m: Sequence[int], kind: str = BOSONIC, coef=1) -> "AlgebraElement":
        return cls(kind, {tuple(m): coef})

    @property
    def grade(self) -> Tuple[int, int]:
        grades = {(sum(m), len(m)) for m in self.terms}
        if len(grades) > 1:
            raise ValueError("element is not homogeneous")
        return grades.pop() if grades else (0, 0)

    @property
    def weight(self) -> int:
        return self.grade[1]

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        if other.kind != self.kind:
            raise ValueError("kind mismatch")
        t = dict(self.terms)
        for m, v in other.terms.items():
            t[m] = t[m] + v if m in t else v
        return AlgebraElement(self.kind, t)

    def __neg__(self):
        return AlgebraElement(self.kind, {m: -v for m, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "AlgebraElement":
        return AlgebraElement(self.kind, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        if not isinstance(other, AlgebraElement):
            return self.scale(other)
        if other.kind != self.kind:
            raise ValueError("kind mismatch")
        t: Dict[Monomial, QSeries] = {}
        for m1, v1 in self.terms.items():
            for m2, v2 in other.terms.items():
                s, m = mono_mul(m1, m2, self.kind)
                if not s:
                    continue
                v = v1 * v2 * s
                t[m] = t[m] + v if m in t else v
        return AlgebraElement(self.kind, t)

    def shift(self, i: int) -> "AlgebraElement":
        """Add i to every index (order is preserved, so no signs)."""
        return AlgebraElement(self.kind, {tuple(x + i for x in m): v for m, v in self.terms.items()})


def psi_monomial(m: Monomial, kind: str = BOSONIC) -> Dict[Tuple[int, ...], int]:
    """(Signed) orbit sum of z_{s(1)}^{i_1}..z_{s(l)}^{i_l} as ExpVec -> integer."""
    l = len(m)
    out: Dict[Tuple[int, ...], int] = {}
    if kind == FERMIONIC and len(set(m)) != l:
        return out
    for perm in permutations(range(l)):
        e = [0] * l
        for t, target in enumerate(perm):
            e[target] = m[t]
        e = tuple(e)
        s = perm_sign(perm) if kind == FERMIONIC else 1
        out[e] = out.get(e, 0) + s
    return {e: v for e, v in out.items() if v}


def psi(e: AlgebraElement, prec=None) -> LaurentPoly:
    """The functional realization of a homogeneous element."""
    l = e.weight
    if l == 0:
        raise ValueError("psi needs weight >= 1")
    t: Dict[Tuple[int, ...], Dict[int, object]] = {}
    hi = EXACT
    for m, coef in e.terms.items():
        hi = min(hi, coef.hi)
        for ev, s in psi_monomial(m, e.kind).items():
            row = t.setdefault(ev, {})
            for c, v in coef._c.items():
                w = row.get(c, 0) + s * v
                if w:
                    row[c] = w
                else:
                    row.pop(c, None)
    if prec is not None:
        hi = min(hi, prec)
    return LaurentPoly._raw(l, t, hi)


def psi_inverse(p: LaurentPoly, kind: str = BOSONIC) -> AlgebraElement:
    """Read an (anti)symmetric polynomial back as an algebra element."""
    _check_kind(kind)
    if p.slope is not None:
        raise ValueError("psi_inverse needs a flat precision model")
    terms: Dict[Monomial, QSeries] = {}
    for ev, row in p._t.items():
        if kind == BOSONIC:
            if list(ev) != sorted(ev):
                continue
            stab = prod(factorial(a) for a in Counter(ev).values())
            coef = QSeries._raw(dict(row), p.prec)
            terms[tuple(ev)] = coef * Fraction(1, stab) if stab > 1 else coef
        else:
            if any(ev[j] >= ev[j + 1] for j in range(len(ev) - 1)):
                continue
            terms[tuple(ev)] = QSeries._raw(dict(row), p.prec)
    out = AlgebraElement(kind, terms)
    back = psi(out, p.prec) if out.terms else LaurentPoly.zero(p.arity, p.prec)
    diff = back.first_difference(p)
    if diff is not None:
        err = NotSymmetric if kind == BOSONIC else NotAntisymmetric
        c, ev, a, b = diff
        raise err(f"coefficient of q^{c} z^{ev} breaks {'symmetry' if kind == BOSONIC else 'antisymmetry'}")
    return out


def shuffles(alpha: int, beta: int):
    """(positions of the first block, positions of the second, shuffle sign)."""
    n = alpha + beta
    for first in combinations(range(n), alpha):
        rest = tuple(j for j in range(n) if j not in first)
        yield first, rest, perm_sign(first + rest)


def product_fr1(f: LaurentPoly, g: LaurentPoly, kind: str = BOSONIC) -> LaurentPoly:
    """The shuffle product realizing multiplication in the algebra."""
    _check_kind(kind)
    n = f.arity + g.arity
    acc = None
    for first, rest, s in shuffles(f.arity, g.arity):
        term = f.embed(n, first) * g.embed(n, rest)
        if kind == FERMIONIC and s < 0:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def generator_genfun(u: Mapping[Tuple[int, int], object], shifts: Sequence[int]) -> List[LaurentPoly]:
    """f_a = z1^{k_a} + z2^{k_a} + sum_j u_{a,j} (z1^{-j} z2^{k_a+j} + z1^{k_a+j} z2^{-j})."""
    out = []
    for a, k in enumerate(shifts):
        terms: Dict[Tuple[int, int], QSeries] = {}

        def put(ev, v):
            v = v if isinstance(v, QSeries) else QSeries.constant(as_rational(v))
            terms[ev] = terms[ev] + v if ev in terms else v

        put((k, 0), 1)
        put((0, k), 1)
        for (b, j), v in u.items():
            if b != a:
                continue
            put((-j, k + j), v)
            put((k + j, -j), v)
        his = [v.hi for v in terms.values()]
        out.append(LaurentPoly(2, terms, prec=min(his)))
    return out
