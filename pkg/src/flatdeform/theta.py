"""Theta series g, the series f_1 and f_{n,k}, and the conjectural coefficient series."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Dict, List, Sequence, Tuple

from .errors import CheckFailed
from .report import CheckReport, assert_same, assert_series, assert_zero
from .ring import (EXACT, LaurentPoly, QSeries, as_rational, lp_divide_exact,
                   lp_subst)


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def theta_range(qorder: int) -> range:
    """All k with k(k-1)/2 < qorder."""
    top = 0
    while top * (top - 1) // 2 < qorder:
        top += 1
    return range(1 - top, top)


def theta_coeff(k: int) -> Tuple[int, int]:
    """(sign, q-exponent) of the z^k term of g."""
    return _sign(k), k * (k - 1) // 2


def theta_g(exps: Sequence[int], qorder: int) -> LaurentPoly:
    """g(z^exps) = sum_k (-1)^k z^{k exps} q^{k(k-1)/2}, below q^qorder."""
    if qorder < 1:
        raise ValueError("qorder must be at least 1")
    exps = tuple(exps)
    t: Dict[tuple, Dict[int, int]] = {}
    for k in theta_range(qorder):
        s, c = theta_coeff(k)
        e = tuple(k * x for x in exps)
        row = t.setdefault(e, {})
        row[c] = row.get(c, 0) + s
        if not row[c]:
            del row[c]
    return LaurentPoly._raw(len(exps), t, qorder)


def theta_g_product(exps: Sequence[int], qorder: int) -> LaurentPoly:
    """(1 - w) prod_{i>=1} (1 - q^i)(1 - q^i w)(1 - q^i / w), truncated."""
    if qorder < 1:
        raise ValueError("qorder must be at least 1")
    exps = tuple(exps)
    r = len(exps)
    zero = (0,) * r
    neg = tuple(-x for x in exps)
    acc = LaurentPoly(r, {zero: 1, exps: -1}, prec=qorder)
    for i in range(1, qorder):
        for mono in (zero, exps, neg):
            acc = acc - acc.times_monomial(mono, i)
    return acc


def f1_series(qorder: int) -> LaurentPoly:
    """sum_i (-1)^i q^{i(3i-1)/2} (z1^{3i} z2^{1-3i} + z1^{1-3i} z2^{3i})."""
    if qorder < 1:
        raise ValueError("qorder must be at least 1")
    t: Dict[tuple, Dict[int, int]] = {}
    for i in _pentagonal_range(qorder):
        c = i * (3 * i - 1) // 2
        for e in ((3 * i, 1 - 3 * i), (1 - 3 * i, 3 * i)):
            t.setdefault(e, {})[c] = _sign(i)
    return LaurentPoly._raw(2, t, qorder)


def _pentagonal_range(qorder: int) -> List[int]:
    out = []
    i = 0
    while True:
        hit = False
        for j in ((i, -i) if i else (0,)):
            if j * (3 * j - 1) // 2 < qorder:
                out.append(j)
                hit = True
        if not hit and i > 0:
            break
        i += 1
    return sorted(out)


# ---------------------------------------------------------------- f_{n,k}


def _unit(r: int, j: int, x: int = 1) -> Tuple[int, ...]:
    e = [0] * r
    e[j] = x
    return tuple(e)


def fnk_base(k: int, qorder: int) -> LaurentPoly:
    """f_{1,k}(z) = z g(z^k) / g(z)."""
    num = theta_g((k,), qorder).times_monomial((1,))
    return lp_divide_exact(num, theta_g((1,), qorder))


def req_numerator(n: int, k: int, qorder: int) -> LaurentPoly:
    """-sum_i g(z_1^{-1}..z_i^k..z_{n+1}^{-1}) f_{n,k}(.., hat z_i, ..)."""
    prev = fnk_series(n, k, qorder)
    r = n + 1
    acc = LaurentPoly.zero(r, qorder)
    for i in range(r):
        arg = tuple(k if j == i else -1 for j in range(r))
        others = [j for j in range(r) if j != i]
        acc = acc - theta_g(arg, qorder) * prev.embed(r, others)
    return acc


@lru_cache(maxsize=None)
def fnk_series(n: int, k: int, qorder: int) -> LaurentPoly:
    """f_{n,k} truncated below q^qorder, via the recurrence in n."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if qorder < 1:
        raise ValueError("qorder must be at least 1")
    if n > k + 1:
        raise ValueError("f_{n,k} vanishes identically for n > k + 1")
    if n == 1:
        return fnk_base(k, qorder)
    num = req_numerator(n - 1, k, qorder)
    return lp_divide_exact(num, theta_g((-1,) * n, qorder))


def q0_limit(n: int, k: int) -> LaurentPoly:
    """sum over distinct i_1..i_n in 1..k of z_1^{i_1}..z_n^{i_n}."""
    t = {e: {0: 1} for e in permutations(range(1, k + 1), n)}
    return LaurentPoly._raw(n, t, EXACT)


# ---------------------------------------------------------------- checks


def check_theta_identities(qorder: int) -> List[CheckReport]:
    if qorder < 2:
        raise ValueError("qorder must be at least 2")
    g = theta_g((1,), qorder)
    out = []
    inv = lp_subst(g, 0, (1, 0, (-1,)))
    out.append(assert_same("g(1/z) = -g(z)/z", inv, -g.times_monomial((-1,))))
    at1 = lp_subst(g, 0, (1, 0, (0,)))
    out.append(assert_zero("g(1) = 0", at1))
    shifted = lp_subst(g, 0, (1, 1, (1,)))
    out.append(assert_same("g(qz) = -g(z)/z", shifted, -g.times_monomial((-1,))))
    out.append(assert_same("triple product", g, theta_g_product((1,), qorder)))
    return out


def check_fpr(n: int, k: int, qorder: int) -> CheckReport:
    """f(q z_1, z_2..) = (-1)^{k-1} q^{1-k(k-1)/2} z_1^{1-k^2} (z_2..z_n)^{k+1} f."""
    f = fnk_series(n, k, qorder)
    lhs = lp_subst(f, 0, (1, 1, _unit(n, 0)))
    mono = tuple(1 - k * k if j == 0 else k + 1 for j in range(n))
    rhs = f.times_monomial(mono, 1 - k * (k - 1) // 2, _sign(k - 1))
    return assert_same(f"quasi-periodicity f_{n},{k}", lhs, rhs, n=n, k=k)


def check_rest2(n: int, k: int, qorder: int) -> CheckReport:
    """f_{n+1,k}(z_1..z_n, 1) = (k - n) f_{n,k}."""
    if n + 1 > k + 1:
        raise ValueError("need n + 1 <= k + 1")
    big = fnk_series(n + 1, k, qorder)
    lhs = lp_subst(big, n, (1, 0, (0,) * (n + 1))).drop_var(n)
    rhs = fnk_series(n, k, qorder) * (k - n)
    return assert_same(f"restriction f_{n + 1},{k}(..,1)", lhs, rhs, n=n, k=k)


def check_rest1(k: int, qorder: int) -> CheckReport:
    """f_{1,k}(1) = k."""
    val = fnk_series(1, k, qorder).at_one()
    return assert_series(f"f_1,{k}(1) = {k}", val, QSeries.constant(k), k=k)


def check_vanishing(k: int, qorder: int) -> CheckReport:
    """The recurrence numerator for f_{k+1,k} is identically zero."""
    if k < 1:
        raise ValueError("k must be positive")
    return assert_zero(f"vanishing f_{k + 1},{k}", req_numerator(k, k, qorder), k=k)


def check_q0_limit(n: int, k: int, qorder: int = 1) -> CheckReport:
    f = fnk_series(n, k, qorder).truncate(1)
    return assert_same(f"q->0 limit f_{n},{k}", f, q0_limit(n, k).with_precision(1), n=n, k=k)


def check_symmetric(f: LaurentPoly, name: str = "symmetry") -> CheckReport:
    """Every coordinate permutation fixes f (checked on transpositions)."""
    r = f.arity
    for a in range(r - 1):
        perm = list(range(r))
        perm[a], perm[a + 1] = perm[a + 1], perm[a]
        diff = f.first_difference(f.permute(perm))
        if diff is not None:
            c, e, x, y = diff
            raise CheckFailed(name, qexp=c, exps=e, lhs=x, rhs=y)
    return CheckReport(name, window={"q_below": str(f.prec)})


# ---------------------------------------------------------------- conjectural data


def _conj51_terms(qorder: int):
    i = 0
    out = []
    while True:
        hit = False
        for j in ((i, -i) if i else (0,)):
            c = j * (3 * j + 1) // 2
            if c < qorder:
                out.append((j, c))
                hit = True
        if not hit and i > 0:
            break
        i += 1
    return sorted(out)


def conj51_f(qorder: int) -> LaurentPoly:
    """f(t) = sum_i (-1)^i (t^{6i+1} + t^{-6i-1}) q^{i(3i+1)/2}, univariate in t."""
    if qorder < 1:
        raise ValueError("qorder must be at least 1")
    t: Dict[tuple, Dict[int, int]] = {}
    for i, c in _conj51_terms(qorder):
        for e in (6 * i + 1, -6 * i - 1):
            row = t.setdefault((e,), {})
            row[c] = row.get(c, 0) + _sign(i)
    return LaurentPoly._raw(1, t, qorder)


def conj51_value(tpow, qorder: int) -> QSeries:
    """f evaluated at the rational tpow, as a q-series."""
    tpow = as_rational(tpow)
    if tpow == 0:
        raise ZeroDivisionError("f(t) needs t != 0")
    c: Dict[int, object] = {}
    for (e,), row in conj51_f(qorder)._t.items():
        v = Fraction(tpow) ** e
        for qe, s in row.items():
            c[qe] = c.get(qe, 0) + s * v
    return QSeries(c, qorder)


def conj51_coeffs(t, qt, krange: int, qorder: int):
    """k -> f(t^{2k}) qt^{k^2} and k -> f(t^{2k+1}) qt^{k^2+k} for |k| <= krange."""
    t = as_rational(t)
    qt = as_rational(qt)
    if t == 0:
        raise ZeroDivisionError("t must be nonzero")
    y1, y2 = {}, {}
    for k in range(-krange, krange + 1):
        y1[k] = conj51_value(Fraction(t) ** (2 * k), qorder) * (qt ** (k * k))
        y2[k] = conj51_value(Fraction(t) ** (2 * k + 1), qorder) * (qt ** (k * k + k))
    return y1, y2


def fermionic_generator(k: int, qorder: int) -> LaurentPoly:
    """z_1^0 z_2^1 .. z_k^{k-1} prod_{a<b} g(z_a / z_b)."""
    if k < 2:
        raise ValueError("k must be at least 2")
    acc = LaurentPoly.monomial(tuple(range(k))).with_precision(qorder)
    for a in range(k):
        for b in range(a + 1, k):
            arg = [0] * k
            arg[a], arg[b] = 1, -1
            acc = acc * theta_g(tuple(arg), qorder)
    return acc
