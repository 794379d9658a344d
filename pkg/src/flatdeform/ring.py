"""Exact scalars, truncated q-Laurent series and sparse Laurent polynomials.

A ``QSeries`` is a Laurent series in q known up to an exclusive ceiling
``hi`` (``EXACT`` when the series is a genuine polynomial in q^{+-1}).

A ``LaurentPoly`` in z_1..z_r has QSeries coefficients. Instead of storing
a ceiling per term it carries an affine precision model: the coefficient of
q^c z^e is known iff ``c < prec + slope . e``. A flat model (zero slope) is
the common case; substitutions z_j -> q^s z_j tilt it. This keeps the absent
monomials honest, which a per-term ceiling cannot do.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import permutations
from numbers import Rational as _RationalABC
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

from .errors import NotDivisible

EXACT = math.inf

Scalar = Union[int, Fraction]
ExpVec = Tuple[int, ...]

__all__ = [
    "EXACT", "QSeries", "LaurentPoly", "as_rational", "qs_mul", "lp_mul",
    "lp_subst", "lp_symmetrize", "lp_divide_exact", "perm_sign",
]


def as_rational(x) -> Scalar:
    """Coerce int, Fraction or a "p/r" string into an exact scalar."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, str):
        s = x.strip()
        if not s or "." in s or "e" in s.lower():
            raise ValueError(f"not an exact rational: {x!r}")
        return as_rational(Fraction(s))
    if isinstance(x, _RationalABC):
        return as_rational(Fraction(x.numerator, x.denominator))
    raise TypeError(f"cannot use {type(x).__name__} as an exact scalar")


def _norm(c):
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def perm_sign(perm: Sequence[int]) -> int:
    """Sign of a permutation given as a sequence of images."""
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _fmt_hi(h):
    return "exact" if h == EXACT else str(h)


# ---------------------------------------------------------------- QSeries


class QSeries:
    """Laurent series in q with exact coefficients, known below ``hi``."""

    __slots__ = ("_c", "hi", "lo")

    def __init__(self, coeffs: Optional[Mapping[int, Scalar]] = None, hi=EXACT):
        if hi != EXACT:
            hi = int(hi)
        c = {}
        if coeffs:
            for e, v in coeffs.items():
                if e < hi and v:
                    c[int(e)] = _norm(as_rational(v) if not isinstance(v, int) else v)
        self._c = c
        self.hi = hi
        self.lo = min(c) if c else hi

    @classmethod
    def _raw(cls, c: Dict[int, Scalar], hi) -> "QSeries":
        s = object.__new__(cls)
        s._c = c
        s.hi = hi
        s.lo = min(c) if c else hi
        return s

    @classmethod
    def constant(cls, v, hi=EXACT) -> "QSeries":
        return cls({0: v}, hi)

    @classmethod
    def monomial(cls, e: int, v=1, hi=EXACT) -> "QSeries":
        return cls({e: v}, hi)

    @classmethod
    def zero(cls, hi=EXACT) -> "QSeries":
        return cls._raw({}, hi)

    @classmethod
    def from_dense(cls, lo: int, coeffs: Sequence, hi=EXACT) -> "QSeries":
        return cls({lo + i: v for i, v in enumerate(coeffs)}, hi)

    # read access
    @property
    def coeffs(self) -> Tuple[Scalar, ...]:
        """Dense coefficients from ``lo`` to the last nonzero exponent."""
        if not self._c:
            return ()
        top = max(self._c)
        return tuple(self._c.get(e, 0) for e in range(self.lo, top + 1))

    def items(self):
        return sorted(self._c.items())

    def __getitem__(self, e: int) -> Scalar:
        if e >= self.hi:
            raise IndexError(f"q^{e} lies beyond the known window (< {self.hi})")
        return self._c.get(e, 0)

    def is_zero(self) -> bool:
        return not self._c

    def is_exact(self) -> bool:
        return self.hi == EXACT

    def valuation(self):
        return self.lo

    def __bool__(self):
        return bool(self._c)

    def __len__(self):
        return len(self._c)

    # arithmetic
    @staticmethod
    def _lift(x) -> "QSeries":
        if isinstance(x, QSeries):
            return x
        return QSeries.constant(as_rational(x))

    def __add__(self, other):
        other = QSeries._lift(other)
        hi = min(self.hi, other.hi)
        c = {e: v for e, v in self._c.items() if e < hi}
        for e, v in other._c.items():
            if e < hi:
                w = c.get(e, 0) + v
                if w:
                    c[e] = w
                else:
                    c.pop(e, None)
        return QSeries._raw(c, hi)

    __radd__ = __add__

    def __neg__(self):
        return QSeries._raw({e: -v for e, v in self._c.items()}, self.hi)

    def __sub__(self, other):
        return self + (-QSeries._lift(other))

    def __rsub__(self, other):
        return QSeries._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, QSeries):
            return qs_mul(self, other)
        v = as_rational(other)
        if not v:
            return QSeries.zero()
        return QSeries._raw({e: _norm(c * v) for e, c in self._c.items()}, self.hi)

    __rmul__ = __mul__

    def shift(self, s: int) -> "QSeries":
        """Multiply by q^s."""
        return QSeries._raw({e + s: v for e, v in self._c.items()}, self.hi + s)

    def truncate(self, hi) -> "QSeries":
        hi = min(hi, self.hi)
        return QSeries._raw({e: v for e, v in self._c.items() if e < hi}, hi)

    def evaluate(self, q) -> Scalar:
        """Value of the retained (truncated) polynomial at a rational q."""
        q = as_rational(q)
        total = 0
        for e, v in self._c.items():
            if e < 0 and q == 0:
                raise ZeroDivisionError("negative q-power at q = 0")
            total += v * (Fraction(q) ** e if e < 0 else q ** e)
        return _norm(total)

    def inverse(self, hi=None) -> "QSeries":
        """Inverse of a series with nonzero leading term, known to relative order."""
        if not self._c:
            raise ZeroDivisionError("inverse of zero series")
        lo = self.lo
        rel = self.hi - lo
        if hi is not None:
            rel = min(rel, hi + lo)
        if rel == EXACT:
            raise ValueError("inverse of an exact series needs an explicit ceiling")
        rel = int(rel)
        a0 = Fraction(self._c[lo])
        inv = [Fraction(0)] * rel
        inv[0] = 1 / a0
        for n in range(1, rel):
            acc = 0
            for j in range(1, n + 1):
                a = self._c.get(lo + j)
                if a:
                    acc += a * inv[n - j]
            inv[n] = -acc / a0
        return QSeries({e - lo: v for e, v in enumerate(inv)}, rel - lo)

    # comparison
    def first_difference(self, other) -> Optional[int]:
        """Smallest exponent, below both ceilings, where the series differ."""
        other = QSeries._lift(other)
        hi = min(self.hi, other.hi)
        for e in sorted(set(self._c) | set(other._c)):
            if e >= hi:
                break
            if self._c.get(e, 0) != other._c.get(e, 0):
                return e
        return None

    def __eq__(self, other):
        if not isinstance(other, (QSeries, int, Fraction)):
            return NotImplemented
        return self.first_difference(other) is None

    def __hash__(self):
        raise TypeError("QSeries is unhashable: equality is window dependent")

    def __repr__(self):
        if not self._c:
            body = "0"
        else:
            parts = []
            for e, v in self.items():
                parts.append(f"{v}" if e == 0 else f"{v}*q^{e}")
            body = " + ".join(parts)
        if self.hi == EXACT:
            return f"QSeries({body})"
        return f"QSeries({body} + O(q^{self.hi}))"


def qs_mul(a: QSeries, b: QSeries) -> QSeries:
    """Product known on [a.lo+b.lo, min(a.lo+b.hi, b.lo+a.hi))."""
    hi = min(a.lo + b.hi, b.lo + a.hi)
    c: Dict[int, Scalar] = {}
    for ea, va in a._c.items():
        for eb, vb in b._c.items():
            e = ea + eb
            if e < hi:
                c[e] = c.get(e, 0) + va * vb
    return QSeries._raw({e: _norm(v) for e, v in c.items() if v}, hi)


# ---------------------------------------------------------------- LaurentPoly


def _dot(slope, e):
    return sum(s * x for s, x in zip(slope, e) if s)


class LaurentPoly:
    """Sparse Laurent polynomial in ``arity`` z-variables over QSeries.

    Internally ``_t`` maps ExpVec -> {q-exponent: nonzero scalar}. ``prec`` is
    the base ceiling and ``slope`` (tuple of Fractions, or None for flat)
    tilts it: the ceiling at monomial e is ``prec + slope . e``.
    """

    __slots__ = ("_t", "arity", "prec", "slope")

    def __init__(self, arity: int, terms: Optional[Mapping] = None, prec=None, slope=None):
        if arity < 1:
            raise ValueError("arity must be positive")
        t: Dict[ExpVec, Dict[int, Scalar]] = {}
        given = []
        for e, v in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != arity:
                raise ValueError(f"exponent {e} does not have arity {arity}")
            v = v if isinstance(v, QSeries) else QSeries.constant(as_rational(v))
            given.append(v.hi)
            if v._c:
                row = t.setdefault(e, {})
                for c, x in v._c.items():
                    y = row.get(c, 0) + x
                    if y:
                        row[c] = y
                    else:
                        row.pop(c, None)
        if prec is None:
            prec = min(given) if given else EXACT
        self.arity = arity
        self._t = t
        self.prec = prec
        self.slope = _clean_slope(slope, arity)
        self._prune()

    @classmethod
    def _raw(cls, arity, t, prec, slope=None) -> "LaurentPoly":
        p = object.__new__(cls)
        p.arity = arity
        p._t = t
        p.prec = prec
        p.slope = None if prec == EXACT else slope
        p._prune()
        return p

    def _prune(self):
        t = self._t
        if self.prec == EXACT:
            for e in [e for e, row in t.items() if not row]:
                del t[e]
            return
        dead = []
        for e, row in t.items():
            h = self.precision_at(e)
            bad = [c for c, v in row.items() if c >= h or not v]
            for c in bad:
                del row[c]
            if not row:
                dead.append(e)
        for e in dead:
            del t[e]

    # constructors
    @classmethod
    def zero(cls, arity: int, prec=EXACT) -> "LaurentPoly":
        return cls._raw(arity, {}, prec)

    @classmethod
    def monomial(cls, exps: Sequence[int], coef=1, qexp: int = 0, prec=EXACT) -> "LaurentPoly":
        e = tuple(int(x) for x in exps)
        coef = as_rational(coef)
        t = {e: {qexp: coef}} if coef else {}
        return cls._raw(len(e), t, prec)

    @classmethod
    def constant(cls, arity: int, value=1, prec=EXACT) -> "LaurentPoly":
        return cls.monomial((0,) * arity, value, 0, prec)

    # read access
    def precision_at(self, e: Sequence[int]):
        if self.slope is None:
            return self.prec
        return self.prec + _dot(self.slope, e)

    def is_exact(self) -> bool:
        return self.prec == EXACT

    @property
    def terms(self) -> Dict[ExpVec, QSeries]:
        return {e: QSeries._raw(dict(row), self.precision_at(e)) for e, row in self._t.items()}

    def coeff(self, e: Sequence[int]) -> QSeries:
        e = tuple(e)
        return QSeries._raw(dict(self._t.get(e, {})), self.precision_at(e))

    def support(self):
        return sorted(self._t)

    def raw_items(self):
        """Iterate (ExpVec, q-exponent, scalar) triples in sorted order."""
        for e in sorted(self._t):
            for c, v in sorted(self._t[e].items()):
                yield e, c, v

    def nterms(self) -> int:
        return len(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    def q_slice(self, c: int) -> Dict[ExpVec, Scalar]:
        return {e: row[c] for e, row in self._t.items() if c in row}

    def q_orders(self):
        return sorted({c for row in self._t.values() for c in row})

    def min_qexp(self):
        return min((min(row) for row in self._t.values()), default=None)

    def total_degrees(self):
        return sorted({sum(e) for e in self._t})

    def is_homogeneous(self, degree: Optional[int] = None) -> bool:
        ds = self.total_degrees()
        if not ds:
            return True
        return len(ds) == 1 and (degree is None or ds[0] == degree)

    # arithmetic
    def _common_model(self, other: "LaurentPoly", what: str):
        if self.arity != other.arity:
            raise ValueError(f"{what}: arity mismatch {self.arity} vs {other.arity}")
        if self.prec == EXACT:
            return other.slope
        if other.prec == EXACT:
            return self.slope
        if self.slope != other.slope:
            raise ValueError(f"{what}: incompatible truncation slopes")
        return self.slope

    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.constant(self.arity, as_rational(other))
        slope = self._common_model(other, "add")
        t = {e: dict(row) for e, row in self._t.items()}
        for e, row in other._t.items():
            mine = t.setdefault(e, {})
            for c, v in row.items():
                w = mine.get(c, 0) + v
                if w:
                    mine[c] = w
                else:
                    mine.pop(c, None)
        return LaurentPoly._raw(self.arity, t, min(self.prec, other.prec), slope)

    __radd__ = __add__

    def __neg__(self):
        t = {e: {c: -v for c, v in row.items()} for e, row in self._t.items()}
        return LaurentPoly._raw(self.arity, t, self.prec, self.slope)

    def __sub__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.constant(self.arity, as_rational(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            return lp_mul(self, other)
        if isinstance(other, QSeries):
            const = {(0,) * self.arity: dict(other._c)} if other._c else {}
            return lp_mul(self, LaurentPoly._raw(self.arity, const, other.hi))
        v = as_rational(other)
        if not v:
            return LaurentPoly._raw(self.arity, {}, EXACT)
        t = {e: {c: _norm(x * v) for c, x in row.items()} for e, row in self._t.items()}
        return LaurentPoly._raw(self.arity, t, self.prec, self.slope)

    __rmul__ = __mul__

    def times_monomial(self, exps: Sequence[int], qexp: int = 0, coef=1) -> "LaurentPoly":
        """Multiply by coef * q^qexp * z^exps (exact factor)."""
        coef = as_rational(coef)
        exps = tuple(exps)
        t = {}
        for e, row in self._t.items():
            t[tuple(a + b for a, b in zip(e, exps))] = {c + qexp: _norm(v * coef) for c, v in row.items()}
        if not coef:
            t = {}
        prec = self.prec
        if prec != EXACT:
            prec = prec + qexp - (_dot(self.slope, exps) if self.slope else 0)
        return LaurentPoly._raw(self.arity, t, prec, self.slope)

    def truncate(self, hi) -> "LaurentPoly":
        """Lower the flat ceiling to ``hi`` (only for flat models)."""
        if self.slope is not None:
            raise ValueError("truncate needs a flat precision model")
        return LaurentPoly._raw(self.arity, {e: dict(r) for e, r in self._t.items()}, min(self.prec, hi))

    def with_precision(self, prec) -> "LaurentPoly":
        """Declare a flat ceiling; the stored terms below it are kept."""
        return LaurentPoly._raw(self.arity, {e: dict(r) for e, r in self._t.items()}, prec)

    def permute(self, perm: Sequence[int]) -> "LaurentPoly":
        """Rename variables: z_j becomes z_{perm[j]}."""
        r = self.arity
        t = {}
        for e, row in self._t.items():
            ne = [0] * r
            for j, x in enumerate(e):
                ne[perm[j]] = x
            t[tuple(ne)] = dict(row)
        slope = None
        if self.slope is not None:
            s = [Fraction(0)] * r
            for j, x in enumerate(self.slope):
                s[perm[j]] = x
            slope = tuple(s)
        return LaurentPoly._raw(r, t, self.prec, slope)

    def embed(self, arity: int, positions: Sequence[int]) -> "LaurentPoly":
        """View as a polynomial in ``arity`` variables, z_j -> z_{positions[j]}."""
        if len(positions) != self.arity:
            raise ValueError("positions must list one target per variable")
        t = {}
        for e, row in self._t.items():
            ne = [0] * arity
            for j, x in enumerate(e):
                ne[positions[j]] += x
            t[tuple(ne)] = dict(row)
        slope = None
        if self.slope is not None:
            s = [Fraction(0)] * arity
            for j, x in enumerate(self.slope):
                s[positions[j]] = x
            slope = tuple(s)
        return LaurentPoly._raw(arity, t, self.prec, _clean_slope(slope, arity))

    def drop_var(self, var: int) -> "LaurentPoly":
        """Remove a variable that no term uses."""
        if any(e[var] for e in self._t):
            raise ValueError(f"variable {var} still occurs")
        if self.slope is not None and self.slope[var]:
            raise ValueError(f"variable {var} carries truncation slope")
        if self.arity == 1:
            raise ValueError("cannot drop the last variable")
        t = {e[:var] + e[var + 1:]: dict(r) for e, r in self._t.items()}
        slope = None if self.slope is None else self.slope[:var] + self.slope[var + 1:]
        return LaurentPoly._raw(self.arity - 1, t, self.prec, _clean_slope(slope, self.arity - 1))

    def at_one(self) -> QSeries:
        """Value at z_1 = ... = z_r = 1 (flat models only)."""
        if self.slope is not None:
            raise ValueError("evaluation at 1 needs a flat precision model")
        c: Dict[int, Scalar] = {}
        for row in self._t.values():
            for e, v in row.items():
                c[e] = c.get(e, 0) + v
        return QSeries({e: v for e, v in c.items() if v}, self.prec)

    def specialize(self, q) -> Dict[ExpVec, Scalar]:
        """Evaluate every coefficient at rational q (retained terms only)."""
        q = as_rational(q)
        out = {}
        for e, row in self._t.items():
            v = QSeries._raw(row, EXACT).evaluate(q)
            if v:
                out[e] = v
        return out

    # comparison
    def first_difference(self, other: "LaurentPoly"):
        """First (q-exponent, ExpVec, lhs, rhs) where the two disagree, or None.

        Each coefficient is compared below the smaller of the two ceilings
        at that monomial, so differing truncation slopes are fine here.
        """
        if self.arity != other.arity:
            raise ValueError("arity mismatch")
        hits = []
        for e in set(self._t) | set(other._t):
            h = min(self.precision_at(e), other.precision_at(e))
            a = self._t.get(e, {})
            b = other._t.get(e, {})
            for c in set(a) | set(b):
                if c < h and a.get(c, 0) != b.get(c, 0):
                    hits.append((c, e, a.get(c, 0), b.get(c, 0)))
        if not hits:
            return None
        return min(hits)

    def window_with(self, other: "LaurentPoly") -> dict:
        """Describe the certified window of a comparison with ``other``."""
        out = {"q_below": _fmt_hi(min(self.prec, other.prec))}
        slopes = {s for s in (self.slope, other.slope) if s is not None}
        if slopes:
            out["slopes"] = [[str(x) for x in s] for s in sorted(slopes)]
        return out

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.arity == other.arity and self.first_difference(other) is None

    def __hash__(self):
        raise TypeError("LaurentPoly is unhashable")

    def __repr__(self):
        if not self._t:
            body = "0"
        else:
            chunks = []
            for e, c, v in self.raw_items():
                mono = "*".join(f"z{j + 1}^{x}" for j, x in enumerate(e) if x) or "1"
                qq = f"q^{c}*" if c else ""
                chunks.append(f"{v}*{qq}{mono}")
                if len(chunks) > 12:
                    chunks.append("...")
                    break
            body = " + ".join(chunks)
        tail = "" if self.prec == EXACT else f", prec={self.prec}"
        if self.slope is not None:
            tail += f", slope={tuple(str(s) for s in self.slope)}"
        return f"LaurentPoly[{self.arity}]({body}{tail})"


def _clean_slope(slope, arity):
    if slope is None:
        return None
    s = tuple(Fraction(x) for x in slope)
    if len(s) != arity:
        raise ValueError("slope length must equal arity")
    return None if not any(s) else s


def lp_mul(p: LaurentPoly, r: LaurentPoly) -> LaurentPoly:
    """Ring product; the ceiling is the tightest one valid for both error terms."""
    slope = p._common_model(r, "lp_mul")

    def reach(poly):
        # smallest (valuation - slope.e) over known terms and the error term
        best = poly.prec
        for e, row in poly._t.items():
            v = min(row) - (_dot(slope, e) if slope is not None else 0)
            if v < best:
                best = v
        return best

    prec = min(p.prec + reach(r), r.prec + reach(p))
    t: Dict[ExpVec, Dict[int, Scalar]] = {}
    for ea, ra in p._t.items():
        for eb, rb in r._t.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            h = prec if slope is None or prec == EXACT else prec + _dot(slope, e)
            row = t.get(e)
            if row is None:
                row = t[e] = {}
            for ca, va in ra.items():
                for cb, vb in rb.items():
                    c = ca + cb
                    if c < h:
                        row[c] = row.get(c, 0) + va * vb
    for e in t:
        t[e] = {c: _norm(v) for c, v in t[e].items() if v}
    return LaurentPoly._raw(p.arity, t, prec, slope)


def lp_subst(p: LaurentPoly, var: int, image) -> LaurentPoly:
    """Replace z_var by sign * q^qshift * z^exps.

    ``image`` is a triple ``(sign, qshift, exps)``. The truncation model is
    transported exactly; a collapsing substitution (exps[var] == 0) is only
    allowed when the ceiling is constant along the collapsed direction.
    """
    sign, qshift, exps = image
    exps = tuple(int(x) for x in exps)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if len(exps) != p.arity:
        raise ValueError("image exponent vector must match arity")
    r = p.arity
    t: Dict[ExpVec, Dict[int, Scalar]] = {}
    for e, row in p._t.items():
        k = e[var]
        ne = list(e)
        ne[var] = 0
        for j in range(r):
            ne[j] += k * exps[j]
        ne = tuple(ne)
        s = -1 if (sign < 0 and k % 2) else 1
        dst = t.setdefault(ne, {})
        for c, v in row.items():
            cc = c + qshift * k
            w = dst.get(cc, 0) + s * v
            if w:
                dst[cc] = w
            else:
                dst.pop(cc, None)
    slope = p.slope
    if p.prec != EXACT:
        lam = list(slope) if slope is not None else [Fraction(0)] * r
        rest = sum(lam[j] * exps[j] for j in range(r) if j != var)
        if exps[var]:
            lam[var] = (lam[var] + qshift - rest) / exps[var]
        else:
            if lam[var] + qshift - rest != 0:
                raise ValueError("substitution collapses a direction along which the truncation is tilted")
            lam[var] = Fraction(0)
        slope = _clean_slope(lam, r)
    return LaurentPoly._raw(r, t, p.prec, slope)


def lp_symmetrize(p: LaurentPoly, signed: bool = False) -> LaurentPoly:
    """Sum of all coordinate permutations (with signs when ``signed``)."""
    if p.slope is not None and len(set(p.slope)) > 1:
        raise ValueError("cannot symmetrize a polynomial with an asymmetric truncation model")
    r = p.arity
    t: Dict[ExpVec, Dict[int, Scalar]] = {}
    for perm in permutations(range(r)):
        s = perm_sign(perm) if signed else 1
        for e, row in p._t.items():
            ne = [0] * r
            for j, x in enumerate(e):
                ne[perm[j]] = x
            dst = t.setdefault(tuple(ne), {})
            for c, v in row.items():
                w = dst.get(c, 0) + s * v
                if w:
                    dst[c] = w
                else:
                    dst.pop(c, None)
    return LaurentPoly._raw(r, t, p.prec, p.slope)


def _divide_line(order: Dict[ExpVec, Scalar], c, m: ExpVec, w: ExpVec, floor: int):
    """Divide a polynomial by c*z^m*(1 - z^w) inside one q-order.

    Monomials split into cosets of the lattice line Z.w; on each line the
    division is a running sum, which must close up to zero.
    """
    i0 = next(i for i, x in enumerate(w) if x)
    wi = w[i0]
    step = abs(wi)
    lines: Dict[tuple, Dict[int, Scalar]] = {}
    for e, v in order.items():
        u = tuple(a - b for a, b in zip(e, m))
        tt = (u[i0] - u[i0] % step) // wi
        base = tuple(a - tt * b for a, b in zip(u, w))
        line = lines.setdefault(base, {})
        line[tt] = line.get(tt, 0) + v
    out: Dict[ExpVec, Scalar] = {}
    for base, line in lines.items():
        ts = sorted(tt for tt, v in line.items() if v)
        if not ts:
            continue
        run = 0
        for tt in range(ts[0], ts[-1]):
            run += line.get(tt, 0)
            if run:
                e = tuple(b + tt * x for b, x in zip(base, w))
                if sum(e) < floor:
                    raise NotDivisible(f"quotient term {e} fell below degree floor {floor}")
                out[e] = run if c == 1 else _norm(Fraction(run) / c)
        run += line.get(ts[-1], 0)
        if run:
            raise NotDivisible(f"nonzero remainder along the line through {base}")
    return out


def lp_divide_exact(num: LaurentPoly, den: LaurentPoly, floor: Optional[int] = None, hi=None) -> LaurentPoly:
    """Exact quotient num/den computed order by order in q.

    The lowest q-order of ``den`` must be c * z^m * (1 - z^w). Each order of
    the quotient solves (c z^m (1 - z^w)) Q_j = N_j - sum_{i>0} D_i Q_{j-i}.
    """
    if num.arity != den.arity:
        raise ValueError("arity mismatch")
    if num.slope is not None or den.slope is not None:
        raise ValueError("exact division needs flat precision models")
    if den.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    v0 = den.min_qexp()
    d0 = den.q_slice(v0)
    if len(d0) != 2:
        raise ValueError("leading q-order of the divisor must have the shape c*z^m*(1 - w)")
    (ea, ca), (eb, cb) = sorted(d0.items())
    if ca != -cb:
        raise ValueError("leading q-order of the divisor must have the shape c*z^m*(1 - w)")
    m, c = ea, ca
    w = tuple(b - a for a, b in zip(ea, eb))
    if floor is None:
        floor = min(num.total_degrees(), default=0) - 64
    if num.is_zero():
        qlo = (num.prec if num.prec != EXACT else 0) - v0
    else:
        qlo = num.min_qexp() - v0
    qhi = num.prec - v0
    if den.prec != EXACT:
        qhi = min(qhi, den.prec - v0 + qlo)
    if hi is not None:
        qhi = min(qhi, hi)
    if qhi == EXACT:
        if len(den.q_orders()) > 1:
            raise ValueError("exact operands with a multi-order divisor need an explicit ceiling")
        qhi = max(num.q_orders(), default=v0) - v0 + 1
    qhi = int(qhi)
    dorders = {c_: den.q_slice(c_) for c_ in den.q_orders() if c_ > v0}
    qparts: Dict[int, Dict[ExpVec, Scalar]] = {}
    for j in range(qlo, qhi):
        rhs = dict(num.q_slice(j + v0))
        for c_, dpart in dorders.items():
            prev = qparts.get(j - (c_ - v0))
            if not prev:
                continue
            for ed, vd in dpart.items():
                for eq, vq in prev.items():
                    e = tuple(a + b for a, b in zip(ed, eq))
                    x = rhs.get(e, 0) - vd * vq
                    if x:
                        rhs[e] = x
                    else:
                        rhs.pop(e, None)
        if rhs:
            qparts[j] = _divide_line(rhs, c, m, w, floor)
    t: Dict[ExpVec, Dict[int, Scalar]] = {}
    for j, part in qparts.items():
        for e, v in part.items():
            if v:
                t.setdefault(e, {})[j] = v
    if hi is None and num.prec == EXACT and den.prec == EXACT:
        prec = EXACT
    else:
        prec = qhi
    return LaurentPoly._raw(num.arity, t, prec)
