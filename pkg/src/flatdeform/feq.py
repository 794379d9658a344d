"""Functional equations for relations between generators, and relation-space solving."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import EmptySystem
from .funcreal import BOSONIC, product_fr1, psi
from .linalg import QAdicElimination, nullspace_rational
from .report import CheckReport, assert_zero
from .ring import EXACT, LaurentPoly, QSeries, as_rational
from .theta import theta_coeff, theta_range

Key = Tuple[int, int]


@dataclass
class RelationVector:
    """Coefficients v_{a,j} (or b_beta under key (0, beta)) at total degree label s."""

    entries: Dict[Key, QSeries]
    s: int = 0

    def __post_init__(self):
        self.entries = {k: (v if isinstance(v, QSeries) else QSeries.constant(as_rational(v)))
                        for k, v in self.entries.items()}
        self.entries = {k: v for k, v in self.entries.items() if not v.is_zero()}

    def generating_function(self, a: int, w: Sequence[int]) -> LaurentPoly:
        """g_a(z^w) = sum_j v_{a,j} z^{j w}."""
        terms = {}
        for (b, j), v in self.entries.items():
            if b == a:
                terms[tuple(j * x for x in w)] = v
        his = [v.hi for (b, _), v in self.entries.items() if b == a]
        return LaurentPoly(len(w), terms, prec=min(his, default=EXACT))

    def evaluate(self, q) -> Dict[Key, object]:
        return {k: v.evaluate(q) for k, v in sorted(self.entries.items())}

    def proportional_to(self, other: "RelationVector") -> bool:
        """Same ray over the common window (cross-multiplied)."""
        keys = set(self.entries) | set(other.entries)
        if not keys:
            return True
        ref = next((k for k in sorted(keys) if k in self.entries and self.entries[k].lo == 0
                    and k in other.entries), None)
        if ref is None:
            return False
        a0, b0 = self.entries[ref], other.entries[ref]
        zero = QSeries.zero()
        for k in keys:
            lhs = self.entries.get(k, zero) * b0
            rhs = other.entries.get(k, zero) * a0
            if lhs != rhs:
                return False
        return True


@dataclass
class FamilySpec:
    """Generating functions f_a of a generator family.

    psi(y_{a,i}) = (z_1..z_d)^{i - base} f_a. The quadratic families of the
    theory use base 0; the degree-k families of f_{k,k} type use base 1.
    ``shifts`` are the k_a of the quadratic case (total degree of f_a).
    """

    f_list: List[LaurentPoly]
    s: int
    shifts: Optional[List[int]] = None
    kind: str = BOSONIC
    base: int = 0

    def __post_init__(self):
        if not self.f_list:
            raise EmptySystem("no generating functions given")
        d = self.f_list[0].arity
        if any(f.arity != d for f in self.f_list):
            raise ValueError("all generating functions need the same arity")
        if self.shifts is None:
            self.shifts = [self.degree_of(a) for a in range(len(self.f_list))]

    @property
    def arity(self) -> int:
        return self.f_list[0].arity

    def degree_of(self, a: int) -> int:
        f = self.f_list[a]
        degs = f.total_degrees()
        if len(degs) > 1:
            raise ValueError(f"generating function {a} is not homogeneous")
        if not degs:
            return 0 if self.shifts is None else self.shifts[a]
        return degs[0]


@dataclass
class RelationSpace:
    dimension: int
    basis: List[RelationVector]
    mode: str
    precision: object
    unknowns: List[Key] = field(default_factory=list)
    pivot_valuations: List[int] = field(default_factory=list)

    def as_dict(self):
        return {"dimension": self.dimension, "mode": self.mode,
                "precision": "exact" if self.precision == EXACT else str(self.precision),
                "basis": [{f"{a},{j}": str(v) for (a, j), v in sorted(b.entries.items())} for b in self.basis]}


def _cyclic_others(r: int, c: int) -> List[int]:
    return [j for j in range(r) if j != c]


def check_fa1(fam: FamilySpec, g: RelationVector, qorder: int) -> CheckReport:
    """sum_a sum_cyclic z_c^{s-k_a} g_a(z_{c+1} z_{c+2} / z_c^2) f_a(z_{c+1}, z_{c+2}) == 0."""
    if fam.arity != 2:
        raise ValueError("the three-variable equation needs two-variable f_a")
    acc = LaurentPoly.zero(3, qorder)
    for a, f in enumerate(fam.f_list):
        k = fam.shifts[a]
        for c in range(3):
            w = [1, 1, 1]
            w[c] = -2
            gfun = g.generating_function(a, w)
            mono = [0, 0, 0]
            mono[c] = fam.s - k
            acc = acc + (gfun * f.embed(3, _cyclic_others(3, c))).times_monomial(mono)
    return assert_zero("three-term functional equation", acc.truncate(qorder), s=fam.s)


def check_fah1(k: int, f: LaurentPoly, b: RelationVector, qorder: int) -> CheckReport:
    """sum_c g(z_c^k / prod_{others} z) f(others) == 0 with g = sum b_beta w^beta."""
    if f.arity != k:
        raise ValueError("f must have arity k")
    r = k + 1
    acc = LaurentPoly.zero(r, qorder)
    for c in range(r):
        w = [-1] * r
        w[c] = k
        acc = acc + b.generating_function(0, w) * f.embed(r, _cyclic_others(r, c))
    return assert_zero(f"(k+1)-term functional equation, k={k}", acc.truncate(qorder), k=k)


def theta_relation_vector(qorder: int, window: Optional[int] = None, s: int = 3) -> RelationVector:
    """v_j = (-1)^j q^{j(j-1)/2} for the j it retains below q^qorder."""
    entries = {}
    for j in theta_range(qorder):
        if window is not None and abs(j) > window:
            continue
        sgn, e = theta_coeff(j)
        entries[(0, j)] = QSeries({e: sgn}, qorder)
    return RelationVector(entries, s)


def relation_contributions(fam: FamilySpec, jwindow: int) -> Tuple[List[Key], List[LaurentPoly]]:
    """psi of x_m y_{a,j} for every unknown (a, j) with |j| <= jwindow."""
    d = fam.arity
    keys, polys = [], []
    for a, f in enumerate(fam.f_list):
        if f.is_zero():
            continue
        deg_f = fam.degree_of(a)
        for j in range(-jwindow, jwindow + 1):
            shift = j - fam.base
            gen = f.times_monomial((shift,) * d)
            m = fam.s - d * shift - deg_f
            x = LaurentPoly.monomial((m,))
            keys.append((a, j))
            polys.append(product_fr1(x, gen, fam.kind))
    if not keys:
        raise EmptySystem("every generating function is zero")
    return keys, polys


def solve_relation_space(fam: FamilySpec, jwindow: int = 6, q=None, qorder: Optional[int] = None,
                         mode: str = "auto") -> RelationSpace:
    """Relations sum v_{a,j} x_{s - deg y_{a,j}} y_{a,j} = 0 with |j| <= jwindow.

    ``mode``: "exact" solves over Q (data must be exact; q specializes
    q-dependent exact data), "specialize" evaluates truncated data at q,
    "formal" works over Q[[q]]/(q^qorder). "auto" picks exact when every
    coefficient is exact and formal otherwise.
    """
    keys, polys = relation_contributions(fam, jwindow)
    exact = all(p.is_exact() for p in polys)
    if mode == "auto":
        mode = "exact" if exact else "formal"
    monos = sorted({e for p in polys for e in p.support()})
    index = {e: i for i, e in enumerate(monos)}
    # rows = monomials, columns = unknowns
    rows: List[Dict[int, QSeries]] = [dict() for _ in monos]
    for col, p in enumerate(polys):
        for e, v in p.terms.items():
            rows[index[e]][col] = v
    ncols = len(keys)
    if mode in ("exact", "specialize"):
        if mode == "exact" and not exact:
            raise ValueError("exact mode needs exact data; use formal or specialize")
        qq = as_rational(q) if q is not None else None
        num_rows = []
        for row in rows:
            r = {}
            for c, v in row.items():
                if qq is None:
                    if any(e != 0 for e, _ in v.items()):
                        raise ValueError("q-dependent data needs a value of q")
                    x = v[0] if not v.is_zero() else 0
                else:
                    x = v.evaluate(qq)
                if x:
                    r[c] = x
            if r:
                num_rows.append(r)
        basis = nullspace_rational(num_rows, ncols)
        vecs = [_normalize_rational(keys, b, fam.s) for b in basis]
        return RelationSpace(len(vecs), vecs, mode, EXACT, keys)
    if mode != "formal":
        raise ValueError(f"unknown mode {mode!r}")
    if qorder is None:
        qorder = min(p.prec for p in polys)
        if qorder == EXACT:
            raise ValueError("formal mode on exact data needs qorder")
    elim = QAdicElimination(rows, ncols, qorder)
    basis, prec = elim.kernel()
    vecs = [_normalize_formal(keys, b, fam.s, prec) for b in basis]
    return RelationSpace(len(vecs), vecs, "formal", prec, keys, elim.valuations)


def _normalize_rational(keys, vec, s) -> RelationVector:
    last = next(x for x in reversed(vec) if x)
    return RelationVector({k: QSeries.constant(x / last) for k, x in zip(keys, vec) if x}, s)


def _normalize_formal(keys, vec, s, prec) -> RelationVector:
    series = [QSeries({e: x for e, x in enumerate(v) if x}, prec) for v in vec]
    unit = next((x for x in reversed(series) if not x.is_zero() and x.lo == 0), None)
    if unit is not None:
        inv = unit.inverse(prec)
        series = [x * inv for x in series]
    return RelationVector({k: x for k, x in zip(keys, series) if not x.is_zero()}, s)


def ds_monomial(shifts: Sequence[int], s: int, jwindow: int = 6) -> int:
    """D_s for the undeformed pair families x_i x_{i+k_a}."""
    from .funcreal import generator_genfun
    if len(set(shifts)) != len(shifts) or any(k < 0 for k in shifts):
        raise ValueError("shifts must be distinct and nonnegative")
    fam = FamilySpec(generator_genfun({}, list(shifts)), s, list(shifts))
    return solve_relation_space(fam, jwindow, mode="exact").dimension


def family_spec_from_ideal(fam, s: int = 3, qorder: int = 8) -> FamilySpec:
    """FamilySpec whose f_a is psi(y_{a,0}); deformed families are cut below q^qorder.

    An ideal family lists finitely many shift offsets, so only the q-truncated
    reading of its generators is faithful.
    """
    f_list = []
    for a in range(len(fam.bases)):
        f = psi(fam.generator_element(a, 0))
        if fam.deformation is not None:
            f = f.truncate(qorder)
        f_list.append(f)
    return FamilySpec(f_list, s, kind=fam.kind)
