"""Graded components of cutoff quotients P^(N)/I and their flatness.

Two ways to turn q-series coefficients into numbers:

* specialization at a rational q (used for exact families, and for truncated
  ones whose generators are first made monic on the undeformed monomial);
* formal q: the rank of the truncated matrix over Q[[q]]/(q^M), i.e. the
  number of invariant factors of valuation < M. This is the only sound
  reading of "rank at truncation" when coefficients are genuine series.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .errors import SemicontinuityViolation, UnknownFamily
from .funcreal import BOSONIC, FERMIONIC, AlgebraElement, fermi_sort, psi_inverse
from .linalg import QAdicElimination, rank_fraction_free
from .ring import EXACT, QSeries, as_rational
from .report import CONJ, FAIL, PASS

Monomial = Tuple[int, ...]
Term = Tuple[QSeries, Tuple[int, ...]]

FORMAL = None  # q sample meaning "q stays formal"


class GradedKey(NamedTuple):
    n: int
    l: int


@dataclass(frozen=True)
class CutoffAlgebra:
    kind: str
    N: int

    def __post_init__(self):
        if self.kind not in (BOSONIC, FERMIONIC):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.N < 1:
            raise ValueError("N must be positive")

    def realizable(self, key) -> bool:
        n, l = key
        return l >= 0 and abs(n) <= self.N * l


# ---------------------------------------------------------------- enumeration


def _compositions(lo: int, hi: int, l: int, n: int, strict: bool) -> Iterable[Monomial]:
    """Nondecreasing (strict: increasing) index tuples in [lo, hi] of length l and sum n."""
    if l == 0:
        if n == 0:
            yield ()
        return
    if l == 1:
        if lo <= n <= hi:
            yield (n,)
        return
    step = 1 if strict else 0
    for first in range(lo, hi + 1):
        rest_lo = first + step
        rem = n - first
        if strict:
            low = sum(range(rest_lo, rest_lo + l - 1))
            high = sum(range(hi - l + 2, hi + 1))
        else:
            low = rest_lo * (l - 1)
            high = hi * (l - 1)
        if rem < low:
            break
        if rem > high:
            continue
        for tail in _compositions(rest_lo, hi, l - 1, rem, strict):
            yield (first,) + tail


def enumerate_monomials(alg: CutoffAlgebra, key) -> List[Monomial]:
    n, l = key
    if l < 0:
        return []
    return list(_compositions(-alg.N, alg.N, l, n, alg.kind == FERMIONIC))


def has_run(m: Monomial, w: int) -> bool:
    s = set(m)
    return any(all(i + j in s for j in range(w)) for i in s)


def enumerate_quotient_basis(alg: CutoffAlgebra, w: int, key) -> int:
    if w < 2:
        raise ValueError("run length must be at least 2")
    return sum(1 for m in enumerate_monomials(alg, key) if not has_run(m, w))


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class IdealFamily:
    """Shift families y_{a,i} = sum coef * x_{i+offsets} over bases a.

    ``reference`` lists the undeformed offsets of each base; the reference
    (monomial) family is generated by those monomials alone.
    """

    name: str
    kind: str
    bases: Tuple[Tuple[Term, ...], ...]
    reference: Tuple[Tuple[int, ...], ...]
    params: Tuple[Tuple[str, object], ...] = ()
    deformation: Optional[str] = "q"
    conjecture: bool = False
    span: int = 24

    @property
    def degree(self) -> int:
        return len(self.reference[0])

    @property
    def exact(self) -> bool:
        return all(c.hi == EXACT for base in self.bases for c, _ in base)

    @property
    def qprecision(self):
        return min((c.hi for base in self.bases for c, _ in base), default=EXACT)

    def spread(self) -> int:
        return max(max(o) - min(o) for o in self.reference)

    def margin(self) -> int:
        return 2 * self.spread()

    def base_degree(self, a: int) -> int:
        return sum(self.reference[a])

    def template(self, a: int, i: int) -> List[Term]:
        return [(c, tuple(i + x for x in o)) for c, o in self.bases[a]]

    def reference_family(self) -> "IdealFamily":
        one = QSeries.constant(1)
        bases = tuple(((one, o),) for o in self.reference)
        return IdealFamily(f"{self.name}/reference", self.kind, bases, self.reference,
                           deformation=None, span=self.span)

    def monic(self, qorder: Optional[int] = None) -> "IdealFamily":
        """Divide each base by the coefficient of its undeformed monomial."""
        new = []
        for base, ref in zip(self.bases, self.reference):
            lead = next((c for c, o in base if o == ref), None)
            if lead is None or lead.is_zero():
                raise ValueError(f"{self.name}: undeformed monomial missing")
            if lead == QSeries.constant(1) and lead.is_exact():
                new.append(base)
                continue
            if lead.lo != 0:
                raise ValueError(f"{self.name}: leading coefficient is not a unit")
            if lead.is_exact() and len(lead) == 1:
                inv = QSeries.constant(Fraction(1) / Fraction(lead[0]))
            else:
                hi = lead.hi if lead.hi != EXACT else qorder
                if hi is None:
                    raise ValueError("need a truncation order to invert a series")
                inv = lead.inverse(hi)
            new.append(tuple((c * inv, o) for c, o in base))
        return IdealFamily(self.name, self.kind, tuple(new), self.reference, self.params,
                           self.deformation, self.conjecture, self.span)

    def truncate(self, qorder: int) -> "IdealFamily":
        bases = tuple(tuple((c.truncate(qorder), o) for c, o in base) for base in self.bases)
        return IdealFamily(self.name, self.kind, bases, self.reference, self.params,
                           self.deformation, self.conjecture, self.span)

    def generator_element(self, a: int, i: int) -> AlgebraElement:
        return AlgebraElement(self.kind, {o: c for c, o in self.template(a, i)})


def _spec(name, params):
    if not params:
        return name
    return name + ":" + ",".join(f"{k}={v}" for k, v in params)


def _q(e: int, sign: int = 1) -> QSeries:
    return QSeries({e: sign})


def _monomial_run(w: int, kind: str, span: int) -> IdealFamily:
    if w < 2:
        raise ValueError("monomial-run needs w >= 2")
    o = tuple(range(w))
    return IdealFamily(_spec("monomial-run", [("w", w)] + ([("kind", kind)] if kind != BOSONIC else [])),
                       kind, (((QSeries.constant(1), o),),), (o,), deformation=None, span=span)


def _theta_k1(span: int, perturb: Optional[int]) -> IdealFamily:
    terms = []
    for alpha in range(-span, span + 1):
        o = tuple(sorted((3 * alpha, 1 - 3 * alpha)))
        if o[1] - o[0] > span:
            continue
        s = -1 if alpha % 2 else 1
        c = _q(alpha * (3 * alpha - 1) // 2, s)
        if perturb is not None and alpha == perturb:
            c = QSeries({1: 2})
        terms.append((c, o))
    params = [] if perturb is None else [("perturb", perturb)]
    return IdealFamily(_spec("theta-k1", params), BOSONIC, (tuple(terms),), ((0, 1),),
                       params=tuple(params), span=span)


def _fermi_theta(span: int) -> IdealFamily:
    terms = []
    for k in range(0, span):
        o = (-k, k + 1)
        if o[1] - o[0] > span:
            break
        s = -1 if k % 2 else 1
        terms.append((_q(k * (k + 1) // 2, s), o))
    return IdealFamily("fermi-theta", FERMIONIC, (tuple(terms),), ((0, 1),),
                       conjecture=True, span=span)


def _from_series(name, kind, poly, base_shift, reference, params, span, conjecture):
    elem = psi_inverse(poly, kind)
    terms = tuple((c, tuple(x - base_shift for x in m)) for m, c in sorted(elem.terms.items()))
    return IdealFamily(name, kind, (terms,), (reference,), params=params,
                       conjecture=conjecture, span=span)


def _theta_fkk(k: int, qorder: int, span: int) -> IdealFamily:
    from .theta import fnk_series
    if k < 2:
        raise ValueError("theta-fkk needs k >= 2 (k = 1 is the trivial family)")
    f = fnk_series(k, k, qorder)
    # psi of y_i is (z_1..z_k)^{i-1} f, so offsets are the indices of psi^{-1}(f) minus 1
    return _from_series(_spec("theta-fkk", [("k", k)]), BOSONIC, f, 1, tuple(range(k)),
                        (("k", k),), span, False)


def _fermi_fkk(k: int, qorder: int, span: int) -> IdealFamily:
    from .theta import fermionic_generator
    f = fermionic_generator(k, qorder)
    return _from_series(_spec("fermi-fkk", [("k", k)]), FERMIONIC, f, 0, tuple(range(k)),
                        (("k", k),), span, True)


def _conj51(t, qt, qorder: int, span: int) -> IdealFamily:
    from .theta import conj51_value
    t = as_rational(t)
    qt = as_rational(qt)
    if t == 0:
        raise ValueError("conj51 needs t != 0")
    even, odd = [], []
    for d in range(0, span + 1):
        weight = qt ** (d * d // 4)
        if not weight:
            continue
        # k and -k (or k and -k-1) in the defining sum hit the same monomial
        c = conj51_value(Fraction(t) ** d, qorder) * (weight * (1 if d == 0 else 2))
        if c.is_zero():
            continue
        if d % 2 == 0:
            even.append((c, (-(d // 2), d // 2)))
        else:
            odd.append((c, (-(d // 2), d // 2 + 1)))
    params = (("t", t), ("qt", qt))
    return IdealFamily(_spec("conj51", [("t", t), ("qt", qt)]), BOSONIC, (tuple(even), tuple(odd)),
                       ((0, 0), (0, 1)), params=params, deformation="qt", conjecture=True, span=span)


FAMILY_NAMES = ("monomial-run", "theta-k1", "theta-fkk", "conj51", "fermi-theta", "fermi-fkk")


def builtin_family(name: str, params: Optional[Mapping[str, object]] = None, qorder: int = 8,
                   span: int = 24) -> IdealFamily:
    params = dict(params or {})

    def take(key, default=None, conv=as_rational):
        if key not in params:
            if default is None:
                raise ValueError(f"{name} needs parameter {key!r}")
            return default
        v = params.pop(key)
        return conv(v) if conv else v

    def int_param(key, default=None):
        v = take(key, default)
        v = as_rational(v)
        if not isinstance(v, int):
            raise ValueError(f"{name}: {key} must be an integer")
        return v

    if name == "monomial-run":
        w = int_param("w", 2)
        kind = str(take("kind", BOSONIC, conv=None))
        fam = _monomial_run(w, kind, span)
    elif name == "theta-k1":
        perturb = int_param("perturb") if "perturb" in params else None
        fam = _theta_k1(span, perturb)
    elif name == "theta-fkk":
        fam = _theta_fkk(int_param("k", 2), qorder, span)
    elif name == "conj51":
        t = take("t")
        qt = take("qt", 1)
        fam = _conj51(t, qt, qorder, span)
    elif name == "fermi-theta":
        fam = _fermi_theta(span)
    elif name == "fermi-fkk":
        k = int_param("k", 2)
        if k < 2:
            raise ValueError("fermi-fkk needs k >= 2")
        fam = _fermi_fkk(k, qorder, span)
    else:
        raise UnknownFamily(f"unknown family {name!r}; known: {', '.join(FAMILY_NAMES)}")
    if params:
        raise ValueError(f"{name}: unexpected parameter(s) {sorted(params)}")
    return fam


# ---------------------------------------------------------------- matrices


def generator_range(alg: CutoffAlgebra, fam: IdealFamily, a: int) -> range:
    """Generator indices i with at least one term inside the cutoff."""
    lo, hi = None, None
    for _, o in fam.bases[a]:
        a_lo, a_hi = -alg.N - min(o), alg.N - max(o)
        if a_lo > a_hi:
            continue
        lo = a_lo if lo is None else min(lo, a_lo)
        hi = a_hi if hi is None else max(hi, a_hi)
    if lo is None:
        return range(0)
    return range(lo, hi + 1)


def ideal_rows(alg: CutoffAlgebra, fam: IdealFamily, key) -> Tuple[List[Dict[int, QSeries]], List[Monomial]]:
    """Rows m * y_{a,i} of the graded component, with QSeries entries."""
    if 2 * alg.N > fam.span:
        raise ValueError(f"{fam.name} was materialized for cutoffs up to N = {fam.span // 2}")
    if fam.kind != alg.kind:
        raise ValueError("family and algebra kinds differ")
    n, l = key
    cols = enumerate_monomials(alg, key)
    index = {m: j for j, m in enumerate(cols)}
    rows: List[Dict[int, QSeries]] = []
    d = fam.degree
    if l < d:
        return rows, cols
    fermi = alg.kind == FERMIONIC
    for a in range(len(fam.bases)):
        for i in generator_range(alg, fam, a):
            deg = d * i + fam.base_degree(a)
            terms = [(c, o) for c, o in fam.template(a, i) if -alg.N <= o[0] and o[-1] <= alg.N]
            if not terms:
                continue
            for m in enumerate_monomials(alg, (n - deg, l - d)):
                row: Dict[int, QSeries] = {}
                for c, o in terms:
                    if fermi:
                        s, mono = fermi_sort(m + o)
                        if not s:
                            continue
                    else:
                        s, mono = 1, tuple(sorted(m + o))
                    j = index[mono]
                    v = c if s > 0 else -c
                    row[j] = row[j] + v if j in row else v
                row = {j: v for j, v in row.items() if not v.is_zero()}
                if row:
                    rows.append(row)
    return rows, cols


def ideal_component(alg: CutoffAlgebra, fam: IdealFamily, key, q=None, qorder: int = 8):
    """Rows of the ideal component; rational entries at q, or QSeries entries if q is formal."""
    fam = _prepared(fam, q, qorder)
    rows, cols = ideal_rows(alg, fam, key)
    if q is FORMAL:
        return rows, cols
    q = as_rational(q)
    out = []
    for row in rows:
        r = {j: v.evaluate(q) for j, v in row.items()}
        r = {j: v for j, v in r.items() if v}
        if r:
            out.append(r)
    return out, cols


def _prepared(fam: IdealFamily, q, qorder: int) -> IdealFamily:
    if fam.exact:
        return fam
    fam = fam.truncate(qorder)
    if q is not FORMAL:
        fam = fam.monic(qorder)
    return fam


def graded_dim(alg: CutoffAlgebra, fam: IdealFamily, key, q=None, qorder: int = 8) -> Tuple[int, int, int]:
    """(ambient, rank, quotient) of the graded component at (n, l)."""
    rows, cols = ideal_component(alg, fam, key, q, qorder)
    ambient = len(cols)
    if not rows:
        return ambient, 0, ambient
    if q is FORMAL:
        rank = QAdicElimination(rows, ambient, qorder).rank()
    else:
        rank = rank_fraction_free(rows, ambient)
    return ambient, rank, ambient - rank


# ---------------------------------------------------------------- flatness


@dataclass
class KeyResult:
    n: int
    l: int
    interior: bool
    ambient: int
    reference: int
    quotients: List[int]
    verdict: str

    def as_dict(self):
        return {"n": self.n, "l": self.l, "interior": self.interior, "ambient": self.ambient,
                "reference": self.reference, "quotients": self.quotients, "verdict": self.verdict}


@dataclass
class DimReport:
    family: str
    N: int
    kind: str
    q_samples: List[str]
    qorder: int
    at_truncation: bool
    keys: List[KeyResult] = field(default_factory=list)
    conjecture: bool = False

    @property
    def flat(self) -> bool:
        return all(k.verdict == "flat" for k in self.keys if k.interior)

    def deficient_keys(self):
        return [(k.n, k.l) for k in self.keys if k.interior and k.verdict == "deficient"]

    @property
    def status(self) -> str:
        if not self.flat:
            return FAIL
        return CONJ if self.conjecture else PASS

    def as_dict(self):
        return {"family": self.family, "N": self.N, "kind": self.kind, "q_samples": self.q_samples,
                "qorder": self.qorder, "at_truncation": self.at_truncation, "flat": self.flat,
                "status": self.status, "keys": [k.as_dict() for k in self.keys]}


def interior(alg: CutoffAlgebra, fam: IdealFamily, key) -> bool:
    n, l = key
    return abs(n) <= (alg.N - fam.margin()) * l


def _sample_label(q) -> str:
    return "formal" if q is FORMAL else str(as_rational(q))


def _key_job(args):
    alg, fam, ref, key, q_samples, qorder = args
    amb, _, ref_quot = graded_dim(alg, ref, key)
    quots = [graded_dim(alg, fam, key, q, qorder)[2] for q in q_samples]
    return key, amb, ref_quot, quots


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FLATDEFORM_THREADS", "1")))
    except ValueError:
        return 1


def flatness_report(alg: CutoffAlgebra, fam: IdealFamily, l_max: int, n_range=None,
                    q_samples: Sequence = (Fraction(1, 3), Fraction(2, 5), Fraction(5, 7)),
                    qorder: int = 8, check_semicontinuity: bool = True) -> DimReport:
    ref = fam.reference_family()
    keys = []
    for l in range(1, l_max + 1):
        ns = range(-alg.N * l, alg.N * l + 1) if n_range is None else [n for n in n_range if abs(n) <= alg.N * l]
        keys.extend(GradedKey(n, l) for n in ns)
    jobs = [(alg, fam, ref, k, list(q_samples), qorder) for k in keys]
    workers = min(_threads(), len(jobs)) if jobs else 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_key_job, jobs))
    else:
        results = [_key_job(j) for j in jobs]
    rep = DimReport(fam.name, alg.N, alg.kind, [_sample_label(q) for q in q_samples], qorder,
                    at_truncation=not fam.exact, conjecture=fam.conjecture)
    for key, amb, ref_quot, quots in results:
        if any(x > ref_quot for x in quots):
            if check_semicontinuity:
                raise SemicontinuityViolation(
                    f"{fam.name} at {tuple(key)}: quotient {max(quots)} exceeds the undeformed {ref_quot}")
            verdict = "excess"
        elif all(x == ref_quot for x in quots):
            verdict = "flat"
        else:
            verdict = "deficient"
        rep.keys.append(KeyResult(key.n, key.l, interior(alg, fam, key), amb, ref_quot, quots, verdict))
    return rep
