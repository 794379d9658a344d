from fractions import Fraction

import pytest

from flatdeform.algebra import (FORMAL, CutoffAlgebra, builtin_family, enumerate_monomials,
                                enumerate_quotient_basis, flatness_report, graded_dim, ideal_component,
                                interior)
from flatdeform.errors import UnknownFamily
from flatdeform.funcreal import BOSONIC, FERMIONIC, AlgebraElement
from flatdeform.ring import QSeries

B3 = CutoffAlgebra(BOSONIC, 3)
Q3 = Fraction(1, 3)


def test_enumerate_examples():
    assert enumerate_monomials(B3, (5, 1)) == []
    assert sorted(enumerate_monomials(B3, (1, 2))) == [(-2, 3), (-1, 2), (0, 1)]
    assert sorted(enumerate_monomials(CutoffAlgebra(FERMIONIC, 3), (0, 2))) == [(-3, 3), (-2, 2), (-1, 1)]
    assert len(enumerate_monomials(B3, (0, 2))) == 4


def test_quotient_basis_examples():
    assert enumerate_quotient_basis(B3, 2, (1, 2)) == 2
    assert enumerate_quotient_basis(B3, 2, (0, 2)) == 4
    alg = CutoffAlgebra(BOSONIC, 5)
    for n in (-3, -1, 1, 3, 5):
        amb = len(enumerate_monomials(alg, (n, 2)))
        assert enumerate_quotient_basis(alg, 2, (n, 2)) == amb - 1
    with pytest.raises(ValueError):
        enumerate_quotient_basis(B3, 1, (0, 2))


def test_ideal_component_monomial_run():
    rows, cols = ideal_component(CutoffAlgebra(BOSONIC, 2), builtin_family("monomial-run", {"w": 2}), (3, 2), Q3)
    assert len(rows) == 1 and [cols[j] for j in rows[0]] == [(1, 2)]


def _row(alg, fam, key, q):
    rows, cols = ideal_component(alg, fam, key, q)
    assert len(rows) == 1
    return {cols[j]: v for j, v in rows[0].items()}


def test_ideal_component_theta_k1_row():
    row = _row(CutoffAlgebra(BOSONIC, 5), builtin_family("theta-k1"), (1, 2), Q3)
    assert row == {(0, 1): 1, (-2, 3): -Q3, (-3, 4): -Q3 ** 2}


def test_ideal_component_fermi_row():
    row = _row(CutoffAlgebra(FERMIONIC, 5), builtin_family("fermi-theta"), (1, 2), Q3)
    assert row[(0, 1)] == 1 and row[(-1, 2)] == -Q3 and row[(-2, 3)] == Q3 ** 3
    assert row == {(0, 1): 1, (-1, 2): -Q3, (-2, 3): Q3 ** 3, (-3, 4): -Q3 ** 6, (-4, 5): Q3 ** 10}


def test_graded_dim_examples():
    assert graded_dim(B3, builtin_family("monomial-run", {"w": 2}), (1, 2)) == (3, 1, 2)
    # six pairs x_a x_{1-a} at N = 6, one relation
    a6 = CutoffAlgebra(BOSONIC, 6)
    assert graded_dim(a6, builtin_family("theta-k1"), (1, 2), Q3) == (6, 1, 5)
    assert enumerate_quotient_basis(a6, 2, (1, 2)) == 5


def test_q0_equals_reference_matrix():
    alg = CutoffAlgebra(BOSONIC, 5)
    for name, params in [("theta-k1", {}), ("theta-fkk", {"k": 2})]:
        fam = builtin_family(name, params, qorder=4)
        ref = fam.reference_family()
        for key in [(1, 2), (0, 3), (2, 3), (-1, 3)]:
            assert ideal_component(alg, fam, key, 0) == ideal_component(alg, ref, key, 0)
    f = builtin_family("fermi-theta")
    alg = CutoffAlgebra(FERMIONIC, 5)
    assert ideal_component(alg, f, (2, 3), 0) == ideal_component(alg, f.reference_family(), (2, 3), 0)


def test_builtin_family_examples():
    fam = builtin_family("theta-k1")
    for c, o in fam.bases[0]:
        a = next(a for a in range(-9, 10) if tuple(sorted((3 * a, 1 - 3 * a))) == o)
        assert c == QSeries({a * (3 * a - 1) // 2: (-1) ** (a % 2)})
    f2 = builtin_family("theta-fkk", {"k": 2}, qorder=4)
    q0 = [(o, c[0]) for c, o in f2.bases[0] if c.valuation() == 0]
    assert q0 == [((0, 1), 1)]
    c = builtin_family("conj51", {"t": 2, "qt": 0}, qorder=3)
    assert len(c.bases[0]) == 1 and c.bases[0][0][1] == (0, 0)
    assert c.bases[0][0][0].items() == [(0, 2), (1, -2), (2, -2)]
    with pytest.raises(UnknownFamily):
        builtin_family("nope")
    with pytest.raises(ValueError):
        builtin_family("theta-k1", {"zz": 1})


def test_flatness_theta_k1():
    rep = flatness_report(CutoffAlgebra(BOSONIC, 6), builtin_family("theta-k1"), 3, q_samples=[Q3, Fraction(2, 5)])
    assert rep.flat and rep.status == "pass" and not rep.at_truncation
    assert sum(k.interior for k in rep.keys) > 0


def test_flatness_perturbed_deficient():
    rep = flatness_report(CutoffAlgebra(BOSONIC, 6), builtin_family("theta-k1", {"perturb": 1}), 3,
                          q_samples=[Q3, Fraction(2, 5)])
    assert not rep.flat and rep.status == "fail"
    assert any(l == 3 for _, l in rep.deficient_keys())


def test_flatness_fermi_theta():
    rep = flatness_report(CutoffAlgebra(FERMIONIC, 6), builtin_family("fermi-theta"), 3, q_samples=[Q3, Fraction(2, 5)])
    assert rep.flat and rep.status == "conjecture-support"


def test_semicontinuity_everywhere():
    alg = CutoffAlgebra(BOSONIC, 5)
    for fam in [builtin_family("theta-k1"), builtin_family("theta-k1", {"perturb": 1}),
                builtin_family("theta-fkk", {"k": 2}, qorder=4)]:
        ref = fam.reference_family()
        for key in [(0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]:
            r0 = graded_dim(alg, ref, key)[2]
            for q in (Q3, Fraction(2, 5), FORMAL):
                assert graded_dim(alg, fam, key, q, 4)[2] <= r0


def test_flat_families_match_enumeration():
    alg = CutoffAlgebra(BOSONIC, 6)
    fam = builtin_family("theta-k1")
    for key in [(0, 2), (1, 2), (0, 3), (2, 3), (-1, 3)]:
        if interior(alg, fam, key):
            assert graded_dim(alg, fam, key, Q3)[2] == enumerate_quotient_basis(alg, 2, key)
    fam = builtin_family("theta-fkk", {"k": 2}, qorder=5)
    for key in [(0, 3), (1, 3), (2, 3)]:
        assert graded_dim(alg, fam, key, FORMAL, 5)[2] == enumerate_quotient_basis(alg, 2, key)


def test_interior_stability():
    fam = builtin_family("theta-k1")
    a6, a8 = CutoffAlgebra(BOSONIC, 6), CutoffAlgebra(BOSONIC, 8)
    for key in [(0, 2), (1, 2), (0, 3), (1, 3), (-2, 3)]:
        assert interior(a6, fam, key)
        # the defect against the undeformed count is what must not move
        d6 = graded_dim(a6, fam, key, Q3)[2] - enumerate_quotient_basis(a6, 2, key)
        d8 = graded_dim(a8, fam, key, Q3)[2] - enumerate_quotient_basis(a8, 2, key)
        assert d6 == d8 == 0
    pert = builtin_family("theta-k1", {"perturb": 1})
    d = [graded_dim(a, pert, (0, 3), Q3)[2] - enumerate_quotient_basis(a, 2, (0, 3)) for a in (a6, a8)]
    assert d[0] == d[1] < 0


def test_relation_identity_theta_k1():
    M = 10
    fam = builtin_family("theta-k1")
    for j in (0, 1, -2):
        acc = AlgebraElement(BOSONIC, {})
        for b in range(-6, 7):
            e = b * (b - 1) // 2
            if e >= M:
                continue
            y = fam.generator_element(0, j + b)
            y = AlgebraElement(BOSONIC, {m: c.truncate(M) for m, c in y.terms.items()})
            x = AlgebraElement(BOSONIC, {(j - 2 * b + 2,): QSeries({e: (-1) ** (b % 2)}, M)})
            acc = acc + x * y
        assert all(c.valuation() >= M for c in acc.terms.values())
