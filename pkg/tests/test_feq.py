import random
from fractions import Fraction

import pytest

from flatdeform.algebra import builtin_family
from flatdeform.errors import CheckFailed, EmptySystem
from flatdeform.feq import (FamilySpec, RelationVector, check_fa1, check_fah1, ds_monomial,
                            family_spec_from_ideal, solve_relation_space, theta_relation_vector)
from flatdeform.funcreal import BOSONIC, AlgebraElement, generator_genfun
from flatdeform.ring import LaurentPoly, QSeries
from flatdeform.theta import f1_series, fnk_series

MONO = generator_genfun({}, [1])


def test_fa1_theta():
    fam = FamilySpec([f1_series(8)], 3, [1])
    assert check_fa1(fam, theta_relation_vector(8), 8).status == "pass"


def test_fa1_q0_monomial():
    fam = FamilySpec(MONO, 3, [1])
    assert check_fa1(fam, RelationVector({(0, 0): -1, (0, 1): 1}, 3), 4).status == "pass"


def test_fa1_perturbed_fails():
    f = f1_series(8) + LaurentPoly.monomial((4, -3), 1, 2).with_precision(8)
    fam = FamilySpec([f], 3, [1])
    with pytest.raises(CheckFailed):
        check_fa1(fam, theta_relation_vector(8), 8)


@pytest.mark.parametrize("k,M", [(1, 8), (2, 6), (3, 4)])
def test_fah1(k, M):
    assert check_fah1(k, fnk_series(k, k, M), theta_relation_vector(M), M).status == "pass"


def test_fah1_wrong_vector_fails():
    with pytest.raises(CheckFailed):
        check_fah1(2, fnk_series(2, 2, 6), RelationVector({(0, 0): 1}), 6)


def test_solve_monomial():
    rs = solve_relation_space(FamilySpec(MONO, 3, [1]), 6)
    assert rs.dimension == 1 and rs.mode == "exact"
    assert rs.basis[0].evaluate(0) == {(0, 0): -1, (0, 1): 1}


def test_ds_examples():
    assert ds_monomial([1], 3) == 1
    assert [ds_monomial([0, 1], s) for s in (1, 2, 3)] == [1, 1, 1]
    assert ds_monomial([1], 2) == 0
    with pytest.raises(ValueError):
        ds_monomial([1, 1], 2)


def test_solve_theta_formal():
    fam = FamilySpec([f1_series(8)], 3, [1])
    rs = solve_relation_space(fam, 6, qorder=8)
    assert rs.mode == "formal" and rs.dimension == 1
    assert rs.basis[0].proportional_to(theta_relation_vector(rs.precision, 6))


def test_solve_theta_specialized_truncation_artifact():
    # truncated series evaluated at a number no longer satisfy the relation
    fam = FamilySpec([f1_series(8)], 3, [1])
    assert solve_relation_space(fam, 6, q=Fraction(1, 3), mode="specialize").dimension == 0


def test_solve_stable_in_window():
    fam = FamilySpec([f1_series(8)], 3, [1])
    assert solve_relation_space(fam, 6, qorder=8).dimension == solve_relation_space(fam, 8, qorder=8).dimension
    assert solve_relation_space(FamilySpec(MONO, 3, [1]), 4).dimension == \
        solve_relation_space(FamilySpec(MONO, 3, [1]), 6).dimension


def test_empty_system():
    with pytest.raises(EmptySystem):
        FamilySpec([], 3)
    with pytest.raises(EmptySystem):
        solve_relation_space(FamilySpec([LaurentPoly.zero(2)], 3, [1]), 3)


def test_relation_dims_frozen():
    got = {}
    for name, params in [("fermi-theta", {}), ("fermi-fkk", {"k": 2}), ("theta-fkk", {"k": 2})]:
        fam = builtin_family(name, params, qorder=8)
        got[name] = [solve_relation_space(family_spec_from_ideal(fam, s), 6, qorder=8).dimension for s in (1, 2, 3)]
    assert got == {"fermi-theta": [1, 1, 1], "fermi-fkk": [1, 1, 1], "theta-fkk": [0, 0, 1]}


def test_kernel_vanishes_in_algebra():
    M = 8
    fam = builtin_family("theta-k1")
    rs = solve_relation_space(FamilySpec([f1_series(M)], 3, [1]), 6, qorder=M)
    v = rs.basis[0]
    prec = rs.precision
    for i in (-1, 0, 2):
        acc = AlgebraElement(BOSONIC, {})
        for (a, j), c in v.entries.items():
            y = fam.generator_element(0, i + j)
            y = AlgebraElement(BOSONIC, {m: x.truncate(prec) for m, x in y.terms.items()})
            acc = acc + AlgebraElement(BOSONIC, {(i + 3 - 2 * j - 1,): c}) * y
        assert all(x.valuation() is None or x.valuation() >= prec for x in acc.terms.values())


def test_fa1_iff_kernel_randomized():
    rng = random.Random(7)
    fam = FamilySpec(MONO, 3, [1])
    for _ in range(10):
        c = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        good = RelationVector({(0, 0): -c, (0, 1): c}, 3)
        assert check_fa1(fam, good, 4).status == "pass"
        j = rng.randint(-3, 3)
        bad = RelationVector({**good.entries, (0, j): good.entries.get((0, j), QSeries.zero()) + 1}, 3)
        with pytest.raises(CheckFailed):
            check_fa1(fam, bad, 4)
