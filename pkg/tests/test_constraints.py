import pytest

from flatdeform.constraints import (APoly, ReducedExpansion, _replace, check_candidate,
                                    check_candidate_direct, derive_constraints, is_mb, reduce_two_ways,
                                    theta_candidate)
from flatdeform.errors import WindowEscape
from flatdeform.feq import FamilySpec, check_fa1, theta_relation_vector
from flatdeform.funcreal import generator_genfun
from flatdeform.ring import QSeries
from flatdeform.theta import f1_series


def a(m, W=6, cap=3, c=1):
    return APoly.var(W, cap, m, c)


def first_step(m, j, W=6):
    return {_replace(m, j, off): -a(off, W) for off in range(1, W + 1)}


def test_first_steps():
    s1 = first_step((0, 1, 2), 0)
    assert s1[(-1, 2, 2)] == -a(1) and s1[(-2, 2, 3)] == -a(2)
    s2 = first_step((0, 1, 2), 1)
    assert s2[(0, 0, 3)] == -a(1) and s2[(-1, 0, 4)] == -a(2)


def test_hand_expansion_w1():
    r1, r2 = reduce_two_ways(0, 1, 2)
    assert r1.terms == {(-1, 2, 2): -a(1, 1, 2)}
    assert r2.terms == {(0, 0, 3): -a(1, 1, 2)}


def test_apoly_cap_and_arith():
    x = a(1, 2, 2)
    y = a(2, 2, 2)
    assert (x * y).degrees() == [2]
    assert (x * y * x).is_zero()
    assert (x + y - x) == y
    assert (x * x + y).part(2) == x * x
    assert (x * x).evaluate({1: QSeries({1: 2})}, 8) == QSeries({2: 4}, 8)


def test_is_mb_and_expansion_guard():
    assert is_mb((0, 0, 2)) and not is_mb((0, 1)) and is_mb(())
    with pytest.raises(ValueError):
        ReducedExpansion({(0, 1): 1})


def test_constraints_w4():
    cs = {c.monomial: c.poly for c in derive_constraints(4, 2)}
    assert cs[(-1, 2, 2)].part(1) == -a(1, 4, 2)
    assert cs[(-3, 2, 4)] == -a(3, 4, 2) - a(2, 4, 2) * a(2, 4, 2)
    assert len(cs) == 8


def test_constraints_basic_invariants():
    cs = derive_constraints(6, 3)
    assert len(cs) == 22
    assert all(0 not in c.poly.degrees() for c in cs)
    assert all(c.poly.evaluate({}, 5).is_zero() for c in cs)
    shifted = derive_constraints(6, 3, i=1)
    assert [tuple(x - 1 for x in c.monomial) for c in shifted] == [c.monomial for c in cs]
    assert [c.poly for c in shifted] == [c.poly for c in cs]


def test_theta_candidate_values():
    t = theta_candidate(6)
    assert t == {2: QSeries({1: -1}), 3: QSeries({2: -1}), 5: QSeries({5: 1}), 6: QSeries({7: 1})}


def test_theta_candidate_passes():
    cs = derive_constraints(6, 3)
    rep = check_candidate(theta_candidate(6), cs, 8)
    assert rep.status == "pass" and rep.window["q_below"] == 4
    rep = check_candidate(theta_candidate(6), derive_constraints(6, 7), 8)
    assert rep.status == "pass" and rep.window["q_below"] == 8
    assert check_candidate({}, cs, 8).status == "pass"


@pytest.mark.parametrize("i", [-3, 0, 5])
def test_theta_candidate_direct(i):
    rep = check_candidate_direct(theta_candidate(6), 8, i=i)
    assert rep.status == "pass" and rep.window == {"q_below": 8, "probe": i}


def test_a1_candidate_fails():
    rep = check_candidate({1: 1}, derive_constraints(6, 3), 8)
    assert rep.status == "fail"
    ce = rep.counterexample
    assert ce["q_exp"] == 0 and ce["a_degree"] == 1 and ce["monomial"] == [-1, 2, 2]
    rep = check_candidate_direct({1: 1}, 8, max_depth=3)
    assert rep.status == "fail"


def test_perturbed_candidate_fails_direct():
    t = theta_candidate(6)
    t[2] = QSeries({1: -1, 3: 1})
    rep = check_candidate_direct(t, 8)
    assert rep.status == "fail" and rep.counterexample["q_exp"] == 4


def test_window_escape():
    with pytest.raises(WindowEscape):
        reduce_two_ways(0, 6, 3, index_window=(-3, 5))


def test_candidate_support_guard():
    with pytest.raises(ValueError):
        check_candidate({9: 1}, derive_constraints(6, 2), 4)


def test_candidate_matches_f1():
    M = 8
    u = {(0, m): v for m, v in theta_candidate(6, M).items()}
    f = generator_genfun(u, [1])[0].with_precision(M)
    assert f == f1_series(M)
    fam = FamilySpec([f], 3, [1])
    assert check_fa1(fam, theta_relation_vector(M), M).status == "pass"


def test_l4_probe():
    rep = check_candidate_direct(theta_candidate(6), 6, probe_length=4)
    assert rep.status == "pass"
