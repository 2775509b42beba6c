import itertools
import math

import numpy as np
import pytest

from cocyclekit.core import Mat2
from cocyclekit.errors import (
    Inadmissible,
    InvalidCocycle,
    NotPrimitive,
    SingularComponent,
)
from cocyclekit.shift import (
    Bernoulli,
    Cocycle,
    Markov,
    Word,
    branch_mass_check,
    cocycle_from_dict,
    cocycle_to_dict,
    cylinder_measure,
    enumerate_branches,
    enumerate_words,
    load_cocycle,
    oriented_lift,
    primitivity_check,
    save_cocycle,
    stationary_vector,
)

A0 = Mat2.diagonal(2.0, 0.5)
B0 = Mat2(0.0, 0.0, 0.0, 1.0)


def explo1():
    return Cocycle((A0, B0), frozenset({2}), Bernoulli((0.5, 0.5)))


def explo1_markov():
    return Cocycle((A0, B0), frozenset({2}),
                   Markov(((0.5, 0.5), (0.5, 0.5)), (0.5, 0.5)))


def test_stationary_vector():
    q = stationary_vector(np.full((2, 2), 0.5))
    assert np.allclose(q, [0.5, 0.5], atol=1e-14)
    P = np.array([[0.3, 0.6], [0.7, 0.4]])
    q = stationary_vector(P)
    assert np.max(np.abs(P @ q - q)) <= 1e-12
    assert q.sum() == pytest.approx(1.0) and np.all(q > 0)
    with pytest.raises(NotPrimitive):
        stationary_vector(np.eye(2))
    with pytest.raises(NotPrimitive):
        stationary_vector(np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_primitivity_check():
    assert primitivity_check(np.full((3, 3), 1 / 3)) == 1
    assert primitivity_check(np.array([[0.0, 0.5], [1.0, 0.5]])) == 2
    with pytest.raises(NotPrimitive):
        primitivity_check(np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_cocycle_validation():
    with pytest.raises(InvalidCocycle):
        Cocycle((A0, B0), frozenset({1}), Bernoulli((0.5, 0.5)))  # wrong rank claim
    with pytest.raises(InvalidCocycle):
        Cocycle((A0, B0), frozenset(), Bernoulli((0.5, 0.5)))  # B0 not invertible
    with pytest.raises(InvalidCocycle):
        Cocycle((A0, B0), frozenset({2}), Bernoulli((0.4, 0.5)))  # bad p
    c = explo1()
    assert c.singular_mass == pytest.approx(0.5)
    assert c.invertible == frozenset({1})


def test_cylinder_measure():
    c = explo1()
    assert cylinder_measure(c, (1, 2, 1)) == pytest.approx(1 / 8)
    assert cylinder_measure(c, ()) == 1.0
    m = explo1_markov()
    assert cylinder_measure(m, (1, 2)) == pytest.approx(1 / 4)
    with pytest.raises(Inadmissible):
        cylinder_measure(c, (1, 3))
    bad = Cocycle((A0, B0), frozenset({2}),
                  Markov(((0.0, 0.5), (1.0, 0.5)), (1 / 3, 2 / 3)))
    with pytest.raises(Inadmissible):
        cylinder_measure(bad, (1, 1))  # forbidden transition


def test_cylinder_total_mass():
    c = explo1_markov()
    for n in range(1, 9):
        total = sum(cylinder_measure(c, w) for w in enumerate_words(c, n))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_enumerate_branches():
    c = explo1()
    assert [w.symbols for w in enumerate_branches(c, 2, 2, 1)] == [(2, 2)]
    assert [w.symbols for w in enumerate_branches(c, 2, 2, 3)] == [(2, 1, 1, 2)]
    with pytest.raises(ValueError):
        enumerate_branches(c, 1, 2, 1)  # start must be singular


def test_enumerate_branches_disjoint_cylinders():
    c = explo1_markov()
    words = []
    for n in range(1, 6):
        words += [w.symbols for w in enumerate_branches(c, 2, 1, n)]
    assert len(words) == len(set(words))
    # cylinders anchored at the terminal symbol are disjoint: a branch can
    # never be a suffix of another one (branches start singular, interiors
    # are invertible)
    for w1, w2 in itertools.combinations(words, 2):
        shorter, longer = sorted((w1, w2), key=len)
        assert shorter != longer[-len(shorter):]


def test_branch_mass_check():
    m = explo1_markov()
    res = branch_mass_check(m, 2, 30)
    assert 0.0 <= res <= 2.0 ** -30 + 1e-12
    assert branch_mass_check(m, 2, 0) == pytest.approx(0.5)
    # all-singular alphabet: every length-2 word is a branch
    proj1 = Mat2(1, 0, 0, 0)
    proj2 = Mat2(0, 0, 1e-3, 1)  # rank one, range/kernel off axis
    c = Cocycle((proj1, proj2), frozenset({1, 2}),
                Markov(((0.25, 0.75), (0.75, 0.25)), (0.5, 0.5)))
    assert branch_mass_check(c, 1, 1) == pytest.approx(0.0, abs=1e-15)


def test_bernoulli_geometric_normalization():
    c = explo1()
    q = c.singular_mass
    for n_max in (5, 20, 40):
        total = sum(p_s * (1 - q) ** n
                    for p_s in [c.base.p[1]] for n in range(n_max + 1))
        assert abs(total - (1 - (1 - q) ** (n_max + 1))) <= 1e-12


def test_oriented_lift_positive_dets():
    c = Cocycle((Mat2.rotation(0.3), Mat2.diagonal(2, 0.5)), frozenset(),
                Bernoulli((0.5, 0.5)))
    lift = oriented_lift(c)
    assert len(lift.edges) == 2 * 4
    # det>0 everywhere: two disconnected copies, no cross edges
    for e in lift.edges:
        assert (e.src <= 2) == (e.dst <= 2)
        assert e.oriented_matrix.det() > 0.0
    assert lift.flipped == frozenset()


def test_oriented_lift_negative_det():
    c = Cocycle((Mat2.diagonal(1.0, -1.0),), frozenset(), Bernoulli((1.0,)))
    lift = oriented_lift(c)
    assert len(lift.edges) == 2
    assert {(e.src, e.dst) for e in lift.edges} == {(1, 2), (2, 1)}  # 1 -> 1* -> 1
    for e in lift.edges:
        assert e.oriented_matrix.det() > 0.0
    assert lift.flipped == frozenset({1})


def test_oriented_lift_star_involution():
    c = Cocycle((Mat2.rotation(0.4), Mat2(1.0, 0.2, 0.0, -1.0)), frozenset(),
                Bernoulli((0.5, 0.5)))
    lift = oriented_lift(c)
    assert len(lift.edges) == 2 * 4
    edge_set = {(e.src, e.dst) for e in lift.edges}
    assert {(lift.star(s), lift.star(d)) for s, d in edge_set} == edge_set


def test_oriented_lift_rejects_singular():
    with pytest.raises(SingularComponent):
        oriented_lift(explo1())


def test_cocycle_roundtrip(tmp_path):
    for c in (explo1(), explo1_markov()):
        path = tmp_path / "c.json"
        save_cocycle(c, path)
        c2 = load_cocycle(path)
        assert cocycle_to_dict(c2) == cocycle_to_dict(c)
        # parse -> serialize -> parse is a fixed point
        assert cocycle_to_dict(cocycle_from_dict(cocycle_to_dict(c2))) == cocycle_to_dict(c2)


def test_cocycle_from_dict_computes_q():
    d = {"k": 2, "singular": [2],
         "matrices": [[2, 0, 0, 0.5], [0, 0, 0, 1]],
         "base": {"markov": {"P": [[0.5, 0.5], [0.5, 0.5]]}}}
    c = cocycle_from_dict(d)
    assert c.base.q == pytest.approx((0.5, 0.5))


def test_word_str():
    assert str(Word((1, 2, 1))) == "1 2 1"
    assert len(Word((1, 2, 1))) == 3
