import math

import numpy as np
import pytest

from cocyclekit.core import Mat2, ProjPoint
from cocyclekit.errors import BadTruncation, NoSingularSymbol, ZeroVariance
from cocyclekit.families import explo1_cocycle, irrat_rotation_cocycle
from cocyclekit.limits import (
    SimConfig,
    clt_test,
    gordin_livsic_sigma,
    ks_to_standard_normal,
    ldt_tail,
    normal_cdf,
    observable_phi,
    simulate_lognorm,
    truncate_observable,
    wilson_interval,
)
from cocyclekit.shift import Bernoulli, Cocycle, Markov
from cocyclekit.stationary import furstenberg_l1, log_bound_constant, stationary_measure

LN2 = math.log(2)
PI = math.pi


def test_simulate_rotation_only():
    c = Cocycle((Mat2.rotation(0.5),), frozenset(), Bernoulli((1.0,)))
    s = simulate_lognorm(c, SimConfig(seed=1, n=500, trials=16, start=ProjPoint(0.3)))
    assert np.max(np.abs(s)) <= 1e-12


def test_simulate_deterministic_diagonal():
    c = Cocycle((Mat2.diagonal(2, 0.5),), frozenset(), Bernoulli((1.0,)))
    s = simulate_lognorm(c, SimConfig(seed=4, n=50, trials=8, start=ProjPoint(0.0)))
    assert np.allclose(s, LN2)


def test_simulate_explo1_matches_exponent():
    c = explo1_cocycle()
    cfg = SimConfig(seed=20240521, n=10_000, trials=1000, start=ProjPoint(0.7))
    s = simulate_lognorm(c, cfg)
    stderr = float(np.std(s, ddof=1) / math.sqrt(len(s)))
    assert abs(float(np.mean(s)) + LN2 / 2) <= 3 * stderr


def test_simulate_determinism_and_start_modes():
    c = explo1_cocycle()
    cfg = SimConfig(seed=99, n=100, trials=32)
    assert np.array_equal(simulate_lognorm(c, cfg), simulate_lognorm(c, cfg))
    inv = Cocycle((Mat2.rotation(1.0),), frozenset(), Bernoulli((1.0,)))
    with pytest.raises(NoSingularSymbol):
        simulate_lognorm(inv, SimConfig(seed=1, n=10, trials=2))  # from-eta needs atoms


def test_simulate_markov_base():
    c = Cocycle((Mat2.diagonal(2, 0.5), Mat2(0, 0, 0, 1)), frozenset({2}),
                Markov(((0.3, 0.6), (0.7, 0.4)), stationary_vector_of()))
    s = simulate_lognorm(c, SimConfig(seed=5, n=4000, trials=200))
    ref = furstenberg_l1(c).l1
    stderr = float(np.std(s, ddof=1) / math.sqrt(len(s)))
    assert abs(float(np.mean(s)) - ref) <= 4 * stderr


def stationary_vector_of():
    from cocyclekit.shift import stationary_vector

    return tuple(stationary_vector(np.array([[0.3, 0.6], [0.7, 0.4]])))


def test_observable_phi():
    c = explo1_cocycle()
    rot = Cocycle((Mat2.rotation(0.9),), frozenset(), Bernoulli((1.0,)))
    assert observable_phi(rot, 1, ProjPoint(0.4)) == pytest.approx(0.0, abs=1e-15)
    assert observable_phi(c, 2, ProjPoint(0.0)) == -math.inf  # kernel of B0
    assert observable_phi(c, 2, ProjPoint(PI / 4)) == pytest.approx(-LN2 / 2)


def test_truncate_observable():
    c = explo1_cocycle()
    cA = log_bound_constant(c)
    phi = lambda i, v: observable_phi(c, i, v)
    clipped = truncate_observable(c, phi, 10.0)
    assert clipped(2, ProjPoint(0.0)) == -10.0            # kernel point hits the floor
    assert clipped(2, ProjPoint(PI / 4)) == pytest.approx(-LN2 / 2)  # untouched
    with pytest.raises(BadTruncation):
        truncate_observable(c, phi, cA / 2)


def test_truncation_error_decays():
    # mean of |phi - phi_N| under p x eta decreases in N, on the corpus
    for c in (irrat_rotation_cocycle(1.0), irrat_rotation_cocycle(2.0),
              explo1_cocycle()):
        eta = stationary_measure(c)
        p = c.base.p
        cA = log_bound_constant(c)
        means = []
        for N in (2, 4, 8, 16):
            if N <= cA:
                continue
            phi_n = truncate_observable(c, lambda i, v: observable_phi(c, i, v), N)
            total = 0.0
            for a in eta.atoms:
                for i in (1, 2):
                    raw = observable_phi(c, i, a.point)
                    total += p[i - 1] * a.weight * abs(raw - phi_n(i, a.point))
            means.append(total)
        assert all(b <= a + 1e-15 for a, b in zip(means, means[1:]))


def test_kernel_mass_decays():
    # eta-mass of {phi(i, .) < -N} decreases in N
    c = irrat_rotation_cocycle(1.0)
    eta = stationary_measure(c)
    masses = []
    for N in (2, 4, 8, 16):
        m = sum(a.weight for a in eta.atoms
                if observable_phi(c, 1, a.point) < -N)
        masses.append(m)
    assert all(b <= a for a, b in zip(masses, masses[1:]))


def test_wilson_interval():
    lo, hi = wilson_interval(5, 100)
    assert lo < 0.05 < hi
    lo0, hi0 = wilson_interval(0, 100)
    assert lo0 == 0.0 and hi0 > 0.0


def test_normal_cdf_and_ks():
    assert normal_cdf(0.0) == pytest.approx(0.5)
    rng = np.random.default_rng(3)
    z = rng.normal(size=4000)
    assert ks_to_standard_normal(z) < 0.03
    assert ks_to_standard_normal(z + 3.0) > 0.5


def test_gordin_livsic_explo1_exact():
    sigma, info = gordin_livsic_sigma(explo1_cocycle())
    assert sigma == pytest.approx(LN2 / 2, abs=1e-12)
    assert info["boundary_nodes"] == 0


def test_gordin_livsic_deterministic_zero():
    c = Cocycle((Mat2(1, 0, 0, 0),), frozenset({1}), Bernoulli((1.0,)))
    sigma, _ = gordin_livsic_sigma(c)
    assert sigma == pytest.approx(0.0, abs=1e-12)


def test_gordin_livsic_rejects():
    rot = Cocycle((Mat2.rotation(1.0),), frozenset(), Bernoulli((1.0,)))
    with pytest.raises(NoSingularSymbol):
        gordin_livsic_sigma(rot)
    mk = Cocycle((Mat2.diagonal(2, 0.5), Mat2(0, 0, 0, 1)), frozenset({2}),
                 Markov(((0.5, 0.5), (0.5, 0.5)), (0.5, 0.5)))
    with pytest.raises(NotImplementedError):
        gordin_livsic_sigma(mk)


def test_clt_explo1():
    c = explo1_cocycle()
    l1 = furstenberg_l1(c).l1
    sigma, _ = gordin_livsic_sigma(c)
    rep = clt_test(c, l1, sigma, 10_000, 2000, seed=987654321)
    assert rep.ks_distance < 0.05
    assert 0.95 <= rep.sigma_mc / rep.sigma_gl <= 1.05


def test_clt_irratrot_two_estimates_agree():
    # no closed form here: the summed-iterate variance must match the
    # empirical fluctuation scale of independent long trajectories
    c = irrat_rotation_cocycle(1.0)
    sigma, info = gordin_livsic_sigma(c)
    assert info["boundary_nodes"] <= 2  # only the deepest atom escapes
    l1 = furstenberg_l1(c).l1
    rep = clt_test(c, l1, sigma, 10_000, 2000, seed=246810)
    assert rep.ks_distance < 0.05
    assert 0.95 <= rep.sigma_mc / rep.sigma_gl <= 1.05


def test_clt_zero_variance():
    c = explo1_cocycle()
    with pytest.raises(ZeroVariance):
        clt_test(c, -LN2 / 2, 0.0, 100, 10, seed=1)


def test_ldt_rotation_tails_zero():
    rot = Cocycle((Mat2.rotation(1.0),), frozenset(), Bernoulli((1.0,)))
    rep = ldt_tail(rot, 0.0, 0.05, [50, 100], 500, seed=11, start=ProjPoint(0.4))
    assert rep.tails == [0.0, 0.0]
    det = Cocycle((Mat2.diagonal(2, 0.5),), frozenset(), Bernoulli((1.0,)))
    rep2 = ldt_tail(det, LN2, 0.05, [200], 200, seed=12, start=ProjPoint(0.0))
    assert rep2.tails == [0.0]


def test_ldt_explo1_hoeffding_domination():
    c = explo1_cocycle()
    l1 = furstenberg_l1(c).l1
    rep = ldt_tail(c, l1, 0.1, [200, 800], 4000, seed=31415)
    for n, tail in zip(rep.ns, rep.tails):
        assert tail <= 2 * math.exp(-2 * n * 0.1 ** 2 / LN2 ** 2)
    assert rep.epsilon == 0.1


def test_ldt_requires_finite_reference():
    c = explo1_cocycle()
    with pytest.raises(ValueError):
        ldt_tail(c, -math.inf, 0.1, [10], 10, seed=1)


def test_ldt_tails_nonincreasing_on_corpus():
    for c in (explo1_cocycle(), irrat_rotation_cocycle(1.0)):
        l1 = furstenberg_l1(c).l1
        rep = ldt_tail(c, l1, 0.15, [50, 200, 800], 2000, seed=606)
        assert all(b <= a for a, b in zip(rep.tails, rep.tails[1:]))
        for tail, (lo, hi) in zip(rep.tails, rep.wilson):
            assert lo <= tail <= hi


def test_truncation_schedule():
    from cocyclekit.limits import truncation_schedule

    c = explo1_cocycle()
    cA = log_bound_constant(c)
    assert truncation_schedule(c, 1000) == pytest.approx(10.0)
    assert truncation_schedule(c, 1) > cA  # floored above the uniform bound
    # schedule level is always a valid truncation
    truncate_observable(c, lambda i, v: observable_phi(c, i, v),
                        truncation_schedule(c, 64))
