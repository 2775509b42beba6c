import math

import numpy as np
import pytest

from cocyclekit.core import Mat2, ProjPoint, proj_act
from cocyclekit.errors import CocycleError
from cocyclekit.families import (
    ParamFamily,
    check_family,
    explo1_cocycle,
    fit_stretched_exponential,
    irrat_rotation_cocycle,
    irrat_rotation_family,
    irrat_rotation_l1,
    rotation_family,
    schrodinger_cocycle,
    schrodinger_family,
    schrodinger_rescaled_cocycle,
    spectrum_intervals,
    sublevel_decay,
    sweep_l1,
    winding_speed_min,
)
from cocyclekit.hyperbolicity import certify
from cocyclekit.shift import Bernoulli, Cocycle
from cocyclekit.stationary import furstenberg_l1, induced_l1

PI = math.pi
LN2 = math.log(2)


def test_rotation_family_modes():
    base = Cocycle((Mat2.identity(),), frozenset(), Bernoulli((1.0,)))
    fam = rotation_family(base, "left")
    c = fam.cocycle(PI / 4)
    assert np.allclose(c.matrix(1).array, Mat2.rotation(PI / 4).array)
    # derivative at t=0 of the left mode is J @ A
    d = fam.letter_derivative(0.0)[0]
    assert np.allclose(d.array, np.array([[0, -1], [1, 0]]))


def test_irratrot_family_matches_cocycle():
    fam = irrat_rotation_family()
    for t in (0.3, 1.0, 2.2):
        got = fam.cocycle(t)
        want = irrat_rotation_cocycle(t)
        for i in (1, 2):
            assert np.allclose(got.matrix(i).array, want.matrix(i).array)


def test_check_family_accepts_and_rejects():
    fam = irrat_rotation_family()
    assert check_family(fam) < 1e-5

    def bad_derivative(t):
        return [Mat2(0, 0, 0, 0), Mat2(0, 0, 0, 0)]

    broken = ParamFamily(fam.evaluate, bad_derivative, fam.domain)
    with pytest.raises(CocycleError):
        check_family(broken)


def test_winding_speeds():
    base = Cocycle((Mat2.identity(),), frozenset(), Bernoulli((1.0,)))
    assert winding_speed_min(rotation_family(base, "left")) == pytest.approx(1.0)
    assert winding_speed_min(
        rotation_family(base, "left", speed=2 * PI)) == pytest.approx(2 * PI)
    const = ParamFamily(lambda t: base, lambda t: [Mat2(0, 0, 0, 0)], (0.0, 1.0))
    assert winding_speed_min(const) == 0.0


def test_positive_winding_monotone_orbits():
    # t -> angle of A_t^n(w) v increases at rate >= c for invertible words
    fam = irrat_rotation_family()
    rng = np.random.default_rng(8)
    h = 1e-6
    for _ in range(100):
        n = int(rng.integers(1, 6))
        theta = float(rng.uniform(0, PI))
        t = float(rng.uniform(0.2, 2.8))
        v = ProjPoint(theta)

        def angle_at(tt):
            c = fam.cocycle(tt)
            out = v
            for _ in range(n):
                out = proj_act(c.matrix(2), out)
            return out.theta

        lift = (angle_at(t + h) - angle_at(t)) % PI
        slope = lift / h
        assert slope >= 0.9  # c1 = n * 1 for pure rotations; at least c = 1


def test_parameter_arc_occupation():
    # fraction of a fine t-grid with the orbit landing in a fixed arc is
    # controlled by arc length / winding speed
    fam = irrat_rotation_family()
    from cocyclekit.core import Arc

    arc = Arc(1.0, 0.15)
    rng = np.random.default_rng(5)
    for _ in range(5):
        n = int(rng.integers(1, 5))
        theta = ProjPoint(float(rng.uniform(0, PI)))
        grid = np.linspace(0.1, 0.1 + PI, 2000, endpoint=False)
        hits = 0
        for t in grid:
            c = fam.cocycle(float(t))
            out = theta
            for _ in range(n):
                out = proj_act(c.matrix(2), out)
            hits += arc.contains(out)
        frac = hits / len(grid)
        # the t-interval has length pi and winds n full turns; occupation is
        # proportional to arc length with the grid resolution as slack
        assert frac <= n * arc.length / (PI * 1.0) / n + 0.01


def test_sweep_null_words_and_parity():
    fam = irrat_rotation_family()
    res = sweep_l1(fam, [PI / 4, PI / 3, PI / 2], engine="series", null_depth=20)
    verdicts = [p.verdict for p in res.points]
    assert verdicts == ["null-word", "ok", "null-word"]
    assert tuple(res.points[0].null_word) == (1, 2, 2, 1)
    assert tuple(res.points[2].null_word) == (1, 2, 1)
    assert res.points[0].l1 == -math.inf
    # evenness/periodicity: L1(t) = L1(pi - t) for this family
    a = sweep_l1(fam, [0.7], engine="series").points[0].l1
    b = sweep_l1(fam, [PI - 0.7], engine="series").points[0].l1
    assert a == pytest.approx(b, abs=1e-10)


def test_sweep_monte_carlo_engine():
    fam = irrat_rotation_family()
    res = sweep_l1(fam, [1.0], engine="monte-carlo", mc_seed=777, mc_n=4000,
                   mc_trials=200)
    ref = furstenberg_l1(irrat_rotation_cocycle(1.0)).l1
    pt = res.points[0]
    assert pt.l1 == pytest.approx(ref, abs=5 * pt.tail_bound + 5e-3)


def test_sweep_rejects_bad_grid():
    fam = irrat_rotation_family()
    with pytest.raises(ValueError):
        sweep_l1(fam, [])
    with pytest.raises(ValueError):
        sweep_l1(fam, [1.0, 0.5])


def test_sublevel_decay_monotone():
    fam = irrat_rotation_family()
    grid = np.linspace(0.1, PI - 0.1, 400)
    res = sweep_l1(fam, grid, engine="series", null_depth=12)
    fracs = sublevel_decay(res, [1, 2, 4, 8])
    vals = [f for _, f in fracs]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    # constant-family sublevels: exponent 0 means no mass below -1
    const = ParamFamily(lambda t: explo1_cocycle(),
                        lambda t: [Mat2(0, 0, 0, 0)] * 2, (0.0, 1.0))
    res2 = sweep_l1(const, np.linspace(0, 1, 16), engine="series")
    assert all(f == 0.0 for _, f in sublevel_decay(res2, [1, 2, 4]))
    assert len({p.l1 for p in res2.points}) == 1  # constant column


def test_fit_stretched_exponential():
    Ns = [1, 2, 4, 8]
    gamma = 0.7
    fracs = [(N, 0.9 * math.exp(-N ** gamma)) for N in Ns]
    fit = fit_stretched_exponential(fracs)
    assert fit["gamma"] == pytest.approx(gamma, abs=0.02)
    assert fit["r2"] > 0.999


def test_irrat_rotation_l1_closed_form():
    val, tail = irrat_rotation_l1(1.0, 60)
    series = sum(2.0 ** -(j + 1) * math.log(abs(math.cos(j))) for j in range(61))
    assert val == pytest.approx(series, abs=1e-15)
    assert tail < 1e-15
    v, _ = irrat_rotation_l1(PI / 2, 10)
    assert v == -math.inf
    # j = 0 term contributes log(1) = 0
    v1, _ = irrat_rotation_l1(1e-9, 3)
    assert v1 == pytest.approx(0.0, abs=1e-8)


def test_irrat_rotation_l1_is_induced_exponent():
    t = 1.0
    c = irrat_rotation_cocycle(t)
    rep = furstenberg_l1(c)
    val, tail = irrat_rotation_l1(t, 60)
    assert induced_l1(c, rep.l1) == pytest.approx(val, abs=tail + 1e-11)


def test_schrodinger_family_shape():
    fam = schrodinger_family(0.0)
    c = fam.cocycle(0.3)
    assert np.allclose(c.matrix(1).array, [[1, 0], [0, 0]])
    assert np.allclose(c.matrix(2).array, [[-0.3, -1], [1, 0]])
    d = fam.letter_derivative(0.3)
    assert np.allclose(d[1].array, [[-1, 0], [0, 0]])
    assert check_family(fam) < 1e-5


def test_schrodinger_elliptic_vs_hyperbolic():
    a = 0.0
    inside = schrodinger_cocycle(a, 0.5).matrix(2)
    assert abs(inside.trace()) < 2  # elliptic on the spectrum interval
    outside = schrodinger_cocycle(a, a + 3.0)
    assert abs(outside.matrix(2).trace()) > 2
    assert certify(outside).verdict == "PUH"


def test_spectrum_intervals():
    assert spectrum_intervals(0.0, 1000.0) == ((-2.0, 2.0), (998.0, 1002.0))


def test_sweep_threads_do_not_change_output():
    fam = irrat_rotation_family()
    grid = np.linspace(0.3, 2.8, 64)
    serial = sweep_l1(fam, grid, engine="series", null_depth=8)
    pooled = sweep_l1(fam, grid, engine="series", null_depth=8, threads=4)
    assert [(p.t, p.l1, p.verdict) for p in serial.points] == \
        [(p.t, p.l1, p.verdict) for p in pooled.points]


def test_sweep_grid_hitting_quarter_turn_flags_null():
    # 2049 points of [0.1, pi - 0.1] land exactly on pi/2 in floats
    fam = irrat_rotation_family()
    grid = np.linspace(0.1, PI - 0.1, 2049)
    res = sweep_l1(fam, grid[1020:1030], engine="series", null_depth=20)
    hits = [p for p in res.points if p.verdict == "null-word"]
    assert len(hits) == 1
    assert hits[0].t == pytest.approx(PI / 2, abs=1e-12)
    assert tuple(hits[0].null_word) == (1, 2, 1)
    assert hits[0].l1 == -math.inf


def test_rescaled_cocycle_converges_to_limit():
    a, t = 0.0, 0.3
    limit = schrodinger_cocycle(a, t)
    for lam in (1e2, 1e3, 1e4):
        resc = schrodinger_rescaled_cocycle(a, lam, t)
        gap = max(np.max(np.abs(resc.matrix(i).array - limit.matrix(i).array))
                  for i in (1, 2))
        assert gap <= 2.0 / lam
