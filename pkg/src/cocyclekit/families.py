"""One-parameter cocycle families, L1 parameter sweeps, and named examples.

A sweep evaluates the exponent on a grid with a fixed-depth null-word scan at
every point; -inf is recorded exactly where the scan certifies a null word
(product norm <= 1e-12).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Mat2, ProjPoint, winding_speed
from .errors import CocycleError
from .hyperbolicity import null_word_search
from .shift import Bernoulli, Cocycle, Word
from .stationary import induced_l1, l1_branch_series

J = Mat2(0.0, -1.0, 1.0, 0.0)  # rotation generator, d/dt R_t at t = 0


@dataclass
class ParamFamily:
    """Smooth map t -> Cocycle with per-letter derivative matrices."""

    evaluate: object                     # t -> Cocycle
    derivative: object                   # t -> list[Mat2], one per letter
    domain: tuple[float, float]
    constant_singular: bool = True
    name: str = ""

    def cocycle(self, t: float) -> Cocycle:
        return self.evaluate(t)

    def letter_derivative(self, t: float) -> list[Mat2]:
        return self.derivative(t)


def check_family(f: ParamFamily, probes: int = 7, h: float = 1e-6,
                 fd_slack: float = 10.0) -> float:
    """Validate the declared structure on a probe grid.

    Checks that flagged-constant singular letters really are constant (to
    1e-12 entrywise) and that finite differences match the declared
    derivative; returns the largest finite-difference defect rate.
    """
    lo, hi = f.domain
    ts = np.linspace(lo, hi - h, probes)
    worst = 0.0
    c0 = f.cocycle(ts[0])
    for t in ts:
        c = f.cocycle(t)
        d = f.letter_derivative(t)
        c2 = f.cocycle(t + h)
        for i in range(1, c.k + 1):
            m0 = c.matrix(i).array
            m1 = c2.matrix(i).array
            fd = (m1 - m0) / h
            defect = float(np.max(np.abs(fd - d[i - 1].array)))
            worst = max(worst, defect / max(1.0, float(np.max(np.abs(m0)))))
            if f.constant_singular and i in c.singular:
                drift = float(np.max(np.abs(m0 - c0.matrix(i).array)))
                if drift > 1e-12:
                    raise CocycleError(
                        f"singular letter {i} flagged constant drifts by {drift:.2e}")
    if worst > fd_slack * h:
        raise CocycleError(f"derivative mismatch: finite-difference defect {worst:.2e}")
    return worst


def rotation_family(base: Cocycle, mode: str = "invertible-only",
                    speed: float = 1.0,
                    domain: tuple[float, float] = (0.0, 1.0)) -> ParamFamily:
    """Family A_i(t) built from rotations R_{speed*t}.

    mode 'left': R_t A_i for every letter; 'right': A_i R_t for every letter;
    'invertible-only': A_j R_t on invertible letters, singular letters
    constant.
    """
    if mode not in ("left", "right", "invertible-only"):
        raise ValueError(f"unknown rotation mode {mode!r}")

    def letters(t: float):
        rot = Mat2.rotation(speed * t)
        out = []
        for i in range(1, base.k + 1):
            m = base.matrix(i)
            if mode == "left":
                out.append(rot @ m)
            elif mode == "right":
                out.append(m @ rot)
            else:
                out.append(m @ rot if i in base.invertible else m)
        return out

    def evaluate(t: float) -> Cocycle:
        return Cocycle(tuple(letters(t)), base.singular, base.base,
                       name=f"{base.name}@t={t:g}" if base.name else "")

    def derivative(t: float):
        rot = Mat2.rotation(speed * t)
        out = []
        for i in range(1, base.k + 1):
            m = base.matrix(i)
            if mode == "left":
                out.append(Mat2.from_array(speed * (J @ rot).array @ m.array))
            elif mode == "right":
                out.append(Mat2.from_array(speed * m.array @ (J @ rot).array))
            else:
                if i in base.invertible:
                    out.append(Mat2.from_array(speed * m.array @ (J @ rot).array))
                else:
                    out.append(Mat2(0.0, 0.0, 0.0, 0.0))
        return out

    return ParamFamily(evaluate, derivative, domain,
                       constant_singular=(mode == "invertible-only"),
                       name=f"rotation-{mode}")


def winding_speed_min(f: ParamFamily, t_grid=None, v_grid=None) -> float:
    """Minimum rotation speed over the grids; positive means the family winds.

    Only invertible letters are tested (singular letters act as constants to
    their ranges)."""
    lo, hi = f.domain
    if t_grid is None:
        t_grid = np.linspace(lo, hi, 17)
    if v_grid is None:
        v_grid = [ProjPoint(th) for th in np.linspace(0.0, math.pi, 25, endpoint=False)]
    best = math.inf
    for t in t_grid:
        c = f.cocycle(float(t))
        dmats = f.letter_derivative(float(t))
        for j in sorted(c.invertible):
            for v in v_grid:
                best = min(best, winding_speed(c.matrix(j), dmats[j - 1], v))
    return float(best)


@dataclass
class SweepPoint:
    t: float
    l1: float                       # -inf at certified null words
    induced: float
    verdict: str                    # 'ok' | 'null-word' | error tag
    null_word: Word | None
    nearest_sigma1: float           # smallest candidate product norm seen
    tail_bound: float


@dataclass
class SweepResult:
    points: list[SweepPoint]
    engine: str
    null_depth: int

    @property
    def grid(self) -> np.ndarray:
        return np.array([p.t for p in self.points])

    @property
    def l1(self) -> np.ndarray:
        return np.array([p.l1 for p in self.points])

    def null_word_hits(self):
        return [(p.t, p.null_word, p.nearest_sigma1)
                for p in self.points if p.verdict == "null-word"]


def sweep_l1(f: ParamFamily, grid, engine: str = "series",
             null_depth: int = 20, tail_eps: float = 1e-12,
             mc_seed: int = 20251, mc_n: int = 4000,
             mc_trials: int = 200, threads: int = 1) -> SweepResult:
    """Exponent along the grid with a per-point null-word scan.

    Per-point failures are recorded in the verdict column and the sweep
    continues.  Grid points are independent; `threads` caps the worker pool
    and the output is identical for every cap (results are reassembled in
    grid order and all seeds are per-point deterministic).
    """
    grid = [float(t) for t in grid]
    if not grid:
        raise ValueError("empty grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be increasing")
    if engine not in ("series", "monte-carlo"):
        raise ValueError(f"unknown engine {engine!r}")

    def evaluate(t: float) -> SweepPoint:
        try:
            c = f.cocycle(t)
        except CocycleError as exc:
            return SweepPoint(t, math.nan, math.nan,
                              f"invalid: {exc}", None, math.nan, math.nan)
        nearest = math.nan
        if c.singular:
            scan = null_word_search(c, null_depth)
            exact = scan.exact()
            if exact:
                return SweepPoint(t, -math.inf, -math.inf, "null-word",
                                  exact[0][0], exact[0][1], 0.0)
            nearest = _closest_sigma(c, scan)
        try:
            if engine == "series":
                rep = l1_branch_series(c, tail_eps)
                l1 = rep.l1
                tail = rep.tail_bound
            else:
                from .limits import SimConfig, simulate_lognorm

                cfg = SimConfig(seed=mc_seed, n=mc_n, trials=mc_trials)
                samples = simulate_lognorm(c, cfg)
                l1 = float(np.mean(samples))
                tail = float(np.std(samples, ddof=1) / math.sqrt(len(samples)))
            induced = induced_l1(c, l1) if c.singular else l1
            return SweepPoint(t, l1, induced, "ok", None, nearest, tail)
        except CocycleError as exc:
            return SweepPoint(t, math.nan, math.nan,
                              f"{type(exc).__name__}", None, nearest, math.nan)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(evaluate, grid))
    else:
        points = [evaluate(t) for t in grid]
    return SweepResult(points, engine, null_depth)


def _closest_sigma(c: Cocycle, scan) -> float:
    word = scan.closest_word
    if word is None:
        return math.nan
    prod = c.word_product(word)
    from .core import svd2

    return svd2(prod).sigma1


def sublevel_decay(sweep: SweepResult, n_list) -> list[tuple[float, float]]:
    """Fraction of grid points with L1 < -N, per N; -inf counts in every
    sublevel.  Nonincreasing in N by construction."""
    l1 = sweep.l1
    valid = ~np.isnan(l1)
    total = int(valid.sum())
    out = []
    for N in n_list:
        frac = float((l1[valid] < -float(N)).sum()) / max(total, 1)
        out.append((float(N), frac))
    return out


def fit_stretched_exponential(fractions) -> dict:
    """Fit frac ~ C * exp(-N^gamma) on the positive entries; reports the
    grid-searched gamma with the best linear fit of log(frac) against N^gamma."""
    pts = [(N, f) for N, f in fractions if f > 0.0]
    if len(pts) < 3:
        return {"gamma": math.nan, "C": math.nan, "r2": math.nan}
    Ns = np.array([N for N, _ in pts])
    logf = np.log([f for _, f in pts])
    best = None
    for gamma in np.arange(0.05, 3.0, 0.01):
        x = Ns ** gamma
        slope, intercept = np.polyfit(x, logf, 1)
        pred = slope * x + intercept
        ss_res = float(np.sum((logf - pred) ** 2))
        ss_tot = float(np.sum((logf - logf.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
        if slope < 0 and (best is None or r2 > best["r2"]):
            best = {"gamma": float(gamma), "C": float(math.exp(intercept)), "r2": r2}
    return best or {"gamma": math.nan, "C": math.nan, "r2": math.nan}


# ---------------------------------------------------------------------------
# named example families

def explo1_cocycle(p: float = 0.5) -> Cocycle:
    """Diagonal expansion paired with the coordinate projection onto e2."""
    return Cocycle((Mat2.diagonal(2.0, 0.5), Mat2(0.0, 0.0, 0.0, 1.0)),
                   frozenset({2}), Bernoulli((p, 1.0 - p)), name="explo1")


def irrat_rotation_cocycle(t: float, p: float = 0.5) -> Cocycle:
    """Projection onto e1 paired with the rotation by t."""
    return Cocycle((Mat2(1.0, 0.0, 0.0, 0.0), Mat2.rotation(t)),
                   frozenset({1}), Bernoulli((p, 1.0 - p)), name="irratrot")


def irrat_rotation_family(p: float = 0.5,
                          domain: tuple[float, float] = (0.0, math.pi)) -> ParamFamily:
    base = irrat_rotation_cocycle(0.0, p)
    fam = rotation_family(base, mode="invertible-only", domain=domain)
    fam.name = "irratrot"
    return fam


def irrat_rotation_l1(t: float, terms: int = 60) -> tuple[float, float]:
    """Partial sum of sum_j 2^-(j+1) log|cos(j t)| with a tail estimate.

    This is the induced (first-return) exponent of the rotation example at
    p = 1/2; it equals twice the stationary-average exponent.  Returns
    (-inf, 0) when some cos(j t) vanishes to within 1e-12, j <= terms.
    """
    total = 0.0
    for j in range(terms + 1):
        cj = abs(math.cos(j * t))
        if cj <= 1e-12:
            return -math.inf, 0.0
        total += 2.0 ** -(j + 1) * math.log(cj)
    worst = 0.0
    for j in range(terms + 21):
        cj = abs(math.cos(j * t))
        if cj > 1e-12:
            worst = max(worst, abs(math.log(cj)))
    return total, 2.0 ** -terms * worst


def schrodinger_cocycle(a: float, t: float, p: float = 0.5) -> Cocycle:
    """Limit model: hard-barrier letter [[1,0],[0,0]] with probability p and
    the energy-t transfer matrix of the finite potential a."""
    return Cocycle((Mat2(1.0, 0.0, 0.0, 0.0), Mat2(a - t, -1.0, 1.0, 0.0)),
                   frozenset({1}), Bernoulli((p, 1.0 - p)),
                   name=f"schrodinger(a={a:g})")


def schrodinger_family(a: float, p: float = 0.5,
                       domain: tuple[float, float] = (-4.0, 4.0)) -> ParamFamily:
    """Energy family t -> (barrier letter, transfer letter); the derivative
    of the transfer letter is [[-1,0],[0,0]]."""

    def evaluate(t: float) -> Cocycle:
        return schrodinger_cocycle(a, t, p)

    def derivative(t: float):
        return [Mat2(0.0, 0.0, 0.0, 0.0), Mat2(-1.0, 0.0, 0.0, 0.0)]

    return ParamFamily(evaluate, derivative, domain, constant_singular=True,
                       name=f"schrodinger(a={a:g})")


def schrodinger_rescaled_cocycle(a: float, lam: float, t: float,
                                 p: float = 0.5) -> Cocycle:
    """Finite-barrier cocycle with letters (1/lam_j) [[v_j - t, -1], [1, 0]],
    v = (lam, a), lam_1 = lam, lam_2 = 1; converges to the limit model as
    lam grows."""
    m1 = Mat2((lam - t) / lam, -1.0 / lam, 1.0 / lam, 0.0)
    m2 = Mat2(a - t, -1.0, 1.0, 0.0)
    return Cocycle((m1, m2), frozenset(), Bernoulli((p, 1.0 - p)),
                   name=f"schrodinger-rescaled(a={a:g},lam={lam:g})")


def spectrum_intervals(a: float, lam: float) -> tuple[tuple[float, float],
                                                      tuple[float, float]]:
    """Spectrum of the two-valued random potential: [a-2, a+2] u [lam-2, lam+2]."""
    return (a - 2.0, a + 2.0), (lam - 2.0, lam + 2.0)
