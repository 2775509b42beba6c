"""Monte Carlo engine for finite-time Lyapunov statistics.

Trajectories renormalize the direction every step and accumulate log-norms,
so lengths up to 1e7 stay in range.  All randomness flows through splitmix64
counter streams keyed by (seed, trial): identical configurations reproduce
bit-identical samples regardless of backend threading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import pick_letters, run_paths, start_draws
from .core import ProjPoint, proj_dist, range_kernel
from .errors import BadTruncation, NoSingularSymbol, ZeroVariance
from .shift import Cocycle
from .stationary import AtomicMeasure, log_bound_constant, stationary_measure


@dataclass(frozen=True)
class SimConfig:
    """Trajectory batch: results are a pure function of (cocycle, config)."""

    seed: int
    n: int
    trials: int
    start: ProjPoint | str = "from-eta"

    def __post_init__(self):
        if self.n < 1 or self.trials < 1:
            raise ValueError("n and trials must be >= 1")


def _letter_cdfs(c: Cocycle) -> tuple[np.ndarray, np.ndarray, bool]:
    """(first-letter CDF, per-column transition CDFs, bernoulli flag)."""
    if c.is_bernoulli:
        p = np.asarray(c.base.p)
        cdf0 = np.cumsum(p)
        return cdf0, np.tile(cdf0[:, None], (1, c.k)), True
    q = np.asarray(c.base.q)
    P = np.asarray(c.base.P)
    return np.cumsum(q), np.cumsum(P, axis=0), False


def _start_vectors(c: Cocycle, cfg: SimConfig) -> np.ndarray:
    """Per-trial unit start vectors; 'from-eta' samples the stationary atoms
    using each stream's reserved draw."""
    if isinstance(cfg.start, ProjPoint):
        v = cfg.start.vector()
        return np.tile(v, (cfg.trials, 1))
    if cfg.start != "from-eta":
        raise ValueError(f"unknown start spec {cfg.start!r}")
    eta = stationary_measure(c)            # raises NoSingularSymbol if invertible
    weights = np.array([a.weight for a in eta.atoms])
    cdf = np.cumsum(weights / weights.sum())
    draws = start_draws(cfg.seed, cfg.trials)
    idx = pick_letters(cdf, draws)
    vecs = np.array([a.point.vector() for a in eta.atoms])
    return vecs[idx]


def simulate_lognorm(c: Cocycle, cfg: SimConfig) -> np.ndarray:
    """Samples of (1/n) log||A^n(w) v|| per trial; -inf marks a zero product."""
    mats = np.array([c.matrix(i).array for i in range(1, c.k + 1)])
    cdf0, cdfP, bernoulli = _letter_cdfs(c)
    start = _start_vectors(c, cfg)
    sums = run_paths(mats, cdf0, cdfP, bernoulli, start,
                     cfg.seed, cfg.n, cfg.trials)
    return np.asarray(sums) / cfg.n


def observable_phi(c: Cocycle, i: int, v: ProjPoint) -> float:
    """log||A_i v|| for unit v; -inf exactly on the kernel of a singular letter."""
    m = c.matrix(i)
    if i in c.singular and proj_dist(v, range_kernel(m)[1]) == 0.0:
        return -math.inf
    w = m.apply(v.vector())
    nrm = math.hypot(w[0], w[1])
    if nrm == 0.0:
        return -math.inf
    return math.log(nrm)


def truncate_observable(c: Cocycle, phi, N: float):
    """Pointwise max(phi, -N); requires N above the uniform bound c(A)."""
    if N <= log_bound_constant(c):
        raise BadTruncation(
            f"truncation level {N} must exceed c(A) = {log_bound_constant(c):.6g}")

    def clipped(*args):
        return max(phi(*args), -N)

    return clipped


def truncation_schedule(c: Cocycle, n: int) -> float:
    """Default truncation level for scale-n experiments on observables with
    -inf values: the cube root of n, floored at just above c(A)."""
    return max(float(n) ** (1.0 / 3.0), math.nextafter(log_bound_constant(c),
                                                       math.inf))


def wilson_interval(hits: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = hits / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4 * trials ** 2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class LdtReport:
    epsilon: float
    ns: list[int]
    tails: list[float]
    wilson: list[tuple[float, float]]
    trials: int
    fit_exponential: float      # slope of log(tail) against n
    fit_cbrt: float             # slope of log(tail) against n^(1/3)

    def hits(self) -> list[int]:
        return [round(t * self.trials) for t in self.tails]


def ldt_tail(c: Cocycle, l1_ref: float, epsilon: float, n_list,
             trials: int, seed: int, start="from-eta") -> LdtReport:
    """Empirical tails P[|S_n/n - L1| > eps] with Wilson intervals.

    Each n uses its own derived stream family; both decay fits (against n
    and against n^(1/3)) are reported without asserting either law.
    """
    if not math.isfinite(l1_ref):
        raise ValueError("l1_ref must be finite")
    ns = [int(n) for n in n_list]
    tails = []
    intervals = []
    for idx, n in enumerate(ns):
        cfg = SimConfig(seed=seed + 7919 * idx, n=n, trials=trials, start=start)
        samples = simulate_lognorm(c, cfg)
        dev = np.abs(samples - l1_ref)
        dev[~np.isfinite(samples)] = math.inf   # -inf samples always exceed
        hits = int((dev > epsilon).sum())
        tails.append(hits / trials)
        intervals.append(wilson_interval(hits, trials))
    pos = [(n, t) for n, t in zip(ns, tails) if t > 0.0]
    if len(pos) >= 2:
        xs = np.array([n for n, _ in pos], dtype=float)
        ys = np.log([t for _, t in pos])
        fit_exp = float(np.polyfit(xs, ys, 1)[0])
        fit_cbrt = float(np.polyfit(np.cbrt(xs), ys, 1)[0])
    else:
        fit_exp = math.nan
        fit_cbrt = math.nan
    return LdtReport(epsilon, ns, tails, intervals, trials, fit_exp, fit_cbrt)


# ---------------------------------------------------------------------------
# CLT machinery

def _product_chain(c: Cocycle, eta: AtomicMeasure):
    """Transition structure of the chain (symbol, direction) on the atom set.

    Returns (thetas, weights, step) where step[j-1] maps each atom index to
    the atom index of its image under the projective action of letter j.
    Images that escape the truncated atom set are frozen in place (their
    weight is at the tail-mass scale).
    """
    from .core import proj_act

    thetas = np.array([a.point.theta for a in eta.atoms])
    weights = np.array([a.weight for a in eta.atoms])
    order = np.argsort(thetas)
    sorted_thetas = thetas[order]
    step = np.empty((c.k, len(thetas)), dtype=np.intp)
    boundary = 0
    for j in range(1, c.k + 1):
        m = c.matrix(j)
        for idx, a in enumerate(eta.atoms):
            img = proj_act(m, a.point)
            pos = np.searchsorted(sorted_thetas, img.theta)
            best = None
            for cand in (pos - 1, pos % len(sorted_thetas)):
                d = proj_dist(ProjPoint(sorted_thetas[cand % len(sorted_thetas)]),
                              img)
                if best is None or d < best[0]:
                    best = (d, order[cand % len(sorted_thetas)])
            if best[0] <= 1e-9:
                step[j - 1, idx] = best[1]
            else:
                step[j - 1, idx] = idx      # frozen boundary node
                boundary += 1
    return thetas, weights, step, boundary


@dataclass
class CltReport:
    sigma_gl: float
    sigma_mc: float
    ks_distance: float
    n: int
    trials: int
    mean: float
    boundary_nodes: int = 0
    sigma_gl_uncertainty: float = 0.0


def gordin_livsic_sigma(c: Cocycle, eta: AtomicMeasure | None = None,
                        series_depth: int | None = None) -> tuple[float, dict]:
    """CLT variance sigma with sigma^2 = ||g||^2 - ||Qg||^2 in L2(p x eta),
    g the summed centered iterates of the one-step expansion observable.

    Bernoulli bases only: the product chain (next symbol, direction) is
    i.i.d.-refreshed there, which is what the summation scheme uses.
    """
    if not c.is_bernoulli:
        raise NotImplementedError("Gordin-Livsic variance requires a Bernoulli base")
    if not c.singular:
        raise NoSingularSymbol("variance machinery needs a rank-one cocycle")
    if eta is None:
        eta = stationary_measure(c)
    p = np.asarray(c.base.p)
    q = c.singular_mass
    if series_depth is None:
        series_depth = max(8, int(math.ceil(math.log(1e-14) / math.log(max(1.0 - q, 1e-12)))))
    thetas, weights, step, boundary = _product_chain(c, eta)
    n_atoms = len(thetas)
    # phi[j-1, idx] = log || A_j v_idx ||
    phi = np.empty((c.k, n_atoms))
    for j in range(1, c.k + 1):
        for idx in range(n_atoms):
            phi[j - 1, idx] = observable_phi(c, j, ProjPoint(thetas[idx]))
    if not np.all(np.isfinite(phi)):
        raise ZeroVariance("observable diverges on an atom; exponent is -inf")
    wnorm = weights / weights.sum()
    mean = float(np.einsum("j,ji,i->", p, phi, wnorm))

    # iterate Qbar h (j, x) = sum_i p_i h(i, A_j x) on the product set
    def qbar(h: np.ndarray) -> np.ndarray:
        mixed = p @ h                    # x-indexed: sum_i p_i h(i, x)
        out = np.empty_like(h)
        for j in range(c.k):
            out[j] = mixed[step[j]]
        return out

    centered = phi - mean
    g = centered.copy()
    term = centered.copy()
    for _ in range(series_depth):
        term = qbar(term)
        g += term
    tail_sup = float(np.max(np.abs(term)))
    qg = qbar(g)

    def l2sq(h: np.ndarray) -> float:
        return float(np.einsum("j,ji,i->", p, h * h, wnorm))

    var = l2sq(g) - l2sq(qg)
    info = {"series_depth": series_depth, "boundary_nodes": boundary,
            "last_term_sup": tail_sup, "mean": mean,
            "uncertainty": 2.0 * tail_sup * math.sqrt(max(l2sq(g), 1.0))}
    if var < 0.0:
        if var > -1e-10:
            var = 0.0
            info["clamped"] = True
        else:
            raise ZeroVariance(f"variance came out negative: {var}")
    return math.sqrt(var), info


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def ks_to_standard_normal(samples: np.ndarray) -> float:
    z = np.sort(samples)
    n = len(z)
    cdf = np.array([normal_cdf(v) for v in z])
    upper = np.max(np.arange(1, n + 1) / n - cdf)
    lower = np.max(cdf - np.arange(0, n) / n)
    return float(max(upper, lower))


def clt_test(c: Cocycle, l1: float, sigma: float, n: int, trials: int,
             seed: int) -> CltReport:
    """Distributional check of (log||A^n v|| - n L1) / (sigma sqrt(n))."""
    if sigma <= 0.0:
        raise ZeroVariance("clt_test needs sigma > 0")
    cfg = SimConfig(seed=seed, n=n, trials=trials)
    samples = simulate_lognorm(c, cfg) * n
    finite = samples[np.isfinite(samples)]
    if len(finite) < trials:
        raise ZeroVariance("zero products encountered; exponent is -inf")
    z = (finite - n * l1) / (sigma * math.sqrt(n))
    ks = ks_to_standard_normal(z)
    sigma_mc = float(np.std(finite, ddof=1) / math.sqrt(n))
    return CltReport(sigma_gl=sigma, sigma_mc=sigma_mc, ks_distance=ks,
                     n=n, trials=trials, mean=float(np.mean(finite) / n))
