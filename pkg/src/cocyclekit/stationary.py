"""Stationary measures, the Markov transfer operator, and Lyapunov exponents.

For a rank-one cocycle every trajectory resets to the range of the last
singular letter, so the unique stationary measure is purely atomic and its
atoms are forward images of ranges along invertible branches.  The Lyapunov
exponent follows either from the branch series or from the stationary average
of the one-step expansion observable; both are computed here with explicit
truncation tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Mat2,
    ProjPoint,
    proj_act,
    proj_dist,
    range_kernel,
    range_kernel_vectors,
    svd2,
)
from .errors import (
    BranchLimitExceeded,
    DivergentObservable,
    NoSingularSymbol,
    NotRankOne,
    NullWord,
    UndefinedPoint,
)
from .shift import Cocycle, Word, primitivity_check

DELTA_MERGE = 1e-10
KERNEL_ATOM_TOL = 1e-13
ATOM_CAP = 10_000


@dataclass(frozen=True)
class Atom:
    """One atom of a stationary measure; symbol is None in the Bernoulli case."""

    symbol: int | None
    point: ProjPoint
    weight: float


@dataclass
class AtomicMeasure:
    """Weighted atoms plus the mass lost to truncation."""

    atoms: list[Atom]
    tail_mass: float
    depth: int

    def total_mass(self) -> float:
        return sum(a.weight for a in self.atoms) + self.tail_mass

    def integrate(self, fn) -> float:
        """Sum of w * fn(symbol, point) over atoms (fn(point) if Bernoulli)."""
        if self.atoms and self.atoms[0].symbol is None:
            return sum(a.weight * fn(a.point) for a in self.atoms)
        return sum(a.weight * fn(a.symbol, a.point) for a in self.atoms)

    def symbol_mass(self, j: int) -> float:
        return sum(a.weight for a in self.atoms if a.symbol == j)

    def mass_near(self, point: ProjPoint, radius: float,
                  symbol: int | None = None) -> float:
        return sum(a.weight for a in self.atoms
                   if (symbol is None or a.symbol == symbol)
                   and proj_dist(a.point, point) <= radius)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(f"# tail_mass={self.tail_mass:.17g} depth={self.depth}\n")
            fh.write("symbol,theta,weight\n")
            for a in self.atoms:
                sym = "" if a.symbol is None else str(a.symbol)
                fh.write(f"{sym},{a.point.theta:.17g},{a.weight:.17g}\n")


def _merge_atoms(raw: list[tuple[int | None, float, float]],
                 delta: float = DELTA_MERGE) -> list[Atom]:
    """Coalesce same-symbol atoms within `delta` in projective distance.

    Deterministic: clusters are formed on the angle-sorted list (wraparound
    included); the representative is the heaviest contribution.
    """
    out: list[Atom] = []
    by_symbol: dict[int | None, list[tuple[float, float]]] = {}
    for sym, theta, w in raw:
        by_symbol.setdefault(sym, []).append((theta, w))
    for sym in sorted(by_symbol, key=lambda s: (-1 if s is None else s)):
        pts = sorted(by_symbol[sym])
        clusters: list[list[tuple[float, float]]] = []
        for theta, w in pts:
            if clusters and theta - clusters[-1][-1][0] <= delta:
                clusters[-1].append((theta, w))
            else:
                clusters.append([(theta, w)])
        # wraparound: first and last cluster may touch across theta = 0
        if len(clusters) > 1:
            lo = clusters[0][0][0]
            hi = clusters[-1][-1][0]
            if lo + math.pi - hi <= delta:
                clusters[0] = clusters.pop() + clusters[0]
        for cl in clusters:
            weight = sum(w for _, w in cl)
            rep = max(cl, key=lambda tw: (tw[1], -tw[0]))[0]
            out.append(Atom(sym, ProjPoint(rep), weight))
    out.sort(key=lambda a: (-1 if a.symbol is None else a.symbol, a.point.theta))
    return out


def _singular_kernels(c: Cocycle) -> dict[int, ProjPoint]:
    return {s: range_kernel(c.matrix(s))[1] for s in sorted(c.singular)}


def _singular_ranges(c: Cocycle) -> dict[int, ProjPoint]:
    return {s: range_kernel(c.matrix(s))[0] for s in sorted(c.singular)}


def _require_rank_one(c: Cocycle) -> None:
    if not c.singular:
        raise NoSingularSymbol("cocycle has no singular symbol")


@dataclass(frozen=True)
class _Branch:
    """Frontier node: branch prefix with invertible interior."""

    prefix: tuple[int, ...]
    weight: float           # q_s * p(prefix)
    vec: np.ndarray         # unit vector spanning the image of the range
    logacc: float           # log || A^(m)(interior) r_s ||


def _branch_frontier(c: Cocycle):
    """Depth-0 frontier: one node per singular symbol, seeded with the exact
    range vector (the orbit of a projectively fixed axis must not drift)."""
    return [_Branch((s,), c.symbol_weight(s),
                    range_kernel_vectors(c.matrix(s))[0], 0.0)
            for s in sorted(c.singular)]


def _extend(c: Cocycle, node: _Branch, letter: int) -> _Branch:
    m = c.matrix(letter)
    w = m.apply(node.vec)
    nrm = math.hypot(w[0], w[1])
    return _Branch(node.prefix + (letter,),
                   node.weight * c.transition(node.prefix[-1], letter),
                   w / nrm, node.logacc + math.log(nrm))


def stationary_measure(c: Cocycle, tail_eps: float = 1e-12,
                       max_atoms: int = ATOM_CAP) -> AtomicMeasure:
    """Truncated atomic stationary measure of a rank-one cocycle.

    Atoms are the branch images of the singular ranges; the enumeration stops
    once the uncounted branch mass drops below `tail_eps`.  Aborts with
    NullWord if some branch carries a range onto a kernel (within 1e-13).
    """
    _require_rank_one(c)
    kernels = _singular_kernels(c)
    bernoulli = c.is_bernoulli
    frontier = _branch_frontier(c)
    raw: list[tuple[int | None, float, float]] = []
    total = 0.0
    depth = 0
    count = 0
    while True:
        depth += 1
        next_frontier: list[_Branch] = []
        for node in frontier:
            last = node.prefix[-1]
            vpt = ProjPoint.from_vector(node.vec[0], node.vec[1])
            for nxt in c.successors(last):
                p_step = c.transition(last, nxt)
                if nxt in c.singular:
                    if proj_dist(vpt, kernels[nxt]) <= KERNEL_ATOM_TOL:
                        raise NullWord(Word(node.prefix + (nxt,)))
                    point = _singular_ranges(c)[nxt]
                    raw.append((None if bernoulli else nxt,
                                point.theta, node.weight * p_step))
                    total += node.weight * p_step
                else:
                    child = _extend(c, node, nxt)
                    pt = ProjPoint.from_vector(child.vec[0], child.vec[1])
                    raw.append((None if bernoulli else nxt, pt.theta, child.weight))
                    total += child.weight
                    next_frontier.append(child)
                count += 1
                if count > max_atoms:
                    raise BranchLimitExceeded(
                        f"stationary measure needs more than {max_atoms} branches; "
                        "use a Monte Carlo engine")
        frontier = next_frontier
        remaining = 1.0 - total
        if remaining <= tail_eps or not frontier:
            break
    atoms = _merge_atoms(raw)
    return AtomicMeasure(atoms, max(0.0, 1.0 - sum(a.weight for a in atoms)), depth)


# ---------------------------------------------------------------------------
# observables and the transfer operator

@dataclass
class ObservableOnAtoms:
    """Observable given by per-atom values, with an optional closed form.

    Lookup is by exact (symbol, theta); missing points fall back to the
    closed form or raise UndefinedPoint.  Values may be -inf where the
    observable diverges by definition.
    """

    values: dict = field(default_factory=dict)
    closed_form: object = None

    def __call__(self, *args):
        key = args if len(args) > 1 else args[0]
        if isinstance(key, tuple):
            sym, pt = key
            key = (sym, pt.theta if isinstance(pt, ProjPoint) else pt)
        elif isinstance(key, ProjPoint):
            key = key.theta
        if key in self.values:
            return self.values[key]
        if self.closed_form is not None:
            return self.closed_form(*args)
        raise UndefinedPoint(f"observable has no value at {key}")


def _as_product_fn(c: Cocycle, phi):
    """Normalize an observable to the signature fn(symbol, point)."""
    if c.is_bernoulli:
        return lambda j, v: phi(v)
    return phi


def markov_operator_apply(c: Cocycle, phi, n: int, points,
                          part: str = "full",
                          max_points: int = 200_000,
                          memo: dict | None = None) -> list[float]:
    """Values of Q^n phi at the given points.

    Bernoulli: phi(point), points are ProjPoint.  Markov: phi(symbol, point),
    points are (symbol, ProjPoint) pairs.  `part` restricts the letter sum at
    every level to the invertible ('inv') or singular ('sing') subalphabet.
    A caller iterating over n for a fixed phi can pass a shared `memo` dict
    to reuse the evaluation tree across calls.
    """
    if part not in ("full", "inv", "sing"):
        raise ValueError(f"unknown operator part {part!r}")
    letters = {"full": range(1, c.k + 1),
               "inv": sorted(c.invertible),
               "sing": sorted(c.singular)}[part]
    bernoulli = c.is_bernoulli
    fn = _as_product_fn(c, phi)
    if memo is None:
        memo = {}
    counter = [0]

    def value(depth: int, sym: int, theta: float) -> float:
        # Q^depth phi evaluated at (sym, theta)
        if depth == 0:
            return fn(sym, ProjPoint(theta))
        key = (depth, sym, theta)
        if key in memo:
            return memo[key]
        counter[0] += 1
        if counter[0] > max_points:
            raise BranchLimitExceeded(
                f"operator iteration needs more than {max_points} point evaluations")
        pt = ProjPoint(theta)
        acc = 0.0
        for i in letters:
            p = c.transition(sym, i)
            if p <= 0.0:
                continue
            img = proj_act(c.matrix(i), pt)
            acc += p * value(depth - 1, i, img.theta)
        memo[key] = acc
        return acc

    out = []
    for p in points:
        if bernoulli:
            theta = p.theta if isinstance(p, ProjPoint) else float(p)
            out.append(value(n, 1, theta))
        else:
            sym, pt = p
            theta = pt.theta if isinstance(pt, ProjPoint) else float(pt)
            out.append(value(n, sym, theta))
    return out


def default_test_functions(count: int = 10):
    """Constants and trigonometric polynomials, pi-periodic in theta."""
    fns = [lambda v: 1.0]
    m = 1
    while len(fns) < count:
        fns.append(lambda v, m=m: math.cos(2 * m * v.theta))
        fns.append(lambda v, m=m: math.sin(2 * m * v.theta))
        m += 1
    return fns[:count]


@dataclass
class StationarityReport:
    max_residual: float
    kernel_ball_mass: float
    recursion_residual: float


def _call_product(fn, sym, point):
    """Call a test function that may or may not take the symbol argument."""
    try:
        return fn(point)
    except TypeError:
        return fn(sym, point)


def verify_stationarity(c: Cocycle, eta: AtomicMeasure,
                        test_fns=None) -> StationarityReport:
    """Max |int Q(phi) d(eta) - int phi d(eta)| over the test functions.

    Also reports the eta-mass of DELTA_MERGE-balls around singular kernels
    and, in the Markov case, the defect of the per-symbol push-forward
    recursion.
    """
    if test_fns is None:
        test_fns = default_test_functions()
    kernels = _singular_kernels(c)
    bernoulli = c.is_bernoulli

    def q_value(phi, src_sym, point):
        acc = 0.0
        for i in range(1, c.k + 1):
            p = c.transition(src_sym, i)
            if p <= 0.0:
                continue
            img = proj_act(c.matrix(i), point)
            acc += p * _call_product(phi, i, img)
        return acc

    max_res = 0.0
    for phi in test_fns:
        i_phi = sum(a.weight * _call_product(phi, a.symbol, a.point)
                    for a in eta.atoms)
        i_qphi = sum(a.weight * q_value(phi, a.symbol if a.symbol else 1, a.point)
                     for a in eta.atoms)
        max_res = max(max_res, abs(i_qphi - i_phi))

    ball_mass = 0.0
    for s, khat in kernels.items():
        sym = None if bernoulli else s
        ball_mass = max(ball_mass, eta.mass_near(khat, DELTA_MERGE, symbol=sym))

    rec_res = 0.0
    if not bernoulli:
        for j in range(1, c.k + 1):
            mj = c.matrix(j)
            for phi in test_fns:
                lhs = sum(a.weight * _call_product(phi, a.symbol, a.point)
                          for a in eta.atoms if a.symbol == j)
                rhs = 0.0
                for a in eta.atoms:
                    p = c.transition(a.symbol, j)
                    if p > 0.0:
                        rhs += p * a.weight * _call_product(phi, j, proj_act(mj, a.point))
                rec_res = max(rec_res, abs(lhs - rhs))
    return StationarityReport(max_res, ball_mass, rec_res)


@dataclass
class MixingReport:
    ns: list[int]
    sup_dev: dict[int, list[float]]   # per trial-function index
    fitted_c: float
    fitted_rate: float                # decay exponent a in C * exp(-a n)
    sigma0: float
    block: int                        # N with P^N positive (1 for Bernoulli)


def theoretical_contraction(c: Cocycle) -> tuple[float, int]:
    """(sigma0, N): invertible-mass contraction of the base.

    Bernoulli: (1 - q, 1).  Markov: max over columns j of the invertible-row
    sums of P^N, with N the primitivity index.
    """
    if c.is_bernoulli:
        return 1.0 - c.singular_mass, 1
    P = np.asarray(c.base.P)
    N = primitivity_check(P)
    PN = np.linalg.matrix_power(P, N)
    inv_rows = [i - 1 for i in sorted(c.invertible)]
    sigma0 = float(PN[inv_rows, :].sum(axis=0).max()) if inv_rows else 0.0
    return sigma0, N


def mixing_rate(c: Cocycle, trial_fns=None, n_max: int = 30,
                tail_eps: float = 1e-12) -> MixingReport:
    """Empirical sup-norm decay of Q^n phi toward the stationary mean.

    The sup is taken over the truncated atom set of the stationary measure.
    """
    _require_rank_one(c)
    if trial_fns is None:
        trial_fns = default_test_functions()
    eta = stationary_measure(c, tail_eps)
    bernoulli = c.is_bernoulli
    if bernoulli:
        points = [a.point for a in eta.atoms]
    else:
        points = [(a.symbol, a.point) for a in eta.atoms]
    ns = list(range(1, n_max + 1))
    sup_dev: dict[int, list[float]] = {}
    for idx, phi in enumerate(trial_fns):
        if bernoulli:
            mean = eta.integrate(phi)
        else:
            mean = sum(a.weight * _call_product(phi, a.symbol, a.point)
                       for a in eta.atoms)
        devs = []
        memo: dict = {}
        for n in ns:
            vals = markov_operator_apply(c, phi, n, points, memo=memo)
            devs.append(max(abs(v - mean) for v in vals) if vals else 0.0)
        sup_dev[idx] = devs
    worst = [max(sup_dev[i][j] for i in sup_dev) for j in range(len(ns))]
    mask = [(n, d) for n, d in zip(ns, worst) if d > 1e-15]
    if len(mask) >= 2:
        xs = np.array([n for n, _ in mask], dtype=float)
        ys = np.log([d for _, d in mask])
        slope, intercept = np.polyfit(xs, ys, 1)
        fitted_c, fitted_rate = float(math.exp(intercept)), float(-slope)
    else:
        fitted_c, fitted_rate = 0.0, math.inf
    sigma0, block = theoretical_contraction(c)
    return MixingReport(ns, sup_dev, fitted_c, fitted_rate, sigma0, block)


# ---------------------------------------------------------------------------
# Lyapunov exponents

def rank1_product_norm(mats: list[Mat2], r0) -> float:
    """log || B_n ... B_1 r0 || via the factorized form for rank-one B_l.

    Returns -inf when some factor annihilates the running range direction.
    """
    v = r0.vector() if isinstance(r0, ProjPoint) else np.asarray(r0, dtype=float)
    total = 0.0
    for m in mats:
        if m.rank_class != "rank-one":
            raise NotRankOne("rank1_product_norm needs rank-one factors")
        w = m.apply(v)
        nrm = math.hypot(w[0], w[1])
        if nrm == 0.0:
            return -math.inf
        total += math.log(nrm)
        v = range_kernel(m)[0].vector()
    return total


@dataclass
class LyapunovReport:
    l1: float
    l2: float
    series_depth: int
    tail_bound: float
    method: str
    notes: dict = field(default_factory=dict)


def log_bound_constant(c: Cocycle) -> float:
    """Uniform bound c(A) with |log ||A^n(w) r_s||| <= c(A) * n on branches."""
    vals = [1e-3]
    ranges = _singular_ranges(c)
    for j in sorted(c.invertible):
        s = svd2(c.matrix(j))
        vals.append(abs(math.log(s.sigma1)))
        vals.append(abs(math.log(s.sigma2)))
    for i in sorted(c.singular):
        s = svd2(c.matrix(i))
        vals.append(abs(math.log(s.sigma1)))
        for l in sorted(c.singular):
            if c.transition(l, i) > 0.0:
                w = c.matrix(i).apply(ranges[l].vector())
                nrm = math.hypot(w[0], w[1])
                if nrm > 0.0:
                    vals.append(abs(math.log(nrm)))
    return max(vals)


def _value_tail_bound(c: Cocycle, uncounted_from: int,
                      envelope: float = 0.0) -> float:
    """Estimate of the dropped branch-series terms.

    Branches with interior length m >= uncounted_from were not enumerated;
    each is charged |log-norm| <= cA * (m + 2) against interior-length-m mass
    q^2 (1-q)^m (Bernoulli) or at most sigma0^(m // N) (Markov).  cA combines
    the uniform letter-norm constant with the witnessed per-step envelope:
    the uniform constant alone does not control the terminal singular factor
    (which can dip near kernel approaches), so this is a reported estimate,
    not a rigorous bound.
    """
    cA = max(log_bound_constant(c), envelope)
    U = uncounted_from
    if c.is_bernoulli:
        q = c.singular_mass
        x = 1.0 - q
        if x == 0.0:
            return 0.0
        s0 = x ** U / (1.0 - x)
        s1 = x ** U * (U * (1.0 - x) + x) / (1.0 - x) ** 2
        return cA * q * q * (s1 + 2.0 * s0)
    sigma0, N = theoretical_contraction(c)
    if sigma0 == 0.0:
        return 0.0
    total = 0.0
    m = U
    while True:
        term = cA * (m + 2) * sigma0 ** (m // N)
        total += term
        if term < 1e-30 or m > U + 10_000:
            break
        m += 1
    return total


def l1_branch_series(c: Cocycle, tail_eps: float = 1e-12,
                     max_branches: int = ATOM_CAP) -> LyapunovReport:
    """First Lyapunov exponent as the singular-to-singular branch series."""
    _require_rank_one(c)
    kernels = _singular_kernels(c)
    frontier = _branch_frontier(c)
    value = 0.0
    mass = 0.0
    count = 0
    depth = 0
    envelope = 0.0
    while frontier:
        depth += 1
        next_frontier = []
        for node in frontier:
            last = node.prefix[-1]
            vpt = ProjPoint.from_vector(node.vec[0], node.vec[1])
            for nxt in c.successors(last):
                if nxt in c.singular:
                    if proj_dist(vpt, kernels[nxt]) <= KERNEL_ATOM_TOL:
                        raise NullWord(Word(node.prefix + (nxt,)))
                    w = c.matrix(nxt).apply(node.vec)
                    nrm = math.hypot(w[0], w[1])
                    if nrm == 0.0:
                        raise NullWord(Word(node.prefix + (nxt,)))
                    p_step = c.transition(last, nxt)
                    value += node.weight * p_step * (node.logacc + math.log(nrm))
                    mass += node.weight * p_step
                    envelope = max(envelope, abs(math.log(nrm)))
                else:
                    child = _extend(c, node, nxt)
                    envelope = max(envelope, abs(child.logacc - node.logacc))
                    next_frontier.append(child)
                count += 1
                if count > max_branches:
                    raise BranchLimitExceeded(
                        f"branch series needs more than {max_branches} branches; "
                        "use the Monte Carlo engine")
        remaining = c.singular_mass - mass
        if remaining <= tail_eps:
            break
        frontier = next_frontier
    tail = _value_tail_bound(c, depth, envelope)
    return LyapunovReport(value, -math.inf, depth, tail, "branch-series")


def psi_monte_carlo(c: Cocycle, samples: int, seed: int) -> tuple[float, float]:
    """Sampling-mode estimate of the stationary average of the expansion
    observable, for cocycles whose branch enumeration exceeds the caps.

    Draws atoms of the stationary measure directly: a singular seed with
    probability p_s / q, a geometric(q) branch length, then invertible
    letters proportionally to their probabilities.  Returns (estimate,
    standard error).  Bernoulli bases only.
    """
    if not c.is_bernoulli:
        raise NotImplementedError("sampling mode requires a Bernoulli base")
    _require_rank_one(c)
    from ._kernels import stream_states, uniform_at

    q = c.singular_mass
    sing = sorted(c.singular)
    inv = sorted(c.invertible)
    p_sing = np.array([c.base.p[s - 1] for s in sing])
    p_sing = np.cumsum(p_sing / p_sing.sum())
    p_inv = np.array([c.base.p[j - 1] for j in inv])
    p_inv = np.cumsum(p_inv / p_inv.sum())
    ranges = {s: range_kernel_vectors(c.matrix(s))[0] for s in sing}
    psi = psi_observable(c)
    states = stream_states(seed, samples)
    vals = np.empty(samples)
    for r in range(samples):
        t = 0
        u = float(uniform_at(states[r:r + 1], t)[0])
        s = sing[int(np.searchsorted(p_sing, u, side="right").clip(0, len(sing) - 1))]
        v = ranges[s]
        while True:
            t += 1
            u = float(uniform_at(states[r:r + 1], t)[0])
            if u < q:   # geometric stopping: the branch ends here
                break
            t += 1
            u = float(uniform_at(states[r:r + 1], t)[0])
            j = inv[int(np.searchsorted(p_inv, u, side="right").clip(0, len(inv) - 1))]
            w = c.matrix(j).apply(v)
            v = w / math.hypot(w[0], w[1])
        vals[r] = psi(ProjPoint.from_vector(v[0], v[1]))
    est = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return est, stderr


def psi_observable(c: Cocycle):
    """One-step expansion observable: Bernoulli psi(v) = sum_i p_i log||A_i v||."""
    mats = [c.matrix(i) for i in range(1, c.k + 1)]

    def psi(v: ProjPoint) -> float:
        vec = v.vector()
        acc = 0.0
        for i, m in enumerate(mats, start=1):
            w = m.apply(vec)
            nrm = math.hypot(w[0], w[1])
            if nrm == 0.0:
                return -math.inf
            acc += c.base.p[i - 1] * math.log(nrm)
        return acc

    def psi_markov(j: int, v: ProjPoint) -> float:
        vec = v.vector()
        acc = 0.0
        for i, m in enumerate(mats, start=1):
            p = c.transition(j, i)
            if p <= 0.0:
                continue
            w = m.apply(vec)
            nrm = math.hypot(w[0], w[1])
            if nrm == 0.0:
                return -math.inf
            acc += p * math.log(nrm)
        return acc

    return psi if c.is_bernoulli else psi_markov


def furstenberg_l1(c: Cocycle, tail_eps: float = 1e-12,
                   cross_check: bool = True) -> LyapunovReport:
    """L1 as the stationary average of the one-step expansion observable.

    The reported tail bound is the branch-series one: both computations
    truncate the same series, just grouped differently.
    """
    _require_rank_one(c)
    eta = stationary_measure(c, tail_eps)
    kernels = _singular_kernels(c)
    for a in eta.atoms:
        for s, khat in kernels.items():
            if proj_dist(a.point, khat) <= KERNEL_ATOM_TOL:
                raise DivergentObservable(
                    f"atom at theta={a.point.theta} sits on the kernel of symbol {s}")
    psi = psi_observable(c)
    if c.is_bernoulli:
        value = eta.integrate(psi)
    else:
        value = sum(a.weight * psi(a.symbol, a.point) for a in eta.atoms)
    series = l1_branch_series(c, tail_eps)
    tail = series.tail_bound
    report = LyapunovReport(value, -math.inf, eta.depth, tail, "furstenberg")
    report.notes["branch_series_l1"] = series.l1
    gap = abs(series.l1 - value)
    report.notes["cross_check_gap"] = gap
    if cross_check and gap > 2 * tail + 1e-9:
        raise ArithmeticError(
            f"stationary-average/branch-series disagreement {gap:.3e} exceeds "
            f"combined tail budget {2 * tail + 1e-9:.3e}")
    return report


def induced_l1(c: Cocycle, l1: float) -> float:
    """First-return exponent L1 / q over the singular symbols."""
    q = c.singular_mass
    if q <= 0.0:
        raise NoSingularSymbol("induced exponent needs singular mass q > 0")
    return l1 / q


def expected_log_det(c: Cocycle) -> float:
    """Stationary average of log|det A_i|; -inf with any singular symbol."""
    if c.singular:
        return -math.inf
    return sum(c.symbol_weight(i) * math.log(abs(c.matrix(i).det()))
               for i in range(1, c.k + 1))


def lyapunov_spectrum(c: Cocycle, seed: int = 24243,
                      n: int = 4000, trials: int = 400) -> tuple[float, float]:
    """(L1, L2).  Rank-one present: Furstenberg L1 and L2 = -inf.
    All invertible: Monte Carlo L1 and L2 from the determinant identity."""
    if c.singular:
        rep = furstenberg_l1(c)
        return rep.l1, -math.inf
    from .limits import SimConfig, simulate_lognorm

    cfg = SimConfig(seed=seed, n=n, trials=trials, start=ProjPoint(1.0))
    samples = simulate_lognorm(c, cfg)
    l1 = float(np.mean(samples))
    return l1, expected_log_det(c) - l1
