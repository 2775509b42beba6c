"""Certify or refute projective uniform hyperbolicity.

A verdict of PUH always carries a verified invariant multi-cone with positive
margin; NotPUH carries an exact null word (product norm <= 1e-12).  Anything
short of such a numerical certificate is reported as Unknown together with
diagnostics (branch-set gaps, word-norm growth, hypothesis failures).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    NULL_TOL,
    PI,
    Arc,
    Mat2,
    ProjPoint,
    desingularize,
    proj_act,
    proj_dist,
    range_kernel,
    range_kernel_vectors,
    svd2,
    unit_det_normalize,
    wrap_angle,
)
from .errors import (
    BranchLimitExceeded,
    NoCone,
    NoSingularSymbol,
    NotAllRankOne,
)
from .shift import Bernoulli, Cocycle, Markov, Word

SEARCH_EPS = 1e-3
# isometric families drift by ~2*eps per iteration, so reaching the full
# circle from a seed ball takes about pi/eps/2 iterations
SEARCH_MAX_ITER = 4000
RANK1_GAP_TOL = 1e-4
NODE_CAP = 10 ** 6


# ---------------------------------------------------------------------------
# arc calculus

def normalize_arcs(arcs: list[Arc], tol: float = 0.0) -> list[Arc]:
    """Disjoint sorted union of arcs; collapses to the full circle at mass pi."""
    if not arcs:
        return []
    if any(a.full for a in arcs):
        return [Arc(0.0, PI)]
    segs = sorted([a.start, a.start + a.length] for a in arcs)
    merged = [segs[0]]
    for s, e in segs[1:]:
        if s <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    # wraparound: the trailing segment may reach past pi onto the leading ones
    while len(merged) > 1 and merged[-1][1] >= merged[0][0] + PI + tol:
        s0, e0 = merged.pop(0)
        merged[-1][1] = max(merged[-1][1], e0 + PI)
    if merged[-1][1] - merged[-1][0] >= PI:
        return [Arc(0.0, PI)]
    return [Arc(s, e - s) for s, e in merged if e > s]


def total_length(arcs: list[Arc]) -> float:
    return sum(a.length for a in arcs)


def fatten(arcs: list[Arc], eps: float) -> list[Arc]:
    return normalize_arcs([Arc(a.start - eps, min(a.length + 2 * eps, PI))
                           for a in arcs])


def arc_image(m: Mat2, arc: Arc) -> Arc:
    """Image of an arc under an invertible projective map.

    Endpoint images plus the orientation bit from sign(det) determine the
    image arc; projective maps are monotone on the circle.
    """
    if arc.full:
        return arc
    a = proj_act(m, ProjPoint(arc.start))
    b = proj_act(m, ProjPoint(arc.end))
    if m.det() > 0.0:
        length = wrap_angle(b.theta - a.theta)
        start = a.theta
    else:
        length = wrap_angle(a.theta - b.theta)
        start = b.theta
    if length == 0.0:
        length = 4e-16
    return Arc(start, length)


def point_gap(p: ProjPoint, arcs: list[Arc]) -> float:
    """Distance of p to the complement of the arc union; <= 0 if outside."""
    if not arcs:
        return -PI / 2
    return max(a.gap_to_boundary(p) for a in arcs)


def containment_gap(image: list[Arc], target: list[Arc]) -> float:
    """Smallest clearance of the image arcs inside the target union.

    Positive iff the closure of every image arc lies in the open target.
    """
    if not target:
        return -PI / 2
    if any(t.full for t in target):
        return PI / 2
    worst = PI / 2
    for im in image:
        if im.full:
            return -PI / 2
        best = -PI / 2
        for t in target:
            off = wrap_angle(im.start - t.start)
            rem = t.length - off - im.length
            best = max(best, min(off, rem))
        worst = min(worst, best)
    return worst


# ---------------------------------------------------------------------------
# multi-cones

@dataclass
class MultiCone:
    """Per-symbol finite unions of disjoint open arcs; margin is the smallest
    containment clearance achieved when the cone was verified."""

    arcs: dict[int, list[Arc]]
    margin: float = 0.0

    @staticmethod
    def uniform(arcs: list[Arc], k: int, margin: float = 0.0) -> "MultiCone":
        arcs = normalize_arcs(arcs)
        return MultiCone({i: list(arcs) for i in range(1, k + 1)}, margin)

    def arcs_for(self, symbol: int) -> list[Arc]:
        return self.arcs[symbol]

    def is_proper(self) -> bool:
        return all(self.arcs[i] and total_length(self.arcs[i]) < PI
                   for i in self.arcs)

    def to_jsonable(self) -> dict:
        return {str(i): [[a.start, a.length] for a in arcs]
                for i, arcs in sorted(self.arcs.items())}


def multicone_verify(c: Cocycle, cone: MultiCone) -> tuple[bool, float]:
    """Check strict invariance A_i M_j <<< M_i over admissible (i, j).

    Returns (verified, minimal angular clearance).
    """
    if set(cone.arcs) != set(range(1, c.k + 1)):
        return False, -PI / 2
    if not cone.is_proper():
        return False, -PI / 2
    margin = PI / 2
    for i in range(1, c.k + 1):
        m = c.matrix(i)
        target = cone.arcs_for(i)
        singular = i in c.singular
        for j in range(1, c.k + 1):
            if c.transition(j, i) <= 0.0:
                continue
            source = cone.arcs_for(j)
            if singular:
                r = range_kernel(m)[0]
                gap = point_gap(r, target)
            else:
                gap = containment_gap([arc_image(m, a) for a in source], target)
            margin = min(margin, gap)
    return margin > 0.0, margin


@dataclass
class SearchFailure:
    """Search gave up; this is NOT a proof that no invariant cone exists."""

    reason: str                 # 'full-circle' | 'max-iter'
    iterations: int
    last: MultiCone | None = None


def _seed_points(c: Cocycle, depth: int = 8, cap: int = 256) -> list[ProjPoint]:
    """Ranges of singular letters plus top singular directions of deep
    invertible word products."""
    pts = [range_kernel(c.matrix(s))[0] for s in sorted(c.singular)]
    inv = sorted(c.invertible)
    if inv:
        frontier = [(j, c.matrix(j)) for j in inv]
        for _ in range(depth - 1):
            if len(frontier) * len(inv) > cap:
                break
            nxt = []
            for last, prod in frontier:
                for j in inv:
                    if c.transition(last, j) > 0.0:
                        m = c.matrix(j) @ prod
                        scale = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))
                        nxt.append((j, Mat2(m.a / scale, m.b / scale,
                                            m.c / scale, m.d / scale)))
            if not nxt:
                break
            frontier = nxt
        for _, prod in frontier[:cap]:
            pts.append(svd2(prod).left_top)
    return pts


def multicone_search(c: Cocycle, eps: float = SEARCH_EPS,
                     max_iter: int = SEARCH_MAX_ITER) -> MultiCone | SearchFailure:
    """Iterate M <- fatten(union of letter images of M, eps) from seed balls.

    Self-certifying: returns the first cone whose verified margin is >= eps/2.
    Failure (full circle or iteration budget) is a value, not a refutation.
    """
    seeds = _seed_points(c)
    if not seeds:
        return SearchFailure("max-iter", 0, None)
    ball = normalize_arcs([Arc(p.theta - eps, 2 * eps) for p in seeds])
    cone = MultiCone({i: list(ball) for i in range(1, c.k + 1)})
    for it in range(1, max_iter + 1):
        new_arcs: dict[int, list[Arc]] = {}
        for i in range(1, c.k + 1):
            m = c.matrix(i)
            images: list[Arc] = []
            if i in c.singular:
                r = range_kernel(m)[0]
                images.append(Arc(r.theta - eps, 2 * eps))
            else:
                for j in range(1, c.k + 1):
                    if c.transition(j, i) <= 0.0:
                        continue
                    images.extend(arc_image(m, a) for a in cone.arcs_for(j))
                images = fatten(images, eps)
            new_arcs[i] = normalize_arcs(images)
        cone = MultiCone(new_arcs)
        if any(not arcs or arcs[0].full or total_length(arcs) >= PI - eps
               for arcs in new_arcs.values()):
            return SearchFailure("full-circle", it, cone)
        ok, margin = multicone_verify(c, cone)
        if ok and margin >= eps / 2:
            cone.margin = margin
            return cone
    return SearchFailure("max-iter", max_iter, cone)


# ---------------------------------------------------------------------------
# word-norm growth

@dataclass
class WordNormTable:
    rows: list[tuple[int, float]]       # (n, min ratio sigma1/sigma2)
    lam: float                          # least-squares growth rate of the min

    def to_jsonable(self):
        return {"rows": [[n, r] for n, r in self.rows], "lambda": self.lam}


def word_norm_criterion(c: Cocycle, n_max: int,
                        node_cap: int = NODE_CAP) -> WordNormTable:
    """Minimum of sigma1/sigma2 over admissible words of each length.

    Products that are rank-one but nonzero count as +inf; zero products count
    as 0 (the criterion fails there).
    """
    rows: list[tuple[int, float]] = []
    # frontier of (last symbol, normalized product, log scale, has_singular)
    frontier = [(i, c.matrix(i), 0.0, i in c.singular)
                for i in range(1, c.k + 1)]
    nodes = len(frontier)
    for n in range(1, n_max + 1):
        if n > 1:
            nxt = []
            for last, prod, ls, has_sing in frontier:
                for j in range(1, c.k + 1):
                    if c.transition(last, j) <= 0.0:
                        continue
                    m = c.matrix(j) @ prod
                    scale = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))
                    if scale == 0.0:
                        nxt.append((j, m, ls, True))
                        continue
                    nxt.append((j, Mat2(m.a / scale, m.b / scale,
                                        m.c / scale, m.d / scale),
                                ls + math.log(scale), has_sing or j in c.singular))
            frontier = nxt
            nodes += len(frontier)
            if nodes > node_cap:
                raise BranchLimitExceeded(f"word enumeration exceeds {node_cap} nodes")
        best = math.inf
        for _, prod, ls, has_sing in frontier:
            s = svd2(prod)
            sigma1 = s.sigma1 * math.exp(ls) if s.sigma1 > 0.0 else 0.0
            if has_sing:
                ratio = 0.0 if sigma1 <= NULL_TOL else math.inf
            else:
                ratio = s.sigma1 / s.sigma2
            best = min(best, ratio)
        rows.append((n, best))
    finite = [(n, r) for n, r in rows if 0.0 < r < math.inf]
    if len(finite) >= 2:
        xs = np.array([n for n, _ in finite], dtype=float)
        ys = np.log([r for _, r in finite])
        slope = np.polyfit(xs, ys, 1)[0]
        lam = float(math.exp(slope))
    else:
        lam = math.nan
    return WordNormTable(rows, lam)


# ---------------------------------------------------------------------------
# null words and branch sets

@dataclass
class NullSearchReport:
    hits: list[tuple[Word, float]]      # sorted by product sigma1
    min_distance: float                 # closest range-orbit-to-kernel approach
    closest_word: Word | None

    def exact(self) -> list[tuple[Word, float]]:
        return [(w, s) for w, s in self.hits if s <= NULL_TOL]


def null_word_search(c: Cocycle, depth: int, near_tol: float = 0.0,
                     node_cap: int = NODE_CAP) -> NullSearchReport:
    """Scan words (singular, invertible branch, singular) up to the depth.

    A word is reported when its direct product has sigma1 <= 1e-12 (exact
    null) or when the branch image of the range comes within `near_tol` of
    the terminal kernel.
    """
    if not c.singular:
        raise NoSingularSymbol("null words need a singular symbol")
    kernels = {s: range_kernel(c.matrix(s))[1] for s in sorted(c.singular)}
    hits: list[tuple[Word, float]] = []
    best_d = math.inf
    best_word: Word | None = None
    nodes = 0
    # node: (word prefix, unit image of the seed range, product, log scale)
    frontier = []
    for s in sorted(c.singular):
        v = range_kernel_vectors(c.matrix(s))[0]
        frontier.append(((s,), v, c.matrix(s), 0.0))
    for _interior in range(depth):
        nxt = []
        for prefix, v, prod, ls in frontier:
            last = prefix[-1]
            vpt = ProjPoint.from_vector(v[0], v[1])
            for j in sorted(c.singular):
                if c.transition(last, j) <= 0.0:
                    continue
                d = proj_dist(vpt, kernels[j])
                full = c.matrix(j) @ prod
                sigma1 = svd2(full).sigma1 * math.exp(ls)
                word = Word(prefix + (j,))
                if d < best_d:
                    best_d, best_word = d, word
                if sigma1 <= NULL_TOL or d <= near_tol:
                    hits.append((word, sigma1))
            for j in sorted(c.invertible):
                if c.transition(last, j) <= 0.0:
                    continue
                m = c.matrix(j)
                w = m.apply(v)
                nrm = math.hypot(w[0], w[1])
                pm = m @ prod
                scale = max(abs(pm.a), abs(pm.b), abs(pm.c), abs(pm.d))
                nxt.append((prefix + (j,), w / nrm,
                            Mat2(pm.a / scale, pm.b / scale, pm.c / scale,
                                 pm.d / scale), ls + math.log(scale)))
            nodes += 1
            if nodes > node_cap:
                raise BranchLimitExceeded(f"null-word search exceeds {node_cap} nodes")
        frontier = nxt
    hits.sort(key=lambda ws: (ws[1], ws[0].symbols))
    return NullSearchReport(hits, best_d, best_word)


@dataclass
class OrbitTree:
    """Point cloud with the branch words that generated each point."""

    points: list[tuple[ProjPoint, Word]]
    depth: int
    merge_tol: float = 1e-12

    def thetas(self) -> np.ndarray:
        return np.array([p.theta for p, _ in self.points])


def _dedup(points: list[tuple[ProjPoint, Word]], tol: float):
    out: list[tuple[ProjPoint, Word]] = []
    for p, w in sorted(points, key=lambda pw: (pw[0].theta, len(pw[1]))):
        if out and proj_dist(out[-1][0], p) <= tol:
            continue
        out.append((p, w))
    if len(out) > 1 and proj_dist(out[0][0], out[-1][0]) <= tol:
        out.pop()
    return out


def _min_circular_dist(xs: np.ndarray, ys: np.ndarray) -> float:
    if len(xs) == 0 or len(ys) == 0:
        return math.inf
    xs = np.sort(xs)
    ys = np.sort(ys)
    best = math.inf
    j = 0
    for x in xs:
        while j < len(ys) and ys[j] < x:
            j += 1
        for idx in (j - 1, j % len(ys)):
            d = abs(x - ys[idx % len(ys)])
            best = min(best, min(d, PI - d))
    return float(best)


def wplus_wminus(c: Cocycle, depth: int,
                 max_points: int = 4096) -> tuple[OrbitTree, OrbitTree, float, float, float]:
    """Forward orbit of ranges and backward orbit of kernels along
    invertible branches, with the three separation gaps.

    Returns (wplus, wminus, min_dist, kernel_gap, range_gap).
    """
    if not c.singular:
        raise NoSingularSymbol("branch sets need a singular symbol")
    inv = sorted(c.invertible)
    ranges = {s: range_kernel_vectors(c.matrix(s))[0] for s in sorted(c.singular)}
    kernels = {s: range_kernel_vectors(c.matrix(s))[1] for s in sorted(c.singular)}

    def forward():
        pts = []
        frontier = [((s,), v) for s, v in sorted(ranges.items())]
        pts.extend((ProjPoint.from_vector(v[0], v[1]), Word(w)) for w, v in frontier)
        for _ in range(depth):
            nxt = []
            for word, v in frontier:
                for j in inv:
                    if c.transition(word[-1], j) <= 0.0:
                        continue
                    w = c.matrix(j).apply(v)
                    nrm = math.hypot(w[0], w[1])
                    nxt.append((word + (j,), w / nrm))
            frontier = nxt
            pts.extend((ProjPoint.from_vector(v[0], v[1]), Word(w)) for w, v in frontier)
            if len(pts) > max_points:
                break
        return pts

    def backward():
        pts = []
        frontier = [((s,), v) for s, v in sorted(kernels.items())]
        pts.extend((ProjPoint.from_vector(v[0], v[1]), Word(w)) for w, v in frontier)
        for _ in range(depth):
            nxt = []
            for word, v in frontier:
                first = word[0]
                for j in inv:
                    if c.transition(j, first) <= 0.0:
                        continue
                    w = c.matrix(j).inverse().apply(v)
                    nrm = math.hypot(w[0], w[1])
                    nxt.append(((j,) + word, w / nrm))
            frontier = nxt
            pts.extend((ProjPoint.from_vector(v[0], v[1]), Word(w)) for w, v in frontier)
            if len(pts) > max_points:
                break
        return pts

    wp = OrbitTree(_dedup(forward(), 1e-12), depth)
    wm = OrbitTree(_dedup(backward(), 1e-12), depth)
    kern_thetas = np.array([ProjPoint.from_vector(v[0], v[1]).theta
                            for v in kernels.values()])
    rng_thetas = np.array([ProjPoint.from_vector(v[0], v[1]).theta
                           for v in ranges.values()])
    min_dist = _min_circular_dist(wp.thetas(), wm.thetas())
    kernel_gap = _min_circular_dist(wp.thetas(), kern_thetas)
    range_gap = _min_circular_dist(rng_thetas, wm.thetas())
    return wp, wm, min_dist, kernel_gap, range_gap


# ---------------------------------------------------------------------------
# invertible-part structures

def _invertible_only(c: Cocycle) -> Cocycle:
    """Sub-cocycle on the invertible letters (probabilities renormalized;
    only the admissibility pattern matters to the cone calculus)."""
    inv = sorted(c.invertible)
    if not inv:
        raise NoCone("no invertible letters")
    mats = tuple(c.matrix(i) for i in inv)
    if c.is_bernoulli:
        p = np.array([c.base.p[i - 1] for i in inv])
        base = Bernoulli(tuple(p / p.sum()))
    else:
        from .errors import NotPrimitive

        P = np.array([[c.transition(j, i) for j in inv] for i in inv])
        colsums = P.sum(axis=0)
        if np.any(colsums <= 0.0):
            raise NoCone("invertible sub-shift has a dead symbol")
        try:
            base = Markov.from_matrix(P / colsums)
        except NotPrimitive as exc:
            raise NoCone(f"invertible sub-shift is not primitive: {exc}") from exc
    return Cocycle(mats, frozenset(), base)


def _check_sub_cone(c: Cocycle, cone: MultiCone) -> list[int]:
    """Verify the cone for the invertible sub-cocycle; returns its letters."""
    inv = sorted(c.invertible)
    try:
        sub = _invertible_only(c)
    except NoCone:
        raise
    sub_cone = MultiCone({idx + 1: cone.arcs_for(i) for idx, i in enumerate(inv)})
    ok, _ = multicone_verify(sub, sub_cone)
    if not ok:
        raise NoCone("cone is not invariant for the invertible sub-cocycle")
    return inv


def _word_cloud(c: Cocycle, letters: list[int], start: ProjPoint, depth: int,
                inverse: bool, max_points: int):
    """Clouds {word-image of start : |word| = d} for d <= depth.

    Forward clouds append letters on the left of the product (track the last
    symbol); inverse clouds prepend (track the first symbol).
    """
    levels = [[((), start.vector())]]
    for _ in range(depth):
        nxt = []
        for word, v in levels[-1]:
            for j in letters:
                if word:
                    adm = (c.transition(word[-1], j) > 0.0 if not inverse
                           else c.transition(j, word[0]) > 0.0)
                    if not adm:
                        continue
                m = c.matrix(j) if not inverse else c.matrix(j).inverse()
                w = m.apply(v)
                nrm = math.hypot(w[0], w[1])
                nxt.append((word + (j,) if not inverse else (j,) + word, w / nrm))
            if len(nxt) > max_points:
                raise BranchLimitExceeded("orbit cloud exceeds the point cap")
        if not nxt:
            break
        levels.append(nxt)
    return levels


def kinv_sets(c: Cocycle, cone: MultiCone, depth: int,
              max_points: int = 100_000):
    """Depth-n image clouds approximating the unstable/stable direction sets
    of the invertible sub-cocycle, from a reference point inside the cone
    (K_u) and one outside its closure (K_s).

    Returns (K_u tree, K_s tree, stabilization) where stabilization holds the
    Hausdorff distance between the two deepest clouds of each side.
    """
    inv = _check_sub_cone(c, cone)
    arcs0 = cone.arcs_for(inv[0])
    first = arcs0[0]
    x0 = ProjPoint(first.start + first.length / 2)
    comp = _complement(normalize_arcs(list(arcs0)))
    y0 = (ProjPoint(comp[0].start + comp[0].length / 2) if comp
          else ProjPoint(wrap_angle(x0.theta + PI / 2)))

    def finish(levels, d):
        pts = [(ProjPoint.from_vector(v[0], v[1]), Word(w))
               for w, v in levels[-1]]
        if len(levels) >= 2:
            a = np.array([ProjPoint.from_vector(v[0], v[1]).theta
                          for _, v in levels[-1]])
            b = np.array([ProjPoint.from_vector(v[0], v[1]).theta
                          for _, v in levels[-2]])
            stab = _hausdorff_circular(a, b)
        else:
            stab = math.nan
        return OrbitTree(_dedup(pts, 1e-12), d), stab

    ku, ku_stab = finish(_word_cloud(c, inv, x0, depth, False, max_points), depth)
    ks, ks_stab = finish(_word_cloud(c, inv, y0, depth, True, max_points), depth)
    return ku, ks, {"ku_stabilization": ku_stab, "ks_stabilization": ks_stab}


def _hausdorff_circular(a: np.ndarray, b: np.ndarray) -> float:
    def one_sided(x, y):
        return max(min(min(abs(t - s), PI - abs(t - s)) for s in y) for t in x)
    if len(a) == 0 or len(b) == 0:
        return math.nan
    return max(one_sided(a, b), one_sided(b, a))


def cone_shrink(c: Cocycle, cone: MultiCone, n: int) -> MultiCone:
    """M_n = union over invertible words of length n of the word-image of M.

    M_0 = M; each M_{n+1} sits strictly inside M_n and the intersection over
    n is the unstable direction set.  Non-invertible symbols inherit the
    union over the invertible ones (they play no role in the restriction).
    """
    inv = sorted(c.invertible)
    _check_sub_cone(c, cone)
    if n == 0:
        return cone
    arcs = {i: list(cone.arcs_for(i)) for i in range(1, c.k + 1)}
    for _ in range(n):
        new: dict[int, list[Arc]] = {}
        for i in inv:
            m = c.matrix(i)
            images = []
            for j in inv:
                if c.transition(j, i) <= 0.0:
                    continue
                images.extend(arc_image(m, a) for a in arcs[j])
            new[i] = normalize_arcs(images)
        union = normalize_arcs([a for i in inv for a in new[i]])
        for i in range(1, c.k + 1):
            arcs[i] = new.get(i, list(union))
    return MultiCone(arcs)


def shrink_to_exclude(c: Cocycle, cone: MultiCone, v: ProjPoint,
                      depth_cap: int = 30):
    """Smallest n <= depth_cap with v outside M_n, or None when v is never
    excluded (v belongs to the limit set)."""
    for n in range(depth_cap + 1):
        shrunk = cone_shrink(c, cone, n)
        if all(point_gap(v, shrunk.arcs_for(i)) <= 0.0 for i in shrunk.arcs):
            return n, shrunk
    return None


# ---------------------------------------------------------------------------
# certificates

@dataclass
class Certificate:
    verdict: str                        # 'PUH' | 'NotPUH' | 'Unknown'
    cone: MultiCone | None = None
    null_word: Word | None = None
    near_pair: dict | None = None
    failure_tag: str | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        out = {"verdict": self.verdict, "diagnostics": self.diagnostics}
        if self.cone is not None:
            out["cone"] = self.cone.to_jsonable()
            out["margin"] = self.cone.margin
        if self.null_word is not None:
            out["null_word"] = list(self.null_word.symbols)
        if self.near_pair is not None:
            out["near_pair"] = self.near_pair
        if self.failure_tag is not None:
            out["failure_tag"] = self.failure_tag
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_jsonable(), **kw)


def rank1_puh(c: Cocycle, gap_tol: float = RANK1_GAP_TOL) -> Certificate:
    """All-rank-one dichotomy: ranges uniformly away from kernels means PUH,
    a vanishing admissible pair is an exact null word, and the in-between
    band is reported Unknown.

    The certified cone for symbol i is the complement of d/3-balls around
    the kernels at distance >= d from r_i, giving margin 2d/3.
    """
    if c.invertible:
        raise NotAllRankOne("rank1_puh needs every letter rank-one")
    rk = {i: range_kernel(c.matrix(i)) for i in range(1, c.k + 1)}
    d = math.inf
    argmin = None
    for i in range(1, c.k + 1):          # i then j, product A_j A_i
        for j in range(1, c.k + 1):
            if c.transition(i, j) <= 0.0:
                continue
            dist = proj_dist(rk[i][0], rk[j][1])
            if dist < d:
                d, argmin = dist, (i, j)
    if d > gap_tol:
        radius = d / 3.0
        arcs = {}
        for i in range(1, c.k + 1):
            holes = [Arc(rk[j][1].theta - radius, 2 * radius)
                     for j in range(1, c.k + 1)
                     if proj_dist(rk[i][0], rk[j][1]) >= d]
            arcs[i] = _complement(normalize_arcs(holes))
        cone = MultiCone(arcs)
        ok, margin = multicone_verify(c, cone)
        if not ok:
            raise AssertionError("rank-one cone failed self-verification")
        cone.margin = margin
        return Certificate("PUH", cone=cone,
                           diagnostics={"range_kernel_gap": d})
    if d <= NULL_TOL:
        i, j = argmin
        return Certificate("NotPUH", null_word=Word((i, j)),
                           diagnostics={"range_kernel_gap": d})
    return Certificate("Unknown", failure_tag="gap-between-tolerances",
                       diagnostics={"range_kernel_gap": d})


def _complement(arcs: list[Arc]) -> list[Arc]:
    """Complement of a normalized arc union on the circle."""
    if not arcs:
        return [Arc(0.0, PI)]
    if arcs[0].full:
        return []
    out = []
    for cur, nxt in zip(arcs, arcs[1:] + arcs[:1]):
        gap = PI - cur.length if len(arcs) == 1 else wrap_angle(nxt.start - cur.end)
        if gap > 0.0:
            out.append(Arc(cur.end, gap))
    return out


def diagonalizable(c: Cocycle, tol: float = 1e-10) -> bool:
    """All letters share a common real eigenbasis within the tolerance."""
    basis = None
    for i in range(1, c.k + 1):
        m = c.matrix(i)
        s = svd2(m)
        half_trace = m.trace() / 2.0
        off = max(abs(m.a - half_trace), abs(m.d - half_trace),
                  abs(m.b), abs(m.c))
        if off <= tol * max(s.sigma1, 1.0):
            continue  # scalar multiple of the identity, compatible with any basis
        if i in c.singular:
            r, k = range_kernel(m)
            if proj_dist(r, k) <= tol:
                return False  # nilpotent rank-one letter is defective
            cand = np.column_stack([r.vector(), k.vector()])
        else:
            eigvals, eigvecs = np.linalg.eig(m.array)
            if np.iscomplex(eigvals).any():
                return False
            if abs(eigvals[0] - eigvals[1]) <= tol * max(s.sigma1, 1.0):
                return False  # non-scalar with equal eigenvalues: defective
            cand = np.real(eigvecs)
        if basis is None:
            basis = cand
            continue
        conj = np.linalg.solve(basis, m.array @ basis)
        if max(abs(conj[0, 1]), abs(conj[1, 0])) > tol * max(s.sigma1, 1.0):
            return False
    if basis is None:
        return True  # every letter scalar
    # recheck all letters against the chosen basis
    for i in range(1, c.k + 1):
        m = c.matrix(i)
        conj = np.linalg.solve(basis, m.array @ basis)
        if max(abs(conj[0, 1]), abs(conj[1, 0])) > tol * max(svd2(m).sigma1, 1.0):
            return False
    return True


def desingularize_cocycle(c: Cocycle, mu: float, unit_det: bool = True) -> Cocycle:
    """All-invertible approximation: zero singular values become mu^-2,
    then every letter is normalized to determinant +-1 when unit_det."""
    mats = []
    for i in range(1, c.k + 1):
        m = desingularize(c.matrix(i), mu)
        if unit_det:
            m = unit_det_normalize(m)
        mats.append(m)
    return Cocycle(tuple(mats), frozenset(), c.base,
                   name=f"{c.name}-desing-{mu:g}" if c.name else "")


def certify(c: Cocycle, depth: int = 12, eps: float = SEARCH_EPS) -> Certificate:
    """Decision tree: all-rank-one shortcut, exact null word, cone search,
    then Unknown with branch-set and word-norm diagnostics."""
    if not c.invertible:
        return rank1_puh(c)
    near = None
    if c.singular:
        near = null_word_search(c, depth, near_tol=1e-8)
        exact = near.exact()
        if exact:
            word, sigma1 = exact[0]
            return Certificate("NotPUH", null_word=word,
                               diagnostics={"product_sigma1": sigma1,
                                            "min_distance": near.min_distance})
    found = multicone_search(c, eps)
    if isinstance(found, MultiCone):
        diag = {}
        if near is not None:
            diag["min_distance"] = near.min_distance
        return Certificate("PUH", cone=found, diagnostics=diag)
    diagnostics: dict = {"search_failure": found.reason,
                         "search_iterations": found.iterations}
    try:
        table = word_norm_criterion(c, _diag_depth(c))
        diagnostics["word_norm"] = table.to_jsonable()
    except BranchLimitExceeded:
        pass
    failure_tag = "no-cone-found"
    if c.singular:
        wp, wm, min_dist, kgap, rgap = wplus_wminus(c, depth)
        diagnostics.update({"wplus_size": len(wp.points),
                            "wminus_size": len(wm.points),
                            "branch_min_dist": min_dist,
                            "kernel_gap": kgap,
                            "range_gap": rgap})
        if near is not None:
            diagnostics["min_distance"] = near.min_distance
            if near.closest_word is not None:
                diagnostics["closest_word"] = list(near.closest_word.symbols)
                near_pair = {"distance": near.min_distance,
                             "word": list(near.closest_word.symbols)}
            else:
                near_pair = None
        else:
            near_pair = None
        try:
            inv_found = multicone_search(_invertible_only(c), eps) if c.invertible else None
        except NoCone:
            inv_found = None
        inv_puh = isinstance(inv_found, MultiCone)
        diagnostics["invertible_part_puh"] = inv_puh
        diag_flag = diagonalizable(c)
        diagnostics["diagonalizable"] = diag_flag
        if not inv_puh:
            failure_tag = "invertible-part-not-puh"
        elif diag_flag:
            failure_tag = "diagonalizable"
        return Certificate("Unknown", failure_tag=failure_tag,
                           near_pair=near_pair, diagnostics=diagnostics)
    return Certificate("Unknown", failure_tag=failure_tag,
                       diagnostics=diagnostics)


def _diag_depth(c: Cocycle) -> int:
    n = 1
    while c.k ** (n + 1) <= 4096:
        n += 1
    return max(n, 2)
