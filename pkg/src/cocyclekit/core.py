"""Exact-as-possible 2x2 linear algebra and projective-circle geometry.

Lines in the plane are represented by their angle in [0, pi); the projective
circle has circumference pi.  All types here are immutable values and all
operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import Degenerate, NotRankOne, ZeroMatrix

PI = math.pi

# A matrix is classified rank-one iff sigma2 <= RANK_TOL * sigma1.
RANK_TOL = 1e-10
# Products with top singular value below this are treated as the zero matrix.
NULL_TOL = 1e-12


def wrap_angle(theta: float) -> float:
    """Reduce an angle to the canonical projective range [0, pi)."""
    t = math.fmod(theta, PI)
    if t < 0.0:
        t += PI
    if t >= PI:  # fmod can round up to pi
        t -= PI
    return t


@dataclass(frozen=True)
class ProjPoint:
    """A line through the origin, stored as its angle in [0, pi)."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @staticmethod
    def from_vector(x: float, y: float) -> "ProjPoint":
        if x == 0.0 and y == 0.0:
            raise Degenerate("zero vector spans no line")
        return ProjPoint(math.atan2(y, x))

    def vector(self) -> np.ndarray:
        """A unit representative of the line; exact on the two axes."""
        if self.theta == 0.0:
            return np.array([1.0, 0.0])
        if self.theta == PI / 2:
            return np.array([0.0, 1.0])
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    def __repr__(self):
        return f"ProjPoint({self.theta:.12g})"


def proj_dist(u: ProjPoint, v: ProjPoint) -> float:
    """Angular distance on the projective circle, in [0, pi/2]."""
    d = abs(u.theta - v.theta)
    return min(d, PI - d)


@dataclass(frozen=True)
class Arc:
    """Open arc on the projective circle: (start, start + length) mod pi.

    length == pi is the full-circle sentinel.
    """

    start: float
    length: float

    def __post_init__(self):
        if not (0.0 < self.length <= PI):
            raise ValueError(f"arc length must be in (0, pi], got {self.length}")
        object.__setattr__(self, "start", wrap_angle(float(self.start)))
        object.__setattr__(self, "length", float(self.length))

    @property
    def full(self) -> bool:
        return self.length == PI

    @property
    def end(self) -> float:
        return wrap_angle(self.start + self.length)

    def contains(self, p: ProjPoint, margin: float = 0.0) -> bool:
        """True if p lies in the open arc shrunk by `margin` at both ends."""
        if self.full:
            return True
        off = wrap_angle(p.theta - self.start)
        return margin < off < self.length - margin

    def gap_to_boundary(self, p: ProjPoint) -> float:
        """Distance of p to the arc's complement; <= 0 when p is outside."""
        if self.full:
            return PI / 2
        off = wrap_angle(p.theta - self.start)
        if off >= self.length:
            return -min(off - self.length, PI - off)
        return min(off, self.length - off)


@dataclass(frozen=True)
class Mat2:
    """Real 2x2 matrix with entries (a b / c d)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            x = float(getattr(self, name))
            if not math.isfinite(x):
                raise ValueError(f"entry {name} is not finite: {x}")
            object.__setattr__(self, name, x)

    @staticmethod
    def from_array(m) -> "Mat2":
        m = np.asarray(m, dtype=float)
        return Mat2(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @staticmethod
    def identity() -> "Mat2":
        return Mat2(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def rotation(angle: float) -> "Mat2":
        co, si = math.cos(angle), math.sin(angle)
        return Mat2(co, -si, si, co)

    @staticmethod
    def diagonal(x: float, y: float) -> "Mat2":
        return Mat2(x, 0.0, 0.0, y)

    @cached_property
    def array(self) -> np.ndarray:
        m = np.array([[self.a, self.b], [self.c, self.d]])
        m.setflags(write=False)
        return m

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2.from_array(self.array @ other.array)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.array @ np.asarray(v, dtype=float)

    def inverse(self) -> "Mat2":
        dt = self.det()
        if dt == 0.0:
            raise ZeroMatrix("matrix is not invertible")
        return Mat2(self.d / dt, -self.b / dt, -self.c / dt, self.a / dt)

    @cached_property
    def rank_class(self) -> str:
        """'invertible' | 'rank-one' | 'zero' under the declared tolerance."""
        s = self.svd()
        if s.sigma1 == 0.0:
            return "zero"
        if s.sigma2 <= RANK_TOL * s.sigma1:
            return "rank-one"
        return "invertible"

    def svd(self) -> "Svd2":
        return svd2(self)

    def __repr__(self):
        return f"Mat2([[{self.a:.12g}, {self.b:.12g}], [{self.c:.12g}, {self.d:.12g}]])"


@dataclass(frozen=True)
class Svd2:
    """Singular data of a 2x2 matrix: sigma1 >= sigma2 >= 0 and top directions."""

    sigma1: float
    sigma2: float
    left_top: ProjPoint
    right_top: ProjPoint


def _svd_frames(m: Mat2):
    """Full SVD m = U @ diag(s1, s2) @ V.T with s1 >= s2 >= 0.

    U, V are rotations or reflections; when s2 == 0 the free signs are fixed
    so that det(U) == det(V), making det of any desingularization positive.
    """
    M = m.array
    scale = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))
    if scale == 0.0:
        return np.eye(2), 0.0, 0.0, np.eye(2)
    if not 1e-120 < scale < 1e120:  # keep M^T M away from over/underflow
        U, s1, s2, V = _svd_frames(Mat2(m.a / scale, m.b / scale,
                                        m.c / scale, m.d / scale))
        return U, s1 * scale, s2 * scale, V
    MtM = M.T @ M
    # principal axis of the quadratic form M^T M
    phi = 0.5 * math.atan2(2.0 * MtM[0, 1], MtM[0, 0] - MtM[1, 1])
    v1 = np.array([math.cos(phi), math.sin(phi)])
    v2 = np.array([-v1[1], v1[0]])
    w1 = M @ v1
    w2 = M @ v2
    n1 = math.hypot(w1[0], w1[1])
    n2 = math.hypot(w2[0], w2[1])
    if n2 > n1:  # axis came out swapped
        v1, v2, w1, w2, n1, n2 = v2, -v1, w2, -w1, n2, n1
    if n1 == 0.0:  # zero matrix
        U = np.eye(2)
        V = np.column_stack([v1, v2])
        return U, 0.0, 0.0, V
    u1 = w1 / n1
    u2 = np.array([-u1[1], u1[0]])
    s2 = float(u2 @ w2)
    if s2 < 0.0:
        u2 = -u2
        s2 = -s2
    if s2 == 0.0:
        # fix the free sign: det(U) == det(V)
        du = u1[0] * u2[1] - u1[1] * u2[0]
        dv = v1[0] * v2[1] - v1[1] * v2[0]
        if du * dv < 0.0:
            u2 = -u2
    U = np.column_stack([u1, u2])
    V = np.column_stack([v1, v2])
    return U, float(n1), s2, V


def svd2(m: Mat2) -> Svd2:
    """Closed-form SVD of a 2x2 matrix.

    sigma1 is the operator norm and sigma2 the co-norm m(A).
    """
    U, s1, s2, V = _svd_frames(m)
    if s1 == 0.0:
        return Svd2(0.0, 0.0, ProjPoint(0.0), ProjPoint(0.0))
    return Svd2(s1, s2,
                ProjPoint.from_vector(U[0, 0], U[1, 0]),
                ProjPoint.from_vector(V[0, 0], V[1, 0]))


def conorm(m: Mat2) -> float:
    """Smallest singular value; equals 1/||m^-1|| for invertible m, else 0."""
    return svd2(m).sigma2


def proj_act(m: Mat2, v: ProjPoint) -> ProjPoint:
    """Projective action of a nonzero matrix.

    Rank-one matrices act as the constant map onto their range, so the
    discontinuity at the kernel is removed.
    """
    cls = m.rank_class
    if cls == "zero":
        raise ZeroMatrix("zero matrix has no projective action")
    if cls == "rank-one":
        return range_kernel(m)[0]
    w = m.apply(v.vector())
    return ProjPoint.from_vector(w[0], w[1])


def range_kernel_vectors(m: Mat2) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors spanning the range and kernel of a rank-one matrix.

    Built from the dominant column and the perp of the dominant row, so the
    result is exact whenever the entries make it exact (e.g. axis-aligned
    projections), and within 1e-12 under the declared rank tolerance.
    """
    s = svd2(m)
    if s.sigma1 == 0.0:
        raise NotRankOne("zero matrix")
    if s.sigma2 > RANK_TOL * s.sigma1:
        raise NotRankOne(f"sigma2/sigma1 = {s.sigma2 / s.sigma1:.3e} exceeds tolerance")
    c1 = (m.a, m.c)
    c2 = (m.b, m.d)
    rng = c1 if math.hypot(*c1) >= math.hypot(*c2) else c2
    r1 = (m.a, m.b)
    r2 = (m.c, m.d)
    row = r1 if math.hypot(*r1) >= math.hypot(*r2) else r2
    ker = (-row[1], row[0])
    nr = math.hypot(*rng)
    nk = math.hypot(*ker)
    return (np.array([rng[0] / nr, rng[1] / nr]),
            np.array([ker[0] / nk, ker[1] / nk]))


def range_kernel(m: Mat2) -> tuple[ProjPoint, ProjPoint]:
    """Range and kernel directions of a rank-one matrix."""
    rng, ker = range_kernel_vectors(m)
    return ProjPoint.from_vector(*rng), ProjPoint.from_vector(*ker)


def winding_speed(m: Mat2, dm: Mat2, v: ProjPoint) -> float:
    """Rotation speed (m v ^ dm v) / ||m v||^2 of the projective image of v.

    Invariant under v -> -v and linear in dm.
    """
    vec = v.vector()
    w = m.apply(vec)
    nw2 = w[0] * w[0] + w[1] * w[1]
    if math.sqrt(nw2) < 1e-14:
        raise Degenerate("image vector below tolerance")
    dw = dm.apply(vec)
    return (w[0] * dw[1] - w[1] * dw[0]) / nw2


def desingularize(m: Mat2, mu: float) -> Mat2:
    """Replace a zero singular value by mu^-2, keeping the singular frames.

    Invertible matrices pass through unchanged.  The result converges to m
    entrywise with error mu^-2 as mu -> infinity.
    """
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    cls = m.rank_class
    if cls == "zero":
        raise ZeroMatrix("cannot desingularize the zero matrix")
    if cls == "invertible":
        return m
    U, s1, _, V = _svd_frames(m)
    du = U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0]
    dv = V[0, 0] * V[1, 1] - V[0, 1] * V[1, 0]
    if du * dv < 0.0:  # replaced singular value gets a positive determinant
        U = np.column_stack([U[:, 0], -U[:, 1]])
    A = U @ np.diag([s1, mu ** -2]) @ V.T
    return Mat2.from_array(A)


def unit_det_normalize(m: Mat2) -> Mat2:
    """Scale an invertible matrix to determinant +-1."""
    dt = m.det()
    if dt == 0.0:
        raise ZeroMatrix("singular matrix cannot be normalized to unit determinant")
    s = math.sqrt(abs(dt))
    return Mat2(m.a / s, m.b / s, m.c / s, m.d / s)


def small_norm_arcs(m: Mat2, eps: float) -> list[Arc]:
    """The set {v : ||m v|| < eps for unit v} as a union of arcs.

    For a rank-one matrix this is the pair of arcs of half-width
    asin(min(1, eps/sigma1)) around the kernel; total length <= C*eps.
    """
    s = svd2(m)
    if s.sigma1 == 0.0:
        return [Arc(0.0, PI)]
    if eps <= s.sigma2:
        return []
    if eps >= s.sigma1:
        return [Arc(0.0, PI)]
    # ||m v(t)||^2 = s1^2 cos^2(t) + s2^2 sin^2(t) with t the angle to right_top,
    # so the sublevel set is |cos t| < x, an arc around the co-norm direction
    # (the kernel, for rank-one m) of half-width asin(x).
    x = math.sqrt((eps * eps - s.sigma2 ** 2) / (s.sigma1 ** 2 - s.sigma2 ** 2))
    half = math.asin(min(1.0, x))
    if half <= 0.0:
        return []
    center = wrap_angle(s.right_top.theta + PI / 2)
    return [Arc(center - half, 2 * half)]
