"""Bernoulli and Markov base dynamics.

Symbols are 1-based.  A Markov base is a left-stochastic matrix P (columns sum
to one, P[i-1][j-1] = probability of symbol i following symbol j) together with
its stationary vector q.  A Bernoulli base is the special case of identical
columns and admits fast paths throughout.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import RANK_TOL, Mat2, svd2
from .errors import (
    BranchLimitExceeded,
    Inadmissible,
    InvalidCocycle,
    NotPrimitive,
    SingularComponent,
)

PROB_TOL = 1e-12
BRANCH_CAP = 10 ** 6


@dataclass(frozen=True)
class Bernoulli:
    """I.i.d. letters with strictly positive probability vector p."""

    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if any(x <= 0.0 for x in p):
            raise InvalidCocycle("all letter probabilities must be positive")
        if abs(sum(p) - 1.0) > PROB_TOL:
            raise InvalidCocycle(f"probabilities sum to {sum(p)}, not 1")
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class Markov:
    """Primitive left-stochastic transition matrix with stationary vector q."""

    P: tuple[tuple[float, ...], ...]
    q: tuple[float, ...]

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise InvalidCocycle("P must be square")
        if np.any(P < 0.0):
            raise InvalidCocycle("P has negative entries")
        colsums = P.sum(axis=0)
        if np.max(np.abs(colsums - 1.0)) > PROB_TOL:
            raise InvalidCocycle("P columns must sum to 1 (left-stochastic)")
        primitivity_check(P)
        q = np.asarray(self.q, dtype=float)
        if q.shape != (P.shape[0],):
            raise InvalidCocycle("q has wrong length")
        if np.any(q <= 0.0) or abs(q.sum() - 1.0) > PROB_TOL:
            raise InvalidCocycle("q must be a positive probability vector")
        if np.max(np.abs(P @ q - q)) > 1e-10:
            raise InvalidCocycle("q is not stationary for P")
        object.__setattr__(self, "P", tuple(tuple(row) for row in P))
        object.__setattr__(self, "q", tuple(q))

    @staticmethod
    def from_matrix(P) -> "Markov":
        return Markov(tuple(tuple(row) for row in np.asarray(P, dtype=float)),
                      tuple(stationary_vector(P)))


def primitivity_check(P) -> int:
    """Smallest N with P^N entrywise positive; NotPrimitive if none exists.

    The Wielandt bound (k-1)^2 + 1 caps the search.
    """
    B = np.asarray(P) > 0.0
    k = B.shape[0]
    power = B.copy()
    for n in range(1, (k - 1) ** 2 + 2):
        if power.all():
            return n
        power = (power @ B) > 0
    raise NotPrimitive("no power of P is entrywise positive")


def stationary_vector(P) -> np.ndarray:
    """The unique stationary probability vector q = P q of a primitive P."""
    P = np.asarray(P, dtype=float)
    primitivity_check(P)
    k = P.shape[0]
    M = P - np.eye(k)
    M[-1, :] = 1.0
    rhs = np.zeros(k)
    rhs[-1] = 1.0
    q = np.linalg.solve(M, rhs)
    # one refinement pass tightens the residual to ~1e-16
    q = P @ q
    q = q / q.sum()
    if np.max(np.abs(P @ q - q)) > 1e-12 or np.any(q <= 0.0):
        raise NotPrimitive("power iteration failed to produce a positive fixed vector")
    return q


@dataclass(frozen=True)
class Word:
    """Finite sequence of 1-based symbols."""

    symbols: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def __str__(self):
        return " ".join(str(s) for s in self.symbols)


@dataclass(frozen=True)
class Cocycle:
    """A tuple of 2x2 matrices over a Bernoulli or Markov shift.

    `singular` lists the symbols whose matrices are declared rank-one; the
    declaration is verified against the entries at construction.
    """

    matrices: tuple[Mat2, ...]
    singular: frozenset[int]
    base: Bernoulli | Markov
    name: str = field(default="", compare=False)

    def __post_init__(self):
        mats = tuple(self.matrices)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "singular", frozenset(int(s) for s in self.singular))
        k = len(mats)
        if k == 0:
            raise InvalidCocycle("empty alphabet")
        if not all(1 <= s <= k for s in self.singular):
            raise InvalidCocycle("singular set contains out-of-range symbols")
        for i, m in enumerate(mats, start=1):
            s = svd2(m)
            if i in self.singular:
                if s.sigma1 == 0.0 or s.sigma2 > RANK_TOL * s.sigma1:
                    raise InvalidCocycle(f"symbol {i} declared singular but rank != 1")
            else:
                if m.det() == 0.0:
                    raise InvalidCocycle(f"symbol {i} declared invertible but det = 0")
        if isinstance(self.base, Bernoulli):
            if len(self.base.p) != k:
                raise InvalidCocycle("probability vector length != alphabet size")
        elif isinstance(self.base, Markov):
            if len(self.base.q) != k:
                raise InvalidCocycle("transition matrix size != alphabet size")
        else:
            raise InvalidCocycle("base must be Bernoulli or Markov")

    @property
    def k(self) -> int:
        return len(self.matrices)

    @property
    def invertible(self) -> frozenset[int]:
        return frozenset(range(1, self.k + 1)) - self.singular

    @property
    def is_bernoulli(self) -> bool:
        return isinstance(self.base, Bernoulli)

    def matrix(self, symbol: int) -> Mat2:
        return self.matrices[symbol - 1]

    def symbol_weight(self, symbol: int) -> float:
        """Stationary probability of a symbol (p_i or q_i)."""
        if self.is_bernoulli:
            return self.base.p[symbol - 1]
        return self.base.q[symbol - 1]

    def transition(self, frm: int, to: int) -> float:
        """Probability of `to` following `frm`."""
        if self.is_bernoulli:
            return self.base.p[to - 1]
        return self.base.P[to - 1][frm - 1]

    def successors(self, frm: int) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.k + 1) if self.transition(frm, i) > 0.0)

    @property
    def singular_mass(self) -> float:
        """Total stationary mass q of the singular symbols."""
        return sum(self.symbol_weight(s) for s in self.singular)

    def transition_matrix(self) -> np.ndarray:
        """Left-stochastic matrix of the base (identical columns if Bernoulli)."""
        if self.is_bernoulli:
            p = np.asarray(self.base.p)
            return np.tile(p[:, None], (1, self.k))
        return np.asarray(self.base.P)

    def word_product(self, word: Word | tuple[int, ...]) -> Mat2:
        """A_{w_n} ... A_{w_1} for word (w_1, ..., w_n)."""
        out = Mat2.identity()
        for s in word:
            out = self.matrix(s) @ out
        return out


def check_admissible(c: Cocycle, word) -> None:
    symbols = tuple(word)
    for s in symbols:
        if not 1 <= s <= c.k:
            raise Inadmissible(f"symbol {s} outside alphabet 1..{c.k}")
    for a, b in zip(symbols, symbols[1:]):
        if c.transition(a, b) <= 0.0:
            raise Inadmissible(f"forbidden transition {a} -> {b}")


def cylinder_measure(c: Cocycle, word) -> float:
    """Measure of the cylinder fixed by `word`; the empty word gives 1."""
    symbols = tuple(word)
    if not symbols:
        return 1.0
    check_admissible(c, symbols)
    out = c.symbol_weight(symbols[0])
    for a, b in zip(symbols, symbols[1:]):
        out *= c.transition(a, b)
    return out


def enumerate_branches(c: Cocycle, s: int, l: int, n: int,
                       cap: int = BRANCH_CAP) -> list[Word]:
    """Admissible words (w_0=s, w_1..w_{n-1} invertible, w_n=l), length n+1.

    Lexicographic order.  Raises BranchLimitExceeded beyond `cap` words.
    """
    if s not in c.singular:
        raise ValueError(f"branch start {s} must be a singular symbol")
    if n < 1:
        raise ValueError("branch length n must be >= 1")
    inv = sorted(c.invertible)
    out: list[Word] = []

    def extend(prefix: tuple[int, ...]):
        depth = len(prefix) - 1
        if depth == n - 1:
            if c.transition(prefix[-1], l) > 0.0:
                if len(out) >= cap:
                    raise BranchLimitExceeded(f"more than {cap} branches for ({s},{l},{n})")
                out.append(Word(prefix + (l,)))
            return
        for i in inv:
            if c.transition(prefix[-1], i) > 0.0:
                extend(prefix + (i,))

    extend((s,))
    return out


def branch_weight(c: Cocycle, word) -> float:
    """p(w) = prod of transition probabilities along the word (no initial factor)."""
    symbols = tuple(word)
    out = 1.0
    for a, b in zip(symbols, symbols[1:]):
        out *= c.transition(a, b)
    return out


def branch_mass_check(c: Cocycle, j: int, n_max: int) -> float:
    """Residual q_j - sum over branches into j of length <= n_max.

    Nonnegative, and decays geometrically in n_max for rank-one cocycles.
    """
    total = 0.0
    for s in sorted(c.singular):
        q_s = c.symbol_weight(s)
        for n in range(1, n_max + 1):
            for w in enumerate_branches(c, s, j, n):
                total += q_s * branch_weight(c, w)
    return c.symbol_weight(j) - total


@dataclass(frozen=True)
class LiftedEdge:
    """One edge of the oriented double cover."""

    src: int        # node in the doubled alphabet, 1..2k (k+i is i*)
    dst: int
    symbol: int     # original symbol carried by the edge
    matrix: Mat2    # original matrix
    oriented_matrix: Mat2  # after conjugating starred fibers, det > 0


@dataclass(frozen=True)
class LiftedCocycle:
    """Oriented double cover of an invertible cocycle.

    Nodes 1..k are the original symbols, k+1..2k their starred copies; the
    fiber over a starred node carries the opposite orientation.
    """

    k: int
    edges: tuple[LiftedEdge, ...]
    flipped: frozenset[int]  # symbols with det < 0

    def star(self, node: int) -> int:
        return node + self.k if node <= self.k else node - self.k


def oriented_lift(c: Cocycle) -> LiftedCocycle:
    """Double-cover lift: transitions into symbol j stay within the two copies
    when det(A_j) > 0 and swap copies when det(A_j) < 0.

    Rejects cocycles with singular components.
    """
    k = c.k
    flip = np.diag([1.0, -1.0])
    dets = {}
    for i in range(1, k + 1):
        d = c.matrix(i).det()
        if d == 0.0:
            raise SingularComponent(f"symbol {i} is singular; the lift needs det != 0")
        dets[i] = d
    edges = []
    for j in range(1, k + 1):  # destination symbol
        mat = c.matrix(j)
        arr = mat.array
        for i in range(1, k + 1):  # source symbol
            if c.transition(i, j) <= 0.0:
                continue
            if dets[j] > 0.0:
                pairs = [(i, j), (i + k, j + k)]
            else:
                pairs = [(i, j + k), (i + k, j)]
            for src, dst in pairs:
                conj = arr
                if src > k:
                    conj = conj @ flip
                if dst > k:
                    conj = flip @ conj
                edges.append(LiftedEdge(src, dst, j, mat, Mat2.from_array(conj)))
    flipped = frozenset(i for i, d in dets.items() if d < 0.0)
    return LiftedCocycle(k, tuple(edges), flipped)


def enumerate_words(c: Cocycle, n: int, cap: int = BRANCH_CAP):
    """All admissible words of length n, lexicographic."""
    if c.is_bernoulli:
        it = itertools.product(range(1, c.k + 1), repeat=n)
        count = c.k ** n
        if count > cap:
            raise BranchLimitExceeded(f"{count} words of length {n} exceed cap {cap}")
        return [Word(w) for w in it]
    out = []

    def extend(prefix):
        if len(prefix) == n:
            if len(out) >= cap:
                raise BranchLimitExceeded(f"words of length {n} exceed cap {cap}")
            out.append(Word(prefix))
            return
        start = range(1, c.k + 1) if not prefix else c.successors(prefix[-1])
        for i in start:
            extend(prefix + (i,))

    extend(())
    return out


# ---------------------------------------------------------------------------
# cocycle file format

def cocycle_to_dict(c: Cocycle) -> dict:
    d = {
        "k": c.k,
        "singular": sorted(c.singular),
        "matrices": [[m.a, m.b, m.c, m.d] for m in c.matrices],
    }
    if c.is_bernoulli:
        d["base"] = {"bernoulli": list(c.base.p)}
    else:
        d["base"] = {"markov": {"P": [list(row) for row in c.base.P],
                                "q": list(c.base.q)}}
    if c.name:
        d["name"] = c.name
    return d


def cocycle_from_dict(d: dict) -> Cocycle:
    try:
        k = int(d["k"])
        mats = tuple(Mat2(*[float(x) for x in row]) for row in d["matrices"])
        if len(mats) != k:
            raise InvalidCocycle(f"expected {k} matrices, got {len(mats)}")
        singular = frozenset(int(s) for s in d["singular"])
        base_spec = d["base"]
        if "bernoulli" in base_spec:
            base = Bernoulli(tuple(float(x) for x in base_spec["bernoulli"]))
        elif "markov" in base_spec:
            P = base_spec["markov"]["P"]
            q = base_spec["markov"].get("q")
            if q is None:
                base = Markov.from_matrix(P)
            else:
                base = Markov(tuple(tuple(float(x) for x in row) for row in P),
                              tuple(float(x) for x in q))
        else:
            raise InvalidCocycle("base must contain 'bernoulli' or 'markov'")
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidCocycle(f"malformed cocycle document: {exc}") from exc
    return Cocycle(mats, singular, base, name=str(d.get("name", "")))


def load_cocycle(path) -> Cocycle:
    with open(path, "r", encoding="utf-8") as fh:
        return cocycle_from_dict(json.load(fh))


def save_cocycle(c: Cocycle, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cocycle_to_dict(c), fh, indent=2)
        fh.write("\n")
