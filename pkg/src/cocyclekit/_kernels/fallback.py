"""Numpy implementation of the trajectory kernel.

Both this module and the compiled extension consume the same splitmix64
counter streams: trial r draws u_t = mix64(state0(seed, r) + t * GAMMA) with
t = 0 reserved for the start draw and t = 1..n for the letters.  Letter
sequences are therefore bit-identical across backends; the accumulated
log-norms agree to the last few ulps (SIMD log vs libm log).
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_PHI2 = np.uint64(0xC2B2AE3D27D4EB4F)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 2.0 ** -53


def _mix64(z: np.ndarray) -> np.ndarray:
    # uint64 wraparound is intended throughout
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_states(seed: int, trials: int, offset: int = 0) -> np.ndarray:
    """Initial counter per trial stream."""
    r = np.arange(offset, offset + trials, dtype=np.uint64)
    base = np.uint64((int(seed) * _GAMMA) & _MASK)
    return _mix64(base + (r + np.uint64(1)) * _PHI2)


def uniform_at(states: np.ndarray, t: int) -> np.ndarray:
    """t-th uniform draw of each stream, in [0, 1)."""
    z = _mix64(states + np.uint64((int(t) * _GAMMA) & _MASK))
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


def pick_letters(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Smallest index i with u < cdf[i] (0-based), clamped to the alphabet."""
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def run_paths(mats: np.ndarray, cdf0: np.ndarray, cdfP: np.ndarray,
              bernoulli: bool, start: np.ndarray, seed: int,
              n: int, trials: int) -> np.ndarray:
    """Accumulated log-norms sum_t log||A_{w_t} v_{t-1}|| per trial.

    The direction is renormalized every step; trials whose product hits the
    zero matrix exactly come back as -inf.
    """
    states = stream_states(seed, trials)
    a = np.ascontiguousarray(mats[:, 0, 0])
    b = np.ascontiguousarray(mats[:, 0, 1])
    c = np.ascontiguousarray(mats[:, 1, 0])
    d = np.ascontiguousarray(mats[:, 1, 1])
    x = start[:, 0].astype(float).copy()
    y = start[:, 1].astype(float).copy()
    acc = np.zeros(trials)
    dead = np.zeros(trials, dtype=bool)
    prev = np.zeros(trials, dtype=np.intp)
    k = len(cdf0)
    for t in range(1, n + 1):
        u = uniform_at(states, t)
        if bernoulli or t == 1:
            letters = pick_letters(cdf0, u)
        else:
            cols = cdfP[:, prev]                       # (k, trials)
            mask = u[None, :] < cols
            letters = np.where(mask.any(axis=0), mask.argmax(axis=0), k - 1)
        nx = a[letters] * x + b[letters] * y
        ny = c[letters] * x + d[letters] * y
        nrm = np.sqrt(nx * nx + ny * ny)
        dead |= nrm == 0.0
        if dead.any():
            live = ~dead
            safe = np.where(nrm == 0.0, 1.0, nrm)
            acc += np.where(live, np.log(safe), 0.0)
            x = np.where(live, nx / safe, 1.0)
            y = np.where(live, ny / safe, 0.0)
        else:
            acc += np.log(nrm)
            x = nx / nrm
            y = ny / nrm
        prev = letters
    acc[dead] = -np.inf
    return acc


def draw_letters(cdf0: np.ndarray, cdfP: np.ndarray, bernoulli: bool,
                 seed: int, trial: int, n: int) -> np.ndarray:
    """The exact 1-based letter sequence the kernels use for one trial."""
    states = stream_states(seed, 1, offset=trial)
    letters = np.empty(n, dtype=np.intp)
    prev = 0
    k = len(cdf0)
    for t in range(1, n + 1):
        u = float(uniform_at(states, t)[0])
        cdf = cdf0 if (bernoulli or t == 1) else cdfP[:, prev]
        j = min(int(np.searchsorted(cdf, u, side="right")), k - 1)
        letters[t - 1] = j
        prev = j
    return letters + 1


def start_draws(seed: int, trials: int) -> np.ndarray:
    """Reserved draw t=0 of each stream (used to sample start directions)."""
    return uniform_at(stream_states(seed, trials), 0)
