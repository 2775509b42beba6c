# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernel; mirrors fallback.run_paths stream-for-stream."""

from libc.math cimport INFINITY, log, sqrt
from libc.stdint cimport uint64_t

import numpy as np

BACKEND = "cython"

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t PHI2 = 0xC2B2AE3D27D4EB4FULL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t M2 = 0x94D049BB133111EBULL
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline double u01(uint64_t state, uint64_t t) nogil:
    return <double>(mix64(state + t * GAMMA) >> 11) * INV53


def run_paths(mats, cdf0, cdfP, bint bernoulli, start,
              seed, long long n, long long trials):
    cdef double[:, :, ::1] m = np.ascontiguousarray(mats, dtype=np.float64)
    cdef double[::1] c0 = np.ascontiguousarray(cdf0, dtype=np.float64)
    cdef double[:, ::1] cP = np.ascontiguousarray(cdfP, dtype=np.float64)
    cdef double[:, ::1] st = np.ascontiguousarray(start, dtype=np.float64)
    cdef uint64_t useed = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(trials, dtype=np.float64)
    cdef double[::1] acc = out
    cdef long long r, t
    cdef int k = c0.shape[0]
    cdef int j, prev
    cdef uint64_t state
    cdef double u, x, y, nx, ny, nrm, total
    with nogil:
        for r in range(trials):
            state = mix64(useed * GAMMA + (<uint64_t>r + 1) * PHI2)
            x = st[r, 0]
            y = st[r, 1]
            total = 0.0
            prev = 0
            for t in range(1, n + 1):
                u = u01(state, <uint64_t>t)
                j = 0
                if bernoulli or t == 1:
                    while j < k - 1 and u >= c0[j]:
                        j += 1
                else:
                    while j < k - 1 and u >= cP[j, prev]:
                        j += 1
                nx = m[j, 0, 0] * x + m[j, 0, 1] * y
                ny = m[j, 1, 0] * x + m[j, 1, 1] * y
                nrm = sqrt(nx * nx + ny * ny)
                if nrm == 0.0:
                    total = -INFINITY
                    break
                total += log(nrm)
                x = nx / nrm
                y = ny / nrm
                prev = j
            acc[r] = total
    return out
