# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; semantics match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef int64_t _inv_mod(int64_t a, int64_t m):
    cdef int64_t t = 0, newt = 1, r = m, newr = a % m, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += m
    return t


def howell_eliminate(int64_t[:, ::1] T, Py_ssize_t used, Py_ssize_t npiv, int64_t p, int n):
    cdef int64_t N = 1
    cdef int k
    for k in range(n):
        N *= p
    cdef int64_t[::1] vals = np.zeros(N, dtype=np.int64)
    cdef int64_t step = p, x
    cdef Py_ssize_t i, j, c, r = 0, best, ncols = T.shape[1]
    vals[0] = n
    while step < N:
        x = step
        while x < N:
            vals[x] += 1
            x += step
        step *= p
    cdef int64_t pows[64]
    pows[0] = 1
    for k in range(1, n + 1):
        pows[k] = pows[k - 1] * p
    cdef int bestv, v
    cdef int64_t unit, uinv, pv, q, t
    pivots = []
    for j in range(npiv):
        if r >= used:
            break
        best = -1
        bestv = n
        for i in range(r, used):
            x = T[i, j]
            if x != 0 and vals[x] < bestv:
                bestv = <int>vals[x]
                best = i
                if bestv == 0:
                    break
        if best < 0:
            continue
        v = bestv
        if best != r:
            for c in range(ncols):
                t = T[r, c]
                T[r, c] = T[best, c]
                T[best, c] = t
        unit = T[r, j] // pows[v]
        if unit != 1:
            uinv = _inv_mod(unit, N)
            for c in range(ncols):
                T[r, c] = (T[r, c] * uinv) % N
        pv = pows[v]
        for i in range(used):
            if i == r:
                continue
            x = T[i, j]
            if x == 0:
                continue
            q = x // pv
            for c in range(ncols):
                t = (T[i, c] - q * T[r, c]) % N
                if t < 0:
                    t += N
                T[i, c] = t
        if v > 0:
            for c in range(ncols):
                T[used, c] = (T[r, c] * pows[n - v]) % N
            used += 1
        pivots.append((j, v))
        r += 1
    return used, pivots


def count_points_odd(int64_t a1, int64_t a2, int64_t a3, int64_t a4, int64_t a6, int64_t ell):
    cdef int64_t[::1] chi = np.full(ell, -1, dtype=np.int64)
    cdef int64_t y, x, lin, cub, disc, total = 0
    for y in range(ell):
        chi[(y * y) % ell] = 1
    chi[0] = 0
    a1 %= ell; a2 %= ell; a3 %= ell; a4 %= ell; a6 %= ell
    if a1 < 0: a1 += ell
    if a2 < 0: a2 += ell
    if a3 < 0: a3 += ell
    if a4 < 0: a4 += ell
    if a6 < 0: a6 += ell
    for x in range(ell):
        lin = (a1 * x + a3) % ell
        cub = ((((x + a2) * x) % ell + a4) * x % ell + a6) % ell
        disc = (lin * lin + 4 * cub) % ell
        total += chi[disc]
    return int(ell + 1 + total)
