"""Numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` operation for operation, so both backends
produce identical arrays.  Used when the extension is not built or when
``SIGNED_IWASAWA_PURE_PYTHON=1``.
"""

from __future__ import annotations

import numpy as np


def valuation_table(p: int, n: int) -> np.ndarray:
    """``table[x]`` is ord_p(x) for 0 < x < p**n, and ``n`` at 0."""
    N = p**n
    table = np.zeros(N, dtype=np.int64)
    table[0] = n
    step = p
    while step < N:
        table[step::step] += 1
        step *= p
    return table


def howell_eliminate(T: np.ndarray, used: int, npiv: int, p: int, n: int):
    """Reduce ``T[:used]`` in place to Howell form over Z/p^n.

    Pivots are searched only in columns ``< npiv``; later columns are carried
    along (right-hand sides, identity blocks).  ``T`` must have at least
    ``used + npiv`` rows of capacity because every non-unit pivot appends its
    saturation row ``p^(n-v) * row``.

    Returns ``(used, pivots)`` where ``pivots`` lists ``(col, v)`` for pivot
    rows ``0 .. len(pivots)-1`` in order.
    """
    N = p**n
    vals = valuation_table(p, n)
    pows = [p**k for k in range(n + 1)]
    pivots = []
    r = 0
    for j in range(npiv):
        if r >= used:
            break
        col = T[r:used, j]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        cv = vals[col[nz]]
        best = int(nz[int(np.argmin(cv))]) + r
        v = int(vals[T[best, j]])
        if best != r:
            T[[r, best]] = T[[best, r]]
        unit = int(T[r, j]) // pows[v]
        if unit != 1:
            T[r] = T[r] * pow(unit, -1, N) % N
        pv = pows[v]
        colj = T[:used, j]
        others = np.nonzero(colj)[0]
        others = others[others != r]
        if others.size:
            q = colj[others] // pv
            T[others] = (T[others] - q[:, None] * T[r]) % N
        if v > 0:
            T[used] = T[r] * pows[n - v] % N
            used += 1
        pivots.append((j, v))
        r += 1
    return used, pivots


def legendre_table(ell: int) -> np.ndarray:
    """``chi[x]`` = Legendre symbol (x | ell) for odd prime ``ell``."""
    chi = -np.ones(ell, dtype=np.int64)
    y = np.arange(ell, dtype=np.int64)
    chi[(y * y) % ell] = 1
    chi[0] = 0
    return chi


def count_points_odd(a1: int, a2: int, a3: int, a4: int, a6: int, ell: int) -> int:
    """#E(F_ell) for odd ``ell`` by summing Legendre symbols of the y-discriminant."""
    x = np.arange(ell, dtype=np.int64)
    lin = (a1 % ell * x + a3 % ell) % ell
    cub = (((x + a2 % ell) * x % ell + a4 % ell) * x % ell + a6 % ell) % ell
    disc = (lin * lin + 4 * cub) % ell
    chi = legendre_table(ell)
    return int(ell + 1 + chi[disc].sum())
