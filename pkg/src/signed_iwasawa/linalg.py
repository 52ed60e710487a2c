"""Linear algebra over Z/p^n via Howell normal form.

Z/p^n is a local ring but not a field, so plain Gaussian elimination loses
solutions.  Every routine here goes through :func:`kernels.howell_eliminate`,
which picks minimal-valuation pivots, normalises them to ``p^v`` and appends
the saturation row ``p^(n-v) * row`` for every non-unit pivot.  The result
has the Howell property: for every ``k``, the rows with zeros in the first
``k`` columns generate the submodule of row-space vectors with that shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class InconsistentSystem(ValueError):
    """``A x = b`` has no solution over Z/p^n."""


@dataclass(frozen=True)
class HowellForm:
    """Reduced rows of a submodule of (Z/p^n)^c, one row per pivot."""

    rows: np.ndarray
    pivots: tuple
    p: int
    n: int

    @property
    def length(self) -> int:
        """log_p of the module's cardinality."""
        return sum(self.n - v for _, v in self.pivots)

    def contains(self, vec) -> bool:
        N = self.p**self.n
        w = np.asarray(vec, dtype=np.int64) % N
        for row, (j, v) in zip(self.rows, self.pivots):
            x = int(w[j])
            if x == 0:
                continue
            pv = self.p**v
            if x % pv:
                return False
            w = (w - (x // pv) * row) % N
        return not w.any()

    def key(self) -> tuple:
        """Hashable canonical form; equal iff the modules are equal."""
        return tuple(tuple(int(x) for x in row) for row in self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HowellForm):
            return NotImplemented
        return (self.p, self.n) == (other.p, other.n) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash((self.p, self.n, self.key()))


def _workspace(A: np.ndarray, extra_rows: int) -> np.ndarray:
    rows, cols = A.shape
    T = np.zeros((rows + extra_rows + 1, cols), dtype=np.int64)
    T[:rows] = A
    return T


def howell_form(A, p: int, n: int) -> HowellForm:
    """Howell normal form of the row space of ``A``."""
    N = p**n
    A = np.atleast_2d(np.asarray(A, dtype=np.int64)) % N
    rows, cols = A.shape
    if rows == 0 or cols == 0:
        return HowellForm(np.zeros((0, cols), dtype=np.int64), (), p, n)
    T = _workspace(A, cols)
    _, pivots = kernels.howell_eliminate(T, rows, cols, p, n)
    k = len(pivots)
    out = T[:k].copy()
    out.setflags(write=False)
    return HowellForm(out, tuple(pivots), p, n)


def solve(A, B, p: int, n: int) -> np.ndarray:
    """One solution ``X`` of ``A X = B`` over Z/p^n.

    ``B`` may be a vector or a matrix of right-hand sides.  Free variables are
    set to zero and each pivot variable is taken in ``[0, p^(n-v))``, so the
    answer is a deterministic function of the Howell form of ``[A | B]``.
    """
    N = p**n
    A = np.atleast_2d(np.asarray(A, dtype=np.int64)) % N
    B = np.asarray(B, dtype=np.int64) % N
    vector = B.ndim == 1
    if vector:
        B = B[:, None]
    rows, cols = A.shape
    nrhs = B.shape[1]
    T = _workspace(np.hstack([A, B]), cols)
    used, pivots = kernels.howell_eliminate(T, rows, cols, p, n)
    k = len(pivots)
    if T[k:used, cols:].any():
        raise InconsistentSystem("no solution modulo %d" % N)
    X = np.zeros((cols, nrhs), dtype=np.int64)
    for i in range(k - 1, -1, -1):
        j, v = pivots[i]
        rhs = (T[i, cols:] - T[i, :cols] @ X) % N
        pv = p**v
        if (rhs % pv).any():
            raise InconsistentSystem("pivot %d does not divide the residual" % j)
        X[j] = rhs // pv
    return X[:, 0] if vector else X


def nullspace(A, p: int, n: int) -> HowellForm:
    """Howell form of ``{x : A x = 0}``, computed from ``[A^T | I]``."""
    N = p**n
    A = np.atleast_2d(np.asarray(A, dtype=np.int64)) % N
    rows, cols = A.shape
    aug = np.hstack([A.T, np.eye(cols, dtype=np.int64)])
    T = _workspace(aug, rows + cols)
    _, pivots = kernels.howell_eliminate(T, cols, rows + cols, p, n)
    keep = [i for i, (j, _) in enumerate(pivots) if j >= rows]
    out = T[keep, rows:].copy()
    out.setflags(write=False)
    piv = tuple((j - rows, v) for j, v in (pivots[i] for i in keep))
    return HowellForm(out, piv, p, n)


def image_length(A, p: int, n: int) -> int:
    """log_p of the size of the column space of ``A``."""
    return howell_form(np.asarray(A).T, p, n).length
