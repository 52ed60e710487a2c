"""Truncated Iwasawa algebras and group rings of cyclic p-groups.

Two realisations of the finite-level ring are kept side by side:

* :class:`TruncatedSeries` -- polynomials over Z/p^n (or the unramified
  quadratic extension) in the variable ``X``, optionally reduced modulo a
  monic distinguished polynomial such as ``omega_m = (1+X)^(p^m) - 1``;
* :class:`GroupRingElement` -- coefficient vectors indexed by powers of the
  generator of the cyclic group ``G_m`` of order ``p^m``.

They are identified through ``gamma -> 1 + X``.  Coefficients live in numpy
``int64`` arrays of shape ``(ext, length)``; component 1 of an ``ext == 2``
scalar is the coefficient of ``y`` with ``y^2 = c`` for the least quadratic
non-residue ``c`` modulo ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from . import linalg


class ParameterMismatch(ValueError):
    """Operands live in different rings."""


class DivisionError(ArithmeticError):
    """An exact division was requested but the divisor does not divide."""


def is_prime(k: int) -> bool:
    if k < 2:
        return False
    if k % 2 == 0:
        return k == 2
    d = 3
    while d * d <= k:
        if k % d == 0:
            return False
        d += 2
    return True


@lru_cache(maxsize=None)
def least_nonresidue(p: int) -> int:
    for c in range(2, p):
        if pow(c, (p - 1) // 2, p) == p - 1:
            return c
    raise ValueError("no quadratic non-residue modulo %d" % p)


@dataclass(frozen=True)
class RingParams:
    """Odd prime ``p``, precision ``n`` and coefficient degree ``ext``."""

    p: int
    n: int = 1
    ext: int = 1

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise ValueError("p must be an odd prime, got %r" % self.p)
        if self.n < 1:
            raise ValueError("n must be >= 1, got %r" % self.n)
        if self.ext not in (1, 2):
            raise ValueError("ext must be 1 or 2, got %r" % self.ext)

    @property
    def N(self) -> int:
        return self.p**self.n

    @property
    def nonresidue(self) -> int:
        return least_nonresidue(self.p)

    def with_ext(self, ext: int) -> "RingParams":
        return RingParams(self.p, self.n, ext)


Scalar = Union[int, tuple]


# -- scalar helpers ---------------------------------------------------------

def scalar_array(params: RingParams, c) -> np.ndarray:
    """Scalar as an ``(ext,)`` array reduced mod p^n."""
    out = np.zeros(params.ext, dtype=np.int64)
    if isinstance(c, (tuple, list, np.ndarray)):
        if len(c) > params.ext:
            raise ParameterMismatch("extension scalar given for ext=1 ring")
        for i, x in enumerate(c):
            out[i] = int(x) % params.N
    else:
        out[0] = int(c) % params.N
    return out


def scalar_value(params: RingParams, arr) -> Scalar:
    if params.ext == 1:
        return int(arr[0])
    return (int(arr[0]), int(arr[1]))


def scalar_mul(params: RingParams, a, b) -> np.ndarray:
    N = params.N
    if params.ext == 1:
        return np.array([a[0] * b[0] % N], dtype=np.int64)
    c = params.nonresidue
    return np.array(
        [(a[0] * b[0] + c * (a[1] * b[1] % N)) % N, (a[0] * b[1] + a[1] * b[0]) % N],
        dtype=np.int64,
    )


def scalar_is_unit(params: RingParams, a) -> bool:
    p = params.p
    if params.ext == 1:
        return a[0] % p != 0
    # norm a0^2 - c a1^2 is a unit iff a is (c non-square mod p)
    return (a[0] * a[0] - params.nonresidue * a[1] * a[1]) % p != 0


# -- polynomial helpers on (ext, L) arrays ------------------------------------

def _strip(c: np.ndarray) -> np.ndarray:
    nz = np.nonzero(c.any(axis=0))[0]
    length = int(nz[-1]) + 1 if nz.size else 1
    return c[:, :length]


def _conv(a: np.ndarray, b: np.ndarray, N: int) -> np.ndarray:
    # exact for int64 while length * N^2 < 2^63
    return np.convolve(a, b) % N


def poly_mul(params: RingParams, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    N = params.N
    if params.ext == 1:
        return _conv(a[0], b[0], N)[None, :]
    c = params.nonresidue
    r0 = (_conv(a[0], b[0], N) + c * _conv(a[1], b[1], N)) % N
    r1 = (_conv(a[0], b[1], N) + _conv(a[1], b[0], N)) % N
    return np.vstack([r0, r1])


def poly_divmod(a: np.ndarray, b: np.ndarray, N: int):
    """Divide each row of ``a`` by the base-ring polynomial ``b`` (unit leading coefficient)."""
    d = len(b) - 1
    lead_inv = pow(int(b[-1]), -1, N)
    rem = a.copy() % N
    L = rem.shape[1]
    if L <= d:
        return np.zeros((a.shape[0], 1), dtype=np.int64), rem
    quo = np.zeros((a.shape[0], L - d), dtype=np.int64)
    bb = np.asarray(b, dtype=np.int64)
    for k in range(L - 1, d - 1, -1):
        c = rem[:, k] * lead_inv % N
        if c.any():
            quo[:, k - d] = c
            rem[:, k - d : k + 1] = (rem[:, k - d : k + 1] - c[:, None] * bb) % N
    return quo, rem[:, :d] if d > 0 else np.zeros((a.shape[0], 1), dtype=np.int64)


def poly_reduce(a: np.ndarray, modulus: np.ndarray, N: int) -> np.ndarray:
    return poly_divmod(a, modulus, N)[1]


@lru_cache(maxsize=None)
def _binomial_row(e: int, N: int) -> tuple:
    out = [1] * (e + 1)
    c = 1
    for j in range(1, e + 1):
        c = c * (e - j + 1) // j
        out[j] = c % N
    return tuple(out)


def one_plus_x_power(e: int, N: int) -> np.ndarray:
    return np.array(_binomial_row(e, N), dtype=np.int64)


# -- truncated series --------------------------------------------------------

class TruncatedSeries:
    """Element of Z/p^n[X] (or its quadratic extension), optionally mod a monic modulus."""

    __slots__ = ("params", "_c", "modulus")

    def __init__(self, params: RingParams, coeffs, modulus: Optional[Sequence[int]] = None):
        self.params = params
        N = params.N
        if isinstance(coeffs, np.ndarray) and coeffs.ndim == 2:
            c = coeffs.astype(np.int64) % N
            if c.shape[0] != params.ext:
                raise ParameterMismatch("coefficient array has %d components" % c.shape[0])
        else:
            coeffs = list(coeffs) or [0]
            c = np.zeros((params.ext, len(coeffs)), dtype=np.int64)
            for i, x in enumerate(coeffs):
                c[:, i] = scalar_array(params, x)
        if modulus is not None:
            mod = tuple(int(x) % N for x in modulus)
            if len(mod) < 2 or mod[-1] != 1:
                raise ValueError("modulus must be monic of degree >= 1")
            c = poly_reduce(c, np.array(mod, dtype=np.int64), N)
            self.modulus = mod
        else:
            self.modulus = None
        c = _strip(c)
        c.setflags(write=False)
        self._c = c

    # construction helpers
    @classmethod
    def zero(cls, params, modulus=None):
        return cls(params, [0], modulus)

    @classmethod
    def one(cls, params, modulus=None):
        return cls(params, [1], modulus)

    @classmethod
    def X(cls, params, modulus=None):
        return cls(params, [0, 1], modulus)

    @property
    def array(self) -> np.ndarray:
        return self._c

    @property
    def coeffs(self) -> list:
        return [scalar_value(self.params, self._c[:, i]) for i in range(self._c.shape[1])]

    @property
    def degree(self) -> int:
        """Degree, with -1 for zero."""
        return -1 if self.is_zero() else self._c.shape[1] - 1

    def coefficient(self, k: int) -> Scalar:
        if k >= self._c.shape[1]:
            return scalar_value(self.params, np.zeros(self.params.ext, dtype=np.int64))
        return scalar_value(self.params, self._c[:, k])

    def padded(self, length: int) -> np.ndarray:
        """Coefficient array zero-padded (or truncated) to ``length`` columns."""
        out = np.zeros((self.params.ext, length), dtype=np.int64)
        k = min(length, self._c.shape[1])
        out[:, :k] = self._c[:, :k]
        return out

    def is_zero(self) -> bool:
        return not self._c.any()

    def _check(self, other: "TruncatedSeries"):
        if self.params != other.params:
            raise ParameterMismatch("%r vs %r" % (self.params, other.params))
        if self.modulus is not None and other.modulus is not None and self.modulus != other.modulus:
            raise ParameterMismatch("series reduced modulo different polynomials")
        return self.modulus if self.modulus is not None else other.modulus

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            return other
        if isinstance(other, (int, np.integer, tuple)):
            return TruncatedSeries(self.params, [other], self.modulus)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        mod = self._check(other)
        L = max(self._c.shape[1], other._c.shape[1])
        return TruncatedSeries(self.params, self.padded(L) + other.padded(L), mod)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.params, -self._c, self.modulus)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        mod = self._check(other)
        return TruncatedSeries(self.params, poly_mul(self.params, self._c, other._c), mod)

    __rmul__ = __mul__

    def scale(self, c: Scalar) -> "TruncatedSeries":
        s = scalar_array(self.params, c)
        if self.params.ext == 1:
            return TruncatedSeries(self.params, self._c * s[0], self.modulus)
        return self * TruncatedSeries(self.params, [tuple(s)], self.modulus)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.params == other.params
            and self.modulus == other.modulus
            and self._c.shape == other._c.shape
            and bool((self._c == other._c).all())
        )

    def __hash__(self):
        return hash((self.params, self.modulus, self._c.tobytes()))

    def __repr__(self):
        return "TruncatedSeries(%s%s)" % (
            format_poly(self),
            "" if self.modulus is None else ", mod deg %d" % (len(self.modulus) - 1),
        )

    def reduce(self, modulus: Sequence[int]) -> "TruncatedSeries":
        """Image in Z/p^n[X]/(modulus); ``self.modulus`` must be a multiple of it."""
        return TruncatedSeries(self.params, self._c, modulus)

    def lift(self) -> "TruncatedSeries":
        """Forget the modulus (canonical representative of degree < deg modulus)."""
        return TruncatedSeries(self.params, self._c)

    def eval_trivial(self) -> Scalar:
        return self.coefficient(0)

    def exact_divide(self, other: "TruncatedSeries") -> "TruncatedSeries":
        """``q`` with ``q * other == self``; raises :class:`DivisionError` otherwise.

        Without a modulus this is long division by a divisor with unit leading
        coefficient.  In a quotient ring it is a linear solve over Z/p^n and
        the returned ``q`` is the solver's canonical choice.
        """
        mod = self._check(other)
        N = self.params.N
        if mod is None:
            if other.is_zero():
                raise DivisionError("division by zero")
            b = other._c
            if self.params.ext == 2 and b[1].any():
                return _solve_divide(self, other, None)
            lead = int(b[0, -1])
            if lead % self.params.p == 0:
                raise DivisionError("divisor has non-unit leading coefficient")
            q, r = poly_divmod(self._c, b[0], N)
            if r.any():
                raise DivisionError("%r does not divide %r" % (other, self))
            return TruncatedSeries(self.params, q)
        return _solve_divide(self, other, mod)

    def to_json(self) -> dict:
        return {
            "kind": "series",
            "p": self.params.p,
            "n": self.params.n,
            "ext": self.params.ext,
            "coeffs": [scalar_json(self.params, x) for x in self.coeffs],
            "modulus": None if self.modulus is None else [str(x) for x in self.modulus],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TruncatedSeries":
        params = RingParams(int(obj["p"]), int(obj["n"]), int(obj.get("ext", 1)))
        coeffs = [scalar_from_json(x) for x in obj["coeffs"]]
        mod = obj.get("modulus")
        return cls(params, coeffs, None if mod is None else [int(x) for x in mod])


def base_mult_matrix(b: np.ndarray, length: int, modulus, N: int) -> np.ndarray:
    """Matrix of ``x -> b*x`` on base-ring polynomials of degree < ``length``.

    Column ``j`` is ``X^j * b``; with a monic ``modulus`` it is reduced, and
    successive columns follow from one shift-and-subtract each.
    """
    b = np.asarray(b, dtype=np.int64) % N
    if modulus is None:
        out = np.zeros((length + len(b) - 1, length), dtype=np.int64)
        for j in range(length):
            out[j : j + len(b), j] = b
        return out
    mod = np.asarray(modulus, dtype=np.int64)
    d = len(mod) - 1
    col = poly_reduce(b[None, :], mod, N)[0]
    cur = np.zeros(d, dtype=np.int64)
    cur[: len(col)] = col[:d]
    out = np.zeros((d, length), dtype=np.int64)
    for j in range(length):
        out[:, j] = cur
        top = cur[-1]
        cur = np.concatenate([[0], cur[:-1]])
        if top:
            cur = (cur - top * mod[:-1]) % N
    return out


def mult_matrix(b: "TruncatedSeries", length: int, modulus=None) -> np.ndarray:
    """Z/p^n-matrix of ``x -> b*x``; rows and columns are component-major."""
    params = b.params
    N = params.N
    M0 = base_mult_matrix(b.array[0], length, modulus, N)
    if params.ext == 1:
        return M0
    M1 = base_mult_matrix(b.array[1], length, modulus, N)
    c = params.nonresidue
    return np.block([[M0, c * M1 % N], [M1, M0]])


def _solve_divide(a: TruncatedSeries, b: TruncatedSeries, modulus) -> TruncatedSeries:
    params = a.params
    if modulus is not None:
        length = len(modulus) - 1
    else:
        length = max(a.array.shape[1] - b.array.shape[1] + 1, 1)
    A = mult_matrix(b, length, modulus)
    rows = A.shape[0] // params.ext
    if a.array.shape[1] > rows:
        raise DivisionError("%r does not divide %r" % (b, a))
    rhs = a.padded(rows).reshape(-1)
    try:
        x = linalg.solve(A, rhs, params.p, params.n)
    except linalg.InconsistentSystem as exc:
        raise DivisionError("%r does not divide %r" % (b, a)) from exc
    return TruncatedSeries(params, x.reshape(params.ext, length), modulus)


def scalar_json(params: RingParams, x: Scalar):
    if params.ext == 1:
        return str(int(x))
    return [str(int(x[0])), str(int(x[1]))]


def scalar_from_json(x) -> Scalar:
    if isinstance(x, list):
        return (int(x[0]), int(x[1]))
    return int(x)


def format_poly(s: TruncatedSeries) -> str:
    terms = []
    for k, c in enumerate(s.coeffs):
        if c == 0 or c == (0, 0):
            continue
        cs = str(c) if s.params.ext == 1 else "(%d+%dy)" % c
        if k == 0:
            terms.append(cs)
        else:
            mono = "X" if k == 1 else "X^%d" % k
            terms.append(mono if cs == "1" else "%s*%s" % (cs, mono))
    return " + ".join(terms) if terms else "0"


# -- group rings ----------------------------------------------------------------

@lru_cache(maxsize=32)
def _binomial_matrices(p: int, n: int, m: int):
    """(B, B_inv) with series = coeffs @ B and coeffs = series @ B_inv."""
    N = p**n
    size = p**m
    B = np.zeros((size, size), dtype=np.int64)
    B[0, 0] = 1
    for i in range(1, size):
        B[i, 0] = 1
        B[i, 1:] = (B[i - 1, 1:] + B[i - 1, :-1]) % N
    idx = np.arange(size)
    sign = np.where((idx[:, None] + idx[None, :]) % 2 == 0, 1, -1)
    B_inv = (B * sign) % N
    B.setflags(write=False)
    B_inv.setflags(write=False)
    return B, B_inv


class GroupRingElement:
    """Element of (Z/p^n)[G_m] (or the extension), index i <-> gamma^i."""

    __slots__ = ("params", "level", "_c")

    def __init__(self, params: RingParams, level: int, coeffs):
        if level < 0:
            raise ValueError("level must be >= 0")
        self.params = params
        self.level = level
        size = params.p**level
        N = params.N
        if isinstance(coeffs, np.ndarray) and coeffs.ndim == 2:
            c = coeffs.astype(np.int64) % N
        else:
            coeffs = list(coeffs)
            c = np.zeros((params.ext, len(coeffs)), dtype=np.int64)
            for i, x in enumerate(coeffs):
                c[:, i] = scalar_array(params, x)
        if c.shape != (params.ext, size):
            raise ValueError("level %d needs %d coefficients, got shape %s" % (level, size, c.shape))
        c.setflags(write=False)
        self._c = c

    @classmethod
    def zero(cls, params, level):
        return cls(params, level, np.zeros((params.ext, params.p**level), dtype=np.int64))

    @classmethod
    def one(cls, params, level):
        c = np.zeros((params.ext, params.p**level), dtype=np.int64)
        c[0, 0] = 1
        return cls(params, level, c)

    @classmethod
    def group_element(cls, params, level, k: int):
        c = np.zeros((params.ext, params.p**level), dtype=np.int64)
        c[0, k % params.p**level] = 1
        return cls(params, level, c)

    @property
    def array(self) -> np.ndarray:
        return self._c

    @property
    def coeffs(self) -> list:
        return [scalar_value(self.params, self._c[:, i]) for i in range(self._c.shape[1])]

    def is_zero(self) -> bool:
        return not self._c.any()

    def _check(self, other):
        if not isinstance(other, GroupRingElement):
            raise TypeError("expected GroupRingElement, got %r" % type(other))
        if self.params != other.params or self.level != other.level:
            raise ParameterMismatch("group rings differ: %r/%d vs %r/%d" % (
                self.params, self.level, other.params, other.level))

    def __add__(self, other):
        self._check(other)
        return GroupRingElement(self.params, self.level, self._c + other._c)

    def __neg__(self):
        return GroupRingElement(self.params, self.level, -self._c)

    def __sub__(self, other):
        self._check(other)
        return GroupRingElement(self.params, self.level, self._c - other._c)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer, tuple)):
            return self.scale(other)
        self._check(other)
        size = self.params.p**self.level
        full = poly_mul(self.params, self._c, other._c)
        folded = np.zeros((self.params.ext, size), dtype=np.int64)
        for start in range(0, full.shape[1], size):
            chunk = full[:, start : start + size]
            folded[:, : chunk.shape[1]] += chunk
        return GroupRingElement(self.params, self.level, folded)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c: Scalar) -> "GroupRingElement":
        s = scalar_array(self.params, c)
        if self.params.ext == 1:
            return GroupRingElement(self.params, self.level, self._c * s[0])
        other = GroupRingElement.one(self.params, self.level).array * 0
        other[:, 0] = s
        return self * GroupRingElement(self.params, self.level, other)

    def __eq__(self, other):
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return (
            self.params == other.params
            and self.level == other.level
            and bool((self._c == other._c).all())
        )

    def __hash__(self):
        return hash((self.params, self.level, self._c.tobytes()))

    def __repr__(self):
        return "GroupRingElement(level=%d, %s)" % (self.level, self.coeffs)

    def involution(self) -> "GroupRingElement":
        """Image under sigma -> sigma^(-1)."""
        idx = (-np.arange(self._c.shape[1])) % self._c.shape[1]
        return GroupRingElement(self.params, self.level, self._c[:, idx])

    def act(self, k: int) -> "GroupRingElement":
        """Multiplication by gamma^k (a cyclic shift)."""
        return GroupRingElement(self.params, self.level, np.roll(self._c, k, axis=1))

    def eval_trivial(self) -> Scalar:
        return scalar_value(self.params, self._c.sum(axis=1) % self.params.N)

    def to_series(self) -> TruncatedSeries:
        B, _ = _binomial_matrices(self.params.p, self.params.n, self.level)
        s = (self._c @ B) % self.params.N
        return TruncatedSeries(self.params, s, omega(self.params, self.level))

    @classmethod
    def from_series(cls, s: TruncatedSeries, level: int) -> "GroupRingElement":
        params = s.params
        size = params.p**level
        reduced = s.reduce(omega(params, level)) if s.modulus != omega(params, level) else s
        _, B_inv = _binomial_matrices(params.p, params.n, level)
        c = (reduced.padded(size) @ B_inv) % params.N
        return cls(params, level, c)

    def to_json(self) -> dict:
        return {
            "kind": "group_ring",
            "p": self.params.p,
            "n": self.params.n,
            "ext": self.params.ext,
            "level": self.level,
            "coeffs": [scalar_json(self.params, x) for x in self.coeffs],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GroupRingElement":
        params = RingParams(int(obj["p"]), int(obj["n"]), int(obj.get("ext", 1)))
        return cls(params, int(obj["level"]), [scalar_from_json(x) for x in obj["coeffs"]])


def element_from_json(obj: dict):
    if obj.get("kind") == "series" or "level" not in obj:
        return TruncatedSeries.from_json(obj)
    return GroupRingElement.from_json(obj)


# -- transition maps ---------------------------------------------------------------

def project(x: GroupRingElement) -> GroupRingElement:
    """The natural map Z/p^n[G_{m+1}] -> Z/p^n[G_m]: sum over each fibre."""
    if x.level < 1:
        raise ValueError("cannot project from level 0")
    p = x.params.p
    size = p ** (x.level - 1)
    c = x.array.reshape(x.params.ext, p, size).sum(axis=1)
    return GroupRingElement(x.params, x.level - 1, c)


def norm_xi(x: GroupRingElement) -> GroupRingElement:
    """sigma -> sum of its p preimages, Z/p^n[G_{m-1}] -> Z/p^n[G_m]."""
    return GroupRingElement(x.params, x.level + 1, np.tile(x.array, (1, x.params.p)))


def eval_trivial(x) -> Scalar:
    """Value at the trivial character: coefficient sum, or constant term of a series."""
    return x.eval_trivial()


# -- cyclotomic factors --------------------------------------------------------------

@lru_cache(maxsize=None)
def _omega_coeffs(p: int, n: int, m: int) -> tuple:
    c = list(_binomial_row(p**m, p**n))
    c[0] = (c[0] - 1) % p**n
    return tuple(c)


def omega(params: RingParams, m: int) -> tuple:
    """Coefficients (mod p^n) of omega_m = (1+X)^(p^m) - 1, as a modulus."""
    return _omega_coeffs(params.p, params.n, m)


@lru_cache(maxsize=None)
def _phi_coeffs(p: int, n: int, m: int) -> tuple:
    N = p**n
    step = p ** (m - 1)
    out = np.zeros((p - 1) * step + 1, dtype=np.int64)
    for k in range(p):
        row = one_plus_x_power(k * step, N)
        out[: len(row)] += row
    return tuple(int(x) for x in out % N)


def phi_poly(params: RingParams, m: int) -> TruncatedSeries:
    """Phi_{p^m}(1+X) = ((1+X)^(p^m) - 1) / ((1+X)^(p^(m-1)) - 1)."""
    if m < 1:
        raise ValueError("Phi_m is defined for m >= 1 (omega_0 = X is in omega_factors)")
    return TruncatedSeries(params, list(_phi_coeffs(params.p, params.n, m)))


@dataclass(frozen=True)
class CyclotomicFactors:
    m: int
    phi: Optional[TruncatedSeries]
    omega: TruncatedSeries
    omega_plus: TruncatedSeries
    omega_minus: TruncatedSeries
    omega_tilde_plus: TruncatedSeries
    omega_tilde_minus: TruncatedSeries

    def to_json(self) -> dict:
        names = ("omega", "omega_plus", "omega_minus", "omega_tilde_plus", "omega_tilde_minus")
        out = {"m": self.m, "phi": None if self.phi is None else self.phi.to_json()}
        out.update({k: getattr(self, k).to_json() for k in names})
        return out


def omega_tilde(params: RingParams, m: int, sign: int) -> TruncatedSeries:
    """Product of Phi_r(1+X) over 1 <= r <= m with r even (sign=+1) or odd (sign=-1)."""
    out = TruncatedSeries.one(params)
    first = 2 if sign > 0 else 1
    for r in range(first, m + 1, 2):
        out = out * phi_poly(params, r)
    return out


@lru_cache(maxsize=256)
def omega_factors(params: RingParams, m: int) -> CyclotomicFactors:
    if m < 0:
        raise ValueError("m must be >= 0")
    om = TruncatedSeries(params, list(omega(params, m)))
    tp = omega_tilde(params, m, +1)
    tm = omega_tilde(params, m, -1)
    return CyclotomicFactors(
        m=m,
        phi=phi_poly(params, m) if m >= 1 else None,
        omega=om,
        omega_plus=om.exact_divide(tm),
        omega_minus=om.exact_divide(tp),
        omega_tilde_plus=tp,
        omega_tilde_minus=tm,
    )


def omega_signed(params: RingParams, m: int, sign: int) -> tuple:
    """Coefficients of omega_m^+ (sign=+1) or omega_m^- (sign=-1), as a modulus."""
    f = omega_factors(params, m)
    poly = f.omega_plus if sign > 0 else f.omega_minus
    return tuple(int(x) for x in poly.padded(poly.degree + 1)[0])
