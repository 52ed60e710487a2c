"""Synthetic local point systems and the signed Coleman maps.

Model: ``O = (Z/p^n)[y]/(y^2 - c)`` with ``c`` the least non-residue mod p,
``H_m = O[G_m]^rho`` stored as int64 arrays of shape ``(rho, 2, p^m)``.  The
pairing ``<x, z> = sum_sigma sum_jk x_j(sigma) B_jk z_k(sigma)`` is O-bilinear
and invariant under the diagonal G_m action; it is perfect iff ``det B`` is a
unit of O.  Traces are the fibre sums ``project`` and lower levels include
through ``norm_xi``.

``Col(z) = sum_sigma <sigma^-1 z, d> sigma`` unwinds to
``sum_jk B_jk z_j * iota(d_k)`` with ``iota`` the inversion sigma -> sigma^-1,
so every map here is a circulant matrix over Z/p^n.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from . import linalg
from .iwasawa_rings import GroupRingElement, RingParams, omega, omega_tilde
from .report import Report

RETRY_LIMIT = 64


class GenerationExhausted(RuntimeError):
    pass


class LevelMismatch(ValueError):
    pass


# -- O-arithmetic on (..., 2, q) arrays --------------------------------------------

def _o_mul(a: np.ndarray, b: np.ndarray, c: int, N: int) -> np.ndarray:
    """Coefficientwise product in O; the O-axis is the second to last."""
    a0, a1 = a[..., 0, :], a[..., 1, :]
    b0, b1 = b[..., 0, :], b[..., 1, :]
    return np.stack([(a0 * b0 + c * (a1 * b1 % N)) % N, (a0 * b1 + a1 * b0) % N], axis=-2)


def _o_det_unit(B: np.ndarray, c: int, p: int) -> bool:
    """Whether det B (entries (rho, rho, 2)) is a unit in O, via Gaussian elimination mod p."""
    # O/p is the field F_p(sqrt c); represent as pairs and eliminate
    rho = B.shape[0]
    M = [[(int(B[i, j, 0]) % p, int(B[i, j, 1]) % p) for j in range(rho)] for i in range(rho)]

    def mul(x, y):
        return ((x[0] * y[0] + c * x[1] * y[1]) % p, (x[0] * y[1] + x[1] * y[0]) % p)

    def inv(x):
        nm = (x[0] * x[0] - c * x[1] * x[1]) % p
        t = pow(nm, -1, p)
        return (x[0] * t % p, -x[1] * t % p)

    for col in range(rho):
        piv = next((r for r in range(col, rho) if M[r][col] != (0, 0)), None)
        if piv is None:
            return False
        M[col], M[piv] = M[piv], M[col]
        iv = inv(M[col][col])
        for r in range(col + 1, rho):
            f = mul(M[r][col], iv)
            M[r] = [((a[0] - mul(f, b)[0]) % p, (a[1] - mul(f, b)[1]) % p) for a, b in zip(M[r], M[col])]
    return True


def hyperbolic_pairing(rho: int) -> np.ndarray:
    """Block-diagonal [[0, 1], [-1, 0]] blocks (plus a 1 for odd rho)."""
    B = np.zeros((rho, rho, 2), dtype=np.int64)
    for i in range(0, rho - 1, 2):
        B[i, i + 1, 0] = 1
        B[i + 1, i, 0] = -1
    if rho % 2:
        B[rho - 1, rho - 1, 0] = 1
    return B


def _circulant(e: np.ndarray, c: int, N: int) -> np.ndarray:
    """Matrix of z -> e * z on O[G] in (component, index) coordinates."""
    q = e.shape[-1]
    idx = (np.arange(q)[:, None] - np.arange(q)[None, :]) % q
    C0, C1 = e[0][idx], e[1][idx]
    return np.block([[C0, c * C1 % N], [C1, C0]]) % N


def _iota(a: np.ndarray) -> np.ndarray:
    return np.roll(a[..., ::-1], 1, axis=-1)


def section(v: np.ndarray, p: int) -> np.ndarray:
    """A preimage of ``v`` under the fibre sum: ``v`` on the first fibre, zero elsewhere."""
    q = v.shape[-1]
    out = np.zeros(v.shape[:-1] + (p * q,), dtype=np.int64)
    out[..., :q] = v
    return out


def trace(v: np.ndarray, p: int, N: int) -> np.ndarray:
    q = v.shape[-1] // p
    return v.reshape(v.shape[:-1] + (p, q)).sum(axis=-2) % N


def include(v: np.ndarray, p: int) -> np.ndarray:
    reps = (1,) * (v.ndim - 1) + (p,)
    return np.tile(v, reps)


# -- systems -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LocalPointSystem:
    params: RingParams
    rho: int
    pairing: np.ndarray
    points: tuple

    def __post_init__(self):
        if self.params.ext != 2:
            object.__setattr__(self, "params", self.params.with_ext(2))
        B = np.asarray(self.pairing, dtype=np.int64) % self.params.N
        if B.shape != (self.rho, self.rho, 2):
            raise ValueError("pairing must have shape (%d, %d, 2)" % (self.rho, self.rho))
        B.setflags(write=False)
        object.__setattr__(self, "pairing", B)
        pts = []
        for m, d in enumerate(self.points):
            d = np.asarray(d, dtype=np.int64) % self.params.N
            if d.shape != (self.rho, 2, self.params.p**m):
                raise ValueError("d_%d has shape %s" % (m, d.shape))
            d.setflags(write=False)
            pts.append(d)
        object.__setattr__(self, "points", tuple(pts))

    @property
    def M(self) -> int:
        return len(self.points) - 1

    @property
    def c(self) -> int:
        return self.params.nonresidue

    @cached_property
    def is_perfect(self) -> bool:
        return _o_det_unit(self.pairing, self.c, self.params.p)

    def signed_point(self, m: int, sign: int) -> np.ndarray:
        """``d_m^+`` is d_m (m even) or xi(d_{m-1}); ``d_m^-`` is xi(d_{m-1}) (m >= 2 even) or d_m."""
        self._check_level(m)
        p = self.params.p
        if sign > 0:
            return self.points[m] if m % 2 == 0 else include(self.points[m - 1], p)
        if m >= 2 and m % 2 == 0:
            return include(self.points[m - 1], p)
        return self.points[m]

    def _check_level(self, m: int):
        if not 0 <= m <= self.M:
            raise LevelMismatch("level %d outside 0..%d" % (m, self.M))

    def pair(self, x: np.ndarray, z: np.ndarray) -> tuple:
        """``<x, z>`` as an element (a, b) of O."""
        N = self.params.N
        Bz = np.zeros_like(z)
        for j in range(self.rho):
            acc = np.zeros(z.shape[1:], dtype=np.int64)
            for k in range(self.rho):
                acc = (acc + _o_mul(self.pairing[j, k][:, None], z[k], self.c, N)) % N
            Bz[j] = acc
        prod = _o_mul(x, Bz, self.c, N)
        s = prod.sum(axis=(0, 2)) % N
        return int(s[0]), int(s[1])

    def coleman_matrix(self, m: int, sign: int) -> np.ndarray:
        """Matrix of Col^sign_m from flattened H_m to flattened O[G_m]."""
        d = self.signed_point(m, sign)
        N = self.params.N
        di = _iota(d)
        blocks = []
        for j in range(self.rho):
            e = np.zeros((2, d.shape[-1]), dtype=np.int64)
            for k in range(self.rho):
                e = (e + _o_mul(self.pairing[j, k][:, None], di[k], self.c, N)) % N
            blocks.append(_circulant(e, self.c, N))
        return np.hstack(blocks)

    def to_json(self) -> dict:
        return {
            "p": self.params.p,
            "n": self.params.n,
            "M": self.M,
            "rho": self.rho,
            "nonresidue": self.c,
            "pairing": self.pairing.tolist(),
            "points": [d.tolist() for d in self.points],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LocalPointSystem":
        params = RingParams(int(obj["p"]), int(obj["n"]), 2)
        return cls(params, int(obj["rho"]), np.array(obj["pairing"]), tuple(np.array(d) for d in obj["points"]))


def verify_system(sys: LocalPointSystem) -> Report:
    """The three trace/unit conditions plus perfectness of the pairing."""
    p, N = sys.params.p, sys.params.N
    rep = Report("local_point_system", info={"p": p, "n": sys.params.n, "M": sys.M, "rho": sys.rho})
    rep.add(sys.is_perfect, check="pairing_perfect")
    for m in range(2, sys.M + 1):
        lhs = trace(sys.points[m], p, N)
        rhs = -include(sys.points[m - 2], p) % N
        rep.add(np.array_equal(lhs, rhs), check="trace_relation", m=m)
    if sys.M >= 1:
        rep.add(np.array_equal(trace(sys.points[1], p, N), -sys.points[0] % N), check="trace_relation", m=1)
    rep.add(bool((sys.points[0] % p).any()), check="d0_not_divisible_by_p")
    return rep


def generate_system(params: RingParams, M: int, rho: int = 2, seed: int = 0,
                    pairing: Optional[np.ndarray] = None) -> LocalPointSystem:
    """Random system satisfying the trace relations, built from level 0 upward.

    ``d_0`` is drawn until it is not divisible by p; ``d_m`` is a preimage of the
    required trace plus a random element of the trace kernel.
    """
    if rho < 2:
        raise ValueError("rho must be >= 2")
    if M < 0:
        raise ValueError("M must be >= 0")
    params = params.with_ext(2)
    p, N = params.p, params.N
    B = hyperbolic_pairing(rho) if pairing is None else np.asarray(pairing, dtype=np.int64)
    rng = np.random.default_rng(seed)
    for _ in range(RETRY_LIMIT):
        d0 = rng.integers(0, N, size=(rho, 2, 1), dtype=np.int64)
        if (d0 % p).any():
            break
    else:
        raise GenerationExhausted("no admissible d_0 after %d draws" % RETRY_LIMIT)
    pts = [d0]
    for m in range(1, M + 1):
        target = -pts[0] % N if m == 1 else -include(pts[m - 2], p) % N
        w = rng.integers(0, N, size=(rho, 2, p**m), dtype=np.int64)
        kern = (w - section(trace(w, p, N), p)) % N
        pts.append((section(target, p) + kern) % N)
    sys = LocalPointSystem(params, rho, B, tuple(pts))
    rep = verify_system(sys)
    if not rep.passed:
        raise GenerationExhausted("generated system fails %s" % rep.failures())
    return sys


def corrupt_system(sys: LocalPointSystem, m: int, seed: int = 0) -> LocalPointSystem:
    """Negative control: add noise to ``d_m`` that breaks its trace relation."""
    sys._check_level(m)
    if m == 0:
        raise ValueError("corrupt a level m >= 1")
    p, N = sys.params.p, sys.params.N
    rng = np.random.default_rng(seed)
    for _ in range(RETRY_LIMIT):
        noise = rng.integers(0, N, size=sys.points[m].shape, dtype=np.int64)
        if trace(noise, p, N).any():
            break
    else:
        raise GenerationExhausted("could not draw trace-breaking noise")
    pts = list(sys.points)
    pts[m] = (pts[m] + noise) % N
    return LocalPointSystem(sys.params, sys.rho, sys.pairing, tuple(pts))


# -- Coleman maps ------------------------------------------------------------------

def _as_module_element(sys: LocalPointSystem, z, m: int) -> np.ndarray:
    if isinstance(z, (list, tuple)) and z and isinstance(z[0], GroupRingElement):
        if any(x.level != m for x in z):
            raise LevelMismatch("element is not at level %d" % m)
        z = np.stack([x.array for x in z])
    z = np.asarray(z, dtype=np.int64)
    if z.shape != (sys.rho, 2, sys.params.p**m):
        raise LevelMismatch("expected an element of H_%d with shape %s, got %s"
                            % (m, (sys.rho, 2, sys.params.p**m), z.shape))
    return z % sys.params.N


def coleman_map(z, sys: LocalPointSystem, m: int, sign: int) -> GroupRingElement:
    """``sum_sigma <sigma^-1 z, d_m^sign> sigma`` in O[G_m]."""
    z = _as_module_element(sys, z, m)
    val = sys.coleman_matrix(m, sign) @ z.reshape(-1) % sys.params.N
    return GroupRingElement(sys.params, m, val.reshape(2, -1))


def coleman_map_direct(z, sys: LocalPointSystem, m: int, sign: int) -> GroupRingElement:
    """The defining twisted sum evaluated term by term (slow; used as an oracle)."""
    z = _as_module_element(sys, z, m)
    d = sys.signed_point(m, sign)
    q = sys.params.p**m
    out = np.zeros((2, q), dtype=np.int64)
    for s in range(q):
        # sigma^-1 z: coefficient at tau is z(tau + s)
        zs = np.roll(z, -s, axis=-1)
        out[:, s] = sys.pair(zs, d)
    return GroupRingElement(sys.params, m, out)


@dataclass(frozen=True)
class ContainmentResult:
    report: Report
    image_length: int


def factor_module(sys: LocalPointSystem, m: int, factor_sign: int) -> linalg.HowellForm:
    """Howell form of ``w~_m^{factor_sign} * O[G_m]``."""
    params = sys.params
    f = omega_tilde(params, m, factor_sign).reduce(omega(params, m))
    e = GroupRingElement.from_series(f, m).array
    W = _circulant(e, sys.c, params.N)
    return linalg.howell_form(W.T, params.p, params.n)


def check_image_containment(sys: LocalPointSystem, m: int, sign: int, trials: int = 100, seed: int = 0,
                            factor_sign: Optional[int] = None) -> Report:
    """Test ``Col^sign_m(z) in w~_m^{factor_sign} O[G_m]`` on ``trials`` random z.

    ``factor_sign`` defaults to ``sign``.  Under the trace relations the image of
    Col^sign is always contained in the ``-sign`` factor module (see
    :func:`derived_factor_sign`).
    """
    sys._check_level(m)
    fs = sign if factor_sign is None else factor_sign
    params = sys.params
    A = sys.coleman_matrix(m, sign)
    target = factor_module(sys, m, fs)
    rng = np.random.default_rng(seed)
    rep = Report(
        "image_containment",
        info={"m": m, "sign": "+" if sign > 0 else "-", "factor": "+" if fs > 0 else "-", "trials": trials},
    )
    Z = rng.integers(0, params.N, size=(trials, A.shape[1]), dtype=np.int64)
    vals = Z @ A.T % params.N
    first_bad = None
    bad = 0
    for t in range(trials):
        if not target.contains(vals[t]):
            bad += 1
            if first_bad is None:
                first_bad = t
    rep.add(bad == 0, failing_trials=bad, first_failure=first_bad)
    rep.info["image_length"] = linalg.image_length(A, params.p, params.n)
    rep.info["factor_module_length"] = target.length
    rep.info["image_in_factor_module"] = all(target.contains(col) for col in A.T)
    return rep


def derived_factor_sign(sign: int) -> int:
    return -sign


def kernel_probe(sys: LocalPointSystem, m: int, sign: int) -> Report:
    """Kernel of Col^sign_m compared with the orthogonal complement of the d^sign span."""
    sys._check_level(m)
    params = sys.params
    p, n, N = params.p, params.n, params.N
    A = sys.coleman_matrix(m, sign)
    kernel = linalg.nullspace(A, p, n)
    d = sys.signed_point(m, sign)
    q = p**m
    rows = []
    y = np.zeros((2, 1), dtype=np.int64)
    y[1, 0] = 1
    for s in range(q):
        base = np.roll(d, s, axis=-1)
        for w in (base, _o_mul(y, base, sys.c, N)):
            # functional x -> <x, w> as two rows over Z/p^n
            t = np.zeros_like(w)
            for j in range(sys.rho):
                for k in range(sys.rho):
                    t[j] = (t[j] + _o_mul(sys.pairing[j, k][:, None], w[k], sys.c, N)) % N
            r0 = np.stack([t[:, 0, :], sys.c * t[:, 1, :] % N], axis=1)
            r1 = np.stack([t[:, 1, :], t[:, 0, :]], axis=1)
            rows.append(r0.reshape(-1))
            rows.append(r1.reshape(-1))
    complement = linalg.nullspace(np.array(rows), p, n)
    rep = Report("kernel_probe", info={"m": m, "sign": "+" if sign > 0 else "-"})
    rep.add(all(complement.contains(r) for r in kernel.rows), check="kernel_in_complement")
    rep.add(all(kernel.contains(r) for r in complement.rows), check="complement_in_kernel")
    image = linalg.image_length(A, p, n)
    total = n * A.shape[1]
    rep.add(kernel.length + image == total, check="rank_nullity")
    rep.info.update(kernel_length=kernel.length, image_length=image, ambient_length=total)
    self_col = A @ d.reshape(-1) % N
    rep.info["signed_point_in_kernel"] = not self_col.any()
    return rep
