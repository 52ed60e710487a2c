"""Plus/minus and sharp/flat decompositions of norm-compatible families.

A :class:`ThetaFamily` is a tower ``lambda_0, ..., lambda_M`` with
``lambda_m`` a vector of ``r`` elements of the level-``m`` group ring.  The
families of interest satisfy

    project(lambda_{m+1}) = a_p * lambda_m - norm_xi(lambda_{m-1}),  1 <= m < M.

For ``a_p = 0`` the tower factors through the signed cyclotomic polynomials
(``pm_extract`` / ``pm_synthesize``).  For general ``a_p`` it is cut out by
products of the companion matrices ``[[a_p, 1], [-Phi_m, 0]]``
(``sprung_decompose`` / ``sprung_synthesize``); at finite depth the solution
is a coset, returned as a canonical representative plus a kernel basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import linalg
from .iwasawa_rings import (
    GroupRingElement,
    RingParams,
    TruncatedSeries,
    mult_matrix,
    norm_xi,
    omega,
    omega_factors,
    omega_signed,
    phi_poly,
    project,
)
from .report import Report


class NotSignedFamily(ValueError):
    """The family does not factor through the signed cyclotomic polynomials."""


class SignConventionViolation(ValueError):
    """Signed components at levels m and m+2 are not compatible."""


class NoSharpFlatDecomposition(ValueError):
    """The stacked sharp/flat congruences are inconsistent."""


@dataclass(frozen=True)
class ThetaFamily:
    params: RingParams
    a_p: int
    levels: tuple

    def __post_init__(self):
        levels = tuple(tuple(lv) for lv in self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise ValueError("a family needs at least level 0")
        r = len(levels[0])
        if r < 1:
            raise ValueError("rank must be >= 1")
        for m, vec in enumerate(levels):
            if len(vec) != r:
                raise ValueError("level %d has %d components, expected %d" % (m, len(vec), r))
            for x in vec:
                if x.params != self.params or x.level != m:
                    raise ValueError("level %d holds an element of level %d / %r" % (m, x.level, x.params))

    @property
    def M(self) -> int:
        return len(self.levels) - 1

    @property
    def r(self) -> int:
        return len(self.levels[0])

    @property
    def ap_mod(self) -> int:
        return self.a_p % self.params.N

    @classmethod
    def zero(cls, params: RingParams, a_p: int, M: int, r: int = 1) -> "ThetaFamily":
        return cls(params, a_p, [[GroupRingElement.zero(params, m)] * r for m in range(M + 1)])

    def replace_level(self, m: int, vec) -> "ThetaFamily":
        levels = list(self.levels)
        levels[m] = tuple(vec)
        return ThetaFamily(self.params, self.a_p, levels)

    def truncate(self, M: int) -> "ThetaFamily":
        return ThetaFamily(self.params, self.a_p, self.levels[: M + 1])

    def __add__(self, other: "ThetaFamily") -> "ThetaFamily":
        if (self.params, self.ap_mod, self.M, self.r) != (other.params, other.ap_mod, other.M, other.r):
            raise ValueError("families are not in the same space")
        return ThetaFamily(
            self.params,
            self.a_p,
            [[x + y for x, y in zip(u, v)] for u, v in zip(self.levels, other.levels)],
        )

    def __eq__(self, other):
        if not isinstance(other, ThetaFamily):
            return NotImplemented
        return self.params == other.params and self.ap_mod == other.ap_mod and self.levels == other.levels

    def __hash__(self):
        return hash((self.params, self.ap_mod, self.levels))

    def to_json(self) -> dict:
        return {
            "p": self.params.p,
            "n": self.params.n,
            "ext": self.params.ext,
            "ap": str(self.a_p),
            "M": self.M,
            "r": self.r,
            "levels": [[x.to_json() for x in vec] for vec in self.levels],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ThetaFamily":
        params = RingParams(int(obj["p"]), int(obj["n"]), int(obj.get("ext", 1)))
        levels = [[GroupRingElement.from_json(x) for x in vec] for vec in obj["levels"]]
        fam = cls(params, int(obj["ap"]), levels)
        if "M" in obj and int(obj["M"]) != fam.M:
            raise ValueError("declared M=%s but %d levels given" % (obj["M"], len(levels)))
        if "r" in obj and int(obj["r"]) != fam.r:
            raise ValueError("declared r=%s but components have rank %d" % (obj["r"], fam.r))
        return fam


def _as_vector(x) -> tuple:
    if isinstance(x, TruncatedSeries):
        return (x,)
    return tuple(x)


def _first_nonzero(x: GroupRingElement) -> dict:
    nz = np.nonzero(x.array.any(axis=0))[0]
    i = int(nz[0])
    return {"index": i, "value": x.coeffs[i]}


# -- norm relations ----------------------------------------------------------------

def check_norm_relation(fam: ThetaFamily, relation: str = "general") -> Report:
    """Check ``project(l_{m+1}) = a_p l_m - norm_xi(l_{m-1})`` for 1 <= m <= M-1.

    ``relation="pm"`` evaluates the a_p = 0 form ``project(l_{m+1}) = -norm_xi(l_{m-1})``
    through a separate code path.
    """
    if fam.M < 1:
        raise ValueError("norm relations need depth M >= 1")
    if relation not in ("general", "pm"):
        raise ValueError("relation must be 'general' or 'pm'")
    if relation == "pm" and fam.ap_mod != 0:
        raise ValueError("the a_p = 0 relation requested for a_p = %d" % fam.a_p)
    rep = Report("norm_relation", info={"relation": relation, "M": fam.M, "a_p": fam.a_p})
    for m in range(1, fam.M):
        for j in range(fam.r):
            lhs = project(fam.levels[m + 1][j])
            if relation == "pm":
                diff = lhs + norm_xi(fam.levels[m - 1][j])
            else:
                rhs = fam.levels[m][j].scale(fam.ap_mod) - norm_xi(fam.levels[m - 1][j])
                diff = lhs - rhs
            if diff.is_zero():
                rep.add(True, m=m, component=j)
            else:
                rep.add(False, m=m, component=j, witness=_first_nonzero(diff))
    return rep


def annihilator_check(fam: ThetaFamily) -> Report:
    """Check ``omega_m^eps * l_m = 0`` in Lambda_{m,n}, eps the sign of (-1)^m."""
    if fam.ap_mod != 0:
        raise ValueError("annihilation by omega_m^eps requires a_p = 0, got %d" % fam.a_p)
    rep = Report("annihilator", info={"M": fam.M})
    for m in range(fam.M + 1):
        sign = 1 if m % 2 == 0 else -1
        w = TruncatedSeries(fam.params, list(omega_signed(fam.params, m, sign)))
        for j, x in enumerate(fam.levels[m]):
            prod = x.to_series() * w
            rep.add(prod.is_zero(), m=m, component=j, sign="+" if sign > 0 else "-")
    return rep


# -- signed pairs ----------------------------------------------------------------------

@dataclass(frozen=True)
class SignedPair:
    """Signed components of a family.

    ``first``/``second`` are (lambda^+, lambda^-) for ``mode == "PM"`` and
    (lambda^sharp, lambda^flat) for ``mode == "SHARPFLAT"``; each is a tuple
    of ``r`` series.  ``kernel_basis`` generates the ambiguity of a single
    component as pairs of series (empty in PM mode).
    """

    mode: str
    first: tuple
    second: tuple
    kernel_basis: tuple = ()
    kernel: Optional[linalg.HowellForm] = None

    @property
    def r(self) -> int:
        return len(self.first)

    def contains(self, first, second) -> bool:
        """Whether the given pair lies in the solution coset (all components)."""
        first, second = _as_vector(first), _as_vector(second)
        if len(first) != self.r or len(second) != self.r:
            return False
        for a, b, ra, rb in zip(first, second, self.first, self.second):
            da = a.reduce(ra.modulus) - ra
            db = b.reduce(rb.modulus) - rb
            if self.mode == "PM":
                if not (da.is_zero() and db.is_zero()):
                    return False
                continue
            D = len(ra.modulus) - 1
            vec = np.concatenate([da.padded(D).reshape(-1), db.padded(D).reshape(-1)])
            if not self.kernel.contains(vec):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "r": self.r,
            "representatives": {
                "first": [s.to_json() for s in self.first],
                "second": [s.to_json() for s in self.second],
            },
            "kernel_basis": [[a.to_json(), b.to_json()] for a, b in self.kernel_basis],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SignedPair":
        reps = obj["representatives"]
        first = tuple(TruncatedSeries.from_json(x) for x in reps["first"])
        second = tuple(TruncatedSeries.from_json(x) for x in reps["second"])
        basis = tuple(
            (TruncatedSeries.from_json(a), TruncatedSeries.from_json(b)) for a, b in obj["kernel_basis"]
        )
        kernel = None
        if obj["mode"] == "SHARPFLAT" and first:
            params = first[0].params
            D = len(first[0].modulus) - 1
            rows = [np.concatenate([a.padded(D).reshape(-1), b.padded(D).reshape(-1)]) for a, b in basis]
            width = 2 * D * params.ext
            kernel = linalg.howell_form(np.array(rows, dtype=np.int64).reshape(-1, width), params.p, params.n)
        return cls(obj["mode"], first, second, basis, kernel)


# -- plus/minus ------------------------------------------------------------------------

def _pm_sign(m: int) -> int:
    # (-1)^(m/2) for even m, (-1)^((m+1)/2) for odd m
    k = m // 2 if m % 2 == 0 else (m + 1) // 2
    return -1 if k % 2 else 1


def pm_synthesize(lambda_plus, lambda_minus, params: RingParams, M: int) -> ThetaFamily:
    """Build the a_p = 0 family whose signed components are the given series.

    ``l_m = (-1)^(m/2) w~_m^- l^+`` for even m and
    ``l_m = (-1)^((m+1)/2) w~_m^+ l^-`` for odd m, reduced mod omega_m.
    """
    plus, minus = _as_vector(lambda_plus), _as_vector(lambda_minus)
    if len(plus) != len(minus):
        raise ValueError("plus and minus parts have different ranks")
    levels = []
    for m in range(M + 1):
        f = omega_factors(params, m)
        if m % 2 == 0:
            factor, parts = f.omega_tilde_minus, plus
        else:
            factor, parts = f.omega_tilde_plus, minus
        sign = _pm_sign(m)
        vec = []
        for s in parts:
            val = (s.lift() * factor).scale(sign).reduce(omega(params, m))
            vec.append(GroupRingElement.from_series(val, m))
        levels.append(vec)
    return ThetaFamily(params, 0, levels)


@lru_cache(maxsize=128)
def _pm_system(params: RingParams, m: int):
    sign = 1 if m % 2 == 0 else -1
    f = omega_factors(params, m)
    factor = f.omega_tilde_minus if sign > 0 else f.omega_tilde_plus
    d = len(omega_signed(params, m, sign)) - 1
    A = mult_matrix(factor, d)
    size = params.p**m
    # factor * L has degree < p^m, so no reduction by omega_m is involved
    A = A.reshape(params.ext, -1, A.shape[1])[:, :size, :].reshape(params.ext * size, -1)
    kernel = linalg.nullspace(A, params.p, params.n)
    return A, d, kernel


def pm_extract(fam: ThetaFamily) -> SignedPair:
    """Recover (lambda^+, lambda^-) modulo (p^n, omega_M^+/-) from an a_p = 0 family."""
    if fam.ap_mod != 0:
        raise ValueError("plus/minus extraction requires a_p = 0, got %d" % fam.a_p)
    if fam.M < 1:
        raise ValueError("plus/minus extraction needs depth M >= 1")
    rel = check_norm_relation(fam, "pm")
    if not rel:
        raise NotSignedFamily("norm relation fails: %s" % rel.failures()[0])
    ann = annihilator_check(fam)
    if not ann:
        raise NotSignedFamily("annihilation fails: %s" % ann.failures()[0])
    params = fam.params
    signed = {}
    for m in range(fam.M + 1):
        sign = 1 if m % 2 == 0 else -1
        A, d, kernel = _pm_system(params, m)
        if kernel.length:
            raise NotSignedFamily("division by w~_%d is not injective" % m)
        size = params.p**m
        B = np.array(
            [x.to_series().padded(size).reshape(-1) for x in fam.levels[m]], dtype=np.int64
        ).T
        try:
            L = linalg.solve(A, B, params.p, params.n)
        except linalg.InconsistentSystem as exc:
            raise NotSignedFamily("level %d is not divisible by w~_%d" % (m, m)) from exc
        mod = omega_signed(params, m, sign)
        signed[m] = tuple(
            TruncatedSeries(params, L[:, j].reshape(params.ext, d), mod).scale(_pm_sign(m))
            for j in range(fam.r)
        )
    for m in range(fam.M - 1):
        sign = 1 if m % 2 == 0 else -1
        if m == 0 and sign < 0:
            continue
        mod = omega_signed(params, m, sign)
        for j in range(fam.r):
            if signed[m + 2][j].reduce(mod) != signed[m][j]:
                raise SignConventionViolation("levels %d and %d disagree (component %d)" % (m, m + 2, j))
    top_plus = fam.M if fam.M % 2 == 0 else fam.M - 1
    top_minus = fam.M if fam.M % 2 == 1 else fam.M - 1
    mod_plus = omega_signed(params, fam.M, 1)
    mod_minus = omega_signed(params, fam.M, -1)
    first = tuple(s.reduce(mod_plus) for s in signed[top_plus])
    second = tuple(s.reduce(mod_minus) for s in signed[top_minus])
    return SignedPair("PM", first, second)


# -- sharp/flat ------------------------------------------------------------------------

@dataclass(frozen=True)
class SprungMatrices:
    """``C[m-1] = [[a_p, 1], [-Phi_m, 0]]`` and ``H[m-1] = C_m ... C_1`` for m = 1..M."""

    C: tuple
    H: tuple
    modulus: Optional[tuple]


def _mat_mul(A, B):
    return (
        (A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
        (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]),
    )


def _det(A):
    return A[0][0] * A[1][1] - A[0][1] * A[1][0]


def sprung_matrices(params: RingParams, a_p: int, M: int, reduce: bool = True) -> SprungMatrices:
    """Companion matrices and their cumulative products, reduced mod omega_M unless ``reduce=False``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    mod = omega(params, M) if reduce else None
    ap = TruncatedSeries(params, [a_p], mod)
    one = TruncatedSeries.one(params, mod)
    zero = TruncatedSeries.zero(params, mod)
    Cs, Hs = [], []
    H = None
    for m in range(1, M + 1):
        phi = phi_poly(params, m)
        if mod is not None:
            phi = phi.reduce(mod)
        C = ((ap, one), (-phi, zero))
        if _det(C) != phi:
            raise ArithmeticError("det C_%d != Phi_%d" % (m, m))
        H = C if H is None else _mat_mul(C, H)
        Cs.append(C)
        Hs.append(H)
    return SprungMatrices(tuple(Cs), tuple(Hs), mod)


def _apply(H, x, y):
    return H[0][0] * x + H[0][1] * y, H[1][0] * x + H[1][1] * y


def _check_sprung_params(params: RingParams):
    if params.ext != 1:
        raise ValueError("sharp/flat decomposition is implemented over Z/p^n coefficients (ext=1)")


def sprung_synthesize(lambda_sharp, lambda_flat, params: RingParams, a_p: int, M: int) -> ThetaFamily:
    """Family with ``(l_m, -xi l_{m-1}) = H_m (sharp, flat) mod omega_m`` for 1 <= m <= M."""
    _check_sprung_params(params)
    sharp, flat = _as_vector(lambda_sharp), _as_vector(lambda_flat)
    if len(sharp) != len(flat):
        raise ValueError("sharp and flat parts have different ranks")
    if M < 1:
        raise ValueError("M must be >= 1")
    mats = sprung_matrices(params, a_p, M, reduce=False)
    levels = [[] for _ in range(M + 1)]
    phi1 = phi_poly(params, 1)
    for s, f in zip(sharp, flat):
        s, f = s.lift(), f.lift()
        prev = None
        for m in range(1, M + 1):
            om = omega(params, m)
            v, w = _apply(mats.H[m - 1], s, f)
            v, w = v.reduce(om), w.reduce(om)
            if m == 1:
                # l_0 from Phi_1 * l_0 = -w_1 in Lambda_n/(omega_1); x -> Phi_1 x is injective on Z/p^n
                A = mult_matrix(phi1, 1, om)
                if linalg.nullspace(A, params.p, params.n).length:
                    raise ArithmeticError("multiplication by Phi_1 is not injective")
                c = linalg.solve(A, (-w).padded(params.p).reshape(-1), params.p, params.n)
                prev = TruncatedSeries(params, [int(c[0])], omega(params, 0))
                levels[0].append(GroupRingElement.from_series(prev, 0))
            else:
                expect = (-(phi_poly(params, m) * prev.lift())).reduce(om)
                if expect != w:
                    raise ArithmeticError("second row of H_%d disagrees with -xi(l_%d)" % (m, m - 1))
            levels[m].append(GroupRingElement.from_series(v, m))
            prev = v
    return ThetaFamily(params, a_p, levels)


@lru_cache(maxsize=64)
def _sprung_system(params: RingParams, ap_mod: int, M: int):
    mats = sprung_matrices(params, ap_mod, M, reduce=False)
    D = params.p**M
    blocks = []
    for m in range(1, M + 1):
        om = omega(params, m)
        H = mats.H[m - 1]
        top = np.hstack([mult_matrix(H[0][0], D, om), mult_matrix(H[0][1], D, om)])
        bot = np.hstack([mult_matrix(H[1][0], D, om), mult_matrix(H[1][1], D, om)])
        blocks.extend([top, bot])
    A = np.vstack(blocks) % params.N
    A.setflags(write=False)
    kernel = linalg.nullspace(A, params.p, params.n)
    return A, kernel


def _sprung_rhs(fam: ThetaFamily, M: int) -> np.ndarray:
    params = fam.params
    cols = []
    for j in range(fam.r):
        parts = []
        for m in range(1, M + 1):
            om = omega(params, m)
            size = params.p**m
            lam = fam.levels[m][j].to_series()
            xi_prev = norm_xi(fam.levels[m - 1][j]).to_series()
            parts.append(lam.padded(size)[0])
            parts.append((-xi_prev).reduce(om).padded(size)[0])
        cols.append(np.concatenate(parts))
    return np.array(cols, dtype=np.int64).T


def sprung_decompose(fam: ThetaFamily, M: Optional[int] = None) -> SignedPair:
    """Solve for (lambda^sharp, lambda^flat) modulo omega_M from the congruences at 1 <= m <= M."""
    _check_sprung_params(fam.params)
    M = fam.M if M is None else M
    if not 1 <= M <= fam.M:
        raise ValueError("decomposition depth must satisfy 1 <= M <= %d" % fam.M)
    rel = check_norm_relation(fam.truncate(M)) if M >= 2 else Report("norm_relation")
    if not rel:
        raise NoSharpFlatDecomposition("norm relation fails: %s" % rel.failures()[0])
    params = fam.params
    A, kernel = _sprung_system(params, fam.ap_mod, M)
    B = _sprung_rhs(fam, M)
    try:
        X = linalg.solve(A, B, params.p, params.n)
    except linalg.InconsistentSystem as exc:
        raise NoSharpFlatDecomposition("family admits no sharp/flat decomposition at depth %d" % M) from exc
    D = params.p**M
    mod = omega(params, M)
    first = tuple(TruncatedSeries(params, X[:D, j][None, :], mod) for j in range(fam.r))
    second = tuple(TruncatedSeries(params, X[D:, j][None, :], mod) for j in range(fam.r))
    basis = tuple(
        (TruncatedSeries(params, row[:D][None, :], mod), TruncatedSeries(params, row[D:][None, :], mod))
        for row in kernel.rows
    )
    pair = SignedPair("SHARPFLAT", first, second, basis, kernel)
    _verify_sprung(fam, pair, M)
    return pair


def _verify_sprung(fam: ThetaFamily, pair: SignedPair, M: int) -> None:
    mats = sprung_matrices(fam.params, fam.ap_mod, M, reduce=False)
    for j in range(fam.r):
        s, f = pair.first[j].lift(), pair.second[j].lift()
        for m in range(1, M + 1):
            om = omega(fam.params, m)
            v, w = _apply(mats.H[m - 1], s, f)
            if v.reduce(om) != fam.levels[m][j].to_series():
                raise ArithmeticError("returned representative violates the first congruence at m=%d" % m)
            if w.reduce(om) != (-norm_xi(fam.levels[m - 1][j])).to_series():
                raise ArithmeticError("returned representative violates the second congruence at m=%d" % m)


def random_series(rng: np.random.Generator, params: RingParams, degree: int) -> TruncatedSeries:
    """Uniform polynomial of degree <= ``degree`` (used by the property suites)."""
    c = rng.integers(0, params.N, size=(params.ext, degree + 1), dtype=np.int64)
    return TruncatedSeries(params, c)


def random_family(rng: np.random.Generator, params: RingParams, a_p: int, M: int, r: int = 1,
                  kind: Optional[str] = None) -> ThetaFamily:
    """Random family satisfying the norm relation, via sharp/flat (any a_p) or plus/minus (a_p = 0)."""
    D = params.p**M
    kind = kind or "sharpflat"
    if kind == "pm":
        plus = [random_series(rng, params, D - 1) for _ in range(r)]
        minus = [random_series(rng, params, D - 1) for _ in range(r)]
        return pm_synthesize(plus, minus, params, M)
    sharp = [random_series(rng, params, D - 1) for _ in range(r)]
    flat = [random_series(rng, params, D - 1) for _ in range(r)]
    return sprung_synthesize(sharp, flat, params, a_p, M)
