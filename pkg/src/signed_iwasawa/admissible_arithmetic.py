"""Point counts, n-admissible primes and the definite/indefinite split.

A prime ell is n-admissible for (E, K, p) when ell does not divide p*N0, ell
is inert in K, p does not divide ell^2 - 1, and p^n divides
(ell + 1)^2 - a_ell^2.  The sign eps_ell is the one with
p^n | ell + 1 - eps_ell * a_ell.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from . import kernels
from .iwasawa_rings import is_prime

NAIVE_LIMIT = 1 << 16
ELL_CAP = 1 << 24
CLASS_NUMBER_LIMIT = 10**4


class BadReduction(ValueError):
    pass


class BoundExceeded(ValueError):
    pass


class EpsilonUniquenessError(AssertionError):
    """Both signs satisfy the eps congruence with a_ell != 0."""


class InconsistentAdmissibility(ArithmeticError):
    """Neither sign satisfies the eps congruence."""


class NotInert(ValueError):
    pass


# -- curves ------------------------------------------------------------------------

@dataclass(eq=False)
class CurveData:
    """Weierstrass curve [a1, a2, a3, a4, a6] with caller-supplied conductor data."""

    coefficients: tuple
    conductor: Optional[int] = None
    conductor_factorization: Optional[dict] = None
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.coefficients = tuple(int(a) for a in self.coefficients)
        if len(self.coefficients) != 5:
            raise ValueError("need five coefficients a1,a2,a3,a4,a6")
        if self.discriminant == 0:
            raise ValueError("singular curve (discriminant 0)")
        if self.conductor_factorization is not None:
            fac = {int(q): int(e) for q, e in self.conductor_factorization.items()}
            prod = math.prod(q**e for q, e in fac.items())
            if self.conductor is None:
                self.conductor = prod
            elif prod != self.conductor:
                raise ValueError("conductor %d does not match its factorization" % self.conductor)
            self.conductor_factorization = fac
        elif self.conductor is not None:
            self.conductor_factorization = _factor(int(self.conductor))

    @property
    def b_invariants(self) -> tuple:
        a1, a2, a3, a4, a6 = self.coefficients
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def c_invariants(self) -> tuple:
        b2, b4, b6, _ = self.b_invariants
        return b2 * b2 - 24 * b4, -(b2**3) + 36 * b2 * b4 - 216 * b6

    def bad_primes(self) -> set:
        if self.conductor_factorization is not None:
            return set(self.conductor_factorization)
        return set(_factor(abs(self.discriminant)))

    def to_json(self) -> dict:
        return {
            "coefficients": list(self.coefficients),
            "conductor": self.conductor,
            "conductor_factorization": (
                None if self.conductor_factorization is None
                else {str(q): e for q, e in sorted(self.conductor_factorization.items())}
            ),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CurveData":
        return cls(tuple(obj["coefficients"]), obj.get("conductor"), obj.get("conductor_factorization"))


def _factor(k: int) -> dict:
    out: dict = {}
    d = 2
    while d * d <= k:
        while k % d == 0:
            out[d] = out.get(d, 0) + 1
            k //= d
        d += 1
    if k > 1:
        out[k] = out.get(k, 0) + 1
    return out


# -- point counting ----------------------------------------------------------------

def _count_points_two(coeffs: tuple) -> int:
    a1, a2, a3, a4, a6 = (a % 2 for a in coeffs)
    total = 1
    for x in range(2):
        for y in range(2):
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                total += 1
    return total


def _sqrt_mod(a: int, q: int) -> int:
    """Square root of a quadratic residue modulo an odd prime (Tonelli-Shanks)."""
    a %= q
    if a == 0:
        return 0
    if q % 4 == 3:
        return pow(a, (q + 1) // 4, q)
    s, t = 0, q - 1
    while t % 2 == 0:
        s, t = s + 1, t // 2
    z = 2
    while pow(z, (q - 1) // 2, q) != q - 1:
        z += 1
    m, c, x, r = s, pow(z, t, q), pow(a, (t + 1) // 2, q), pow(a, t, q)
    while r != 1:
        i, r2 = 0, r
        while r2 != 1:
            r2, i = r2 * r2 % q, i + 1
        b = pow(c, 1 << (m - i - 1), q)
        m, c, x, r = i, b * b % q, x * b % q, r * b * b % q
    return x


def _ec_add(P, Q, A: int, q: int):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % q == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, q) % q
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, q) % q
    x3 = (lam * lam - x1 - x2) % q
    return x3, (lam * (x1 - x3) - y1) % q


def _ec_neg(P, q: int):
    return None if P is None else (P[0], -P[1] % q)


def _ec_mul(k: int, P, A: int, q: int):
    if k < 0:
        return _ec_mul(-k, _ec_neg(P, q), A, q)
    R = None
    while k:
        if k & 1:
            R = _ec_add(R, P, A, q)
        P = _ec_add(P, P, A, q)
        k >>= 1
    return R


def _trace_candidates(A: int, B: int, q: int, P, w: int) -> set:
    """All t in [-w, w] with (q + 1 - t) P = 0, by baby-step giant-step."""
    s = math.isqrt(2 * w + 1) + 1
    baby: dict = {}
    R = None
    for j in range(s):
        baby.setdefault(R, []).append(j)
        R = _ec_add(R, P, A, q)
    # want t' = t + w in [0, 2w] with t' P = (q + 1 + w) P
    target = _ec_mul(q + 1 + w, P, A, q)
    step = _ec_neg(_ec_mul(s, P, A, q), q)
    out = set()
    G = target
    for i in range((2 * w) // s + 2):
        for j in baby.get(G, ()):
            tp = i * s + j
            if tp <= 2 * w:
                out.add(tp - w)
        G = _ec_add(G, step, A, q)
    return out


def _random_point(A: int, B: int, q: int, rng):
    while True:
        x = int(rng.integers(0, q))
        f = (x * x * x + A * x + B) % q
        if f == 0:
            return x, 0
        if pow(f, (q - 1) // 2, q) == 1:
            return x, _sqrt_mod(f, q)


def _a_ell_bsgs(curve: CurveData, q: int) -> int:
    c4, c6 = curve.c_invariants
    A, B = (-27 * c4) % q, (-54 * c6) % q
    d = 2
    while pow(d, (q - 1) // 2, q) != q - 1:
        d += 1
    # quadratic twist: y^2 = x^3 + A d^2 x + B d^3 has trace -t
    At, Bt = A * d * d % q, B * d * d * d % q
    w = math.isqrt(4 * q)
    cands = set(range(-w, w + 1))
    rng = np.random.default_rng(q)
    for _ in range(40):
        cands &= _trace_candidates(A, B, q, _random_point(A, B, q, rng), w)
        if len(cands) == 1:
            break
        cands &= {-t for t in _trace_candidates(At, Bt, q, _random_point(At, Bt, q, rng), w)}
        if len(cands) == 1:
            break
    if len(cands) != 1:
        # tiny group exponents can leave ambiguity; fall back to counting
        return q + 1 - int(kernels.count_points_odd(*curve.coefficients, q))
    return cands.pop()


def a_ell(curve: CurveData, ell: int) -> int:
    """``ell + 1 - #E(F_ell)``; cached on the curve."""
    if ell in curve.cache:
        return curve.cache[ell]
    if not is_prime(ell):
        raise ValueError("%d is not prime" % ell)
    if ell >= ELL_CAP:
        raise BoundExceeded("ell=%d exceeds the cap 2^24" % ell)
    if curve.discriminant % ell == 0:
        raise BadReduction("bad reduction at ell=%d" % ell)
    if ell == 2:
        a = 3 - _count_points_two(curve.coefficients)
    elif ell < NAIVE_LIMIT or ell == 3:
        a = ell + 1 - int(kernels.count_points_odd(*curve.coefficients, ell))
    else:
        a = _a_ell_bsgs(curve, ell)
    if a * a > 4 * ell:
        raise ArithmeticError("a_%d = %d violates the Hasse bound" % (ell, a))
    curve.cache[ell] = a
    return a


# -- quadratic fields --------------------------------------------------------------

def kronecker(D: int, ell: int) -> int:
    """Kronecker symbol (D | ell) for prime ell."""
    if ell == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    a, m, res = D % ell, ell, 1
    if a == 0:
        return 0
    # Jacobi symbol by reciprocity
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                res = -res
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            res = -res
        a %= m
    return res if m == 1 else 0


def is_fundamental(D: int) -> bool:
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return _squarefree(abs(D))
    if D % 4 == 0:
        d = D // 4
        return d % 4 in (2, 3) and _squarefree(abs(d))
    return False


def _squarefree(k: int) -> bool:
    return all(e == 1 for e in _factor(k).values())


@dataclass(frozen=True)
class InertResult:
    inert: bool
    ramified: bool = False

    def __bool__(self):
        return self.inert


def is_inert(ell: int, D: int) -> InertResult:
    s = kronecker(D, ell)
    return InertResult(s == -1, ramified=s == 0)


@lru_cache(maxsize=None)
def class_number(D: int) -> int:
    """Number of reduced primitive positive definite forms of discriminant D < 0."""
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError("need a negative discriminant")
    h = 0
    b = D % 2
    while 3 * b * b <= -D:
        ac = (b * b - D) // 4
        a = max(b, 1)
        while a * a <= ac:
            if ac % a == 0:
                c = ac // a
                if math.gcd(math.gcd(a, b), c) == 1:
                    if b == 0 or a == b or a == c:
                        h += 1
                    else:
                        h += 2
            a += 1
        b += 2
    return h


@dataclass(frozen=True)
class QuadFieldData:
    """Imaginary quadratic field of discriminant D with the induced N0 = N+ * N- split."""

    D: int
    n_plus: int
    n_minus: int
    n_minus_primes: tuple

    @classmethod
    def build(cls, D: int, curve: CurveData) -> "QuadFieldData":
        if D >= 0 or not is_fundamental(D):
            raise ValueError("D=%d is not a negative fundamental discriminant" % D)
        fac = curve.conductor_factorization
        if fac is None:
            raise ValueError("the curve needs a conductor factorization")
        if math.gcd(D, curve.conductor) != 1:
            raise ValueError("gcd(D, N0) != 1")
        n_plus, minus = 1, []
        for q, e in sorted(fac.items()):
            if kronecker(D, q) == -1:
                if e != 1:
                    raise ValueError("N- must be squarefree (%d^%d)" % (q, e))
                minus.append(q)
            else:
                n_plus *= q**e
        if len(minus) % 2:
            raise ValueError("N- = %s has an odd number of prime factors" % minus)
        return cls(D, n_plus, math.prod(minus), tuple(minus))

    def epsilon(self, k: int) -> int:
        """Quadratic character of K at a positive integer, multiplicatively."""
        out = 1
        for q, e in _factor(k).items():
            out *= kronecker(self.D, q) ** e
        return out

    def to_json(self) -> dict:
        return {"D": self.D, "N_plus": self.n_plus, "N_minus": self.n_minus}


# -- admissibility -------------------------------------------------------------------

@dataclass(frozen=True)
class Decision:
    ell: int
    admissible: bool
    reasons: tuple
    a_ell: Optional[int] = None

    def __bool__(self):
        return self.admissible

    def to_json(self) -> dict:
        return {"ell": self.ell, "admissible": self.admissible, "reasons": list(self.reasons), "a_ell": self.a_ell}


def _check_p(p: int, n: int) -> None:
    if p < 5 or not is_prime(p):
        raise ValueError("p must be a prime >= 5, got %r" % p)
    if n < 1:
        raise ValueError("n must be >= 1")


def is_n_admissible(ell: int, curve: CurveData, K: QuadFieldData, p: int, n: int) -> Decision:
    _check_p(p, n)
    if not is_prime(ell):
        raise ValueError("%d is not prime" % ell)
    reasons = []
    bad_reduction = ell in curve.bad_primes() or curve.discriminant % ell == 0
    if ell == p or bad_reduction:
        reasons.append("i:divides_pN0")
    inert = is_inert(ell, K.D)
    if not inert:
        reasons.append("ii:ramified" if inert.ramified else "ii:split")
    if (ell * ell - 1) % p == 0:
        reasons.append("iii:p_divides_ell2_minus_1")
    a = None
    if bad_reduction:
        reasons.append("iv:undefined_bad_reduction")
    else:
        a = a_ell(curve, ell)
        if ((ell + 1) ** 2 - a * a) % p**n:
            reasons.append("iv:pn_not_dividing")
    return Decision(ell, not reasons, tuple(reasons), a)


def epsilon_sign_flagged(ell: int, curve: CurveData, p: int, n: int) -> tuple:
    """``(eps, degenerate)``; the tie at a_ell = 0 resolves to +1 and is flagged."""
    a = a_ell(curve, ell)
    N = p**n
    plus = (ell + 1 - a) % N == 0
    minus = (ell + 1 + a) % N == 0
    if plus and minus:
        if a == 0:
            return 1, True
        raise EpsilonUniquenessError("both signs work for ell=%d, a_ell=%d" % (ell, a))
    if plus:
        return 1, False
    if minus:
        return -1, False
    raise InconsistentAdmissibility("no sign satisfies p^n | ell+1-eps*a_ell at ell=%d" % ell)


def epsilon_sign(ell: int, curve: CurveData, p: int, n: int) -> int:
    return epsilon_sign_flagged(ell, curve, p, n)[0]


def primes_below(bound: int) -> list:
    if bound <= 2:
        return []
    sieve = np.ones(bound, dtype=bool)
    sieve[:2] = False
    for k in range(2, math.isqrt(bound - 1) + 1):
        if sieve[k]:
            sieve[k * k::k] = False
    return [int(x) for x in np.nonzero(sieve)[0]]


@dataclass(frozen=True)
class ScanEntry:
    ell: int
    eps: int
    degenerate: bool
    a_ell: int

    def to_json(self) -> dict:
        return {"ell": self.ell, "eps": self.eps, "degenerate": self.degenerate}


def _scan_block(args) -> list:
    coeffs, conductor, fac, D, p, n, block = args
    curve = CurveData(coeffs, conductor, fac)
    K = QuadFieldData.build(D, curve)
    out = []
    for ell in block:
        # cheap screens first
        if ell == p or ell in fac or (ell * ell - 1) % p == 0 or kronecker(D, ell) != -1:
            continue
        dec = is_n_admissible(ell, curve, K, p, n)
        if dec:
            eps, deg = epsilon_sign_flagged(ell, curve, p, n)
            out.append((ell, eps, deg, dec.a_ell))
    return out


def scan_admissible(curve: CurveData, K: QuadFieldData, p: int, n: int, bound: int,
                    jobs: int = 1) -> list:
    """All n-admissible ell < bound in ascending order, with eps_ell."""
    _check_p(p, n)
    if bound > ELL_CAP:
        raise BoundExceeded("bound %d exceeds 2^24" % bound)
    hypothesis_warnings(p, K)
    primes = primes_below(bound)
    jobs = max(1, int(jobs))
    size = max(256, -(-len(primes) // (4 * jobs)))
    blocks = [primes[i:i + size] for i in range(0, len(primes), size)]
    fac = curve.conductor_factorization or {}
    tasks = [(curve.coefficients, curve.conductor, fac, K.D, p, n, b) for b in blocks]
    if jobs == 1 or len(blocks) <= 1:
        results = [_scan_block(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan_block, tasks))
    entries = []
    for block in results:
        for ell, eps, deg, a in block:
            curve.cache.setdefault(ell, a)
            entries.append(ScanEntry(ell, eps, deg, a))
    return entries


def hypothesis_warnings(p: int, K: QuadFieldData) -> list:
    """Warn about hypotheses this module cannot certify; returns the messages."""
    msgs = []
    if p == 5:
        msgs.append("p=5: the large-image hypothesis on the residual representation is not checked")
    if abs(K.D) < CLASS_NUMBER_LIMIT:
        h = class_number(K.D)
        if h % p == 0:
            msgs.append("p=%d divides the class number h(%d)=%d" % (p, K.D, h))
    else:
        msgs.append("class number of D=%d not checked (|D| >= 10^4)" % K.D)
    if kronecker(K.D, p) == 0:
        msgs.append("p=%d ramifies in K" % p)
    for m in msgs:
        warnings.warn(m, stacklevel=3)
    return msgs


# -- from-scratch oracle -----------------------------------------------------------

def oracle_a_ell(coeffs: tuple, ell: int) -> int:
    """Point count with Euler's criterion per x; no tables, no cache."""
    a1, a2, a3, a4, a6 = coeffs
    if ell == 2:
        return 3 - _count_points_two(coeffs)
    total = 1
    for x in range(ell):
        lin = (a1 * x + a3) % ell
        rhs = (x**3 + a2 * x * x + a4 * x + a6) % ell
        disc = (lin * lin + 4 * rhs) % ell
        if disc == 0:
            total += 1
        elif pow(disc, (ell - 1) // 2, ell) == 1:
            total += 2
    return ell + 1 - total


def oracle_scan(coeffs: tuple, bad: Iterable[int], D: int, p: int, n: int, bound: int) -> list:
    """Independent recomputation of the admissible list as ``(ell, eps)`` pairs."""
    bad = set(bad)
    out = []
    disc = CurveData(coeffs).discriminant
    for ell in range(2, bound):
        if any(ell % d == 0 for d in range(2, math.isqrt(ell) + 1)):
            continue
        if ell == p or ell in bad or disc % ell == 0:
            continue
        if ell == 2:
            inert = D % 8 == 5
        else:
            inert = pow(D % ell, (ell - 1) // 2, ell) == ell - 1
        if not inert or (ell * ell - 1) % p == 0:
            continue
        a = oracle_a_ell(coeffs, ell)
        if ((ell + 1) ** 2 - a * a) % p**n:
            continue
        eps = 1 if (ell + 1 - a) % p**n == 0 else -1
        out.append((ell, eps))
    return out


# -- products of admissible primes ---------------------------------------------------

class Parity(str, Enum):
    DEFINITE = "DEFINITE"
    INDEFINITE = "INDEFINITE"


@dataclass(frozen=True)
class AdmissibleProduct:
    """Squarefree product of admissible primes; the empty product is 1."""

    primes: tuple
    n: int
    core: Optional[bool] = None  # caller's unchecked claim; not decidable here

    def __post_init__(self):
        ps = tuple(sorted(int(q) for q in self.primes))
        if len(set(ps)) != len(ps):
            raise ValueError("primes must be distinct")
        object.__setattr__(self, "primes", ps)

    @property
    def value(self) -> int:
        return math.prod(self.primes)

    def validate(self, curve: CurveData, K: QuadFieldData, p: int) -> None:
        for q in self.primes:
            dec = is_n_admissible(q, curve, K, p, self.n)
            if not dec:
                raise ValueError("%d is not %d-admissible: %s" % (q, self.n, ",".join(dec.reasons)))

    def to_json(self) -> dict:
        return {"primes": list(self.primes), "n": self.n, "core": self.core}


def classify_S(S: AdmissibleProduct, K: QuadFieldData) -> Parity:
    """DEFINITE iff eps_K(S) = eps_K(S N-) = -1."""
    for q in S.primes:
        if kronecker(K.D, q) != -1:
            raise NotInert("%d is not inert in Q(sqrt(%d))" % (q, K.D))
    e1 = K.epsilon(S.value)
    e2 = K.epsilon(S.value * K.n_minus)
    return Parity.DEFINITE if e1 == -1 and e2 == -1 else Parity.INDEFINITE


def parity_rule(S: AdmissibleProduct) -> Parity:
    return Parity.DEFINITE if len(S.primes) % 2 else Parity.INDEFINITE
