"""Ideals of Z/p^n[X]/(f), Fitting ideals, and a bipartite Euler system checker.

An ideal is stored as the Howell form of the Z/p^n-lattice spanned by
``X^k g`` for every generator ``g`` and ``0 <= k < deg f``; that lattice is
closed under multiplication by X, hence is the ideal itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Optional, Sequence

import numpy as np

from . import linalg
from .iwasawa_rings import RingParams, TruncatedSeries, mult_matrix, norm_xi, project
from .report import Report
from .signed_decomposition import ThetaFamily


class MalformedSystem(ValueError):
    pass


# -- ideals ------------------------------------------------------------------------

def _ring_of(gens: Sequence[TruncatedSeries]):
    if not gens:
        raise ValueError("need at least one generator to fix the ambient ring")
    params, mod = gens[0].params, gens[0].modulus
    if mod is None:
        raise ValueError("ideals live in a quotient ring; give the generators a modulus")
    for g in gens:
        if g.params != params or g.modulus != mod:
            raise ValueError("generators live in different rings")
    return params, mod


@dataclass(frozen=True, eq=False)
class FiniteIdeal:
    params: RingParams
    modulus: tuple
    generators: tuple
    basis: linalg.HowellForm

    @classmethod
    def generated_by(cls, gens: Sequence[TruncatedSeries], params: Optional[RingParams] = None,
                     modulus: Optional[Sequence[int]] = None) -> "FiniteIdeal":
        gens = tuple(gens)
        if gens:
            params, modulus = _ring_of(gens)
        elif params is None or modulus is None:
            raise ValueError("the zero ideal needs explicit params and modulus")
        modulus = tuple(int(x) % params.N for x in modulus)
        D = len(modulus) - 1
        width = D * params.ext
        rows = [mult_matrix(g, D, modulus).T for g in gens]
        A = np.vstack(rows) if rows else np.zeros((0, width), dtype=np.int64)
        return cls(params, modulus, gens, linalg.howell_form(A, params.p, params.n))

    @property
    def degree(self) -> int:
        return len(self.modulus) - 1

    def contains_element(self, x: TruncatedSeries) -> bool:
        if x.params != self.params:
            return False
        return self.basis.contains(x.reduce(self.modulus).padded(self.degree).reshape(-1))

    def normalized(self) -> "FiniteIdeal":
        """Same ideal generated by its Howell basis."""
        gens = tuple(
            TruncatedSeries(self.params, row.reshape(self.params.ext, self.degree), self.modulus)
            for row in self.basis.rows
        )
        return FiniteIdeal(self.params, self.modulus, gens, self.basis)

    @property
    def length(self) -> int:
        """log_p of the index-free size of the ideal."""
        return self.basis.length

    def __eq__(self, other):
        if not isinstance(other, FiniteIdeal):
            return NotImplemented
        return (self.params, self.modulus) == (other.params, other.modulus) and self.basis == other.basis

    def __hash__(self):
        return hash((self.params, self.modulus, self.basis))

    def to_json(self) -> dict:
        return {
            "p": self.params.p,
            "n": self.params.n,
            "modulus": [str(x) for x in self.modulus],
            "generators": [g.to_json() for g in self.generators],
            "basis": [g.to_json() for g in self.normalized().generators],
            "length": self.length,
        }


def ideal(*gens: TruncatedSeries) -> FiniteIdeal:
    return FiniteIdeal.generated_by(gens)


def ideal_contains(I: FiniteIdeal, J: FiniteIdeal) -> bool:
    """Whether J is a subset of I."""
    if (I.params, I.modulus) != (J.params, J.modulus):
        raise ValueError("ideals live in different rings")
    return all(I.basis.contains(row) for row in J.basis.rows)


def ideal_product(I: FiniteIdeal, J: FiniteIdeal) -> FiniteIdeal:
    gens = [a * b for a in I.normalized().generators for b in J.normalized().generators]
    if not gens:
        return FiniteIdeal.generated_by((), I.params, I.modulus)
    return FiniteIdeal.generated_by(gens)


def ideal_square(I: FiniteIdeal) -> FiniteIdeal:
    gens = I.generators
    prods = [gens[i] * gens[j] for i in range(len(gens)) for j in range(i, len(gens))]
    if not prods:
        return FiniteIdeal.generated_by((), I.params, I.modulus)
    return FiniteIdeal.generated_by(prods)


# -- Fitting ideals ----------------------------------------------------------------

@dataclass(frozen=True)
class PresentationMatrix:
    """Relations-by-generators matrix over Z/p^n[X]/(modulus)."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        if not rows or not rows[0]:
            raise ValueError("presentation needs at least one column")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged presentation matrix")
        _ring_of([x for r in rows for x in r])
        object.__setattr__(self, "entries", rows)

    @property
    def shape(self) -> tuple:
        return len(self.entries), len(self.entries[0])

    @property
    def params(self) -> RingParams:
        return self.entries[0][0].params

    @property
    def modulus(self) -> tuple:
        return self.entries[0][0].modulus

    def transform(self, left: Sequence[Sequence[TruncatedSeries]], right: Sequence[Sequence[TruncatedSeries]]) -> "PresentationMatrix":
        return PresentationMatrix(_matmul(_matmul(left, self.entries), right))

    def to_json(self) -> dict:
        return {"entries": [[x.to_json() for x in r] for r in self.entries]}

    @classmethod
    def from_json(cls, obj: dict) -> "PresentationMatrix":
        return cls(tuple(tuple(TruncatedSeries.from_json(x) for x in r) for r in obj["entries"]))


def _matmul(A, B):
    return tuple(
        tuple(sum((A[i][k] * B[k][j] for k in range(1, len(B))), A[i][0] * B[0][j]) for j in range(len(B[0])))
        for i in range(len(A))
    )


def determinant(M: Sequence[Sequence[TruncatedSeries]]) -> TruncatedSeries:
    """Laplace expansion along the first row."""
    k = len(M)
    if k == 1:
        return M[0][0]
    total = None
    for j in range(k):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * determinant(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def fitting_ideal(P: PresentationMatrix) -> FiniteIdeal:
    """0th Fitting ideal: generated by the maximal (cols x cols) minors."""
    rows, cols = P.shape
    if rows < cols:
        return FiniteIdeal.generated_by((), P.params, P.modulus)
    minors = []
    for sel in combinations(range(rows), cols):
        minors.append(determinant([list(P.entries[i]) for i in sel]))
    return FiniteIdeal.generated_by(minors)


def random_unit_matrix(rng: np.random.Generator, params: RingParams, modulus, size: int) -> tuple:
    """Product of a unit-diagonal matrix and random elementary transvections."""
    D = len(modulus) - 1
    p, N = params.p, params.N

    def rand_elem():
        return TruncatedSeries(params, rng.integers(0, N, size=(params.ext, D)), modulus)

    def rand_unit():
        c = rng.integers(0, N, size=(params.ext, D))
        c[0, 0] = int(rng.integers(1, p)) + p * int(rng.integers(0, N // p))
        if params.ext == 2:
            c[1, 0] = p * int(rng.integers(0, N // p))
        return TruncatedSeries(params, c, modulus)

    zero = TruncatedSeries.zero(params, modulus)
    M = [[rand_unit() if i == j else zero for j in range(size)] for i in range(size)]
    for _ in range(2 * size):
        i, j = (int(x) for x in rng.choice(size, 2, replace=False)) if size > 1 else (0, 0)
        if i == j:
            continue
        t = rand_elem()
        M[i] = [a + t * b for a, b in zip(M[i], M[j])]
    return tuple(tuple(r) for r in M)


# -- bipartite systems ---------------------------------------------------------------

def _key(S: Sequence[int]) -> str:
    return "*".join(str(q) for q in sorted(S)) or "1"


def _parse_key(k: str) -> tuple:
    return () if k == "1" else tuple(sorted(int(q) for q in k.split("*")))


def parity_label(S: Sequence[int]) -> str:
    return "DEFINITE" if len(S) % 2 else "INDEFINITE"


@dataclass
class BipartiteSystem:
    """Vertices are squarefree products of ``primes``.

    ``kappa[S]`` (indefinite S) is a rank-r vector and ``lam[S]`` (definite S) an
    element of Z/p^n[X]/(modulus).  Both reciprocity maps at ell read coordinate
    ``coordinate[ell]`` of a class and multiply by the units ``d_unit[ell]``
    resp. ``v_unit[ell]``.
    """

    params: RingParams
    modulus: tuple
    r: int
    primes: tuple
    coordinate: dict
    d_unit: dict
    v_unit: dict
    kappa: dict = field(default_factory=dict)
    lam: dict = field(default_factory=dict)
    parity: dict = field(default_factory=dict)

    def vertices(self) -> list:
        out = []
        for k in range(len(self.primes) + 1):
            out.extend(tuple(c) for c in combinations(sorted(self.primes), k))
        return out

    def label(self, S) -> str:
        return self.parity.get(_key(S), parity_label(S))

    def partial(self, ell: int, k: Sequence[TruncatedSeries]) -> TruncatedSeries:
        return self.d_unit[ell] * k[self.coordinate[ell]]

    def v(self, ell: int, k: Sequence[TruncatedSeries]) -> TruncatedSeries:
        return self.v_unit[ell] * k[self.coordinate[ell]]

    def to_json(self) -> dict:
        return {
            "p": self.params.p,
            "n": self.params.n,
            "modulus": [str(x) for x in self.modulus],
            "r": self.r,
            "primes": list(self.primes),
            "coordinate": {str(q): c for q, c in self.coordinate.items()},
            "d_unit": {str(q): u.to_json() for q, u in self.d_unit.items()},
            "v_unit": {str(q): u.to_json() for q, u in self.v_unit.items()},
            "kappa": {k: [x.to_json() for x in vec] for k, vec in sorted(self.kappa.items())},
            "lambda": {k: x.to_json() for k, x in sorted(self.lam.items())},
            "parity": dict(sorted(self.parity.items())),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BipartiteSystem":
        try:
            params = RingParams(int(obj["p"]), int(obj["n"]))
            modulus = tuple(int(x) for x in obj["modulus"])
            ts = TruncatedSeries.from_json
            return cls(
                params,
                modulus,
                int(obj["r"]),
                tuple(int(q) for q in obj["primes"]),
                {int(q): int(c) for q, c in obj["coordinate"].items()},
                {int(q): ts(u) for q, u in obj["d_unit"].items()},
                {int(q): ts(u) for q, u in obj["v_unit"].items()},
                {k: [ts(x) for x in vec] for k, vec in obj.get("kappa", {}).items()},
                {k: ts(x) for k, x in obj.get("lambda", {}).items()},
                dict(obj.get("parity", {})),
            )
        except KeyError as exc:
            raise MalformedSystem("missing field %s" % exc) from exc


def _is_unit(u: TruncatedSeries) -> bool:
    # invertible iff 1 is a multiple of u in the quotient ring
    try:
        TruncatedSeries.one(u.params, u.modulus).exact_divide(u)
    except ArithmeticError:
        return False
    return True


def _validate(sys: BipartiteSystem) -> None:
    if len(set(sys.coordinate[q] for q in sys.primes)) != len(sys.primes):
        raise MalformedSystem("coordinates of distinct primes must differ")
    for q in sys.primes:
        if not 0 <= sys.coordinate[q] < sys.r:
            raise MalformedSystem("coordinate of %d outside 0..%d" % (q, sys.r - 1))
        for name, table in (("d_unit", sys.d_unit), ("v_unit", sys.v_unit)):
            if q not in table or not _is_unit(table[q]):
                raise MalformedSystem("%s[%d] is missing or not a unit" % (name, q))
    for S in sys.vertices():
        lab = sys.label(S)
        if lab not in ("DEFINITE", "INDEFINITE"):
            raise MalformedSystem("vertex %s has label %r" % (_key(S), lab))
        for q in sys.primes:
            if q in S:
                continue
            if sys.label(S + (q,)) == lab:
                raise MalformedSystem("edge %s -- %s joins vertices of equal parity" % (_key(S), _key(S + (q,))))
        k = _key(S)
        if lab == "INDEFINITE":
            if k not in sys.kappa or len(sys.kappa[k]) != sys.r:
                raise MalformedSystem("indefinite vertex %s needs a rank-%d class" % (k, sys.r))
        elif k not in sys.lam:
            raise MalformedSystem("definite vertex %s needs an element" % k)


def verify_bipartite(sys: BipartiteSystem) -> Report:
    """Check both reciprocity laws on every edge S -- S*ell."""
    _validate(sys)
    rep = Report("bipartite", info={"primes": list(sys.primes), "r": sys.r})
    for S in sys.vertices():
        for q in sys.primes:
            if q in S:
                continue
            T = tuple(sorted(S + (q,)))
            if sys.label(T) == "INDEFINITE":
                lhs = sys.partial(q, sys.kappa[_key(T)])
                rhs = sys.lam[_key(S)]
                law = "partial"
            else:
                lhs = sys.v(q, sys.kappa[_key(S)])
                rhs = sys.lam[_key(T)]
                law = "v"
            rep.add(lhs == rhs, edge=[_key(S), _key(T)], ell=q, law=law)
    return rep


def build_bipartite(rng: np.random.Generator, params: RingParams, modulus, primes: Sequence[int],
                    r: Optional[int] = None) -> BipartiteSystem:
    """Random definite elements, then classes whose ell-coordinates are forced by the laws."""
    primes = tuple(sorted(primes))
    r = max(len(primes), 1) if r is None else r
    if r < len(primes):
        raise ValueError("rank %d cannot separate %d primes" % (r, len(primes)))
    modulus = tuple(modulus)
    D = len(modulus) - 1
    N, p = params.N, params.p

    def rand_elem():
        return TruncatedSeries(params, rng.integers(0, N, size=(1, D)), modulus)

    def rand_unit():
        c = rng.integers(0, N, size=(1, D))
        c[0, 0] = int(rng.integers(1, p)) + p * int(rng.integers(0, N // p))
        return TruncatedSeries(params, c, modulus)

    coords = {q: i for i, q in enumerate(primes)}
    sys = BipartiteSystem(params, modulus, r, primes, coords,
                          {q: rand_unit() for q in primes}, {q: rand_unit() for q in primes})
    verts = sys.vertices()
    for S in verts:
        if parity_label(S) == "DEFINITE":
            sys.lam[_key(S)] = rand_elem()
    for S in verts:
        if parity_label(S) != "INDEFINITE":
            continue
        vec = [rand_elem() for _ in range(r)]
        for q in primes:
            if q in S:
                target = sys.lam[_key(tuple(x for x in S if x != q))]
                vec[coords[q]] = target.exact_divide(sys.d_unit[q])
            else:
                target = sys.lam[_key(S + (q,))]
                vec[coords[q]] = target.exact_divide(sys.v_unit[q])
        sys.kappa[_key(S)] = vec
    return sys


def perturb_edge(sys: BipartiteSystem, S: Sequence[int]) -> BipartiteSystem:
    """Negative control: add 1 to lambda(S) (S definite)."""
    k = _key(S)
    if k not in sys.lam:
        raise ValueError("%s is not a definite vertex" % k)
    lam = dict(sys.lam)
    lam[k] = lam[k] + 1
    return BipartiteSystem(sys.params, sys.modulus, sys.r, sys.primes, sys.coordinate,
                           sys.d_unit, sys.v_unit, dict(sys.kappa), lam, dict(sys.parity))


# -- class families ------------------------------------------------------------------

def check_class_trace(fam: ThetaFamily, cor: Callable = project, res: Callable = norm_xi) -> Report:
    """``cor(k_{m+1}) = -res(k_{m-1})`` for 1 <= m < M, componentwise."""
    if fam.ap_mod != 0:
        raise ValueError("the class trace relation is modeled for a_p = 0, got %d" % fam.a_p)
    rep = Report("class_trace", info={"M": fam.M, "r": fam.r})
    for m in range(1, fam.M):
        for j in range(fam.r):
            diff = cor(fam.levels[m + 1][j]) + res(fam.levels[m - 1][j])
            if diff.is_zero():
                rep.add(True, m=m, component=j)
            else:
                i = int(np.nonzero(diff.array.any(axis=0))[0][0])
                rep.add(False, m=m, component=j, witness={"index": i, "value": diff.coeffs[i]})
    return rep


def diagonal_product(entries: Sequence[TruncatedSeries]) -> TruncatedSeries:
    return math.prod(entries[1:], start=entries[0])
