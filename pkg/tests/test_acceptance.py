"""Acceptance criteria 1-11, each at its stated tolerance and time limit.

Run under pytest (a summary block is printed at the end of the session) or
directly with ``python3 tests/test_acceptance.py`` for one line per criterion.
Every check is exact; the only tolerance is the wall-clock limit.
"""

from __future__ import annotations

import itertools
import os
import subprocess
import sys
import time
import warnings

import numpy as np

from signed_iwasawa import admissible_arithmetic as adm
from signed_iwasawa import ideals_and_harness as ih
from signed_iwasawa import local_points_coleman as lpc
from signed_iwasawa import signed_decomposition as sd
from signed_iwasawa import stabilization as stb
from signed_iwasawa.iwasawa_rings import (
    GroupRingElement,
    RingParams,
    TruncatedSeries,
    norm_xi,
    omega,
    omega_factors,
    project,
)

RESULTS: dict = {}
TOTAL_LIMIT = 300.0


def _record(num: int, limit: float, body) -> None:
    t = time.perf_counter()
    failures = body()
    dt = time.perf_counter() - t
    if dt >= limit:
        failures.append("runtime %.2f s exceeds %g s" % (dt, limit))
    ok = not failures
    RESULTS[num] = (ok, dt, limit, failures)
    line = "criterion %2d: %s (%.2f s, limit %g s)" % (num, "PASS" if ok else "FAIL", dt, limit)
    print(line)
    assert ok, line + "\n  " + "\n  ".join(failures[:10])


def _seeded(num: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([20231, num]))


GRID = [RingParams(p, n) for p in (3, 5, 7) for n in (1, 2, 3)]
SIGNED_GRID = [(RingParams(p, n), M) for p in (3, 5) for n in (1, 2) for M in (1, 2, 3)]


# -- 1 ----------------------------------------------------------------------------------

def criterion_1() -> list:
    bad = []
    for params in GRID:
        X = TruncatedSeries.X(params)
        for m in range(5):
            f = omega_factors(params, m)
            if f.omega != X * f.omega_tilde_plus * f.omega_tilde_minus:
                bad.append("omega factorization at %r m=%d" % (params, m))
            # omega^+/- = omega / omega~^-/+ : check by multiplying back
            if f.omega_plus * f.omega_tilde_minus != f.omega or f.omega_minus * f.omega_tilde_plus != f.omega:
                bad.append("signed quotient at %r m=%d" % (params, m))
    return bad


def test_criterion_1_omega_factorization():
    _record(1, 5, criterion_1)


# -- 2 ----------------------------------------------------------------------------------

def criterion_2() -> list:
    rng = _seeded(2)
    bad = []
    for params in GRID:
        for m in range(5):
            size = params.p**m
            C = rng.integers(0, params.N, size=(200, size))
            for row in C:
                x = GroupRingElement(params, m, row[None, :])
                if project(norm_xi(x)) != x.scale(params.p):
                    bad.append("project o norm_xi != p at %r m=%d" % (params, m))
                    break
    return bad


def test_criterion_2_transition_maps():
    _record(2, 5, criterion_2)


# -- 3 ----------------------------------------------------------------------------------

def criterion_3() -> list:
    rng = _seeded(3)
    bad = []
    for params, M in SIGNED_GRID:
        D = params.p**M
        for t in range(50):
            plus = sd.random_series(rng, params, D - 1)
            minus = sd.random_series(rng, params, D - 1)
            fam = sd.pm_synthesize(plus, minus, params, M)
            tag = "%r M=%d pair %d" % (params, M, t)
            if M >= 2 and not sd.check_norm_relation(fam, "pm"):
                bad.append("norm relation: " + tag)
            if not sd.annihilator_check(fam):
                bad.append("annihilation: " + tag)
            if not sd.pm_extract(fam).contains(plus, minus):
                bad.append("round trip: " + tag)
    return bad


def test_criterion_3_pm_round_trip():
    _record(3, 30, criterion_3)


# -- 4 ----------------------------------------------------------------------------------

def criterion_4() -> list:
    rng = _seeded(4)
    bad = []
    for params, M in SIGNED_GRID:
        D = params.p**M
        for ap in (0, params.p):
            for t in range(20):
                sharp = sd.random_series(rng, params, D - 1)
                flat = sd.random_series(rng, params, D - 1)
                fam = sd.sprung_synthesize(sharp, flat, params, ap, M)
                if not sd.sprung_decompose(fam).contains(sharp, flat):
                    bad.append("coset misses input: %r M=%d a_p=%d pair %d" % (params, M, ap, t))
    return bad


def test_criterion_4_sprung_round_trip():
    _record(4, 60, criterion_4)


# -- 5 ----------------------------------------------------------------------------------

STAB_FIELDS = ((0, 5), (0, 7), (5, 5))


def criterion_5() -> list:
    rng = _seeded(5)
    bad = []
    for ap, p in STAB_FIELDS:
        field = stb.quad_field(ap, p)
        params = RingParams(p, 1)
        for t in range(20):
            fam = sd.random_family(rng, params, ap, 2)
            rep = stb.check_linear_relations(fam, field)
            if not rep:
                bad.append("linear relations (a_p=%d, p=%d) family %d: %s" % (ap, p, t, rep.failures()[:1]))
        ri = stb.leading_identity_inert(field)
        rs = stb.leading_identity_split(field)
        for rep, expect in ((ri, ap * ap - p - 1), (rs, 1 - 2 * ap + ap * ap - p)):
            if not rep.passed:
                bad.append("%s failed for (a_p=%d, p=%d): %s" % (rep.name, ap, p, rep.failures()))
            if rep.info["unit_factor_int"] != str(expect):
                bad.append("%s unit factor %s != %d" % (rep.name, rep.info["unit_factor_int"], expect))
            if ap % p == 0 and rep.info["unit_factor_valuation"] != "0":
                bad.append("%s unit factor has valuation %s" % (rep.name, rep.info["unit_factor_valuation"]))
    return bad


def test_criterion_5_stabilization_identities():
    _record(5, 10, criterion_5)


# -- 6 ----------------------------------------------------------------------------------

def criterion_6() -> list:
    rng = _seeded(6)
    bad = []
    configs = [(RingParams(p, n), M) for p in (3, 5) for n in (1, 2) for M in (1, 2)]
    for t in range(50):
        params, M = configs[t % len(configs)]
        D = params.p**M
        # l_0 = l^+ mod X, so l_0(1) = 0 exactly when l^+ has no constant term
        plus = sd.random_series(rng, params, D - 2) * TruncatedSeries.X(params)
        minus = sd.random_series(rng, params, D - 1)
        fam = sd.pm_synthesize(plus, minus, params, M)
        if fam.levels[0][0].eval_trivial() != 0:
            bad.append("instance %d does not have l_0(1) = 0" % t)
            continue
        pair = sd.pm_extract(fam)
        lp = pair.first[0].eval_trivial()
        lm = pair.second[0].eval_trivial()
        l1 = fam.levels[1][0].eval_trivial()
        if lp != 0:
            bad.append("instance %d: l^+(1) = %d" % (t, lp))
        if (lm + l1) % params.N:
            bad.append("instance %d: l^-(1) = %d, l_1(1) = %d" % (t, lm, l1))
        if not stb.plus_vanishing_check(fam):
            bad.append("instance %d: plus_vanishing_check" % t)
    return bad


def test_criterion_6_plus_vanishing():
    _record(6, 10, criterion_6)


# -- 7 ----------------------------------------------------------------------------------

def criterion_7() -> list:
    """The containment tested is the stated one, Col^s in w~^s; it is expected to fail (see README)."""
    bad = []
    for n in (1, 2):
        for M in (1, 2, 3):
            seed = 100 * n + M
            sysm = lpc.generate_system(RingParams(5, n), M, rho=2, seed=seed)
            rep = lpc.verify_system(sysm)
            if not rep:
                bad.append("system n=%d M=%d violates invariants: %s" % (n, M, rep.failures()))
            if M < 3:
                continue
            for m in range(M + 1):
                for sign in (1, -1):
                    lbl = "n=%d m=%d %s" % (n, m, "+" if sign > 0 else "-")
                    lit = lpc.check_image_containment(sysm, m, sign, trials=100, seed=seed + m)
                    if not lit:
                        bad.append("Col^%s image not in w~^%s (%s): %d/100 inputs outside"
                                   % (lbl[-1], lbl[-1], lbl, lit.failures()[0]["failing_trials"]))
                    kp = lpc.kernel_probe(sysm, m, sign)
                    if not kp:
                        bad.append("kernel != orthogonal complement at %s: %s" % (lbl, kp.failures()))
            corrupt = lpc.corrupt_system(sysm, 2, seed)
            if lpc.verify_system(corrupt):
                bad.append("corrupted system passes invariants (n=%d)" % n)
            neg = lpc.check_image_containment(corrupt, 2, 1, trials=100, seed=seed, factor_sign=-1)
            if neg:
                bad.append("corrupted system passes containment (n=%d)" % n)
    return bad


def test_criterion_7_local_points():
    _record(7, 60, criterion_7)


# -- 8 ----------------------------------------------------------------------------------

def criterion_8() -> list:
    bad = []
    coeffs = (0, 0, 1, -1, 0)
    curve = adm.CurveData(coeffs, 37)
    K = adm.QuadFieldData.build(-3, curve)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            serial = adm.scan_admissible(curve, K, 5, 1, 10**4, jobs=1)
            parallel = adm.scan_admissible(adm.CurveData(coeffs, 37), K, 5, 1, 10**4, jobs=8)
        except adm.EpsilonUniquenessError as exc:
            return ["epsilon uniqueness assertion fired: %s" % exc]
    got = [(e.ell, e.eps) for e in serial]
    if [(e.ell, e.eps) for e in parallel] != got:
        bad.append("scan differs between jobs=1 and jobs=8")
    oracle = adm.oracle_scan(coeffs, [37], -3, 5, 1, 10**4)
    if got != oracle:
        diff = sorted(set(got) ^ set(oracle))[:5]
        bad.append("scan != oracle recomputation; symmetric difference starts %s" % diff)
    if not got or got[0] != (2, 1):
        bad.append("ell = 2 with eps = +1 is not the first admissible prime: %s" % got[:1])
    if any(e.degenerate for e in serial):
        bad.append("degenerate eps tie in scan")
    first = [e.ell for e in serial[:4]]
    if len(first) < 4:
        bad.append("fewer than 4 admissible primes")
    for k in range(len(first) + 1):
        for sub in itertools.combinations(first, k):
            S = adm.AdmissibleProduct(sub, 1)
            if adm.classify_S(S, K) != adm.parity_rule(S):
                bad.append("classify_S(%s) disagrees with the parity rule" % (sub,))
    if adm.classify_S(adm.AdmissibleProduct((), 1), K) is not adm.Parity.INDEFINITE:
        bad.append("S = 1 is not INDEFINITE")
    return bad


def test_criterion_8_admissible_oracle():
    _record(8, 120, criterion_8)


# -- 9 ----------------------------------------------------------------------------------

def criterion_9() -> list:
    rng = _seeded(9)
    bad = []
    for p, n, M in ((3, 2, 1), (3, 2, 2), (5, 1, 1), (5, 2, 1)):
        params = RingParams(p, n)
        mod = omega(params, M)
        D = len(mod) - 1

        def elem():
            return TruncatedSeries(params, rng.integers(0, params.N, size=(1, D)), mod)

        zero = TruncatedSeries.zero(params, mod)
        for size in (1, 2, 3):
            diag = [elem() for _ in range(size)]
            P = ih.PresentationMatrix([[diag[i] if i == j else zero for j in range(size)] for i in range(size)])
            if ih.fitting_ideal(P) != ih.ideal(ih.diagonal_product(diag)):
                bad.append("Fitting(diag) != product ideal (p=%d n=%d M=%d size=%d)" % (p, n, M, size))
        for _ in range(5):
            a, b, c = elem(), elem(), elem()
            I, J, K = ih.ideal(a, b), ih.ideal(a), ih.ideal(a * c)
            if not ih.ideal_contains(I, I):
                bad.append("containment not reflexive")
            if not (ih.ideal_contains(I, J) and ih.ideal_contains(J, K) and ih.ideal_contains(I, K)):
                bad.append("containment not transitive")
        T = lambda *cs: TruncatedSeries(params, list(cs), mod)  # noqa: E731
        sq = ih.ideal_square(ih.ideal(T(p), T(0, 1))).normalized()
        want = ih.ideal(T(p * p), T(0, p), T(0, 0, 1)).normalized()
        if sq != want:
            bad.append("(p, X)^2 != (p^2, pX, X^2) for p=%d n=%d M=%d" % (p, n, M))
        A = ih.PresentationMatrix([[elem() for _ in range(2)] for _ in range(3)])
        F = ih.fitting_ideal(A)
        for t in range(20):
            L = ih.random_unit_matrix(rng, params, mod, 3)
            R = ih.random_unit_matrix(rng, params, mod, 2)
            if ih.fitting_ideal(A.transform(L, R)) != F:
                bad.append("Fitting ideal changed under unit transformation %d (p=%d n=%d)" % (t, p, n))
    return bad


def test_criterion_9_ideals():
    _record(9, 10, criterion_9)


# -- 10 ---------------------------------------------------------------------------------

def criterion_10() -> list:
    rng = _seeded(10)
    bad = []
    for p, n, M, primes in ((3, 2, 2, [2, 53, 107]), (5, 1, 1, [2, 17, 23, 47]), (3, 1, 2, [5, 11])):
        params = RingParams(p, n)
        sysb = ih.build_bipartite(rng, params, omega(params, M), primes)
        rep = ih.verify_bipartite(sysb)
        if not rep:
            bad.append("constructive system fails: %s" % rep.failures()[:1])
        definite = [S for S in sysb.vertices() if len(S) % 2]
        for S in definite:
            if ih.verify_bipartite(ih.perturb_edge(sysb, S)):
                bad.append("perturbation at %s not detected" % (S,))
    for p, n, M in ((3, 2, 3), (5, 1, 2), (3, 1, 3)):
        params = RingParams(p, n)
        for _ in range(5):
            fam = sd.random_family(rng, params, 0, M, r=2, kind="pm")
            if not ih.check_class_trace(fam):
                bad.append("rank-2 class family violates the trace relation (p=%d n=%d M=%d)" % (p, n, M))
    return bad


def test_criterion_10_bipartite():
    _record(10, 10, criterion_10)


# -- 11 ---------------------------------------------------------------------------------

def _selftest_bytes(jobs: int) -> bytes:
    env = dict(os.environ)
    env.pop("SIGNED_IWASAWA_SEED", None)
    proc = subprocess.run(
        [sys.executable, "-m", "signed_iwasawa.cli", "selftest-all", "--seed", "42", "--jobs", str(jobs)],
        capture_output=True, env=env,
    )
    if proc.returncode not in (0, 1):
        raise RuntimeError(proc.stderr.decode())
    return proc.stdout


def criterion_11() -> list:
    bad = []
    a = _selftest_bytes(1)
    b = _selftest_bytes(1)
    c = _selftest_bytes(8)
    if a != b:
        bad.append("two consecutive jobs=1 runs differ")
    if a != c:
        bad.append("jobs=1 and jobs=8 outputs differ")
    if not a.strip():
        bad.append("empty output")
    total = sum(r[1] for k, r in RESULTS.items() if k != 11)
    if total >= TOTAL_LIMIT:
        bad.append("criteria 1-10 took %.1f s in total (limit %g s)" % (total, TOTAL_LIMIT))
    return bad


def test_criterion_11_determinism():
    _record(11, TOTAL_LIMIT, criterion_11)


CRITERIA = [
    (1, 5, criterion_1), (2, 5, criterion_2), (3, 30, criterion_3), (4, 60, criterion_4),
    (5, 10, criterion_5), (6, 10, criterion_6), (7, 60, criterion_7), (8, 120, criterion_8),
    (9, 10, criterion_9), (10, 10, criterion_10), (11, TOTAL_LIMIT, criterion_11),
]


def summary_lines() -> list:
    out = []
    for num in sorted(RESULTS):
        ok, dt, limit, failures = RESULTS[num]
        out.append("criterion %2d: %s (%.2f s, limit %g s)" % (num, "PASS" if ok else "FAIL", dt, limit))
        out.extend("    " + f for f in failures[:6])
    return out


if __name__ == "__main__":
    for num, limit, body in CRITERIA:
        try:
            _record(num, limit, body)
        except AssertionError:
            pass
    print()
    print("\n".join(summary_lines()))
    sys.exit(0 if all(r[0] for r in RESULTS.values()) else 1)
