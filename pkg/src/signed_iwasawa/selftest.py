"""Seeded property suites behind ``selftest-all`` and ``local selftest``.

Each suite receives its own child of ``SeedSequence(seed)`` (spawned in the
fixed order of ``SUITES``), so output depends on the seed alone and not on how
suites are scheduled.  Reports carry no timings.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import admissible_arithmetic as adm
from . import ideals_and_harness as ih
from . import local_points_coleman as lpc
from . import signed_decomposition as sd
from . import stabilization as st
from .iwasawa_rings import (
    GroupRingElement,
    RingParams,
    TruncatedSeries,
    norm_xi,
    omega,
    omega_factors,
    project,
)


class _Suite:
    def __init__(self, name: str):
        self.name = name
        self.checks: dict = {}
        self.notes: dict = {}

    def record(self, check: str, ok: bool, **info):
        entry = self.checks.setdefault(check, {"ok": True, "count": 0})
        entry["count"] += 1
        if not ok:
            entry["ok"] = False
            entry.setdefault("first_failure", info)
        return ok

    def note(self, check: str, **info):
        self.notes[check] = info

    def result(self) -> dict:
        return {"passed": all(c["ok"] for c in self.checks.values()), "checks": self.checks, "notes": self.notes}


def _rand_group_ring(rng, params, m):
    return GroupRingElement(params, m, rng.integers(0, params.N, size=(params.ext, params.p**m)))


def suite_rings(rng) -> dict:
    s = _Suite("iwasawa_rings")
    for p in (3, 5, 7):
        for n in (1, 2, 3):
            params = RingParams(p, n)
            for m in range(5):
                f = omega_factors(params, m)
                s.record("omega_factorization", f.omega == TruncatedSeries.X(params) * f.omega_tilde_plus * f.omega_tilde_minus, p=p, n=n, m=m)
                X = TruncatedSeries.X(params)
                s.record("omega_signed", f.omega_plus == X * f.omega_tilde_plus
                         and f.omega_minus == X * f.omega_tilde_minus, p=p, n=n, m=m)
            for m in range(4):
                for _ in range(20):
                    x = _rand_group_ring(rng, params, m)
                    s.record("project_norm_is_p", project(norm_xi(x)) == x.scale(p), p=p, n=n, m=m)
                    y = _rand_group_ring(rng, params, m)
                    s.record("series_round_trip", GroupRingElement.from_series((x * y).to_series(), m) == x * y)
    return s.result()


def suite_signed(rng) -> dict:
    s = _Suite("signed_decomposition")
    for p in (3, 5):
        for n in (1, 2):
            params = RingParams(p, n)
            for M in (1, 2, 3):
                D = p**M
                for _ in range(3):
                    plus = sd.random_series(rng, params, D - 1)
                    minus = sd.random_series(rng, params, D - 1)
                    fam = sd.pm_synthesize(plus, minus, params, M)
                    if M >= 2:
                        s.record("pm_norm_relation", bool(sd.check_norm_relation(fam, "pm")))
                    s.record("pm_annihilation", bool(sd.annihilator_check(fam)))
                    pair = sd.pm_extract(fam)
                    s.record("pm_round_trip", pair.contains(plus, minus), p=p, n=n, M=M)
                for ap in (0, p):
                    sharp = sd.random_series(rng, params, D - 1)
                    flat = sd.random_series(rng, params, D - 1)
                    fam = sd.sprung_synthesize(sharp, flat, params, ap, M)
                    if M >= 2:
                        s.record("sprung_norm_relation", bool(sd.check_norm_relation(fam)))
                    s.record("sprung_round_trip", sd.sprung_decompose(fam).contains(sharp, flat), p=p, n=n, M=M, ap=ap)
    return s.result()


def suite_stabilization(rng) -> dict:
    s = _Suite("stabilization")
    for ap, p in ((0, 5), (0, 7), (5, 5)):
        field = st.quad_field(ap, p)
        params = RingParams(p, 1)
        for _ in range(3):
            fam = sd.random_family(rng, params, ap, 2)
            s.record("linear_relations", bool(st.check_linear_relations(fam, field)), ap=ap, p=p)
            for root in ("alpha", "beta"):
                for m in (0, 1):
                    s.record("projection_compat", bool(st.check_projection_compat(fam, field, root, m)))
        for name, fn in (("inert", st.leading_identity_inert), ("split", st.leading_identity_split)):
            rep = fn(field)
            s.record("leading_identity_" + name, rep.passed, ap=ap, p=p)
            s.note("unit_factor_%s_%d_%d" % (name, ap, p), value=rep.info["unit_factor_int"],
                   valuation=rep.info["unit_factor_valuation"])
    params = RingParams(3, 2)
    for _ in range(10):
        plus = sd.random_series(rng, params, 8) * TruncatedSeries.X(params)
        minus = sd.random_series(rng, params, 8)
        fam = sd.pm_synthesize(plus, minus, params, 2)
        s.record("plus_vanishing", bool(st.plus_vanishing_check(fam)))
    return s.result()


def local_selftest(seed: int, p: int = 5, n: int = 1, M: int = 2, rho: int = 2, trials: int = 100) -> dict:
    """Generate a system and run every check on it; the JSON certificate of ``local selftest``."""
    s = _Suite("local_points_coleman")
    params = RingParams(p, n, 2)
    sysm = lpc.generate_system(params, M, rho, seed)
    s.record("system_invariants", bool(lpc.verify_system(sysm)))
    for m in range(M + 1):
        for sign in (1, -1):
            lbl = "%d%s" % (m, "+" if sign > 0 else "-")
            derived = lpc.check_image_containment(sysm, m, sign, trials, seed, factor_sign=lpc.derived_factor_sign(sign))
            s.record("image_containment", derived.passed, level=lbl)
            literal = lpc.check_image_containment(sysm, m, sign, trials, seed)
            s.note("literal_factor_containment_" + lbl, holds=literal.passed)
            s.record("kernel_is_orthogonal_complement", bool(lpc.kernel_probe(sysm, m, sign)), level=lbl)
    if M >= 2:
        bad = lpc.corrupt_system(sysm, 2, seed)
        s.record("negative_control_invariants", not lpc.verify_system(bad).passed)
        rep = lpc.check_image_containment(bad, 2, 1, trials, seed, factor_sign=-1)
        s.record("negative_control_containment", not rep.passed)
    out = s.result()
    out["system"] = {"p": p, "n": n, "M": M, "rho": rho, "seed": seed}
    return out


def suite_local(rng) -> dict:
    return local_selftest(int(rng.integers(0, 2**31)), n=1, M=2)


def suite_admissible(rng) -> dict:
    s = _Suite("admissible_arithmetic")
    curve = adm.CurveData((0, 0, 1, -1, 0), 37)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        K = adm.QuadFieldData.build(-3, curve)
        scan = adm.scan_admissible(curve, K, 5, 1, 2000)
    oracle = adm.oracle_scan(curve.coefficients, [37], -3, 5, 1, 2000)
    s.record("oracle_equivalence", [(e.ell, e.eps) for e in scan] == oracle)
    s.record("two_is_admissible_plus", bool(scan) and (scan[0].ell, scan[0].eps) == (2, 1))
    s.note("scan_size", value=len(scan))
    first = [e.ell for e in scan[:4]]
    for mask in range(1 << len(first)):
        S = adm.AdmissibleProduct(tuple(q for i, q in enumerate(first) if mask >> i & 1), 1)
        s.record("classify_parity", adm.classify_S(S, K) == adm.parity_rule(S))
    return s.result()


def suite_ideals(rng) -> dict:
    s = _Suite("ideals_and_harness")
    for p in (3, 5):
        for n in (1, 2):
            params = RingParams(p, n)
            for M in (1, 2):
                mod = omega(params, M)
                D = len(mod) - 1
                for size in (1, 2, 3):
                    diag = [TruncatedSeries(params, rng.integers(0, params.N, size=(1, D)), mod) for _ in range(size)]
                    zero = TruncatedSeries.zero(params, mod)
                    P = ih.PresentationMatrix([[diag[i] if i == j else zero for j in range(size)] for i in range(size)])
                    s.record("fitting_diagonal", ih.fitting_ideal(P) == ih.ideal(ih.diagonal_product(diag)))
    params = RingParams(3, 2)
    mod = omega(params, 2)
    T = lambda c: TruncatedSeries(params, c, mod)  # noqa: E731
    s.record("square_p_X", ih.ideal_square(ih.ideal(T([3]), T([0, 1]))) == ih.ideal(T([9]), T([0, 3]), T([0, 0, 1])))
    A = ih.PresentationMatrix([[T(rng.integers(0, 9, 9)) for _ in range(2)] for _ in range(3)])
    F = ih.fitting_ideal(A)
    for _ in range(5):
        L = ih.random_unit_matrix(rng, params, mod, 3)
        R = ih.random_unit_matrix(rng, params, mod, 2)
        s.record("fitting_unit_invariance", ih.fitting_ideal(A.transform(L, R)) == F)
    sysb = ih.build_bipartite(rng, params, mod, [2, 53, 107])
    s.record("bipartite_constructive", bool(ih.verify_bipartite(sysb)))
    s.record("bipartite_perturbation_detected", not ih.verify_bipartite(ih.perturb_edge(sysb, (53,))).passed)
    fam = sd.random_family(rng, params, 0, 3, r=2, kind="pm")
    s.record("class_trace", bool(ih.check_class_trace(fam)))
    return s.result()


SUITES = (
    ("iwasawa_rings", suite_rings),
    ("signed_decomposition", suite_signed),
    ("stabilization", suite_stabilization),
    ("local_points_coleman", suite_local),
    ("admissible_arithmetic", suite_admissible),
    ("ideals_and_harness", suite_ideals),
)


def _run_one(args) -> tuple:
    index, seed = args
    name, fn = SUITES[index]
    child = np.random.SeedSequence(seed).spawn(len(SUITES))[index]
    return name, fn(np.random.default_rng(child))


def run_all(seed: int, jobs: int = 1) -> dict:
    tasks = [(i, seed) for i in range(len(SUITES))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(SUITES))) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    suites = dict(results)
    return {"seed": seed, "passed": all(r["passed"] for r in suites.values()), "suites": suites}
