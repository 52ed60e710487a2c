import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signed_iwasawa import signed_decomposition as sd
from signed_iwasawa import stabilization as stb
from signed_iwasawa.iwasawa_rings import RingParams

FIELDS = [(0, 5), (0, 7), (5, 5), (0, 3), (3, 3), (1, 5)]
rats = st.fractions(min_value=-50, max_value=50, max_denominator=20)


@pytest.mark.parametrize("ap,p", FIELDS)
def test_roots_satisfy_hecke_polynomial(ap, p):
    F = stb.quad_field(ap, p)
    for c in (F.alpha, F.beta):
        assert c * c - ap * c + p == F(0)
    assert F.alpha + F.beta == F(ap) and F.alpha * F.beta == F(p)
    assert F.alpha.conjugate() == F.beta


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(FIELDS), rats, rats, rats, rats)
def test_quadratic_field_axioms(fp, a, b, c, d):
    F = stb.quad_field(*fp)
    x, y = F(a, b), F(c, d)
    assert x * y == y * x
    assert (x + y).norm() == (x + y) * (x + y).conjugate()
    if not x.is_zero():
        assert x * x.inverse() == F(1)
        assert (x / x) == F(1)
    assert (x * y).norm() == x.norm() * y.norm()


def test_root_valuations():
    assert stb.quad_field(0, 5).alpha.valuation() == Fraction(1, 2)
    assert stb.quad_field(5, 5).beta.valuation() == Fraction(1, 2)
    F = stb.quad_field(1, 5)
    assert sorted(F.root_valuations()) == [0, 1]


def test_ord_p():
    assert stb.ord_p(Fraction(50, 3), 5) == 2
    assert stb.ord_p(Fraction(3, 25), 5) == -2
    assert stb.ord_p(0, 5) is None


@pytest.mark.parametrize("ap,p", [(5, 5), (0, 5), (7, 7)])
def test_weil_bound_skipped_when_p_divides_ap(ap, p):
    stb.quad_field(ap, p)


@pytest.mark.parametrize("ap,p", [(5, 3), (4, 3), (-4, 3), (6, 7)])
def test_weil_bound_violations(ap, p):
    with pytest.raises(stb.WeilBoundViolation):
        stb.quad_field(ap, p)


@pytest.mark.parametrize("ap,p", [(0, 5), (0, 7), (5, 5)])
def test_linear_relations_on_random_families(ap, p):
    F = stb.quad_field(ap, p)
    rng = np.random.default_rng(ap * 100 + p)
    for _ in range(5):
        fam = sd.random_family(rng, RingParams(p, 1), ap, 2)
        assert stb.check_linear_relations(fam, F)


@pytest.mark.parametrize("ap,p,n", [(0, 5, 1), (0, 3, 2), (3, 3, 2)])
def test_projection_compat(ap, p, n):
    F = stb.quad_field(ap, p)
    fam = sd.random_family(np.random.default_rng(1), RingParams(p, n), ap, 3)
    for root in ("alpha", "beta"):
        rep0 = stb.check_projection_compat(fam, F, root, 0)
        assert rep0 and all(c["exact"] for c in rep0.checks if "exact" in c)
        for m in (1, 2):
            assert stb.check_projection_compat(fam, F, root, m)


def test_projection_compat_detects_broken_family():
    from signed_iwasawa.iwasawa_rings import GroupRingElement

    F = stb.quad_field(0, 5)
    params = RingParams(5, 1)
    fam = sd.random_family(np.random.default_rng(4), params, 0, 2)
    bad = fam.replace_level(2, [fam.levels[2][0] + GroupRingElement.one(params, 2)])
    assert not stb.check_projection_compat(bad, F, "alpha", 1)


def test_stabilize_rejects_mismatched_field():
    fam = sd.random_family(np.random.default_rng(0), RingParams(5, 1), 0, 1)
    with pytest.raises(ValueError):
        stb.stabilize(fam, stb.quad_field(0, 7), "alpha", 1)


@pytest.mark.parametrize(
    "ap,p,inert,split",
    [(0, 5, -6, -4), (5, 5, 19, 11), (0, 7, -8, -6)],
)
def test_leading_identities_unit_factors(ap, p, inert, split):
    F = stb.quad_field(ap, p)
    ri = stb.leading_identity_inert(F)
    rs = stb.leading_identity_split(F)
    assert ri.passed and rs.passed
    assert ri.info["unit_factor_int"] == str(inert) == str(ap * ap - p - 1)
    assert rs.info["unit_factor_int"] == str(split) == str(1 - 2 * ap + ap * ap - p)
    assert ri.info["unit_factor_valuation"] == rs.info["unit_factor_valuation"] == "0"


def test_leading_identity_numeric_instance():
    F = stb.quad_field(0, 5)
    # a_p = 0: l1^2 - 5 l0^2 = -6 u
    assert stb.leading_identity_inert(F, lam0_triv=1, lam1_triv=1, u_frak=Fraction(4, 6)).passed
    assert not stb.leading_identity_inert(F, lam0_triv=1, lam1_triv=1, u_frak=1).passed


def test_formal_poly_square_substitution():
    F = stb.quad_field(0, 5)
    va, u = stb.FormalPoly.var(F, "va"), stb.FormalPoly.var(F, "u")
    e = (va * va * va).substitute_square("va", u * 3)
    assert e == va * u * 3


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_plus_vanishing(seed):
    rng = np.random.default_rng(seed)
    params = RingParams(3, 2)
    fam = sd.random_family(rng, params, 0, 2, kind="pm")
    assert stb.plus_vanishing_check(fam)


def test_stabilized_json():
    F = stb.quad_field(5, 5)
    fam = sd.random_family(np.random.default_rng(0), RingParams(5, 1), 5, 1)
    out = json.loads(json.dumps(stb.stabilize_family(fam, F, "beta").to_json()))
    assert out["root"] == "beta" and len(out["elements"]) == 2
    x = F(Fraction(1, 3), -2)
    assert stb.QuadraticScalar.from_json(F, x.to_json()) == x
