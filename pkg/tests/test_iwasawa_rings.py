import json
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signed_iwasawa.iwasawa_rings import (
    DivisionError,
    GroupRingElement,
    ParameterMismatch,
    RingParams,
    TruncatedSeries,
    format_poly,
    norm_xi,
    omega,
    omega_factors,
    omega_signed,
    phi_poly,
    project,
)

params_st = st.sampled_from([RingParams(p, n) for p in (3, 5, 7) for n in (1, 2, 3)])


def naive_omega(p, n, m):
    N = p**n
    c = [comb(p**m, k) % N for k in range(p**m + 1)]
    c[0] = 0
    return tuple(c)


@pytest.mark.parametrize("p", [3, 5, 7])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_omega_binomial_expansion(p, n):
    for m in range(4):
        assert omega(RingParams(p, n), m) == naive_omega(p, n, m)


def test_small_cyclotomic_values():
    params = RingParams(3, 2)
    assert phi_poly(params, 1).coeffs == [3, 3, 1]
    f = omega_factors(params, 0)
    assert f.omega.coeffs == [0, 1] and f.omega_tilde_plus.coeffs == [1] and f.omega_tilde_minus.coeffs == [1]
    f2 = omega_factors(params, 2)
    assert f2.omega_tilde_minus == phi_poly(params, 1)
    assert f2.omega_tilde_plus == phi_poly(params, 2)
    assert omega_signed(params, 2, 1) == tuple(int(x) for x in (TruncatedSeries.X(params) * phi_poly(params, 2)).coeffs)


def test_phi_undefined_at_level_zero():
    with pytest.raises(ValueError):
        phi_poly(RingParams(3), 0)


@pytest.mark.parametrize("p,n,ext", [(2, 1, 1), (9, 1, 1), (3, 0, 1), (3, 1, 3)])
def test_bad_params(p, n, ext):
    with pytest.raises(ValueError):
        RingParams(p, n, ext)


@settings(max_examples=40, deadline=None)
@given(params_st, st.integers(0, 3), st.integers(0, 2**32))
def test_series_group_ring_isomorphism(params, m, seed):
    rng = np.random.default_rng(seed)
    x = GroupRingElement(params, m, rng.integers(0, params.N, (1, params.p**m)))
    y = GroupRingElement(params, m, rng.integers(0, params.N, (1, params.p**m)))
    assert GroupRingElement.from_series(x.to_series(), m) == x
    assert (x * y).to_series() == x.to_series() * y.to_series()
    assert (x + y).eval_trivial() == (x.eval_trivial() + y.eval_trivial()) % params.N


def test_gamma_maps_to_one_plus_x():
    params = RingParams(5, 2)
    g = GroupRingElement.group_element(params, 2, 1)
    assert g.to_series().coeffs == [1, 1]
    assert GroupRingElement.group_element(params, 2, 25) == GroupRingElement.one(params, 2)


@settings(max_examples=40, deadline=None)
@given(params_st, st.integers(0, 3), st.integers(0, 2**32))
def test_project_norm_is_multiplication_by_p(params, m, seed):
    rng = np.random.default_rng(seed)
    x = GroupRingElement(params, m, rng.integers(0, params.N, (1, params.p**m)))
    assert project(norm_xi(x)) == x.scale(params.p)


def test_project_is_ring_map():
    params = RingParams(3, 2)
    rng = np.random.default_rng(1)
    x = GroupRingElement(params, 2, rng.integers(0, 9, (1, 9)))
    y = GroupRingElement(params, 2, rng.integers(0, 9, (1, 9)))
    assert project(x * y) == project(x) * project(y)
    assert project(x).eval_trivial() == x.eval_trivial()


def test_project_from_level_zero_rejected():
    with pytest.raises(ValueError):
        project(GroupRingElement.one(RingParams(3), 0))


def test_quadratic_extension_arithmetic():
    params = RingParams(5, 1, 2)  # y^2 = 2
    y = TruncatedSeries(params, [(0, 1)])
    assert (y * y).coeffs == [(params.nonresidue, 0)]
    g = GroupRingElement(params, 1, [(1, 1)] + [(0, 0)] * 4)
    assert GroupRingElement.from_series(g.to_series(), 1) == g


def test_exact_divide():
    params = RingParams(3, 2)
    a = TruncatedSeries(params, [1, 2, 1])
    b = TruncatedSeries(params, [1, 1])
    assert a.exact_divide(b) == b
    with pytest.raises(DivisionError):
        TruncatedSeries(params, [1, 0, 1]).exact_divide(b)


def test_mismatched_rings_rejected():
    a = TruncatedSeries(RingParams(3, 1), [1])
    b = TruncatedSeries(RingParams(3, 2), [1])
    with pytest.raises(ParameterMismatch):
        a + b


def test_json_round_trip():
    params = RingParams(7, 2)
    s = TruncatedSeries(params, [3, 0, 48], omega(params, 1))
    assert TruncatedSeries.from_json(json.loads(json.dumps(s.to_json()))) == s
    g = GroupRingElement(params, 1, list(range(7)))
    assert GroupRingElement.from_json(json.loads(json.dumps(g.to_json()))) == g


def test_format_poly():
    assert format_poly(TruncatedSeries(RingParams(3, 2), [1, 0, 2, 1])) == "1 + 2*X^2 + X^3"
