import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signed_iwasawa import ideals_and_harness as ih
from signed_iwasawa import signed_decomposition as sd
from signed_iwasawa.iwasawa_rings import RingParams, TruncatedSeries, omega

P9 = RingParams(3, 2)
MOD = omega(P9, 1)  # degree 3, so the quotient has 9^3 elements


def T(*c, mod=MOD):
    return TruncatedSeries(P9, list(c), mod)


def _brute_principal(g):
    out = set()
    for c in itertools.product(range(9), repeat=3):
        out.add(tuple((g * T(*c)).padded(3)[0]))
    return out


coeffs = st.lists(st.integers(0, 8), min_size=1, max_size=3)


@settings(max_examples=25, deadline=None)
@given(coeffs)
def test_principal_ideal_matches_brute_force(c):
    g = T(*c)
    I = ih.ideal(g)
    elems = _brute_principal(g)
    assert len(elems) == 3**I.length
    assert all(I.contains_element(T(*e)) for e in elems)


@settings(max_examples=25, deadline=None)
@given(coeffs, coeffs, coeffs)
def test_containment_is_reflexive_and_transitive(a, b, c):
    I = ih.ideal(T(*a), T(*b))
    J = ih.ideal(T(*a))
    K = ih.ideal(T(*a) * T(*c))
    assert ih.ideal_contains(I, I)
    assert ih.ideal_contains(I, J) and ih.ideal_contains(J, K) and ih.ideal_contains(I, K)
    assert ih.ideal_contains(ih.ideal(T(*a), T(*b)), ih.ideal_product(I, J))


def test_square_of_maximal_ideal():
    mod = omega(P9, 2)
    I = ih.ideal(T(3, mod=mod), T(0, 1, mod=mod))
    expect = ih.ideal(T(9, mod=mod), T(0, 3, mod=mod), T(0, 0, 1, mod=mod))
    assert ih.ideal_square(I) == expect
    assert ih.ideal_square(I).normalized() == expect.normalized()
    assert ih.ideal_product(I, I) == expect


def test_unit_generates_everything():
    assert ih.ideal(T(2, 1)) == ih.ideal(T(1))
    assert ih.ideal(T(1)).length == 3 * 2


def test_fitting_ideal_of_column():
    a, b = T(3), T(0, 1)
    P = ih.PresentationMatrix([[a], [b]])
    assert ih.fitting_ideal(P) == ih.ideal(a, b)


def test_fitting_ideal_wide_matrix_is_zero():
    P = ih.PresentationMatrix([[T(1), T(1)]])
    assert ih.fitting_ideal(P).length == 0


@pytest.mark.parametrize("size", [1, 2, 3])
def test_fitting_diagonal(size):
    rng = np.random.default_rng(size)
    diag = [T(*rng.integers(0, 9, 3)) for _ in range(size)]
    zero = T(0)
    P = ih.PresentationMatrix([[diag[i] if i == j else zero for j in range(size)] for i in range(size)])
    assert ih.fitting_ideal(P) == ih.ideal(ih.diagonal_product(diag))


def test_fitting_unit_invariance():
    rng = np.random.default_rng(0)
    A = ih.PresentationMatrix([[T(*rng.integers(0, 9, 3)) for _ in range(2)] for _ in range(3)])
    F = ih.fitting_ideal(A)
    for _ in range(5):
        L = ih.random_unit_matrix(rng, P9, MOD, 3)
        R = ih.random_unit_matrix(rng, P9, MOD, 2)
        assert ih.fitting_ideal(A.transform(L, R)) == F


def test_determinant_3x3():
    m = [[T(1), T(2), T(0)], [T(0), T(1), T(4)], [T(5), T(0), T(1)]]
    assert ih.determinant(m) == T(1 + 40)


def test_presentation_json():
    P = ih.PresentationMatrix([[T(3, 1)], [T(0, 1)]])
    back = ih.PresentationMatrix.from_json(json.loads(json.dumps(P.to_json())))
    assert ih.fitting_ideal(back) == ih.fitting_ideal(P)


@pytest.fixture
def system():
    return ih.build_bipartite(np.random.default_rng(3), P9, omega(P9, 2), [2, 53, 107])


def test_bipartite_constructive(system):
    rep = ih.verify_bipartite(system)
    assert rep.passed and len(rep.checks) == 3 * 4  # 12 edges of the 3-cube


def test_bipartite_perturbation_detected(system):
    rep = ih.verify_bipartite(ih.perturb_edge(system, (53,)))
    bad = rep.failures()
    assert bad and all("53" in e["edge"] for e in bad)


def test_bipartite_json_round_trip(system):
    back = ih.BipartiteSystem.from_json(json.loads(json.dumps(system.to_json())))
    assert ih.verify_bipartite(back).passed


def test_malformed_systems(system):
    obj = system.to_json()
    del obj["kappa"]["1"]
    with pytest.raises(ih.MalformedSystem):
        ih.verify_bipartite(ih.BipartiteSystem.from_json(obj))
    obj = system.to_json()
    obj["d_unit"]["2"] = T(3, mod=omega(P9, 2)).to_json()
    with pytest.raises(ih.MalformedSystem):
        ih.verify_bipartite(ih.BipartiteSystem.from_json(obj))
    with pytest.raises(ih.MalformedSystem):
        ih.BipartiteSystem.from_json({"p": 3})


def test_class_trace():
    rng = np.random.default_rng(1)
    fam = sd.random_family(rng, P9, 0, 3, r=2, kind="pm")
    assert ih.check_class_trace(fam)
    bad = sd.random_family(rng, P9, 3, 3, r=2)
    with pytest.raises(ValueError):
        ih.check_class_trace(bad)
