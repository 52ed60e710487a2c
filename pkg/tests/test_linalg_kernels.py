import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signed_iwasawa import kernels, linalg
from signed_iwasawa.admissible_arithmetic import oracle_a_ell

BACKENDS = kernels.available_backends()


def _span(A, N):
    """Brute-force row space of a small matrix over Z/N."""
    A = np.atleast_2d(A)
    out = set()
    for coeffs in itertools.product(range(N), repeat=A.shape[0]):
        out.add(tuple(int(x) for x in (np.array(coeffs) @ A) % N))
    return out


small_mats = st.tuples(st.sampled_from([(2, 2), (3, 1), (3, 2), (5, 1)]), st.integers(1, 3), st.integers(1, 3)).flatmap(
    lambda t: st.tuples(
        st.just(t[0]),
        st.lists(st.lists(st.integers(0, t[0][0] ** t[0][1] - 1), min_size=t[2], max_size=t[2]), min_size=t[1], max_size=t[1]),
    )
)


@settings(max_examples=60, deadline=None)
@given(small_mats)
def test_howell_form_matches_brute_force_span(data):
    (p, n), rows = data
    A = np.array(rows, dtype=np.int64)
    H = linalg.howell_form(A, p, n)
    span = _span(A, p**n)
    assert len(span) == p**H.length
    for v in span:
        assert H.contains(v)


@settings(max_examples=60, deadline=None)
@given(small_mats)
def test_nullspace_matches_brute_force(data):
    (p, n), rows = data
    N = p**n
    A = np.array(rows, dtype=np.int64)
    K = linalg.nullspace(A, p, n)
    kernel = [x for x in itertools.product(range(N), repeat=A.shape[1]) if not (A @ np.array(x) % N).any()]
    assert len(kernel) == p**K.length
    assert all(K.contains(x) for x in kernel)


@settings(max_examples=60, deadline=None)
@given(small_mats, st.integers(0, 10**6))
def test_solve_consistent_systems(data, seed):
    (p, n), rows = data
    N = p**n
    A = np.array(rows, dtype=np.int64)
    x = np.random.default_rng(seed).integers(0, N, A.shape[1])
    b = A @ x % N
    y = linalg.solve(A, b, p, n)
    assert np.array_equal(A @ y % N, b)


def test_solve_reports_inconsistency():
    with pytest.raises(linalg.InconsistentSystem):
        linalg.solve([[3, 0]], [1], 3, 2)


def test_howell_property_needs_saturation():
    # over Z/9 the row (3, 1) generates (0, 3) but no row of the echelon form has that shape without saturation
    H = linalg.howell_form([[3, 1]], 3, 2)
    assert H.contains([0, 3])
    assert not H.contains([0, 1])
    assert H.length == 2


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (7, 1), (3, 3)])
def test_backends_agree_on_elimination(p, n):
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(p * 10 + n)
    N = p**n
    for rows, cols in ((5, 7), (12, 9), (30, 30)):
        A = rng.integers(0, N, (rows, cols)) * rng.choice([1, p], size=(1, cols)) % N
        outs = []
        for mod in BACKENDS.values():
            T = np.zeros((rows + cols + 1, cols), dtype=np.int64)
            T[:rows] = A
            used, piv = mod.howell_eliminate(T, rows, cols, p, n)
            outs.append((T[: len(piv)].tolist(), list(piv)))
        assert all(o == outs[0] for o in outs)


@pytest.mark.parametrize("ell", [3, 5, 7, 11, 101, 997, 7919])
def test_point_count_kernels(ell):
    for coeffs in ((0, 0, 1, -1, 0), (1, 0, 0, -1, 3), (0, -1, 1, -10, -20)):
        a1, a2, a3, a4, a6 = coeffs
        ref = oracle_a_ell(coeffs, ell)
        for mod in BACKENDS.values():
            assert ell + 1 - mod.count_points_odd(a1, a2, a3, a4, a6, ell) == ref


def test_backend_selection_is_reported():
    assert kernels.BACKEND in BACKENDS


def test_fallback_backend_gives_identical_selftest():
    import os
    import subprocess
    import sys

    def run(pure):
        env = dict(os.environ)
        env.pop("SIGNED_IWASAWA_PURE_PYTHON", None)
        if pure:
            env["SIGNED_IWASAWA_PURE_PYTHON"] = "1"
        code = "import signed_iwasawa.kernels as k, sys; sys.stdout.write(k.BACKEND)"
        backend = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True).stdout
        out = subprocess.run([sys.executable, "-m", "signed_iwasawa.cli", "selftest-all", "--seed", "7"],
                             env=env, capture_output=True).stdout
        return backend, out

    pure_backend, pure_out = run(True)
    assert pure_backend == "python"
    default_backend, default_out = run(False)
    assert default_backend == kernels.BACKEND
    assert pure_out == default_out and pure_out
