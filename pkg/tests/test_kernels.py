import os

import numpy as np
import pytest

from jointreality import _pykernels, kernels
from jointreality.criteria import _SIGN_ARRAY, SIGN_CHOICES, ExpectationQuartet, determinant

compiled_only = pytest.mark.skipif(
    "cython" not in kernels.available_backends(), reason="compiled kernels not built"
)


def test_backend_selection():
    assert kernels.backend() in kernels.available_backends()
    assert "python" in kernels.available_backends()
    with pytest.raises(ValueError):
        kernels.get_backend_module("fortran")
    previous = kernels.set_backend("python")
    try:
        assert kernels.backend() == "python"
    finally:
        kernels.set_backend(previous)
    assert kernels.backend() == previous


@pytest.mark.skipif(os.environ.get("JOINTREALITY_NO_EXT") == "1", reason="extension build disabled")
def test_compiled_backend_is_default_when_built():
    assert kernels.backend() == "cython"


def test_tau_batch_matches_scalar_determinant(each_backend):
    rng = np.random.default_rng(0)
    arr = rng.uniform(-1, 1, size=(200, 8))
    tau, idx = kernels.tau_batch(arr, _SIGN_ARRAY)
    for i, row in enumerate(arr):
        q = ExpectationQuartet.from_array(row)
        dets = [determinant(q, s) for s in SIGN_CHOICES]
        assert tau[i] == pytest.approx(max(dets), abs=1e-13)
        assert idx[i] == int(np.argmax(dets))


def test_ell_batch_closed_form(each_backend):
    rng = np.random.default_rng(1)
    arr = rng.uniform(-1, 1, size=(200, 8))
    ell, c_star = kernels.ell_batch(arr)
    a, b = arr[:, 0::2], arr[:, 1::2]
    D = np.minimum(a[:, 0] + b[:, 0] - 1, -a[:, 1] - b[:, 1] - 1)
    I = np.minimum(a[:, 2] - b[:, 2] - 1, -a[:, 3] + b[:, 3] - 1)
    c = np.clip((D - I) / 2, -1, 1)
    assert np.allclose(c_star, c, atol=1e-15)
    assert np.allclose(ell, np.minimum(D - c, I + c), atol=1e-15)


def test_empty_batches(each_backend):
    tau, idx = kernels.tau_batch(np.zeros((0, 8)), _SIGN_ARRAY)
    assert tau.shape == (0,) and idx.shape == (0,)
    ell, c = kernels.ell_batch(np.zeros((0, 8)))
    assert ell.shape == (0,) and c.shape == (0,)


@compiled_only
def test_backends_agree_on_batches():
    py = kernels.get_backend_module("python")
    cy = kernels.get_backend_module("cython")
    arr = np.random.default_rng(5).uniform(-1, 1, size=(5000, 8))
    t1, i1 = py.tau_batch(arr, _SIGN_ARRAY)
    t2, i2 = cy.tau_batch(arr, _SIGN_ARRAY)
    assert np.max(np.abs(t1 - t2)) <= 1e-13
    assert np.array_equal(i1, i2)
    e1, c1 = py.ell_batch(arr)
    e2, c2 = cy.ell_batch(arr)
    assert np.array_equal(e1, e2) and np.array_equal(c1, c2)


@compiled_only
def test_backends_agree_on_simplex_pivots():
    rng = np.random.default_rng(9)
    py = kernels.get_backend_module("python")
    cy = kernels.get_backend_module("cython")
    for _ in range(50):
        m, n = 5, 9
        A = rng.uniform(-1, 1, size=(m, n))
        T = np.zeros((m + 1, n + m + 1))
        T[:m, :n] = A
        T[:m, n:n + m] = np.eye(m)
        T[:m, -1] = rng.uniform(0, 1, size=m)
        T[m, :n] = rng.normal(size=n)
        basis = np.arange(n, n + m, dtype=np.int64)
        T1, b1 = T.copy(), basis.copy()
        T2, b2 = T.copy(), basis.copy()
        r1 = py.simplex_iterate(T1, b1, n + m, 1e-9, 1000)
        r2 = cy.simplex_iterate(T2, b2, n + m, 1e-9, 1000)
        assert r1 == r2
        assert np.array_equal(b1, b2)
        assert np.allclose(T1, T2, atol=1e-12)


def test_pivot_makes_unit_column(each_backend):
    T = np.array([[2.0, 1.0, 4.0], [1.0, 3.0, 5.0], [-1.0, -1.0, 0.0]])
    kernels.pivot(T, 0, 0)
    assert T[:, 0] == pytest.approx([1.0, 0.0, 0.0])
    assert T[0] == pytest.approx([1.0, 0.5, 2.0])


def test_status_codes_shared():
    assert (kernels.OPTIMAL, kernels.UNBOUNDED, kernels.ITERATION_LIMIT) == (
        _pykernels.OPTIMAL, _pykernels.UNBOUNDED, _pykernels.ITERATION_LIMIT
    )
