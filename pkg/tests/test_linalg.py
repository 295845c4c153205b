import numpy as np
import pytest
from hypothesis import given, strategies as st

from twisted_hodge import _bareiss_py
from twisted_hodge.linalg import (
    Indeterminate,
    classify,
    exact_nullspace,
    exact_rank,
    kernel_backend,
    matmul,
    numeric_nullity,
    rank_int,
    to_gaussian_integers,
)
from twisted_hodge.scalars import GaussianRational

from conftest import gaussian_rationals

int_mats = st.integers(1, 6).flatmap(
    lambda m: st.integers(1, 6).flatmap(
        lambda n: st.tuples(
            st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=m, max_size=m),
            st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=m, max_size=m),
        )
    )
)


@given(int_mats)
def test_compiled_matches_python(mats):
    re, im = mats
    py = _bareiss_py.rank_gaussian(re, im)
    assert rank_int(re, im, backend="python") == py
    if kernel_backend() == "compiled":
        assert rank_int(re, im, backend="compiled") == py


@given(int_mats)
def test_rank_matches_numpy(mats):
    re, im = mats
    a = np.array(re) + 1j * np.array(im)
    assert rank_int(re, im) == np.linalg.matrix_rank(a)


def test_pure_env_forces_python(monkeypatch):
    monkeypatch.setenv("TWISTED_HODGE_PURE", "1")
    assert kernel_backend() == "python"


def test_rank_over_gaussian_rationals():
    h = GaussianRational(1, 1) / 2
    mat = np.array([[h, 1], [2 * h, 2]], dtype=object)
    assert exact_rank(mat) == 1
    re, im = to_gaussian_integers(mat)
    assert re == [[1, 2], [1, 2]] and im == [[1, 0], [1, 0]]


def test_large_entries_fall_back_exactly():
    big = 10**12
    re = [[big, 1], [1, 0]]
    im = [[0, 0], [0, 0]]
    assert rank_int(re, im) == 2


@given(st.lists(st.lists(gaussian_rationals(), min_size=4, max_size=4), min_size=3, max_size=3))
def test_nullspace_is_kernel(rows):
    mat = np.array(rows, dtype=object)
    ns = exact_nullspace(mat)
    assert len(ns) == 4 - exact_rank(mat)
    for v in ns:
        assert all(x == 0 for x in matmul(mat, v.reshape(-1, 1)).ravel())


def test_numeric_nullity_gap():
    a = np.diag([1.0, 1e-14, 0.0])
    k = numeric_nullity(a)
    assert k.dim == 2


def test_numeric_indeterminate():
    with pytest.raises(Indeterminate):
        classify([1.0, 1e-8 * 0.5, 1e-8 * 2], 1.0, 3)
