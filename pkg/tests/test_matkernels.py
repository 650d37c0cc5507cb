import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bsim.matkernels import (
    CapExceededError,
    MatrixShapeError,
    determinant,
    expand_indices,
    hafnian,
    hafnian_abs2_batch,
    matrix_exp,
    permanent,
    repeat_submatrix,
    svd,
)
from oracles import hafnian_naive, permanent_naive


def rand_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_symmetric(rng, n):
    a = rand_complex(rng, n, n)
    return a + a.T


def test_permanent_small_cases():
    assert permanent(np.eye(3)) == pytest.approx(1.0)
    assert permanent(np.ones((2, 2))) == pytest.approx(2.0)
    assert permanent(np.zeros((0, 0))) == 1.0


def test_permanent_matches_enumeration_5x5():
    a = rand_complex(np.random.default_rng(11), 5, 5)
    ref = permanent_naive(a)
    assert abs(permanent(a) - ref) / abs(ref) < 1e-12


def test_permanent_kahan_path_matches_enumeration():
    # n > 10 switches to compensated summation; compare with a block identity
    rng = np.random.default_rng(3)
    a, b = rand_complex(rng, 5, 5), rand_complex(rng, 6, 6)
    block = np.zeros((11, 11), dtype=complex)
    block[:5, :5], block[5:, 5:] = a, b
    ref = permanent_naive(a) * permanent_naive(b)
    assert abs(permanent(block) - ref) / abs(ref) < 1e-10


def test_permanent_rejects_bad_input():
    with pytest.raises(MatrixShapeError):
        permanent(np.ones((2, 3)))
    with pytest.raises(CapExceededError):
        permanent(np.ones((19, 19)))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6), row=st.integers(0, 5), c=st.complex_numbers(max_magnitude=10, allow_nan=False))
def test_permanent_multilinear_in_rows(seed, n, row, c):
    a = rand_complex(np.random.default_rng(seed), n, n)
    b = a.copy()
    b[row % n] *= c
    assert abs(permanent(b) - c * permanent(a)) <= 1e-10 * (1 + abs(c * permanent(a)))


def test_hafnian_small_cases():
    assert hafnian(np.array([[0, 7], [7, 0]])) == pytest.approx(7)
    assert hafnian(np.ones((4, 4))) == pytest.approx(3)
    assert hafnian(np.zeros((0, 0))) == 1.0


def test_hafnian_matches_enumeration_6x6():
    a = rand_symmetric(np.random.default_rng(5), 6)
    ref = hafnian_naive(a)
    assert abs(hafnian(a) - ref) / abs(ref) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
def test_hafnian_of_bipartite_block_is_permanent(seed, n):
    w = rand_complex(np.random.default_rng(seed), n, n)
    z = np.zeros((n, n))
    block = np.block([[z, w], [w.T, z]])
    ref = permanent(w)
    assert abs(hafnian(block) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_hafnian_rejects_bad_input():
    with pytest.raises(MatrixShapeError):
        hafnian(np.ones((3, 3)))
    with pytest.raises(ValueError, match="symmetric"):
        hafnian(np.arange(4.0).reshape(2, 2))
    with pytest.raises(CapExceededError):
        hafnian(np.ones((18, 18)))


def test_hafnian_batch_matches_single_calls():
    rng = np.random.default_rng(9)
    a = rand_symmetric(rng, 5)
    pats = np.array([[1, 1, 0, 0, 0], [2, 0, 1, 1, 0], [0, 0, 0, 0, 0], [1, 0, 0, 0, 0], [0, 3, 0, 0, 1]])
    got = hafnian_abs2_batch(a, pats)
    for p, g in zip(pats, got):
        if p.sum() % 2:
            assert g == 0.0
            continue
        idx = expand_indices(p)
        assert g == pytest.approx(abs(hafnian(a[np.ix_(idx, idx)])) ** 2, rel=1e-12, abs=1e-300)


def test_repeat_submatrix():
    m = np.array([[1, 2], [3, 4]])
    assert np.array_equal(repeat_submatrix(m, (1, 1), (1, 1)), m)
    assert np.array_equal(repeat_submatrix(m, (2, 0), (1, 1)), [[1, 2], [1, 2]])
    big = np.arange(16).reshape(4, 4)
    sub = repeat_submatrix(big, (1, 2, 0, 1), (0, 3, 1, 0))
    rows, cols = [0, 1, 1, 3], [1, 1, 1, 2]
    assert sub.shape == (4, 4)
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            assert sub[i, j] == big[r, c]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6))
def test_repeat_submatrix_unit_counts_is_identity(seed, n):
    m = rand_complex(np.random.default_rng(seed), n, n)
    assert np.array_equal(repeat_submatrix(m, (1,) * n, (1,) * n), m)


def test_linear_algebra_wrappers():
    assert determinant(np.eye(4)) == pytest.approx(1.0)
    u, s, v = svd(np.diag([2.0, 1.0]))
    assert np.allclose(s, [2, 1])
    assert np.allclose(np.abs(u), np.eye(2)) and np.allclose(np.abs(v), np.eye(2))
    assert np.allclose(matrix_exp(np.zeros((3, 3))), np.eye(3))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8), scale=st.floats(-5, 5))
def test_matrix_exp_is_unitary(seed, n, scale):
    a = rand_complex(np.random.default_rng(seed), n, n)
    u = matrix_exp(a + a.conj().T, scale)
    assert np.max(np.abs(u @ u.conj().T - np.eye(n))) < 1e-10


def test_svd_reconstructs():
    a = np.random.default_rng(2).standard_normal((4, 4))
    u, s, v = svd(a)
    assert np.allclose(u @ np.diag(s) @ v.T, a, atol=1e-12)
