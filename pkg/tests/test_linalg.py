import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qme import linalg as la
from qme.errors import DimensionError, NotHermitianError, NotPositiveError, NumericalError

from conftest import cmat, herm
from oracles import naive_kron, naive_matmul, naive_partial_trace

entries = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def square(n):
    return arrays(np.complex128, (n, n), elements=entries)


dims = st.integers(min_value=1, max_value=5)


def test_matmul_identity_and_diagonal():
    m = np.array([[1, 2j], [3, 4]])
    assert np.array_equal(la.matmul(np.eye(2), m), m)
    assert np.allclose(la.matmul(np.diag([2, 3]), np.diag([5, 7])), np.diag([10, 21]))


def test_matmul_matches_triple_loop(rng):
    a, b = cmat(rng, 3), cmat(rng, 3)
    assert np.max(np.abs(la.matmul(a, b) - np.array(naive_matmul(a, b)))) <= 1e-12


def test_matmul_dimension_mismatch():
    with pytest.raises(DimensionError):
        la.matmul(np.eye(2), np.eye(3))


def test_as_matrix_rejects_nonfinite_and_nonsquare():
    with pytest.raises(ValueError):
        la.as_matrix([[np.nan, 0], [0, 1]])
    with pytest.raises(DimensionError):
        la.as_matrix(np.ones((2, 3)))


def test_adjoint():
    h = np.array([[1, 1j], [-1j, 2]])
    assert np.array_equal(la.adjoint(h), h)
    assert np.array_equal(la.adjoint(np.array([[0, 1], [0, 0]])), np.array([[0, 0], [1, 0]]))


def test_trace_examples(rng):
    assert la.trace(np.eye(4)) == 4
    assert la.trace(np.diag([0.75, 0.25])) == 1
    a, b = cmat(rng, 4), cmat(rng, 4)
    assert abs(la.trace(a @ b) - la.trace(b @ a)) <= 1e-12


def test_hermitian_eig_examples(rng):
    eig = la.hermitian_eig(np.diag([0.25, 0.75]))
    assert np.allclose(eig.eigenvalues, [0.25, 0.75])
    assert np.allclose(np.abs(eig.eigenvectors), np.eye(2))
    assert np.allclose(la.hermitian_eig(np.array([[0, 1], [1, 0]])).eigenvalues, [-1, 1])
    h = herm(rng, 5)
    eig = la.hermitian_eig(h)
    assert la.max_norm(eig.reconstruct() - h) <= 1e-9
    u = eig.eigenvectors
    assert la.max_norm(u.conj().T @ u - np.eye(5)) <= 1e-10
    assert np.all(np.diff(eig.eigenvalues) >= 0)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        la.hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_psd_sqrt_examples(rng):
    assert np.allclose(la.psd_sqrt(np.diag([4, 9])), np.diag([2, 3]))
    assert np.allclose(la.psd_sqrt(np.eye(3)), np.eye(3))
    g = cmat(rng, 4)
    m = g.conj().T @ g
    r = la.psd_sqrt(m)
    assert la.max_norm(r @ r - m) <= 1e-8


def test_psd_sqrt_rejects_negative():
    with pytest.raises(NotPositiveError):
        la.psd_sqrt(np.diag([1.0, -0.1]))


def test_psd_inv_sqrt_singular():
    with pytest.raises(NumericalError):
        la.psd_inv_sqrt(np.diag([1.0, 0.0]))


def test_kron_examples(rng):
    m = cmat(rng, 2)
    block = np.zeros((4, 4), dtype=complex)
    block[:2, :2] = block[2:, 2:] = m
    assert np.array_equal(la.kron(np.eye(2), m), block)
    assert np.array_equal(la.kron(np.diag([1, 0]), np.diag([1, 0])), np.diag([1, 0, 0, 0]))
    a, b = cmat(rng, 3), cmat(rng, 2)
    assert abs(la.trace(la.kron(a, b)) - la.trace(a) * la.trace(b)) <= 1e-12
    assert np.max(np.abs(la.kron(a, b) - np.array(naive_kron(a, b)))) <= 1e-12


def test_partial_trace_examples(rng):
    r1 = herm(rng, 2) + 3 * np.eye(2)
    r2 = herm(rng, 3) + 3 * np.eye(3)
    r2 /= np.trace(r2)
    assert np.allclose(la.partial_trace(np.kron(r1, r2), 2, 3, over="K"), r1)
    a, b = cmat(rng, 2), cmat(rng, 3)
    assert np.allclose(la.partial_trace(np.kron(a, b), 2, 3, over="H"), np.trace(a) * b)
    m = cmat(rng, 6)
    assert abs(np.trace(la.partial_trace(m, 2, 3)) - np.trace(m)) <= 1e-12
    for over in ("K", "H"):
        assert np.allclose(la.partial_trace(m, 2, 3, over=over), np.array(naive_partial_trace(m, 2, 3, over)))


def test_partial_trace_bad_shape():
    with pytest.raises(DimensionError):
        la.partial_trace(np.eye(5), 2, 3)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_matmul_property(data):
    n = data.draw(dims)
    a, b = data.draw(square(n)), data.draw(square(n))
    assert np.allclose(la.matmul(a, b), np.array(naive_matmul(a, b)), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_adjoint_involution_and_product_rule(data):
    n = data.draw(dims)
    a, b = data.draw(square(n)), data.draw(square(n))
    assert np.array_equal(la.adjoint(la.adjoint(a)), a)
    assert np.allclose(la.adjoint(a @ b), la.adjoint(b) @ la.adjoint(a), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_eig_reconstructs_hermitian(data):
    n = data.draw(dims)
    g = data.draw(square(n))
    h = (g + g.conj().T) / 2
    eig = la.hermitian_eig(h)
    scale = max(1.0, la.max_norm(h))
    assert la.max_norm(eig.reconstruct() - h) <= 1e-9 * scale
    assert la.max_norm(eig.eigenvectors.conj().T @ eig.eigenvectors - np.eye(n)) <= 1e-10 * n


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_psd_sqrt_squares_back(data):
    n = data.draw(dims)
    g = data.draw(square(n))
    m = g.conj().T @ g
    r = la.psd_sqrt(m)
    assert la.max_norm(r @ r - m) <= 1e-8 * max(1.0, la.max_norm(m))
    assert la.hermiticity_defect(r) <= 1e-9 * max(1.0, la.max_norm(r))


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_kron_and_partial_trace_properties(data):
    n, k = data.draw(dims), data.draw(st.integers(1, 3))
    a, b = data.draw(square(n)), data.draw(square(k))
    ab = la.kron(a, b)
    assert np.allclose(ab, np.array(naive_kron(a, b)))
    assert np.allclose(la.partial_trace(ab, n, k, over="K"), np.trace(b) * a, atol=1e-8)
    assert np.allclose(la.partial_trace(ab, n, k, over="H"), np.trace(a) * b, atol=1e-8)


def test_random_unitary_is_unitary(rng):
    for n in range(1, 6):
        u = la.random_unitary(rng, n)
        assert la.max_norm(u.conj().T @ u - np.eye(n)) <= 1e-12
