import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_matrix, random_vector
from hpflow.operators import (
    adjoint,
    as_operator,
    expm,
    inner,
    kron_all,
    operator_norm,
    outer,
    partial_trace_second,
    slice_operator,
    tensor,
    trace_norm,
)

SWAP = np.eye(4)[[0, 2, 1, 3]]


def brute_slice(A, u, v, dh, dk):
    """<x, A(u, v) y> = <u (x) x, A v (x) y> evaluated entry by entry."""
    out = np.zeros((dk, dk), dtype=complex)
    for i in range(dk):
        for j in range(dk):
            out[i, j] = inner(np.kron(u, np.eye(dk)[i]), A @ np.kron(v, np.eye(dk)[j]))
    return out


def test_tensor_examples():
    np.testing.assert_array_equal(tensor(np.eye(2), np.eye(3)), np.eye(6))
    np.testing.assert_array_equal(tensor(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))


def test_slice_of_tensor_recovers_second_factor(rng):
    for dh, dk in [(2, 2), (3, 3), (2, 3)]:
        A, B = random_matrix(rng, dh), random_matrix(rng, dk)
        u, v = random_vector(rng, dh), random_vector(rng, dh)
        np.testing.assert_allclose(slice_operator(tensor(A, B), u, v, dh, dk), inner(u, A @ v) * B, atol=1e-12)


def test_slice_identity_and_swap(rng):
    u, v = random_vector(rng, 2), random_vector(rng, 2)
    np.testing.assert_allclose(slice_operator(np.eye(4), u, v, 2, 2), inner(u, v) * np.eye(2), atol=1e-14)
    np.testing.assert_allclose(slice_operator(SWAP, u, v, 2, 2), outer(v, u), atol=1e-14)


def test_slice_matches_brute_force(rng):
    A = random_matrix(rng, 6)
    u, v = random_vector(rng, 3), random_vector(rng, 3)
    np.testing.assert_allclose(slice_operator(A, u, v, 3, 2), brute_slice(A, u, v, 3, 2), atol=1e-12)


def test_slice_composition_law(rng):
    dh, dk = 3, 2
    A, B = random_matrix(rng, dh * dk), random_matrix(rng, dh * dk)
    u, v = random_vector(rng, dh), random_vector(rng, dh)
    E = np.eye(dh)
    rhs = sum(slice_operator(A, u, E[j], dh, dk) @ slice_operator(B, E[j], v, dh, dk) for j in range(dh))
    np.testing.assert_allclose(slice_operator(A @ B, u, v, dh, dk), rhs, atol=1e-12)


def test_slice_adjoint_law(rng):
    A = random_matrix(rng, 4)
    u, v = random_vector(rng, 2), random_vector(rng, 2)
    np.testing.assert_allclose(adjoint(slice_operator(A, u, v, 2, 2)), slice_operator(adjoint(A), v, u, 2, 2), atol=1e-13)


def test_slice_norm_bound(rng):
    A = random_matrix(rng, 6)
    u, v = random_vector(rng, 2), random_vector(rng, 2)
    bound = operator_norm(A) * np.linalg.norm(u) * np.linalg.norm(v)
    assert operator_norm(slice_operator(A, u, v, 2, 3)) <= bound * (1 + 1e-12)


def test_expm_examples():
    np.testing.assert_array_equal(expm(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(expm(np.diag([1j * np.pi, 0])), np.diag([-1, 1]), atol=1e-14)
    with pytest.raises(ValueError):
        expm(np.zeros((2, 3)))


def test_expm_matches_truncated_series(rng):
    for _ in range(5):
        A = random_matrix(rng, 4)
        A /= operator_norm(A)
        series, term = np.eye(4, dtype=complex), np.eye(4, dtype=complex)
        for k in range(1, 30):
            term = term @ A / k
            series = series + term
        np.testing.assert_allclose(expm(A), series, atol=1e-12)
        np.testing.assert_allclose(expm(A) @ expm(-A), np.eye(4), atol=1e-12)


def test_partial_trace_examples(rng):
    np.testing.assert_array_equal(partial_trace_second(np.eye(4), 2, 2), 2 * np.eye(2))
    rho, sigma = random_matrix(rng, 3), random_matrix(rng, 2)
    np.testing.assert_allclose(partial_trace_second(tensor(rho, sigma), 3, 2), np.trace(sigma) * rho, atol=1e-13)


def test_partial_trace_double_loop_oracle(rng):
    A = random_matrix(rng, 6)
    out = np.zeros((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            for k in range(2):
                out[i, j] += A[i * 2 + k, j * 2 + k]
    np.testing.assert_allclose(partial_trace_second(A, 3, 2), out, atol=1e-14)


def test_kron_all_and_trace_norm():
    np.testing.assert_array_equal(kron_all([np.eye(2), np.diag([1, 2]), np.eye(1)]), np.kron(np.eye(2), np.diag([1, 2])))
    assert trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3.0)


def test_as_operator_shape_rules():
    assert as_operator(np.zeros((2, 3))).size == 6
    with pytest.raises(ValueError):
        as_operator(np.zeros(3))


finite = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (2, 3, 3), elements=finite))
def test_adjoint_involution_and_norm(parts):
    A = parts[0] + 1j * parts[1]
    np.testing.assert_array_equal(adjoint(adjoint(A)), A)
    assert operator_norm(A) >= 0
    assert (operator_norm(A) == 0) == (not np.any(A))
