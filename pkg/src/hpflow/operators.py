"""Dense complex linear algebra on small product spaces.

Operators are plain ``numpy`` complex arrays of shape ``(rows, cols)`` and
vectors are 1-d complex arrays. Inner products are anti-linear in the first
argument (``np.vdot`` convention) everywhere in the package.
"""
from typing import Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "as_operator",
    "as_vector",
    "adjoint",
    "tensor",
    "slice_operator",
    "expm",
    "partial_trace_second",
    "operator_norm",
    "frobenius_norm",
    "trace_norm",
    "inner",
    "outer",
    "basis_vector",
    "is_hermitian",
    "kron_all",
]


def as_operator(a) -> np.ndarray:
    """Return ``a`` as a 2-d complex array, raising on anything else."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"operator must be 2-dimensional, got shape {arr.shape}")
    return arr


def as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1:
        raise ValueError(f"vector must be 1-dimensional, got shape {arr.shape}")
    return arr


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def inner(u: np.ndarray, v: np.ndarray) -> complex:
    """``<u, v>``, anti-linear in ``u``."""
    return complex(np.vdot(u, v))


def outer(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """The rank-one operator ``|w><v|``."""
    return np.outer(w, np.conj(v))


def basis_vector(dim: int, index: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[index] = 1.0
    return e


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a (x) b``; the first factor is the slow index."""
    return np.kron(as_operator(a), as_operator(b))


def slice_operator(a: np.ndarray, u: np.ndarray, v: np.ndarray, dim_h: int, dim_k: int) -> np.ndarray:
    r"""Compress an operator on ``h (x) K`` to ``K`` along the pair ``(u, v)``.

    The result ``M`` satisfies
    :math:`\langle \xi_1, M \xi_2\rangle = \langle u\otimes\xi_1, A\, v\otimes\xi_2\rangle`
    for every :math:`\xi_1, \xi_2 \in K`.

    Parameters
    ----------
    a : (dim_h*dim_k, dim_h*dim_k) array
        Operator on the product space, first factor slow.
    u, v : (dim_h,) arrays
        Vectors in the first factor.
    dim_h, dim_k : int
        Declared factor dimensions.

    Returns
    -------
    (dim_k, dim_k) array
    """
    a = as_operator(a)
    u = as_vector(u)
    v = as_vector(v)
    n = dim_h * dim_k
    if a.shape != (n, n):
        raise ValueError(
            f"operator of shape {a.shape} does not act on a {dim_h}x{dim_k} product space"
        )
    if u.shape != (dim_h,) or v.shape != (dim_h,):
        raise ValueError(f"slice vectors must have dimension {dim_h}")
    blocks = a.reshape(dim_h, dim_k, dim_h, dim_k)
    return np.einsum("a,aibj,b->ij", np.conj(u), blocks, v)


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    a = as_operator(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {a.shape}")
    if not np.any(a):
        return np.eye(a.shape[0], dtype=complex)
    return scipy.linalg.expm(a)


def partial_trace_second(a: np.ndarray, dim_1: int, dim_2: int) -> np.ndarray:
    """Trace out the second factor of an operator on ``C^dim_1 (x) C^dim_2``."""
    a = as_operator(a)
    n = dim_1 * dim_2
    if a.shape != (n, n):
        raise ValueError(f"operator of shape {a.shape} does not act on a {dim_1}x{dim_2} product space")
    return np.einsum("ikjk->ij", a.reshape(dim_1, dim_2, dim_1, dim_2))


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    a = as_operator(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(as_operator(a), "fro"))


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(as_operator(a), compute_uv=False)))


def is_hermitian(a: np.ndarray, tol: float = 1e-12) -> bool:
    a = as_operator(a)
    return a.shape[0] == a.shape[1] and frobenius_norm(a - adjoint(a)) < tol


def kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1,), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out
