"""Numerical toolkit for unitary quantum stochastic flows with Gaussian noise.

Starting from a finite-dimensional model ``(H, [L_1, ..., L_d])`` the package
builds the expectation semigroups, the positive-definite kernel on the
Hilbert tensor algebra, a Kolmogorov reconstruction of the noise space and
coefficients, and a toy-Fock-space simulation of the Hudson-Parthasarathy
flow used to certify that the reconstructed flow is equivalent to the
original one.
"""

__version__ = "0.1.0"

from hpflow.operators import (
    adjoint,
    expm,
    frobenius_norm,
    operator_norm,
    partial_trace_second,
    slice_operator,
    tensor,
)
from hpflow.semigroups import (
    ModelSpec,
    ObservedGenerators,
    build_g,
    lindblad_apply,
    observe,
    product_generator2,
    semigroup_F,
    semigroup_T,
    semigroup_Z,
)

__all__ = [
    "__version__",
    "adjoint",
    "expm",
    "frobenius_norm",
    "operator_norm",
    "partial_trace_second",
    "slice_operator",
    "tensor",
    "ModelSpec",
    "ObservedGenerators",
    "build_g",
    "lindblad_apply",
    "observe",
    "product_generator2",
    "semigroup_F",
    "semigroup_T",
    "semigroup_Z",
]
