"""Models and the expectation semigroups they generate.

A model is a self-adjoint ``H`` plus an ordered list of noise couplings
``L_1..L_d`` on a finite-dimensional initial space. From it we build

* ``G = iH - 1/2 sum_j L_j^* L_j``, generator of ``T_t = exp(tG)``;
* the Lindblad generator ``rho -> G rho + rho G^* + sum_j L_j rho L_j^*``
  of the trace preserving semigroup ``Z_t``;
* the generator of ``F_t rho = Tr[V_t^* (rho (x) |vac><vac|) V_t]``;
* the two-fold product generator used to predict ``T_t^{(2)}``.

Superoperators use row-major vectorization, ``vec(rho) = rho.reshape(-1)``,
so that ``vec(A rho B) = (A (x) B^T) vec(rho)``.
"""
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from hpflow.operators import adjoint, as_operator, expm, frobenius_norm

__all__ = [
    "HERMITIAN_TOL",
    "ModelSpec",
    "ObservedGenerators",
    "observe",
    "build_g",
    "lindblad_superop",
    "lindblad_apply",
    "semigroup_T",
    "semigroup_Z",
    "adjoint_flow_generator",
    "semigroup_F",
    "product_generator2",
    "semigroup_T2",
    "vec",
    "unvec",
]

HERMITIAN_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ModelSpec:
    """An HP model ``(H, [L_1, ..., L_d])`` on ``C^dim_h``.

    Arrays are copied and made read-only on construction. ``d = 0`` is
    legal and describes pure Hamiltonian drift.
    """

    H: np.ndarray
    L: tuple = field(default_factory=tuple)

    def __post_init__(self):
        H = as_operator(self.H)
        if H.shape[0] != H.shape[1]:
            raise ValueError(f"H must be square, got shape {H.shape}")
        if frobenius_norm(H - adjoint(H)) > HERMITIAN_TOL:
            raise ValueError(
                f"H not self-adjoint: ||H - H^*||_F = {frobenius_norm(H - adjoint(H)):.3e}"
            )
        Ls = []
        for j, Lj in enumerate(self.L):
            Lj = as_operator(Lj)
            if Lj.shape != H.shape:
                raise ValueError(f"L[{j}] has shape {Lj.shape}, expected {H.shape}")
            Ls.append(_frozen(Lj))
        object.__setattr__(self, "H", _frozen(H))
        object.__setattr__(self, "L", tuple(Ls))

    @property
    def dim_h(self) -> int:
        return self.H.shape[0]

    @property
    def d(self) -> int:
        return len(self.L)

    def with_couplings(self, L: Sequence[np.ndarray]) -> "ModelSpec":
        return ModelSpec(self.H, tuple(L))


@dataclass(frozen=True)
class ObservedGenerators:
    """Semigroup data visible from vacuum expectations alone.

    ``G`` generates ``T_t`` and ``lindblad`` is the (row-major) superoperator
    generating ``Z_t``. No coupling list is stored, which is what makes
    reconstruction from this object a genuine inverse problem.
    """

    G: np.ndarray
    lindblad: np.ndarray

    def __post_init__(self):
        G = as_operator(self.G)
        n = G.shape[0]
        sup = as_operator(self.lindblad)
        if G.shape != (n, n) or sup.shape != (n * n, n * n):
            raise ValueError("inconsistent generator shapes")
        object.__setattr__(self, "G", _frozen(G))
        object.__setattr__(self, "lindblad", _frozen(sup))

    @property
    def dim_h(self) -> int:
        return self.G.shape[0]


Source = Union[ModelSpec, ObservedGenerators]


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1)


def unvec(x: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(x).reshape(dim, dim)


def build_g(model: ModelSpec) -> np.ndarray:
    """``G = iH - 1/2 sum_j L_j^* L_j``."""
    G = 1j * model.H
    for Lj in model.L:
        G = G - 0.5 * adjoint(Lj) @ Lj
    return G


def lindblad_superop(model: ModelSpec) -> np.ndarray:
    G = build_g(model)
    eye = np.eye(model.dim_h)
    sup = np.kron(G, eye) + np.kron(eye, np.conj(G))
    for Lj in model.L:
        sup = sup + np.kron(Lj, np.conj(Lj))
    return sup


def observe(source: Source) -> ObservedGenerators:
    """Project a model onto its observable generator data ``(G, Lindblad)``."""
    if isinstance(source, ObservedGenerators):
        return source
    return ObservedGenerators(build_g(source), lindblad_superop(source))


def _check_density(rho, dim: int) -> np.ndarray:
    rho = as_operator(rho)
    if rho.shape != (dim, dim):
        raise ValueError(f"density-like operator must be {dim}x{dim}, got {rho.shape}")
    return rho


def _check_time(t: float) -> float:
    t = float(t)
    if not t >= 0.0:
        raise ValueError(f"time must be nonnegative, got {t}")
    return t


def lindblad_apply(source: Source, rho: np.ndarray) -> np.ndarray:
    """``G rho + rho G^* + sum_j L_j rho L_j^*``."""
    if isinstance(source, ModelSpec):
        rho = _check_density(rho, source.dim_h)
        G = build_g(source)
        out = G @ rho + rho @ adjoint(G)
        for Lj in source.L:
            out = out + Lj @ rho @ adjoint(Lj)
        return out
    rho = _check_density(rho, source.dim_h)
    return unvec(source.lindblad @ vec(rho), source.dim_h)


def semigroup_T(source: Source, t: float) -> np.ndarray:
    """Expectation semigroup ``T_t = exp(tG)``."""
    t = _check_time(t)
    G = source.G if isinstance(source, ObservedGenerators) else build_g(source)
    return expm(t * G)


def semigroup_Z(source: Source, t: float, rho: np.ndarray) -> np.ndarray:
    """``Z_t rho`` by exponentiating the vectorized Lindblad generator."""
    t = _check_time(t)
    gen = observe(source)
    rho = _check_density(rho, gen.dim_h)
    return unvec(expm(t * gen.lindblad) @ vec(rho), gen.dim_h)


def adjoint_flow_generator(model: ModelSpec) -> np.ndarray:
    """Superoperator ``rho -> G^* rho + rho G + sum_j L_j rho L_j^*``.

    Generator of ``F_t``. Obtained as the first-order part of the one-slot
    map ``rho -> Tr[s^* (rho (x) |vac><vac|) s]`` of the discretized flow;
    its validity is checked against the simulator, not assumed.
    """
    G = build_g(model)
    eye = np.eye(model.dim_h)
    sup = np.kron(adjoint(G), eye) + np.kron(eye, np.conj(adjoint(G)))
    for Lj in model.L:
        sup = sup + np.kron(Lj, np.conj(Lj))
    return sup


def semigroup_F(model: ModelSpec, t: float, rho: np.ndarray) -> np.ndarray:
    t = _check_time(t)
    rho = _check_density(rho, model.dim_h)
    return unvec(expm(t * adjoint_flow_generator(model)) @ vec(rho), model.dim_h)


def product_generator2(model: ModelSpec) -> np.ndarray:
    """``G (x) 1 + 1 (x) G - sum_j L_j^* (x) L_j`` on ``h (x) h``.

    The first tensor factor carries the left slice in
    ``<vac, U_t(u1, v1) U_t(u2, v2) vac>``.
    """
    G = build_g(model)
    eye = np.eye(model.dim_h)
    gen = np.kron(G, eye) + np.kron(eye, G)
    for Lj in model.L:
        gen = gen - np.kron(adjoint(Lj), Lj)
    return gen


def semigroup_T2(model: ModelSpec, t: float) -> np.ndarray:
    return expm(_check_time(t) * product_generator2(model))
