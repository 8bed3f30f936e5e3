"""Hudson-Parthasarathy flow on a toy Fock space.

The horizon ``[0, n_slots * dt)`` is cut into slots, each carrying the
local space ``C (+) C^d`` (vacuum plus one quantum per noise mode). One slot
of evolution is the exactly unitary ``s = exp(X)`` on ``h (x) (C (+) C^d)``
with blocks

    X[vac, vac] = i H dt,   X[k, vac] = L_k sqrt(dt),   X[vac, k] = -L_k^* sqrt(dt),

and the flow is the ordered product ``V = s_1 s_2 ... s_n`` of ampliated
steps. Basis ordering is ``h`` first (slowest), then slots ``1..n``.

``V`` is kept in gate form; dense matrices are only built on request and for
small total dimension. Slices, correlations and compressions act on
vectors of length ``dim_h * (1+d)**n``.
"""
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from hpflow.operators import (
    adjoint,
    as_vector,
    expm,
    frobenius_norm,
    inner,
    operator_norm,
)
from hpflow.semigroups import ModelSpec, build_g, unvec, vec

__all__ = [
    "DEFAULT_MAX_SLOTS",
    "DEFAULT_MEMORY_CAP",
    "DENSE_LIMIT",
    "CapacityError",
    "HPCoefficients",
    "assemble_coefficients",
    "step_unitary",
    "ToyFockConfig",
    "FlowState",
    "evolve",
    "vacuum_expectation",
    "SlotOperator",
    "slice_flow",
    "correlation",
    "inner_correlation",
    "discrete_Z",
    "discrete_F",
    "two_point_rate",
    "gaussian_triple",
    "slots_for_time",
]

DEFAULT_MAX_SLOTS = 12
DEFAULT_MEMORY_CAP = 2_000_000
# largest total dimension for which V is ever materialized densely
DENSE_LIMIT = 2048


class CapacityError(ValueError):
    """A flow configuration exceeds the slot or memory cap."""


@dataclass(frozen=True)
class HPCoefficients:
    """Constant coefficient table of the flow equation (no gauge part)."""

    L00: np.ndarray
    L_j0: Tuple[np.ndarray, ...]
    L0_k: Tuple[np.ndarray, ...]

    @property
    def d(self) -> int:
        return len(self.L_j0)

    @property
    def gauge(self) -> np.ndarray:
        n = self.L00.shape[0]
        return np.zeros((self.d, self.d, n, n), dtype=complex)

    def unitarity_residual(self) -> float:
        """``||L00 + L00^* + sum_k L_k0^* L_k0||_F``."""
        r = self.L00 + adjoint(self.L00)
        for Lk in self.L_j0:
            r = r + adjoint(Lk) @ Lk
        return frobenius_norm(r)


def assemble_coefficients(model: ModelSpec) -> HPCoefficients:
    return HPCoefficients(
        L00=build_g(model),
        L_j0=tuple(np.array(Lj) for Lj in model.L),
        L0_k=tuple(-adjoint(Lj) for Lj in model.L),
    )


def step_generator(model: ModelSpec, dt: float) -> np.ndarray:
    """Skew-Hermitian ``X`` with ``s = exp(X)``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n, d = model.dim_h, model.d
    q = 1 + d
    X = np.zeros((n, q, n, q), dtype=complex)
    X[:, 0, :, 0] = 1j * dt * model.H
    root = math.sqrt(dt)
    for k, Lk in enumerate(model.L, start=1):
        X[:, k, :, 0] = root * Lk
        X[:, 0, :, k] = -root * adjoint(Lk)
    return X.reshape(n * q, n * q)


def step_unitary(model: ModelSpec, dt: float) -> np.ndarray:
    return expm(step_generator(model, dt))


@dataclass(frozen=True)
class ToyFockConfig:
    n_slots: int
    dt: float
    d: Optional[int] = None
    max_slots: int = DEFAULT_MAX_SLOTS
    memory_cap: int = DEFAULT_MEMORY_CAP

    def __post_init__(self):
        if int(self.n_slots) != self.n_slots or self.n_slots < 1:
            raise ValueError(f"n_slots must be a positive integer, got {self.n_slots}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def horizon(self) -> float:
        return self.n_slots * self.dt

    def required_dim(self, dim_h: int, d: int) -> int:
        return dim_h * (1 + d) ** self.n_slots

    def check(self, dim_h: int, d: int) -> None:
        if self.d is not None and self.d != d:
            raise ValueError(f"config noise dimension {self.d} does not match model d={d}")
        if self.n_slots > self.max_slots:
            raise CapacityError(
                f"n_slots={self.n_slots} exceeds max_slots={self.max_slots}"
            )
        need = self.required_dim(dim_h, d)
        if need > self.memory_cap:
            raise CapacityError(
                f"flow needs {need} complex entries per state vector, exceeds memory_cap={self.memory_cap}"
            )


def _apply_gate(x: np.ndarray, gate: np.ndarray, slot: int) -> np.ndarray:
    """Left-multiply ``x`` (shape ``(dim_h, q, ..., q, *rest)``) by ``gate`` on ``(h, slot)``."""
    n, q = x.shape[0], x.shape[1 + slot]
    g = gate.reshape(n, q, n, q)
    y = np.tensordot(g, x, axes=([2, 3], [0, 1 + slot]))
    # tensordot puts the gate's output axes first: move the slot axis back
    return np.moveaxis(y, 1, 1 + slot)


@dataclass(frozen=True)
class FlowState:
    """Discretized ``V_{0,T}`` together with its one-slot pieces.

    ``step`` is the per-slot unitary, ``S`` its vacuum-vacuum block.
    """

    model: ModelSpec
    config: ToyFockConfig
    step: np.ndarray

    @property
    def dim_h(self) -> int:
        return self.model.dim_h

    @property
    def q(self) -> int:
        return 1 + self.model.d

    @property
    def n_slots(self) -> int:
        return self.config.n_slots

    @property
    def dt(self) -> float:
        return self.config.dt

    @property
    def total_dim(self) -> int:
        return self.dim_h * self.q ** self.n_slots

    @property
    def fock_dim(self) -> int:
        return self.q ** self.n_slots

    @cached_property
    def blocks(self) -> np.ndarray:
        """``step`` as ``[a, i, b, j]``: h-row, slot-row, h-col, slot-col."""
        return self.step.reshape(self.dim_h, self.q, self.dim_h, self.q)

    @cached_property
    def S(self) -> np.ndarray:
        return self.blocks[:, 0, :, 0].copy()

    def _check_interval(self, start: int, stop: int) -> None:
        if not (0 <= start <= stop <= self.n_slots):
            raise ValueError(f"slot interval [{start}, {stop}) outside [0, {self.n_slots})")

    def vacuum(self) -> np.ndarray:
        """The Fock vacuum as a tensor of shape ``(q,) * n_slots``."""
        omega = np.zeros((self.q,) * self.n_slots, dtype=complex)
        omega[(0,) * self.n_slots] = 1.0
        return omega

    def apply(self, x: np.ndarray, start: int = 0, stop: Optional[int] = None, adjoint_: bool = False) -> np.ndarray:
        """Apply ``V_[start, stop)`` (or its adjoint) to a tensor with leading shape ``(dim_h, q, ..., q)``."""
        stop = self.n_slots if stop is None else stop
        self._check_interval(start, stop)
        if adjoint_:
            gate, order = adjoint(self.step), range(start, stop)
        else:
            gate, order = self.step, range(stop - 1, start - 1, -1)
        for slot in order:
            x = _apply_gate(x, gate, slot)
        return x

    def dense_V(self, start: int = 0, stop: Optional[int] = None, limit: int = DENSE_LIMIT) -> np.ndarray:
        """``V_[start, stop)`` ampliated to the full space, as a dense matrix."""
        N = self.total_dim
        if N > limit:
            raise CapacityError(f"dense V needs dimension {N}, exceeds dense limit {limit}")
        eye = np.eye(N, dtype=complex).reshape((self.dim_h,) + (self.q,) * self.n_slots + (N,))
        return self.apply(eye, start, stop).reshape(N, N)

    def unitarity_defect(self, limit: int = DENSE_LIMIT) -> Tuple[float, str]:
        """``||V^* V - I||_F``, exactly when ``V`` fits densely, else an upper bound.

        The bound telescopes ``V^*V - I = sum_i R_i^* (E (x) 1) R_i`` with
        ``E = s^* s - I`` and ``R_i`` the remaining product of steps.
        """
        if self.total_dim <= limit:
            V = self.dense_V(limit=limit)
            return frobenius_norm(adjoint(V) @ V - np.eye(self.total_dim)), "dense"
        E = frobenius_norm(adjoint(self.step) @ self.step - np.eye(self.step.shape[0]))
        s_norm = operator_norm(self.step)
        spectator = math.sqrt(self.q ** (self.n_slots - 1))
        growth = sum(s_norm ** (2 * k) for k in range(self.n_slots))
        return E * spectator * growth, "bound"


def evolve(model: ModelSpec, config: ToyFockConfig) -> FlowState:
    config.check(model.dim_h, model.d)
    return FlowState(model, config, step_unitary(model, config.dt))


def vacuum_expectation(state: FlowState, u, v, n_steps: int) -> complex:
    """``<u (x) vac, V_[0, n_steps) v (x) vac> = <u, S^n_steps v>``."""
    if not 0 <= n_steps <= state.n_slots:
        raise ValueError(f"n_steps={n_steps} outside [0, {state.n_slots}]")
    return inner(as_vector(u), np.linalg.matrix_power(state.S, n_steps) @ as_vector(v))


def slots_for_time(t: float, dt: float) -> int:
    """Number of whole slots in ``[0, t)``; warns when ``t/dt`` is not integral."""
    ratio = t / dt
    n = int(math.floor(ratio + 1e-9))
    if abs(ratio - round(ratio)) > 1e-9:
        warnings.warn(f"t={t} is not a multiple of dt={dt}; using {n} slots", stacklevel=2)
    return n


Spec = Tuple  # (interval, u, v) or (interval, u, v, eps)


def _unpack(spec: Spec):
    if len(spec) == 3:
        (a, b), u, v = spec
        eps = 0
    else:
        (a, b), u, v, eps = spec
    return int(a), int(b), as_vector(u), as_vector(v), int(eps)


def _apply_slice(state: FlowState, xi: np.ndarray, spec: Spec) -> np.ndarray:
    """``V_[a,b)^(eps)(u, v) xi`` for a Fock tensor ``xi``."""
    a, b, u, v, eps = _unpack(spec)
    y = np.multiply.outer(v, xi)
    y = state.apply(y, a, b, adjoint_=bool(eps))
    return np.tensordot(np.conj(u), y, axes=(0, 0))


@dataclass(frozen=True)
class SlotOperator:
    """An operator acting on slots ``[start, stop)`` and trivially elsewhere."""

    start: int
    stop: int
    matrix: np.ndarray
    q: int

    def embed(self, n_slots: int) -> np.ndarray:
        before = np.eye(self.q ** self.start)
        after = np.eye(self.q ** (n_slots - self.stop))
        return np.kron(np.kron(before, self.matrix), after)


def slice_flow(state: FlowState, interval: Tuple[int, int], u, v, eps: int = 0) -> SlotOperator:
    """The slice ``V_[a,b)(u, v)`` restricted to the slots it touches."""
    a, b = int(interval[0]), int(interval[1])
    state._check_interval(a, b)
    length = b - a
    m = state.q ** length
    if state.dim_h * m > DENSE_LIMIT:
        raise CapacityError(f"slice over {length} slots needs dimension {state.dim_h * m}")
    sub = FlowState(state.model, ToyFockConfig(max(length, 1), state.dt, max_slots=max(length, 1)), state.step)
    if length == 0:
        return SlotOperator(a, b, inner(as_vector(u), as_vector(v)) * np.eye(1, dtype=complex), state.q)
    eye = np.eye(m, dtype=complex).reshape((state.q,) * length + (m,))
    cols = _apply_slice(sub, eye, ((0, length), u, v, eps))
    return SlotOperator(a, b, cols.reshape(m, m), state.q)


def correlation(state: FlowState, specs: Sequence[Spec]) -> complex:
    """``<vac, prod_k V_{I_k}(u_k, v_k) vac>``, product in list order."""
    xi = state.vacuum()
    for spec in reversed(list(specs)):
        xi = _apply_slice(state, xi, spec)
    return complex(xi[(0,) * state.n_slots])


def _apply_word(state: FlowState, specs: Sequence[Spec]) -> np.ndarray:
    xi = state.vacuum()
    for spec in reversed(list(specs)):
        xi = _apply_slice(state, xi, spec)
    return xi


def inner_correlation(state: FlowState, left: Sequence[Spec], right: Sequence[Spec]) -> complex:
    """``<V(left) vac, V(right) vac>`` for two ordered slice products."""
    return complex(np.vdot(_apply_word(state, left), _apply_word(state, right)))


def _one_slot_superop(blocks: np.ndarray, mode: str) -> np.ndarray:
    q = blocks.shape[1]
    sup = 0
    for m in range(q):
        if mode == "Z":
            K = blocks[:, m, :, 0]
        else:
            K = adjoint(blocks[:, 0, :, m])
        sup = sup + np.kron(K, np.conj(K))
    return sup


def discrete_Z(state: FlowState, n_steps: int, rho: np.ndarray) -> np.ndarray:
    """``Tr_Fock[V (rho (x) |vac><vac|) V^*]`` over ``n_steps`` slots, via the one-slot channel."""
    sup = np.linalg.matrix_power(_one_slot_superop(state.blocks, "Z"), n_steps)
    return unvec(sup @ vec(rho), state.dim_h)


def discrete_F(state: FlowState, n_steps: int, rho: np.ndarray) -> np.ndarray:
    """``Tr_Fock[V^* (rho (x) |vac><vac|) V]`` over ``n_steps`` slots."""
    sup = np.linalg.matrix_power(_one_slot_superop(state.blocks, "F"), n_steps)
    return unvec(sup @ vec(rho), state.dim_h)


def two_point_rate(model: ModelSpec, dt: float) -> np.ndarray:
    """Finite-difference rate ``(M_dt - I) / dt`` of the two-point vacuum function.

    ``<u (x) p, M_dt v (x) w> = <vac, V(u, v) V(p, w) vac>`` over one shared slot.
    """
    n, q = model.dim_h, 1 + model.d
    B = step_unitary(model, dt).reshape(n, q, n, q)
    M = np.einsum("abm,cme->acbe", B[:, 0, :, :], B[:, :, :, 0]).reshape(n * n, n * n)
    return (M - np.eye(n * n)) / dt


def gaussian_triple(model: ModelSpec, dt: float, letters: Sequence[Tuple]) -> complex:
    """``(1/dt) <vac, prod_i (V^(eps_i) - 1)(u_i, v_i) vac>`` over one slot of width ``dt``."""
    n, q = model.dim_h, 1 + model.d
    s = step_unitary(model, dt)
    prod = np.eye(q, dtype=complex)
    for u, v, eps in letters:
        u, v = as_vector(u), as_vector(v)
        A = adjoint(s) if eps else s
        blk = np.einsum("a,aibj,b->ij", np.conj(u), A.reshape(n, q, n, q), v)
        prod = prod @ (blk - inner(u, v) * np.eye(q))
    return complex(prod[0, 0]) / dt
