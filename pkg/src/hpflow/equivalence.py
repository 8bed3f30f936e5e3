"""Round trip certificate: model -> semigroup data -> reconstructed model.

The reconstructed couplings agree with the originals only up to a unitary
mixing ``L_j -> sum_k W_jk L_k`` on the noise space. ``match_unitary`` finds
that mixing by orthogonal Procrustes; ``equivalence_report`` then checks
that every observable (``T_t``, ``Z_t`` and a fixed battery of multi-slot
vacuum correlations of the simulated flows) coincides.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from hpflow.flow import FlowState, ToyFockConfig, correlation, discrete_Z, evolve, inner_correlation
from hpflow.noise_gns import DEFAULT_TOL_RANK, GNSResult, gns_construct
from hpflow.operators import frobenius_norm, inner, outer
from hpflow.semigroups import ModelSpec, observe, semigroup_T, semigroup_Z

__all__ = [
    "BATTERY_VERSION",
    "DEFAULT_TOLERANCES",
    "EquivalenceReport",
    "reconstruct",
    "match_unitary",
    "correlation_battery",
    "predicted_inner_correlation",
    "equivalence_report",
]

BATTERY_VERSION = 1
DEFAULT_TOLERANCES = {
    "procrustes": 1e-8,
    "h_match": 1e-8,
    "semigroup_T": 1e-8,
    "semigroup_Z": 1e-8,
    "correlation": 1e-8,
}


def reconstruct(model: ModelSpec, tol_rank: float = DEFAULT_TOL_RANK) -> GNSResult:
    """Rebuild ``(H, L)`` from ``G`` and the Lindblad generator only."""
    return gns_construct(observe(model), tol_rank)


def match_unitary(L_orig: Sequence[np.ndarray], L_rec: Sequence[np.ndarray]) -> Tuple[Optional[np.ndarray], float]:
    """Unitary ``W`` minimizing ``sum_j ||L_rec_j - sum_k W_jk L_orig_k||_F^2``.

    Returns ``(W, residual)`` with ``residual`` the Frobenius norm of the
    attained misfit. When the list lengths differ no ``W`` is produced and
    the residual is NaN.
    """
    if len(L_orig) != len(L_rec):
        return None, float("nan")
    d = len(L_orig)
    if d == 0:
        return np.zeros((0, 0), dtype=complex), 0.0
    A = np.stack([np.asarray(x).reshape(-1) for x in L_orig])
    B = np.stack([np.asarray(x).reshape(-1) for x in L_rec])
    # min ||B - W A||  =>  W = U V^*  with  B A^* = U Sigma V^*
    U, _, Vh = np.linalg.svd(B @ np.conj(A).T)
    W = U @ Vh
    return W, float(np.linalg.norm(B - W @ A))


def _unit(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    return x / np.linalg.norm(x)


def correlation_battery(dim_h: int, n_slots: int, seed: int = 0) -> Dict[str, list]:
    """Fixed, seeded battery of slice patterns (at most three slices per word).

    ``"vacuum"`` holds products for ``<vac, prod V(...) vac>`` and
    ``"inner"`` holds ``(left, right)`` pairs for ``<V(left) vac, V(right) vac>``.
    """
    rng = np.random.default_rng([BATTERY_VERSION, seed])
    n = n_slots
    a, b = max(n // 3, 1), max((2 * n) // 3, 1)
    if b <= a:
        b = min(a + 1, n)
    patterns = [
        [(0, n)],
        [(0, a), (a, n)],
        [(0, a), (a, b), (b, n)],
        [(a, n), (0, a)],
        [(0, b), (a, n)],
        [(1 if n > 1 else 0, n)],
    ]
    eps_patterns = [[1], [0, 1], [1, 0, 1], [0, 0], [1, 0], [1]]

    def draw(intervals, eps=None):
        eps = eps or [0] * len(intervals)
        return [((s, t), _unit(rng, dim_h), _unit(rng, dim_h), e) for (s, t), e in zip(intervals, eps)]

    vacuum = [draw(p) for p in patterns] + [draw(p, e) for p, e in zip(patterns, eps_patterns)]
    inner_pairs = [
        (draw([(0, n)]), draw([(0, n)])),
        (draw([(0, a), (a, n)]), draw([(0, a), (a, n)])),
        (draw([(0, a)]), draw([(a, n)])),
        (draw([(0, a), (b, n)]), draw([(a, b), (b, n)])),
        (draw([(0, a), (a, b), (b, n)]), draw([(0, b), (b, n)])),
    ]
    return {"vacuum": vacuum, "inner": inner_pairs}


def predicted_inner_correlation(state: FlowState, left: Sequence, right: Sequence) -> complex:
    """Product formula for ``<V(left) vac, V(right) vac>``.

    Requires disjoint intervals within each side and intervals shared by
    both sides to coincide exactly. Left-only intervals contribute
    ``conj(<u, S^l v>)``, shared ones ``<p, Z^l(|w><v|) u>`` and right-only
    ones ``<p, S^l w>``, with the discrete one-slot semigroups of ``state``.
    """
    lmap = {tuple(s[0]): s for s in left}
    rmap = {tuple(s[0]): s for s in right}
    ivs = sorted(set(lmap) | set(rmap))
    for (a0, b0), (a1, b1) in zip(ivs, ivs[1:]):
        if a1 < b0:
            raise ValueError(f"intervals [{a0}, {b0}) and [{a1}, {b1}) overlap without coinciding")
    S = state.S
    out = 1.0 + 0j
    for iv in ivs:
        length = iv[1] - iv[0]
        Sl = np.linalg.matrix_power(S, length)
        if iv in lmap and iv in rmap:
            _, u, v = lmap[iv][:3]
            _, p, w = rmap[iv][:3]
            out *= inner(p, discrete_Z(state, length, outer(w, v)) @ u)
        elif iv in lmap:
            _, u, v = lmap[iv][:3]
            out *= np.conj(inner(u, Sl @ v))
        else:
            _, p, w = rmap[iv][:3]
            out *= inner(p, Sl @ w)
    return out


@dataclass
class EquivalenceReport:
    d_orig: int
    d_rec: int
    gauge_W: Optional[np.ndarray]
    procrustes_residual: float
    correlation_max_error: float
    h_match_error: float
    T_max_error: float
    Z_max_error: float
    checks: Dict[str, dict] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "d_orig": self.d_orig,
            "d_rec": self.d_rec,
            "procrustes_residual": self.procrustes_residual,
            "correlation_max_error": self.correlation_max_error,
            "h_match_error": self.h_match_error,
            "T_max_error": self.T_max_error,
            "Z_max_error": self.Z_max_error,
            "checks": self.checks,
            "notes": list(self.notes),
            "passed": self.passed,
        }


def _check(value: float, tol: float) -> dict:
    return {"value": float(value), "tolerance": float(tol), "pass": bool(value < tol)}


def equivalence_report(
    model: ModelSpec,
    config: ToyFockConfig,
    tolerances: Optional[Dict[str, float]] = None,
    tol_rank: float = DEFAULT_TOL_RANK,
    seed: int = 0,
    rec_scale: float = 1.0,
) -> EquivalenceReport:
    """Compare the original flow with the flow of the reconstructed model.

    ``rec_scale`` multiplies the reconstructed couplings before comparison;
    values other than 1 serve as a sensitivity probe and must fail.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    rec = reconstruct(model, tol_rank)
    rec_model = ModelSpec(rec.H_rec, tuple(rec_scale * Lj for Lj in rec.L_rec))
    notes = []

    W, residual = match_unitary(model.L, rec.L_rec)
    if W is None:
        notes.append(
            f"reconstructed noise dimension {rec.d_rec} differs from input list length {model.d}; "
            "input couplings are linearly dependent"
        )
    h_err = frobenius_norm(rec.H_rec - model.H)

    times = [config.dt * k for k in range(config.n_slots + 1)] + [1.0, 2.0]
    T_err = max(
        float(np.max(np.abs(semigroup_T(model, t) - semigroup_T(rec_model, t)))) for t in times
    )
    rng = np.random.default_rng([BATTERY_VERSION, seed, 1])
    Z_err = 0.0
    for _ in range(5):
        X = rng.normal(size=(model.dim_h,) * 2) + 1j * rng.normal(size=(model.dim_h,) * 2)
        rho = X @ np.conj(X).T
        rho /= np.trace(rho)
        for t in (0.1, 1.0, config.horizon):
            diff = semigroup_Z(model, t, rho) - semigroup_Z(rec_model, t, rho)
            Z_err = max(Z_err, float(np.max(np.abs(diff))))

    orig_state = evolve(model, ToyFockConfig(config.n_slots, config.dt, None, config.max_slots, config.memory_cap))
    rec_state = evolve(rec_model, ToyFockConfig(config.n_slots, config.dt, None, config.max_slots, config.memory_cap))
    battery = correlation_battery(model.dim_h, config.n_slots, seed)
    corr_err = 0.0
    for specs in battery["vacuum"]:
        corr_err = max(corr_err, abs(correlation(orig_state, specs) - correlation(rec_state, specs)))
    for left, right in battery["inner"]:
        corr_err = max(
            corr_err,
            abs(inner_correlation(orig_state, left, right) - inner_correlation(rec_state, left, right)),
        )

    checks = {
        "h_match": _check(h_err, tol["h_match"]),
        "semigroup_T": _check(T_err, tol["semigroup_T"]),
        "semigroup_Z": _check(Z_err, tol["semigroup_Z"]),
        "correlation": _check(corr_err, tol["correlation"]),
    }
    if W is not None:
        checks["procrustes"] = _check(residual, tol["procrustes"])
    return EquivalenceReport(
        d_orig=model.d,
        d_rec=rec.d_rec,
        gauge_W=W,
        procrustes_residual=residual,
        correlation_max_error=float(corr_err),
        h_match_error=h_err,
        T_max_error=T_err,
        Z_max_error=Z_err,
        checks=checks,
        notes=notes,
    )
