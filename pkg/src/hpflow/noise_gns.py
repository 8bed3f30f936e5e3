"""Kernel on the Hilbert tensor algebra and Kolmogorov reconstruction.

Words ``(u, v, eps)`` are elements of the algebra spanned by product
vectors with a bit string marking adjoints. The kernel between two words
reduces, via ``eta_reduce``, to a sesquilinear combination of single-letter
kernels::

    K(u, v; p, w) = <p, Lind(|w><v|) u> - conj(<u,v>) <p, G w> - conj(<u, G v>) <p, w>

which needs only ``G`` and the Lindblad generator. Eigendecomposing the
Gram matrix of the basis-pair letters yields coordinates of the embedding
``eta`` in an orthonormal basis of the noise space, from which the
couplings ``<e_a, L_j e_b> = (eta(e_a, e_b))_j`` and ``H`` are read off.
"""
import warnings
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from hpflow.operators import adjoint, as_vector, basis_vector, frobenius_norm, inner, outer
from hpflow.semigroups import ModelSpec, ObservedGenerators, Source, lindblad_apply, observe

__all__ = [
    "DEFAULT_TOL_RANK",
    "TensorWord",
    "letter",
    "GramSample",
    "GNSResult",
    "DegeneracyWarning",
    "kernel_pair",
    "eta_reduce",
    "kernel_word",
    "kernel_combo",
    "gram_matrix",
    "basis_pair_words",
    "gns_construct",
    "pi_apply",
    "combo_distance",
]

DEFAULT_TOL_RANK = 1e-9
# Gram spectra whose top eigenvalue sits below this (relative to ||G||) are
# treated as empty: pure drift models give rounding-level kernels.
ABSOLUTE_FLOOR = 1e-12


class DegeneracyWarning(UserWarning):
    """An eigenvalue of the Gram matrix lies close to the rank cutoff."""


@dataclass(frozen=True)
class TensorWord:
    """A word ``(u_1..u_n, v_1..v_n, eps_1..eps_n)``; ``eps_i = 1`` marks an adjoint."""

    u: Tuple[np.ndarray, ...]
    v: Tuple[np.ndarray, ...]
    eps: Tuple[int, ...]

    def __post_init__(self):
        u = tuple(as_vector(x) for x in self.u)
        v = tuple(as_vector(x) for x in self.v)
        eps = tuple(int(e) for e in self.eps)
        if not (len(u) == len(v) == len(eps)) or len(u) == 0:
            raise ValueError("word lists must be nonempty and of equal length")
        if any(e not in (0, 1) for e in eps):
            raise ValueError("eps bits must be 0 or 1")
        dims = {x.shape[0] for x in u + v}
        if len(dims) != 1:
            raise ValueError("all word vectors must share one dimension")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "eps", eps)

    def __len__(self):
        return len(self.eps)

    @property
    def dim(self) -> int:
        return self.u[0].shape[0]

    def __mul__(self, other: "TensorWord") -> "TensorWord":
        return TensorWord(self.u + other.u, self.v + other.v, self.eps + other.eps)

    def involution(self) -> "TensorWord":
        """``(u, v, eps)^* = (reversed v, reversed u, 1 + reversed eps)``."""
        return TensorWord(self.v[::-1], self.u[::-1], tuple(1 - e for e in self.eps[::-1]))

    def pairing(self) -> complex:
        """``<u, v> = prod_i <u_i, v_i>``."""
        out = 1.0 + 0j
        for ui, vi in zip(self.u, self.v):
            out *= inner(ui, vi)
        return out


def letter(u, v, eps: int = 0) -> TensorWord:
    return TensorWord((u,), (v,), (eps,))


@dataclass(frozen=True)
class GramSample:
    words: Tuple[TensorWord, ...]
    gram: np.ndarray

    @property
    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.gram)))

    @property
    def hermiticity_error(self) -> float:
        return frobenius_norm(self.gram - adjoint(self.gram))


@dataclass(frozen=True)
class GNSResult:
    """Reconstructed noise space data.

    ``eta_table[(a, b)]`` holds the coordinates of ``eta(e_a, e_b)`` in the
    retained eigenbasis; ``L_rec[j][a, b]`` equals ``eta_table[(a, b)][j]``.
    """

    d_rec: int
    eta_table: Dict[Tuple[int, int], np.ndarray]
    L_rec: Tuple[np.ndarray, ...]
    H_rec: np.ndarray
    tol_rank: float
    eigenvalues: np.ndarray

    def as_model(self) -> ModelSpec:
        return ModelSpec(self.H_rec, self.L_rec)


def kernel_pair(source: Source, u, v, p, w) -> complex:
    """Single-letter kernel ``K((u, v, 0), (p, w, 0))`` from the generators."""
    gen = observe(source)
    u, v, p, w = (as_vector(x) for x in (u, v, p, w))
    if any(x.shape != (gen.dim_h,) for x in (u, v, p, w)):
        raise ValueError(f"kernel vectors must have dimension {gen.dim_h}")
    lind = lindblad_apply(gen, outer(w, v))
    G = gen.G
    return (
        inner(p, lind @ u)
        - np.conj(inner(u, v)) * inner(p, G @ w)
        - np.conj(inner(u, G @ v)) * inner(p, w)
    )


def eta_reduce(word: TensorWord) -> List[Tuple[complex, Tuple[np.ndarray, np.ndarray]]]:
    """Expand ``eta(word)`` over single letters.

    Term ``i`` carries ``(-1)^eps_i prod_{k != i} <u_k, v_k>`` on the letter
    ``(u_i, v_i)``; exactly vanishing coefficients are dropped.
    """
    pairings = [inner(ui, vi) for ui, vi in zip(word.u, word.v)]
    terms = []
    for i in range(len(word)):
        coef = -1.0 + 0j if word.eps[i] else 1.0 + 0j
        for k, c in enumerate(pairings):
            if k != i:
                coef *= c
        if coef != 0:
            terms.append((coef, (word.u[i], word.v[i])))
    return terms


def kernel_word(source: Source, w1: TensorWord, w2: TensorWord) -> complex:
    gen = observe(source)
    total = 0j
    for c1, (u, v) in eta_reduce(w1):
        for c2, (p, w) in eta_reduce(w2):
            total += np.conj(c1) * c2 * kernel_pair(gen, u, v, p, w)
    return total


Combo = Sequence[Tuple[complex, TensorWord]]


def kernel_combo(source: Source, a: Combo, b: Combo) -> complex:
    """``<eta(a), eta(b)>`` for formal linear combinations of words."""
    gen = observe(source)
    total = 0j
    for ca, wa in a:
        for cb, wb in b:
            total += np.conj(ca) * cb * kernel_word(gen, wa, wb)
    return total


def combo_distance(source: Source, a: Combo, b: Combo) -> float:
    """Kernel-induced distance ``||eta(a) - eta(b)||``."""
    diff = list(a) + [(-c, w) for c, w in b]
    sq = kernel_combo(source, diff, diff).real
    return float(np.sqrt(max(sq, 0.0)))


def gram_matrix(source: Source, words: Sequence[TensorWord]) -> GramSample:
    if not words:
        raise ValueError("gram_matrix needs at least one word")
    gen = observe(source)
    n = len(words)
    gram = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            k = kernel_word(gen, words[i], words[j])
            gram[i, j] = k
            if i != j:
                gram[j, i] = np.conj(k)
    # diagonal kernels are real; drop rounding-level imaginary parts
    gram[np.diag_indices(n)] = gram.diagonal().real
    return GramSample(tuple(words), gram)


def basis_pair_words(dim_h: int) -> List[TensorWord]:
    """Letters ``(e_a, e_b, 0)`` in row-major ``(a, b)`` order."""
    es = [basis_vector(dim_h, a) for a in range(dim_h)]
    return [letter(es[a], es[b]) for a in range(dim_h) for b in range(dim_h)]


def _basis_pair_gram(gen: ObservedGenerators) -> np.ndarray:
    """Gram of all basis-pair letters in closed vectorized form.

    ``K[(a,b),(c,e)] = Lind(|e_e><e_b|)[c, a] - delta_ab G[c, e] - conj(G[a, b]) delta_ce``.
    """
    n = gen.dim_h
    eye = np.eye(n)
    # lindblad maps vec(|e_e><e_b|) (index e*n+b) to vec(rho) (index c*n+a)
    sup = gen.lindblad.reshape(n, n, n, n)  # [c, a, e, b]
    first = np.transpose(sup, (1, 3, 0, 2))  # [a, b, c, e]
    second = np.einsum("ab,ce->abce", eye, gen.G)
    third = np.einsum("ab,ce->abce", np.conj(gen.G), eye)
    gram = (first - second - third).reshape(n * n, n * n)
    return 0.5 * (gram + adjoint(gram))


def gns_construct(source: Source, tol_rank: float = DEFAULT_TOL_RANK) -> GNSResult:
    """Reconstruct the noise space, couplings and Hamiltonian.

    The Gram matrix of the ``dim_h**2`` basis-pair letters is
    eigendecomposed; eigenvalues above ``tol_rank * lambda_max`` span the
    reconstructed noise space. Each retained eigenvector is phase-fixed so
    that its largest-magnitude entry is real positive, and ordering is by
    decreasing eigenvalue, which makes the output deterministic.

    Parameters
    ----------
    source : ModelSpec or ObservedGenerators
        Only ``G`` and the Lindblad generator are used.
    tol_rank : float
        Relative rank cutoff, must be positive.

    Returns
    -------
    GNSResult
    """
    if not tol_rank > 0:
        raise ValueError("tol_rank must be positive")
    gen = observe(source)
    n = gen.dim_h
    gram = _basis_pair_gram(gen)
    lam, vecs = np.linalg.eigh(gram)
    order = np.argsort(-lam, kind="stable")
    lam, vecs = lam[order], vecs[:, order]

    lam_max = float(lam[0]) if lam.size else 0.0
    floor = ABSOLUTE_FLOOR * max(1.0, frobenius_norm(gen.G))
    if lam_max <= floor:
        d_rec = 0
    else:
        cutoff = tol_rank * lam_max
        d_rec = int(np.sum(lam > cutoff))
        close = (lam > cutoff / 10) & (lam < cutoff * 10)
        if np.any(close):
            warnings.warn(
                f"Gram eigenvalue(s) {lam[close]} within a factor 10 of cutoff {cutoff:.3e}",
                DegeneracyWarning,
                stacklevel=2,
            )

    coords = np.zeros((n * n, d_rec), dtype=complex)
    for j in range(d_rec):
        col = vecs[:, j]
        k = int(np.argmax(np.abs(col)))
        col = col * (np.conj(col[k]) / abs(col[k]))
        # K = W diag(lam) W^*  =>  eta_(ab) = sqrt(lam) conj(W_(ab))
        coords[:, j] = np.sqrt(lam[j]) * np.conj(col)

    eta_table = {(a, b): coords[a * n + b].copy() for a in range(n) for b in range(n)}
    L_rec = tuple(coords[:, j].reshape(n, n).copy() for j in range(d_rec))
    drift = gen.G.astype(complex)
    for Lj in L_rec:
        drift = drift + 0.5 * adjoint(Lj) @ Lj
    H_rec = -1j * drift
    return GNSResult(d_rec, eta_table, L_rec, H_rec, tol_rank, lam)


def pi_apply(word: TensorWord, target: Combo) -> List[Tuple[complex, TensorWord]]:
    """Defining action ``pi(w) eta(x) = eta(w . x) - <x_u, x_v> eta(w)`` on a combination."""
    out = []
    for c, x in target:
        out.append((c, word * x))
        out.append((-c * x.pairing(), word))
    return out
