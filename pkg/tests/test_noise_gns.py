import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import E0, E1, SIGMA_MINUS, random_vector
from hpflow.models import amplitude_damping, preset, random_qutrit
from hpflow.noise_gns import (
    DegeneracyWarning,
    TensorWord,
    basis_pair_words,
    combo_distance,
    eta_reduce,
    gns_construct,
    gram_matrix,
    kernel_pair,
    kernel_word,
    letter,
    pi_apply,
)
from hpflow.operators import adjoint, inner
from hpflow.semigroups import ModelSpec, build_g, observe


def coupling_kernel(model, u, v, p, w):
    return sum(np.conj(inner(u, Lj @ v)) * inner(p, Lj @ w) for Lj in model.L)


def random_word(rng, n, length):
    return TensorWord(
        tuple(random_vector(rng, n) for _ in range(length)),
        tuple(random_vector(rng, n) for _ in range(length)),
        tuple(int(b) for b in rng.integers(0, 2, size=length)),
    )


def test_word_validation():
    with pytest.raises(ValueError):
        TensorWord((E0,), (E0, E1), (0,))
    with pytest.raises(ValueError):
        TensorWord((E0,), (E1,), (2,))
    with pytest.raises(ValueError):
        TensorWord((E0,), (np.ones(3),), (0,))


def test_involution_is_an_involution(rng):
    w = random_word(rng, 3, 3)
    ww = w.involution().involution()
    assert ww.eps == w.eps
    for a, b in zip(ww.u + ww.v, w.u + w.v):
        np.testing.assert_array_equal(a, b)
    inv = w.involution()
    assert inv.eps == tuple(1 - e for e in reversed(w.eps))
    np.testing.assert_array_equal(inv.u[0], w.v[-1])


def test_kernel_pair_examples(amp, rng):
    assert kernel_pair(amp, E0, E1, E0, E1) == pytest.approx(1.0, abs=1e-15)
    assert kernel_pair(amp, E0, E1, E1, E0) == pytest.approx(0.0, abs=1e-15)
    u, p, w = (random_vector(rng, 2) for _ in range(3))
    assert kernel_pair(amp, u, np.zeros(2), p, w) == 0


def test_kernel_pair_equals_coupling_formula(any_preset, rng):
    n = any_preset.dim_h
    for _ in range(20):
        u, v, p, w = (random_vector(rng, n) for _ in range(4))
        assert abs(kernel_pair(any_preset, u, v, p, w) - coupling_kernel(any_preset, u, v, p, w)) < 1e-10


def test_kernel_is_gauge_invariant(rng):
    model = random_qutrit()
    Q, _ = np.linalg.qr(random_vector(rng, 4).reshape(2, 2) + 1j)
    mixed = model.with_couplings([Q[j, 0] * model.L[0] + Q[j, 1] * model.L[1] for j in range(2)])
    for _ in range(5):
        u, v, p, w = (random_vector(rng, 3) for _ in range(4))
        assert abs(kernel_pair(model, u, v, p, w) - kernel_pair(mixed, u, v, p, w)) < 1e-12


def test_eta_reduce_examples(rng):
    u, v = random_vector(rng, 2), random_vector(rng, 2)
    [(c, (a, b))] = eta_reduce(letter(u, v, 0))
    assert c == 1 and a is not None
    [(c, _)] = eta_reduce(letter(u, v, 1))
    assert c == -1
    # second letter has zero pairing, so only its own term survives
    terms = eta_reduce(TensorWord((u, E0), (v, E1), (0, 1)))
    assert len(terms) == 1
    c, (a, b) = terms[0]
    assert c == pytest.approx(-inner(u, v))
    np.testing.assert_array_equal(a, E0)
    np.testing.assert_array_equal(b, E1)


def test_kernel_word_single_letter_and_sign_rule(any_preset, rng):
    n = any_preset.dim_h
    u, v, p, w = (random_vector(rng, n) for _ in range(4))
    base = kernel_word(any_preset, letter(u, v), letter(p, w))
    assert base == pytest.approx(kernel_pair(any_preset, u, v, p, w), abs=1e-13)
    assert abs(kernel_word(any_preset, letter(u, v, 1), letter(p, w)) + base) < 1e-12
    assert abs(kernel_word(any_preset, letter(u, v), letter(p, w, 1)) + base) < 1e-12


def test_kernel_word_four_term_expansion(rng):
    model = random_qutrit()
    w1, w2 = random_word(rng, 3, 2), random_word(rng, 3, 2)

    def coef(word, i):
        other = 1 - i
        return (-1) ** word.eps[i] * inner(word.u[other], word.v[other])

    expected = sum(
        np.conj(coef(w1, i)) * coef(w2, j) * coupling_kernel(model, w1.u[i], w1.v[i], w2.u[j], w2.v[j])
        for i in range(2)
        for j in range(2)
    )
    assert abs(kernel_word(model, w1, w2) - expected) < 1e-12


def test_gram_examples():
    amp = amplitude_damping()
    sample = gram_matrix(amp, basis_pair_words(2))
    eig = np.linalg.eigvalsh(sample.gram)
    np.testing.assert_allclose(eig, [0, 0, 0, 1], atol=1e-14)
    # basis pair (e0, e1) sits at row-major index 1
    assert sample.gram[1, 1] == pytest.approx(1.0)
    zero = gram_matrix(preset("pure-hamiltonian"), basis_pair_words(2))
    np.testing.assert_allclose(zero.gram, 0, atol=1e-14)
    rq = gram_matrix(random_qutrit(), basis_pair_words(3)).gram
    lam = np.linalg.eigvalsh(rq)
    assert int(np.sum(lam > 1e-9 * lam.max())) == 2


def test_gram_positive_on_mixed_words(any_preset, rng):
    words = [random_word(rng, any_preset.dim_h, int(rng.integers(1, 4))) for _ in range(8)]
    sample = gram_matrix(any_preset, words)
    assert sample.hermiticity_error < 1e-12
    assert sample.min_eigenvalue >= -1e-10


def test_gns_amplitude_damping():
    rec = gns_construct(amplitude_damping())
    assert rec.d_rec == 1
    L = rec.L_rec[0]
    phase = L[0, 1] / abs(L[0, 1])
    np.testing.assert_allclose(L, phase * SIGMA_MINUS, atol=1e-10)
    np.testing.assert_allclose(rec.H_rec, 0, atol=1e-10)


def test_gns_no_noise():
    model = preset("pure-hamiltonian")
    rec = gns_construct(model)
    assert rec.d_rec == 0
    assert rec.L_rec == ()
    np.testing.assert_allclose(rec.H_rec, model.H, atol=1e-12)


def test_gns_eta_table_consistency_and_isometry():
    model = random_qutrit()
    rec = gns_construct(model)
    n = model.dim_h
    for (a, b), eta in rec.eta_table.items():
        for j in range(rec.d_rec):
            assert rec.L_rec[j][a, b] == eta[j]
    gram = gram_matrix(model, basis_pair_words(n)).gram
    coords = np.array([rec.eta_table[(a, b)] for a in range(n) for b in range(n)])
    np.testing.assert_allclose(np.conj(coords) @ coords.T, gram, atol=1e-10)
    assert np.linalg.norm(rec.H_rec - adjoint(rec.H_rec)) < 1e-10
    stacked = np.stack([Lj.reshape(-1) for Lj in rec.L_rec])
    assert np.linalg.svd(stacked, compute_uv=False).min() > rec.tol_rank


def test_gns_uses_only_observed_generators():
    model = random_qutrit()
    a, b = gns_construct(model), gns_construct(observe(model))
    for x, y in zip(a.L_rec, b.L_rec):
        np.testing.assert_array_equal(x, y)


def test_gns_dependent_couplings_and_degeneracy_warning():
    doubled = ModelSpec(np.zeros((2, 2)), (SIGMA_MINUS, SIGMA_MINUS))
    assert gns_construct(doubled).d_rec == 1
    # an eigenvalue just above the cutoff triggers the warning
    weak = ModelSpec(np.zeros((2, 2)), (SIGMA_MINUS, 3e-5 * SIGMA_MINUS.T))
    with pytest.warns(DegeneracyWarning):
        gns_construct(weak, tol_rank=1e-9)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        gns_construct(amplitude_damping())
    with pytest.raises(ValueError):
        gns_construct(amplitude_damping(), tol_rank=0)


def test_gns_reconstruction_reproduces_dissipation():
    model = random_qutrit()
    rec = gns_construct(model)
    G = build_g(model)
    total = sum(adjoint(Lj) @ Lj for Lj in rec.L_rec)
    assert np.linalg.norm(total + G + adjoint(G)) < 1e-10


def test_product_rule_for_letters(rng):
    model = random_qutrit()
    u, v, p, w = (random_vector(rng, 3) for _ in range(4))
    for e1, e2 in [(0, 0), (0, 1), (1, 1)]:
        left = [(1.0, TensorWord((u, p), (v, w), (e1, e2)))]
        right = [(inner(p, w), letter(u, v, e1)), (inner(u, v), letter(p, w, e2))]
        # a distance is the root of a cancelling sum, so rounding enters at ~sqrt(eps)
        assert combo_distance(model, left, right) < 1e-6


def test_pi_apply_multiplicative(rng):
    model = random_qutrit()
    w1, w2, x = random_word(rng, 3, 1), random_word(rng, 3, 2), random_word(rng, 3, 1)
    target = [(1.0 + 0.5j, x)]
    step = pi_apply(w2, target)
    twice = [term for c, word in step for term in pi_apply(w1, [(c, word)])]
    once = pi_apply(w1 * w2, target)
    scale = np.sqrt(abs(np.real(sum(np.conj(c) * c for c, _ in once))))
    assert combo_distance(model, twice, once) < 1e-6 * max(scale, 1.0)


def test_pi_apply_on_trivial_target(rng):
    model = random_qutrit()
    w = random_word(rng, 3, 2)
    # a word orthogonal in the pairing acts through eta(w . x) alone
    e = np.eye(3)
    x = TensorWord((e[0],), (e[1],), (0,))
    out = pi_apply(w, [(1.0, x)])
    assert combo_distance(model, out, [(1.0, w * x)]) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_gram_psd_property(seed, length):
    rng = np.random.default_rng(seed)
    words = [random_word(rng, 3, length) for _ in range(4)]
    assert gram_matrix(random_qutrit(), words).min_eigenvalue >= -1e-10
