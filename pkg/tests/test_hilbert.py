import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynepovm.hilbert import (
    EXCITED,
    GROUND,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    CavityState,
    TruncationError,
    build_annihilation,
    build_jc_hamiltonian,
    build_squeezed_vacuum,
    default_truncation,
    fock,
    is_hermitian,
    partial_trace_cavity,
    product_state,
    required_levels,
    squeezed_amplitudes,
)

from conftest import random_density


def test_sigma_conventions():
    assert np.allclose(SIGMA_MINUS @ EXCITED, GROUND)
    assert np.allclose(SIGMA_PLUS @ GROUND, EXCITED)
    assert np.allclose(SIGMA_Z @ EXCITED, EXCITED)


def test_annihilation_commutator_below_truncation():
    a = build_annihilation(6)
    comm = a @ a.conj().T - a.conj().T @ a
    assert np.allclose(np.diag(comm)[:-1], 1.0)
    with pytest.raises(ValueError):
        build_annihilation(1)


@pytest.mark.parametrize("convention", ["appendix", "main_text"])
def test_jc_hermitian(convention):
    assert is_hermitian(build_jc_hamiltonian(1.0, 1.3, 0.7, 5, convention))


def test_jc_resonant_splitting():
    # one-excitation block {|e,0>, |g,1>} splits into omega/2 +- g
    h = build_jc_hamiltonian(1.0, 1.0, 0.4, 3)
    idx = [0 * 3 + 0, 1 * 3 + 1]
    ev = np.linalg.eigvalsh(h[np.ix_(idx, idx)])
    assert np.allclose(ev, [0.5 - 0.4, 0.5 + 0.4])


def test_jc_conserves_excitations():
    n_fock = 4
    h = build_jc_hamiltonian(1.0, 1.0, 0.8, n_fock)
    exc = np.array([n + (q == 0) for q in range(2) for n in range(n_fock)])
    assert np.allclose(h @ np.diag(exc) - np.diag(exc) @ h, 0)


def test_unknown_convention():
    with pytest.raises(ValueError):
        build_jc_hamiltonian(1, 1, 1, 3, "other")


@given(st.floats(-0.5, 0.5))
def test_squeezed_matches_closed_form(s):
    n = default_truncation(s)
    psi = build_squeezed_vacuum(s, n)
    assert np.allclose(psi.real, squeezed_amplitudes(s, n) / np.linalg.norm(squeezed_amplitudes(s, n)),
                       atol=1e-12)
    assert np.allclose(psi[1::2], 0)


def test_squeezed_variances():
    # X variance shrinks by e^{-2s} with x = (a + a^dag)/sqrt 2
    s = 0.25
    n = 30
    psi = build_squeezed_vacuum(s, n)
    a = build_annihilation(n)
    x = (a + a.conj().T) / np.sqrt(2)
    p = (a - a.conj().T) / (1j * np.sqrt(2))
    vx = np.vdot(psi, x @ x @ psi).real
    vp = np.vdot(psi, p @ p @ psi).real
    assert {round(vx, 6), round(vp, 6)} == {round(0.5 * np.exp(-2 * s), 6), round(0.5 * np.exp(2 * s), 6)}


def test_squeezed_truncation_error():
    with pytest.raises(TruncationError):
        build_squeezed_vacuum(0.25, 4)
    with pytest.raises(ValueError):
        build_squeezed_vacuum(0.8, 20)


def test_required_levels_values():
    assert required_levels(0.0) == 1
    assert required_levels(0.1) == 7
    assert required_levels(0.25) == 13
    assert CavityState().truncation() == 2
    assert CavityState.squeezed(0.1).truncation() == 12
    assert CavityState.squeezed(0.25).truncation() == 20
    assert CavityState.squeezed(0.1).truncation("main_text") == 18


def test_cavity_state_validation():
    with pytest.raises(ValueError):
        CavityState("vacuum", 0.1)
    with pytest.raises(ValueError):
        CavityState("thermal")


def test_partial_trace_product(rng):
    rq = random_density(rng, 2)
    psi = build_squeezed_vacuum(0.1, 8)
    assert np.allclose(partial_trace_cavity(product_state(rq, psi), 8), rq)
    batch = np.stack([product_state(rq, psi)] * 3)
    assert partial_trace_cavity(batch, 8).shape == (3, 2, 2)
    with pytest.raises(ValueError):
        partial_trace_cavity(np.eye(5), 2)


def test_fock_vector():
    v = fock(2, 4)
    assert v[2] == 1 and np.vdot(v, v) == 1
