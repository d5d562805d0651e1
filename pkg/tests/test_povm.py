import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynepovm.dynamics import Physics, Scheme, SchemeSpec
from dynepovm.hilbert import CavityState, product_state
from dynepovm.integrate import EnsembleConfig, IntegratorConfig, integrate, noise_stages
from dynepovm.noise import NoiseParams, generate_complex_path
from dynepovm.povm import (
    PositivityError,
    PovmTrajectory,
    QubitFourVector,
    _check_positive,
    composite_spec,
    eigenvalues,
    fourvector_from_operator,
    mc_normalization_check,
    normalization_report,
    povm_batch,
    povm_matrix,
    reconstruct_ensemble,
    reconstruct_povm,
)

from conftest import random_density

PHYS = Physics()
CFG = IntegratorConfig(dt=1 / 150, t_end=1.0)
NP = NoiseParams(1, 15, 1 / 150, 1.0, seed=21)

four = st.lists(st.floats(-3, 3), min_size=4, max_size=4)


@given(four)
def test_matrix_roundtrip(v):
    assert np.allclose(fourvector_from_operator(povm_matrix(v)), v, atol=1e-12)


@given(four)
def test_eigenvalues_match_numpy(v):
    assert np.allclose(eigenvalues(v), np.linalg.eigvalsh(povm_matrix(v)), atol=1e-12)


def test_fourvector_object():
    q = QubitFourVector(1.2, (0.1, 0.2, 0.3))
    assert q.norm == pytest.approx(np.sqrt(0.14))
    assert np.allclose(QubitFourVector.from_operator(povm_matrix(q)).as_array(), q.as_array())
    with pytest.raises(ValueError):
        QubitFourVector(1.0, (0.0, 0.0))


@pytest.mark.parametrize("kind,s", [(Scheme.HET_X, 0.0), (Scheme.HET_Y, 0.1), (Scheme.HOM_X, 0.1),
                                    (Scheme.ADIABATIC_Y, 0.0), (Scheme.LINEAR_QSD, 0.0)])
def test_effect_reproduces_outcome_weights(kind, s, rng):
    # tr F_true rho_A must equal the trace of the propagated unnormalized state
    cav = CavityState.squeezed(s)
    spec = composite_spec(SchemeSpec(kind, PHYS), cav)
    path = generate_complex_path(NP)
    traj = reconstruct_povm(spec, cav, path, CFG)
    rho_a = random_density(rng, 2)
    rho0 = rho_a if kind.qubit_only else product_state(rho_a, cav.vector())
    w = np.trace(integrate(spec, rho0, path, CFG).states, axis1=1, axis2=2).real
    pred = 2 * np.einsum("rij,ji->r", povm_matrix(traj.vectors), rho_a).real
    # pure-state RK4 and density RK4 agree to the scheme's truncation error
    assert np.abs(w - pred).max() < 1e-7


def test_initial_effect_is_half_identity():
    xi = noise_stages(NP, [0, 1], CFG)
    v = povm_batch(SchemeSpec(Scheme.HET_X, PHYS), CavityState(), xi, CFG)
    assert np.allclose(v[:, 0], [1, 0, 0, 0])


@pytest.mark.parametrize("kind", [Scheme.HOM_Y, Scheme.LINEAR_QSD, Scheme.ADIABATIC])
def test_pure_and_tomography_agree(kind):
    xi = noise_stages(NP, [0, 1, 2], CFG)
    cav = CavityState.squeezed(0.1)
    a = povm_batch(SchemeSpec(kind, PHYS), cav, xi, CFG, "pure")
    b = povm_batch(SchemeSpec(kind, PHYS), cav, xi, CFG, "tomography")
    assert np.abs(a - b).max() < 1e-6


def test_rejects_deterministic_schemes():
    with pytest.raises(ValueError):
        povm_batch(SchemeSpec(Scheme.GKSL, PHYS), CavityState(), np.zeros((1, 301)), CFG)
    with pytest.raises(ValueError):
        povm_batch(SchemeSpec(Scheme.HET_X, PHYS), CavityState(), np.zeros((1, 301)), CFG, "magic")
    with pytest.raises(ValueError):
        povm_batch(SchemeSpec(Scheme.HET_X, PHYS), CavityState(), np.zeros((1, 301)), CFG, "pure")


def test_positivity_check():
    _check_positive(np.array([[1.0, 1.0 + 5e-7, 0, 0]]))
    _check_positive(np.array([[1.9, 0.5, 0, 0]]))  # above the window is not a positivity failure
    with pytest.raises(PositivityError):
        _check_positive(np.array([[1.0, 1.01, 0, 0]]))


def test_trajectory_csv_roundtrip(tmp_path):
    traj = reconstruct_povm(SchemeSpec(Scheme.HET_Y, PHYS), CavityState(),
                            generate_complex_path(NP), CFG, stream_id=7)
    f = tmp_path / "t.csv"
    traj.to_csv(f)
    back = PovmTrajectory.from_csv(f)
    assert np.array_equal(back.vectors, traj.vectors)
    assert np.array_equal(back.times, traj.times)
    assert back.scheme is Scheme.HET_Y and back.stream_id == 7
    assert f.read_text().splitlines()[0] == "t,mu,ax,ay,az,scheme,stream_id"


def test_ensemble_indexing_and_workers():
    spec = SchemeSpec(Scheme.HET_X, PHYS)
    a = reconstruct_ensemble(spec, CavityState(), EnsembleConfig(6, 21, 1, 4), NP, CFG)
    b = reconstruct_ensemble(spec, CavityState(), EnsembleConfig(6, 21, 2, 2), NP, CFG)
    assert np.array_equal(a.vectors, b.vectors)
    single = reconstruct_povm(spec, CavityState(), generate_complex_path(NP.with_stream(3)), CFG)
    assert np.abs(a.trajectory(3).vectors - single.vectors).max() < 1e-13
    assert a.mu.shape == (6, len(CFG.record_times))


def test_normalization_report_statistics():
    spec = SchemeSpec(Scheme.ADIABATIC_X, Physics(kappa=2.0))
    rep = mc_normalization_check(spec, CavityState(), EnsembleConfig(200, 3), NP, CFG)
    assert rep.deviation.shape == CFG.record_times.shape
    assert rep.deviation[0] == 0
    assert np.isfinite(rep.max_z)
    with pytest.raises(ValueError):
        mc_normalization_check(spec, CavityState(), EnsembleConfig(10), NP, CFG)


def test_normalization_report_synthetic():
    from dynepovm.povm import PovmEnsemble
    rng = np.random.default_rng(0)
    v = np.array([1.0, 0, 0, 0]) + 0.1 * rng.normal(size=(400, 3, 4))
    ens = PovmEnsemble(np.arange(3.0), v, Scheme.HET_X, CavityState())
    assert normalization_report(ens).passed
    ens.vectors[:, :, 0] += 0.1
    assert not normalization_report(ens).passed
