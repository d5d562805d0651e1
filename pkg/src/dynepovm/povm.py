"""Qubit effects induced by a measurement record, reconstructed by tomography.

Four qubit inputs (1/2, (1 + sigma_i)/2), each times the cavity state, are
propagated on one shared record; their traces p^0, p^i give the reported
four-vector mu = p^0, a_i = p^i - p^0.  That is half the likelihood effect, so
the record-free value is v = (1, 0) and the Gaussian average of v is (1, 0).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from .dynamics import Scheme, SchemeSpec, generator
from .hilbert import PAULI, CavityState
from .integrate import (
    CompiledGenerator,
    EnsembleConfig,
    IntegratorConfig,
    map_chunks,
    noise_stages,
    propagate_pure,
    stage_values,
    _zeta_stages,
)
from .noise import ComplexNoisePath, NoiseParams

POSITIVITY_TOL = 1e-6
CSV_COLUMNS = ("t", "mu", "ax", "ay", "az", "scheme", "stream_id")


class PositivityError(ArithmeticError):
    """A reconstructed effect has a negative eigenvalue beyond tolerance."""


@dataclass(frozen=True)
class QubitFourVector:
    mu: float
    bloch: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "bloch", tuple(float(b) for b in self.bloch))
        if len(self.bloch) != 3:
            raise ValueError("Bloch vector needs three components")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.bloch))

    def as_array(self) -> np.ndarray:
        return np.array((self.mu, *self.bloch))

    @classmethod
    def from_array(cls, v) -> "QubitFourVector":
        return cls(v[0], tuple(v[1:4]))

    @classmethod
    def from_operator(cls, f) -> "QubitFourVector":
        return cls.from_array(fourvector_from_operator(f))


def fourvector_from_operator(f) -> np.ndarray:
    """(mu, a) of F = (mu 1 + a.sigma)/2, batched over leading axes."""
    f = np.asarray(f)
    mu = np.trace(f, axis1=-2, axis2=-1).real
    a = np.einsum("kij,...ji->...k", PAULI, f).real
    return np.concatenate([mu[..., None], a], axis=-1)


def povm_matrix(v) -> np.ndarray:
    """F = (mu 1 + a.sigma)/2 from a four-vector (or array (..., 4))."""
    if isinstance(v, QubitFourVector):
        v = v.as_array()
    v = np.asarray(v, dtype=float)
    return 0.5 * (v[..., 0, None, None] * np.eye(2) + np.einsum("...k,kij->...ij", v[..., 1:], PAULI))


def eigenvalues(v) -> np.ndarray:
    """(mu - |a|)/2 and (mu + |a|)/2 along the last axis."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v[..., 1:], axis=-1)
    return np.stack([(v[..., 0] - n) / 2, (v[..., 0] + n) / 2], axis=-1)


@dataclass
class PovmTrajectory:
    times: np.ndarray
    vectors: np.ndarray            # (R, 4): mu, ax, ay, az
    scheme: Scheme
    stream_id: int = 0
    cavity: CavityState | None = None

    def __post_init__(self):
        if len(self.times) != len(self.vectors):
            raise ValueError("times and four-vectors differ in length")

    def __len__(self):
        return len(self.times)

    def __getitem__(self, k) -> QubitFourVector:
        return QubitFourVector.from_array(self.vectors[k])

    @property
    def fourvectors(self) -> list:
        return [self[k] for k in range(len(self))]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for t, v in zip(self.times, self.vectors):
                w.writerow([repr(float(t)), *(repr(float(x)) for x in v),
                            Scheme(self.scheme).value, self.stream_id])

    @classmethod
    def from_csv(cls, path, cavity: CavityState | None = None) -> "PovmTrajectory":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: no rows")
        times = np.array([float(r["t"]) for r in rows])
        vec = np.array([[float(r[c]) for c in ("mu", "ax", "ay", "az")] for r in rows])
        return cls(times, vec, Scheme(rows[0]["scheme"]), int(rows[0]["stream_id"]), cavity)


def composite_spec(spec: SchemeSpec, cavity: CavityState) -> SchemeSpec:
    """Fix the Fock truncation from the cavity state."""
    if spec.kind.qubit_only:
        return spec
    return replace(spec, n_fock=cavity.truncation(spec.convention))


def _check_positive(vectors) -> None:
    lo = eigenvalues(vectors)[..., 0]
    worst = float(np.min(lo))
    if worst < -POSITIVITY_TOL:
        raise PositivityError(
            f"effect eigenvalue {worst:.3e} below -{POSITIVITY_TOL:g}; refine dt or the Fock truncation")


def _tomography_inputs(spec: SchemeSpec, cavity: CavityState) -> list:
    qubit = [0.5 * np.eye(2)] + [0.5 * (np.eye(2) + s) for s in PAULI]
    if spec.kind.qubit_only:
        return [q.astype(complex) for q in qubit]
    psi = cavity.vector(spec.convention)
    proj = np.outer(psi, psi.conj())
    return [np.kron(q, proj) for q in qubit]


def povm_batch(spec: SchemeSpec, cavity: CavityState, xi_stages, cfg: IntegratorConfig,
               method: str = "auto") -> np.ndarray:
    """Four-vectors (B, R, 4) for a batch of records given at RK4 half steps."""
    if spec.kind in (Scheme.GKSL, Scheme.ADIABATIC_ME, Scheme.HIERARCHY):
        raise ValueError(f"{spec.kind.value} does not induce a record-dependent effect")
    spec = composite_spec(spec, cavity)
    gen = generator(spec)
    xi_stages = np.atleast_2d(xi_stages)
    if method == "auto":
        method = "pure" if gen.pure else "tomography"
    if method == "pure":
        if not gen.pure:
            raise ValueError(f"{spec.kind.value} has a sandwich term; use tomography")
        if spec.kind.qubit_only:
            w0 = np.eye(2, dtype=complex)
        else:
            w0 = np.kron(np.eye(2), cavity.vector(spec.convention)[:, None])
        # F_true[j, i] = <w_j|w_i>; reported effect is F_true / 2
        out = propagate_pure(gen, w0, xi_stages, cfg,
                             observe=lambda w: fourvector_from_operator(
                                 0.5 * np.einsum("bdi,bdj->bij", w.conj(), w)))
        return np.moveaxis(out, 0, 1)
    if method != "tomography":
        raise ValueError(f"unknown reconstruction method {method!r}")
    comp = CompiledGenerator(gen)
    zeta = _zeta_stages(gen, xi_stages)
    inputs = _tomography_inputs(spec, cavity)
    out = np.empty((xi_stages.shape[0], len(cfg.record_steps), 4))
    for b in range(xi_stages.shape[0]):
        p = np.stack([np.trace(comp.run(r, zeta[b], cfg), axis1=-2, axis2=-1).real
                      for r in inputs], axis=-1)
        out[b, :, 0] = p[:, 0]
        out[b, :, 1:] = p[:, 1:] - p[:, :1]
    return out


def reconstruct_povm(spec: SchemeSpec, cavity: CavityState, noise: ComplexNoisePath,
                     cfg: IntegratorConfig, *, method: str = "auto", stream_id: int = 0,
                     check: bool = True) -> PovmTrajectory:
    xi = stage_values(noise.times, noise.xi, cfg)
    vec = povm_batch(spec, cavity, xi[None], cfg, method)[0]
    if check:
        _check_positive(vec)
    return PovmTrajectory(cfg.record_times, vec, spec.kind, stream_id, cavity)


@dataclass
class PovmEnsemble:
    """Four-vectors of M records, indexed by stream id: vectors has shape (M, R, 4)."""

    times: np.ndarray
    vectors: np.ndarray
    scheme: Scheme
    cavity: CavityState

    @property
    def M(self) -> int:
        return self.vectors.shape[0]

    @property
    def mu(self) -> np.ndarray:
        return self.vectors[..., 0]

    @property
    def bloch_norm(self) -> np.ndarray:
        return np.linalg.norm(self.vectors[..., 1:], axis=-1)

    def trajectory(self, i: int) -> PovmTrajectory:
        return PovmTrajectory(self.times, self.vectors[i], self.scheme, i, self.cavity)

    def mean(self) -> np.ndarray:
        return self.vectors.mean(axis=0)

    def stderr(self) -> np.ndarray:
        if self.M < 2:
            return np.zeros_like(self.vectors[0])
        return self.vectors.std(axis=0, ddof=1) / np.sqrt(self.M)


def _povm_chunk(spec, cavity, params, cfg, method, stream_ids):
    return povm_batch(spec, cavity, noise_stages(params, stream_ids, cfg), cfg, method)


def reconstruct_ensemble(spec: SchemeSpec, cavity: CavityState, ens: EnsembleConfig,
                         noise_params: NoiseParams, cfg: IntegratorConfig, *,
                         method: str = "auto", check: bool = True) -> PovmEnsemble:
    """Reconstruct the effects of records 0..M-1; deterministic for any worker count."""
    cfg.check_resolution(spec, noise_params.gamma_ou)
    params = replace(noise_params, t_end=max(noise_params.t_end, cfg.t_end), stream_id=0)
    fn = partial(_povm_chunk, spec, cavity, params, cfg, method)
    vec = np.concatenate(map_chunks(fn, ens.chunks(), ens.workers), axis=0)
    if check:
        _check_positive(vec)
    return PovmEnsemble(cfg.record_times, vec, spec.kind, cavity)


@dataclass
class NormalizationReport:
    times: np.ndarray
    deviation: np.ndarray      # operator norm of mean F - F_0 per time
    stderr: np.ndarray         # matching Monte Carlo standard error
    max_z: float               # worst |component deviation| / stderr
    n_sigma: float

    @property
    def max_deviation(self) -> float:
        return float(self.deviation.max())

    @property
    def passed(self) -> bool:
        return self.max_z <= self.n_sigma


def normalization_report(ensemble: PovmEnsemble, n_sigma: float = 5.0) -> NormalizationReport:
    """Compare the ensemble-mean effect with the record-free value (1, 0)."""
    dev = ensemble.mean() - np.array([1.0, 0.0, 0.0, 0.0])
    se = ensemble.stderr()
    op_dev = 0.5 * (np.abs(dev[:, 0]) + np.linalg.norm(dev[:, 1:], axis=-1))
    op_se = 0.5 * (se[:, 0] + np.linalg.norm(se[:, 1:], axis=-1))
    z = np.abs(dev) / np.maximum(se, 1e-300)
    z[np.abs(dev) <= 1e-12] = 0.0
    return NormalizationReport(ensemble.times, op_dev, op_se, float(z.max()), n_sigma)


def mc_normalization_check(spec: SchemeSpec, cavity: CavityState, ens: EnsembleConfig,
                           noise_params: NoiseParams, cfg: IntegratorConfig,
                           n_sigma: float = 5.0) -> NormalizationReport:
    if ens.M < 100:
        raise ValueError("normalization check needs M >= 100")
    return normalization_report(reconstruct_ensemble(spec, cavity, ens, noise_params, cfg,
                                                     check=False), n_sigma)
