"""Fixed-step RK4 integration along noise paths and seed-deterministic ensembles."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import _kernels
from .dynamics import (
    LinearGenerator,
    Scheme,
    SchemeSpec,
    build_hierarchy_rhs,
    generator,
)
from .noise import ComplexNoisePath, NoiseParams, generate_xi_batch

RESOLUTION = 0.1
TARGET_RECORDS = 200


def _closest_divisor(n: int, target: float) -> int:
    divs = [k for k in range(1, n + 1) if n % k == 0]
    return min(divs, key=lambda k: (abs(k - target), k))


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1.0 / 150
    t_end: float = 10.0
    record_stride: int | None = None
    method: str = "rk4"

    def __post_init__(self):
        if self.method != "rk4":
            raise ValueError(f"unsupported method {self.method!r}")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        ratio = self.t_end / self.dt
        if abs(ratio - round(ratio)) > 1e-6:
            raise ValueError("t_end must be an integer multiple of dt")
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError("record_stride must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def stride(self) -> int:
        if self.record_stride is not None:
            return self.record_stride
        return _closest_divisor(self.n_steps, self.n_steps / TARGET_RECORDS)

    @property
    def record_steps(self) -> np.ndarray:
        return np.arange(0, self.n_steps + 1, self.stride)

    @property
    def record_times(self) -> np.ndarray:
        return self.record_steps * self.dt

    def check_resolution(self, spec: SchemeSpec, gamma_ou: float | None = None) -> None:
        """Raise if dt does not resolve the fastest rate by a factor 10."""
        rates = [spec.physics.fastest_rate]
        if gamma_ou is not None:
            rates.append(gamma_ou)
        limit = RESOLUTION / max(rates)
        if self.dt > limit * (1 + 1e-9):
            raise ValueError(f"dt={self.dt:g} exceeds resolution limit {limit:g}")


@dataclass
class TrajectoryResult:
    times: np.ndarray
    states: np.ndarray
    scheme: Scheme
    stream_id: int = 0

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")


def stage_values(times: np.ndarray, values: np.ndarray, cfg: IntegratorConfig) -> np.ndarray:
    """Linearly interpolate a sampled drive onto every RK4 half step.

    ``values`` has shape (..., len(times)); the result has shape (..., 2 n + 1).
    """
    if times[-1] < cfg.t_end - 1e-9 * max(1.0, cfg.t_end):
        raise ValueError(f"noise grid ends at {times[-1]:g} < t_end={cfg.t_end:g}")
    t = np.arange(2 * cfg.n_steps + 1) * (0.5 * cfg.dt)
    t = np.minimum(t, times[-1])
    j = np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 2)
    w = (t - times[j]) / (times[j + 1] - times[j])
    v = np.asarray(values)
    return v[..., j] * (1 - w) + v[..., j + 1] * w


def rk4(rhs, y0, drive, cfg: IntegratorConfig, observe=None):
    """Classical RK4 with the drive sampled at half steps.

    ``rhs(y, u)`` gets the drive ``u`` with shape ``drive.shape[:-1]`` (or None).
    Returns records of ``observe(y)`` (default: y) stacked on axis 0.
    """
    observe = observe or (lambda y: y)
    dt = cfg.dt
    stride = cfg.stride
    y = np.asarray(y0, dtype=complex)
    out = [observe(y)]

    def u(k):
        return None if drive is None else drive[..., k]

    for n in range(cfg.n_steps):
        k1 = rhs(y, u(2 * n))
        k2 = rhs(y + 0.5 * dt * k1, u(2 * n + 1))
        k3 = rhs(y + 0.5 * dt * k2, u(2 * n + 1))
        k4 = rhs(y + dt * k3, u(2 * n + 2))
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if (n + 1) % stride == 0:
            out.append(observe(y))
    return np.stack(out)


def _is_hermitian(x) -> bool:
    return np.allclose(x, np.swapaxes(x, -1, -2).conj(), atol=1e-14, rtol=0)


@dataclass(frozen=True, eq=False)
class CompiledGenerator:
    """CSR view of a linear generator for the compiled density loop."""

    gen: LinearGenerator
    k: tuple = field(init=False)
    l: tuple = field(init=False)
    a: tuple = field(init=False)
    c: float = field(init=False)

    def __post_init__(self):
        if len(self.gen.sandwich) > 1:
            raise ValueError("compiled loop supports at most one sandwich term")
        c, a = self.gen.sandwich[0] if self.gen.sandwich else (0.0, None)
        d = self.gen.dim
        object.__setattr__(self, "k", _kernels.to_csr(self.gen.k, d))
        object.__setattr__(self, "l", _kernels.to_csr(self.gen.noise_op, d))
        object.__setattr__(self, "a", _kernels.to_csr(a, d))
        object.__setattr__(self, "c", float(c))

    def run(self, rho0, zeta, cfg: IntegratorConfig) -> np.ndarray:
        rho0 = np.ascontiguousarray(rho0, dtype=np.complex128)
        zeta = np.ascontiguousarray(zeta, dtype=np.complex128)
        if rho0.shape != (self.gen.dim, self.gen.dim) or zeta.shape != (2 * cfg.n_steps + 1,):
            raise ValueError("state or drive shape does not match the generator and grid")
        rec = np.empty((len(cfg.record_steps),) + rho0.shape, dtype=np.complex128)
        _kernels.rk4_density(*self.k, *self.l, *self.a, self.c, zeta, rho0, cfg.dt,
                             cfg.n_steps, cfg.stride, _is_hermitian(rho0), rec)
        return rec


def _zeta_stages(gen: LinearGenerator, xi_stages):
    if gen.noise_op is None:
        return np.zeros(np.shape(xi_stages), dtype=complex)
    return gen.zeta(xi_stages)


def _expected_shape(spec: SchemeSpec) -> tuple:
    if spec.kind is Scheme.HIERARCHY:
        from .dynamics import hierarchy_indices
        return (len(hierarchy_indices(spec.order)), 2, 2)
    return (spec.dim, spec.dim)


def integrate(spec: SchemeSpec, rho0, noise: ComplexNoisePath | None,
              cfg: IntegratorConfig, *, stream_id: int = 0) -> TrajectoryResult:
    """Integrate one trajectory of ``spec`` from ``rho0`` along ``noise``.

    For the hierarchy ``rho0`` is the block array (n_blocks, 2, 2).  A ``None``
    noise path drives stochastic schemes with zero.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != _expected_shape(spec):
        raise ValueError(f"initial state shape {rho0.shape} does not match scheme {spec.kind.value}")
    if noise is None:
        xi = np.zeros(2 * cfg.n_steps + 1, dtype=complex)
    else:
        xi = stage_values(noise.times, noise.xi, cfg)
    if spec.kind is Scheme.HIERARCHY:
        states = rk4(lambda h, u: build_hierarchy_rhs(h, spec, u), rho0, xi, cfg)
    else:
        gen = generator(spec)
        states = CompiledGenerator(gen).run(rho0, _zeta_stages(gen, xi), cfg)
    return TrajectoryResult(cfg.record_times, states, spec.kind, stream_id)


def propagate_pure(gen: LinearGenerator, psi0, xi_stages, cfg: IntegratorConfig, observe=None):
    """Batched pure-state propagation d psi = (K + zeta L) psi.

    ``psi0`` is (d, k) (columns propagated together); ``xi_stages`` is (B, 2n+1).
    Returns records of ``observe(psi)`` with psi of shape (B, d, k).
    """
    xi_stages = np.asarray(xi_stages)
    psi = np.broadcast_to(np.asarray(psi0, dtype=complex), (xi_stages.shape[0],) + np.shape(psi0))
    zeta = _zeta_stages(gen, xi_stages)
    k, lop = gen.k, gen.noise_op

    def rhs(y, z):
        out = k @ y
        if lop is not None:
            out = out + z[:, None, None] * (lop @ y)
        return out

    return rk4(rhs, psi.copy(), zeta, cfg, observe)


def factor_hermitian(rho, tol: float = 1e-13):
    """rho = V diag(signs) V^dag with V = eigvecs * sqrt|eigvals|, dropping null directions."""
    w, v = np.linalg.eigh(rho)
    keep = np.abs(w) > tol * max(1.0, np.abs(w).max())
    return v[:, keep] * np.sqrt(np.abs(w[keep])), np.sign(w[keep])


# --- ensembles ---------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleConfig:
    M: int = 1000
    seed: int = 0
    workers: int = 1
    chunk_size: int = 64

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("ensemble needs M >= 1")
        if self.chunk_size < 1 or self.workers < 1:
            raise ValueError("chunk_size and workers must be positive")

    def chunks(self) -> list:
        ids = np.arange(self.M)
        return [ids[i:i + self.chunk_size] for i in range(0, self.M, self.chunk_size)]


class RunningStats:
    """Mean and sum of squared deviations merged chunk by chunk (Chan et al.).

    Complex data keep real and imaginary moments separately in M2.
    """

    def __init__(self):
        self.n = 0
        self.mean = None
        self.m2 = None

    @staticmethod
    def _sq(x):
        return x.real ** 2 + 1j * x.imag ** 2 if np.iscomplexobj(x) else x * x

    def add(self, batch) -> "RunningStats":
        batch = np.asarray(batch)
        nb = batch.shape[0]
        mb = batch.mean(axis=0)
        m2b = self._sq(batch - mb).sum(axis=0)
        return self.merge(nb, mb, m2b)

    def merge(self, nb, mb, m2b) -> "RunningStats":
        if self.n == 0:
            self.n, self.mean, self.m2 = nb, mb, m2b
            return self
        n = self.n + nb
        delta = mb - self.mean
        self.mean = self.mean + delta * (nb / n)
        self.m2 = self.m2 + m2b + self._sq(delta) * (self.n * nb / n)
        self.n = n
        return self

    @property
    def std(self):
        if self.n < 2:
            return np.zeros_like(self.mean)
        v = self.m2 / (self.n - 1)
        if np.iscomplexobj(v):
            return np.sqrt(v.real) + 1j * np.sqrt(v.imag)
        return np.sqrt(v)

    @property
    def stderr(self):
        return self.std / np.sqrt(self.n)


@dataclass
class EnsembleResult:
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    M: int
    scheme: Scheme
    trajectories: list | None = None


def noise_stages(params: NoiseParams, stream_ids, cfg: IntegratorConfig) -> np.ndarray:
    xi = generate_xi_batch(params, stream_ids)
    return stage_values(params.times, xi, cfg)


def _ensemble_chunk(spec, rho0, params, cfg, keep, stream_ids):
    xi = noise_stages(params, stream_ids, cfg)
    if spec.kind is Scheme.HIERARCHY:
        states = rk4(lambda h, u: build_hierarchy_rhs(h, spec, u),
                     np.broadcast_to(rho0, (len(stream_ids),) + rho0.shape).copy(), xi, cfg)
        states = np.moveaxis(states, 0, 1)
    else:
        gen = generator(spec)
        if gen.pure and spec.dim > 2:
            v, signs = factor_hermitian(rho0)
            states = propagate_pure(
                gen, v, xi, cfg,
                observe=lambda y: np.einsum("bik,k,bjk->bij", y, signs, y.conj()))
            states = np.moveaxis(states, 0, 1)
        else:
            comp = CompiledGenerator(gen)
            z = _zeta_stages(gen, xi)
            states = np.stack([comp.run(rho0, z[b], cfg) for b in range(len(stream_ids))])
    stats = RunningStats().add(states)
    kept = [TrajectoryResult(cfg.record_times, s, spec.kind, int(i))
            for s, i in zip(states, stream_ids)] if keep else None
    return stats.n, stats.mean, stats.m2, kept


def map_chunks(fn, chunks, workers: int = 1):
    """Apply ``fn`` to each chunk, returning results in chunk order."""
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, chunks))
    return [fn(c) for c in chunks]


def run_ensemble(spec: SchemeSpec, rho0, ens: EnsembleConfig, noise_params: NoiseParams,
                 cfg: IntegratorConfig, *, keep_trajectories: bool = False) -> EnsembleResult:
    """Trajectory i uses noise stream i; summaries are reduced in stream order."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != _expected_shape(spec):
        raise ValueError(f"initial state shape {rho0.shape} does not match scheme {spec.kind.value}")
    cfg.check_resolution(spec, noise_params.gamma_ou)
    params = NoiseParams(noise_params.kappa, noise_params.gamma_ou, noise_params.dt,
                         max(noise_params.t_end, cfg.t_end), noise_params.seed)
    fn = partial(_ensemble_chunk, spec, rho0, params, cfg, keep_trajectories)
    stats = RunningStats()
    kept = [] if keep_trajectories else None
    for n, mean, m2, traj in map_chunks(fn, ens.chunks(), ens.workers):
        stats.merge(n, mean, m2)
        if keep_trajectories:
            kept.extend(traj)
    return EnsembleResult(cfg.record_times, stats.mean, stats.stderr, stats.n, spec.kind, kept)
