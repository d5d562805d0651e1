"""Seeded Ornstein-Uhlenbeck records approximating white measurement noise.

Each real component has stationary variance ``kappa * gamma_ou / 4`` so that
its integrated covariance, and hence its white-noise limit, is
``<x_t x_s> -> (kappa/2) delta(t - s)``.  Paths start at zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import lfilter

MAX_GAMMA_DT = 0.2


@dataclass(frozen=True)
class NoiseParams:
    kappa: float
    gamma_ou: float
    dt: float
    t_end: float
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.gamma_ou <= 0:
            raise ValueError(f"gamma_ou must be > 0, got {self.gamma_ou}")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.gamma_ou * self.dt > MAX_GAMMA_DT * (1 + 1e-12):
            raise ValueError(
                f"gamma_ou*dt = {self.gamma_ou * self.dt:.3g} exceeds {MAX_GAMMA_DT}; "
                "the correlation time is not resolved")
        n = self.t_end / self.dt
        if abs(n - round(n)) > 1e-6 * max(1.0, n):
            raise ValueError(f"t_end={self.t_end} is not a multiple of dt={self.dt}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)

    @property
    def stationary_variance(self) -> float:
        return ou_stationary_variance(self.kappa, self.gamma_ou)

    def with_stream(self, stream_id: int) -> "NoiseParams":
        return replace(self, stream_id=stream_id)


@dataclass(frozen=True)
class NoisePath:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values differ in length")


@dataclass(frozen=True)
class ComplexNoisePath:
    x: NoisePath
    y: NoisePath

    @property
    def times(self) -> np.ndarray:
        return self.x.times

    @property
    def xi(self) -> np.ndarray:
        return self.x.values + 1j * self.y.values

    def truncated(self, t: float) -> "ComplexNoisePath":
        """Path restricted to ``[0, t]`` (grid points only)."""
        keep = self.times <= t + 1e-12
        return ComplexNoisePath(NoisePath(self.x.times[keep], self.x.values[keep]),
                                NoisePath(self.y.times[keep], self.y.values[keep]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y"])
            for t, x, y in zip(self.times, self.x.values, self.y.values):
                w.writerow([repr(float(t)), repr(float(x)), repr(float(y))])

    @classmethod
    def from_csv(cls, path) -> "ComplexNoisePath":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        t = data[:, 0]
        return cls(NoisePath(t, data[:, 1]), NoisePath(t, data[:, 2]))

    @classmethod
    def zeros(cls, times) -> "ComplexNoisePath":
        times = np.asarray(times, dtype=float)
        z = np.zeros_like(times)
        return cls(NoisePath(times, z), NoisePath(times, z.copy()))


def ou_stationary_variance(kappa: float, gamma_ou: float) -> float:
    return kappa * gamma_ou / 4.0


def ou_covariance(t, s, kappa: float, gamma_ou: float):
    """Exact covariance of the zero-initialised OU component."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    var = ou_stationary_variance(kappa, gamma_ou)
    return var * (np.exp(-gamma_ou * np.abs(t - s)) - np.exp(-gamma_ou * (t + s)))


def substream(seed: int, stream_id: int, component: int) -> np.random.Generator:
    """Counter-based generator for one (trajectory, noise component) pair."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id), int(component)))
    return np.random.Generator(np.random.Philox(ss))


def _ou_values(params: NoiseParams, component: int) -> np.ndarray:
    n = params.n_steps
    eta = substream(params.seed, params.stream_id, component).standard_normal(n)
    decay = np.exp(-params.gamma_ou * params.dt)
    step_sd = np.sqrt(params.stationary_variance * (1.0 - decay * decay))
    values = np.empty(n + 1)
    values[0] = 0.0
    values[1:] = lfilter([step_sd], [1.0, -decay], eta)
    return values


def generate_ou_path(params: NoiseParams, component: int = 0) -> NoisePath:
    return NoisePath(params.times, _ou_values(params, component))


def generate_complex_path(params: NoiseParams) -> ComplexNoisePath:
    return ComplexNoisePath(generate_ou_path(params, 0), generate_ou_path(params, 1))


def generate_xi_batch(params: NoiseParams, stream_ids) -> np.ndarray:
    """Complex records ``x + i y`` for several streams, shape (len(stream_ids), n+1)."""
    out = np.empty((len(stream_ids), params.n_steps + 1), dtype=complex)
    for row, sid in enumerate(stream_ids):
        p = params.with_stream(int(sid))
        out[row] = _ou_values(p, 0) + 1j * _ou_values(p, 1)
    return out
