"""Wigner and Husimi Q functions of single-mode states on a (q, p) grid.

Conventions: z = (q + i p)/sqrt(2), Q = <z|rho|z>/pi is a density in
d^2 z = dq dp / 2, and W(q, p) = (1/pi) int <q+y|rho|q-y> exp(-2 i p y) dy is a
density in dq dp.  Marginals are taken with these measures so both integrate
to one.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, eval_hermite, gammaln

POPULATION_TOL = 1e-6
BOUNDARY_TOL = 1e-8


class TruncationWarning(UserWarning):
    pass


class BoundaryMassError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseGrid:
    q_min: float = -6.0
    q_max: float = 6.0
    p_min: float = -6.0
    p_max: float = 6.0
    n_q: int = 201
    n_p: int = 201

    def __post_init__(self):
        if self.q_max <= self.q_min or self.p_max <= self.p_min:
            raise ValueError("grid bounds must be increasing")
        if self.n_q < 32 or self.n_p < 32:
            raise ValueError("grid needs at least 32 points per axis")

    @property
    def q(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_q)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / (self.n_q - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_p - 1)

    def mesh(self):
        return np.meshgrid(self.q, self.p, indexing="ij")


@dataclass
class PhaseFunction:
    """Values on grid.mesh() (axis 0 is q); ``measure`` converts dq dp to the density's measure."""

    grid: PhaseGrid
    values: np.ndarray
    kind: str = "wigner"
    measure: float = 1.0

    def __post_init__(self):
        if self.values.shape != (self.grid.n_q, self.grid.n_p):
            raise ValueError("values do not match grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("phase-space values must be finite")

    def total(self) -> float:
        g = self.grid
        return float(self.measure * np.trapezoid(np.trapezoid(self.values, g.p, axis=1), g.q))

    def marginal_q(self) -> np.ndarray:
        return self.measure * np.trapezoid(self.values, self.grid.p, axis=1)

    def marginal_p(self) -> np.ndarray:
        return self.measure * np.trapezoid(self.values, self.grid.q, axis=0)

    def to_csv(self, path) -> None:
        qq, pp = self.grid.mesh()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("q", "p", "value"))
            for row in zip(qq.ravel(), pp.ravel(), self.values.ravel()):
                w.writerow([repr(float(x)) for x in row])


def as_density(state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    if state.ndim != 2 or state.shape[0] != state.shape[1]:
        raise ValueError("expected a state vector or a square density matrix")
    return state


def _check_truncation(rho) -> None:
    last = float(rho[-1, -1].real)
    if last > POPULATION_TOL:
        warnings.warn(f"last Fock level holds population {last:.2e}; state may be truncated",
                      TruncationWarning, stacklevel=3)


def coherent_amplitudes(n_levels: int, z) -> np.ndarray:
    """<n|z> for n < n_levels, stacked on axis 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((n_levels,) + z.shape, dtype=complex)
    out[0] = np.exp(-0.5 * np.abs(z) ** 2)
    for n in range(1, n_levels):
        out[n] = out[n - 1] * z / math.sqrt(n)
    return out


def husimi_q(state, grid: PhaseGrid = PhaseGrid()) -> PhaseFunction:
    rho = as_density(state)
    _check_truncation(rho)
    qq, pp = grid.mesh()
    c = coherent_amplitudes(rho.shape[0], (qq + 1j * pp) / math.sqrt(2))
    vals = np.einsum("mij,mn,nij->ij", c.conj(), rho, c).real / math.pi
    return PhaseFunction(grid, vals, "husimi", 0.5)


def wigner(state, grid: PhaseGrid = PhaseGrid()) -> PhaseFunction:
    """Generalized-Laguerre closed form, summed over the upper triangle of rho."""
    rho = as_density(state)
    _check_truncation(rho)
    qq, pp = grid.mesh()
    r2 = qq ** 2 + pp ** 2
    zc = math.sqrt(2) * (qq - 1j * pp)
    gauss = np.exp(-r2) / math.pi
    vals = np.zeros(qq.shape)
    n_levels = rho.shape[0]
    for n in range(n_levels):
        for m in range(n, n_levels):
            if rho[m, n] == 0:
                continue
            coef = (-1) ** n * math.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
            w_mn = coef * zc ** (m - n) * eval_genlaguerre(n, m - n, 2 * r2) * gauss
            term = rho[m, n] * w_mn
            vals += term.real if m == n else 2 * term.real
    return PhaseFunction(grid, vals, "wigner", 1.0)


def hermite_function(n: int, q) -> np.ndarray:
    """Normalized oscillator eigenfunction <q|n>."""
    q = np.asarray(q, dtype=float)
    log_norm = -0.5 * (0.5 * math.log(math.pi) + n * math.log(2) + gammaln(n + 1))
    return eval_hermite(n, q) * np.exp(-0.5 * q * q + log_norm)


def position_density(state, q) -> np.ndarray:
    """Sharp marginal <q|rho|q>."""
    rho = as_density(state)
    psi = np.stack([hermite_function(n, q) for n in range(rho.shape[0])])
    return np.einsum("mi,mn,ni->i", psi, rho, psi).real


def fock_density(n: int, q) -> np.ndarray:
    return hermite_function(n, q) ** 2


def boundary_mass(f, dq: float) -> float:
    f = np.asarray(f)
    return float((abs(f[0]) + abs(f[-1])) * dq)


def smeared_marginal(sharp, q) -> np.ndarray:
    """Convolve a density on a uniform grid with exp(-(q - q')^2)/sqrt(pi)."""
    sharp = np.asarray(sharp, dtype=float)
    q = np.asarray(q, dtype=float)
    dq = q[1] - q[0]
    if not np.allclose(np.diff(q), dq, rtol=1e-9, atol=0):
        raise ValueError("smearing needs a uniform grid")
    edge = boundary_mass(sharp, dq)
    if edge >= BOUNDARY_TOL:
        raise BoundaryMassError(f"density at the grid edge carries mass {edge:.2e}; widen the grid")
    kernel = np.exp(-(q[:, None] - q[None, :]) ** 2) / math.sqrt(math.pi)
    return kernel @ sharp * dq
