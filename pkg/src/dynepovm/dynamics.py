"""Right-hand sides of the averaged and stochastic evolution equations.

Every equation except the hierarchy has the form

    d rho/dt = K rho + rho K^dag + sum_j c_j A_j rho A_j^dag
               + zeta L rho + conj(zeta) rho L^dag,

with ``zeta`` a scheme-specific function of the complex record sample
``xi = x + i y``.  All stochastic equations are in Stratonovich form, which is
what smooth (OU) driving converges to.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache

import numpy as np

from .hilbert import (
    CONVENTIONS,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    build_annihilation,
    build_jc_hamiltonian,
    cavity_op,
)

SQRT2 = np.sqrt(2.0)


class Scheme(str, Enum):
    GKSL = "gksl"
    LINEAR_QSD = "linear_qsd"
    HET_X = "het_x"
    HET_Y = "het_y"
    HOM_X = "hom_x"
    HOM_Y = "hom_y"
    ADIABATIC = "adiabatic"
    ADIABATIC_X = "adiabatic_x"
    ADIABATIC_Y = "adiabatic_y"
    ADIABATIC_ME = "adiabatic_me"
    HIERARCHY = "hierarchy"

    @property
    def qubit_only(self) -> bool:
        return self in (Scheme.ADIABATIC, Scheme.ADIABATIC_X, Scheme.ADIABATIC_Y,
                        Scheme.ADIABATIC_ME)

    @property
    def stochastic(self) -> bool:
        return self not in (Scheme.GKSL, Scheme.ADIABATIC_ME)

    @property
    def quadrature(self) -> str | None:
        """Which part of the record drives the scheme: 'x', 'y', 'xi' or None."""
        if self in (Scheme.HET_X, Scheme.HOM_X, Scheme.ADIABATIC_X):
            return "x"
        if self in (Scheme.HET_Y, Scheme.HOM_Y, Scheme.ADIABATIC_Y):
            return "y"
        if self in (Scheme.LINEAR_QSD, Scheme.ADIABATIC, Scheme.HIERARCHY):
            return "xi"
        return None

    @property
    def averaged(self) -> "Scheme":
        """The master equation that the noise average of this scheme obeys."""
        return Scheme.ADIABATIC_ME if self.qubit_only else Scheme.GKSL


@dataclass(frozen=True)
class Physics:
    omega_a: float = 1.0
    omega_c: float = 1.0
    g: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        if self.kappa < 0 or self.g < 0:
            raise ValueError("kappa and g must be non-negative")

    @property
    def delta(self) -> float:
        return self.omega_c - self.omega_a

    @property
    def fastest_rate(self) -> float:
        return max(abs(self.omega_a), abs(self.omega_c), self.g, self.kappa)


@dataclass(frozen=True)
class SchemeSpec:
    kind: Scheme
    physics: Physics = field(default_factory=Physics)
    convention: str = "appendix"
    n_fock: int = 2
    order: int = 4

    def __post_init__(self):
        object.__setattr__(self, "kind", Scheme(self.kind))
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown interaction convention {self.convention!r}")
        if self.kind is Scheme.HIERARCHY and self.order < 1:
            raise ValueError("hierarchy order must be >= 1")

    @property
    def dim(self) -> int:
        return 2 if self.kind.qubit_only else 2 * self.n_fock

    def with_kind(self, kind) -> "SchemeSpec":
        return replace(self, kind=Scheme(kind))


@dataclass(frozen=True)
class AdiabaticRates:
    gamma: float
    omega: float


def adiabatic_rates(g: float, kappa: float, delta: float) -> AdiabaticRates:
    """Decay and level-shift rates of the adiabatically eliminated cavity."""
    if kappa <= 0:
        raise ValueError("adiabatic elimination needs kappa > 0")
    den = delta * delta + 0.25 * kappa * kappa
    return AdiabaticRates(g * g * 0.5 * kappa / den, g * g * delta / den)


_ZETA = {
    "conj": lambda xi: np.conj(xi),
    "x": lambda xi: np.real(xi).astype(complex),
    "y": lambda xi: -1j * np.imag(xi),
    "sqrt2x": lambda xi: SQRT2 * np.real(xi).astype(complex),
    "sqrt2y": lambda xi: -1j * SQRT2 * np.imag(xi),
}


@dataclass(frozen=True, eq=False)
class LinearGenerator:
    k: np.ndarray
    sandwich: tuple = ()
    noise_op: np.ndarray | None = None
    noise_map: str | None = None

    @property
    def dim(self) -> int:
        return self.k.shape[0]

    @property
    def pure(self) -> bool:
        """No sandwich term: rank-one inputs stay rank one."""
        return len(self.sandwich) == 0

    def zeta(self, xi):
        if self.noise_op is None or xi is None:
            return None
        return _ZETA[self.noise_map](np.asarray(xi))

    def _check(self, rho):
        if rho.shape[-2:] != (self.dim, self.dim):
            raise ValueError(f"state has shape {rho.shape[-2:]}, generator acts on dim {self.dim}")

    def __call__(self, rho, xi=None, *, hermitian: bool = False):
        rho = np.asarray(rho)
        self._check(rho)
        kr = self.k @ rho
        z = self.zeta(xi)
        if z is not None:
            z = np.asarray(z)[..., None, None]
            kr = kr + z * (self.noise_op @ rho)
        if hermitian:
            out = kr + np.swapaxes(kr, -1, -2).conj()
        else:
            rk = rho @ self.k.conj().T
            if z is not None:
                rk = rk + np.conj(z) * (rho @ self.noise_op.conj().T)
            out = kr + rk
        for coef, op in self.sandwich:
            out = out + coef * (op @ rho @ op.conj().T)
        return out

    def vector_rhs(self, psi, xi=None):
        """Pure-state form d psi/dt = (K + zeta L) psi for columns ``psi`` (..., d, k)."""
        if not self.pure:
            raise ValueError("scheme has a sandwich term; no pure-state form")
        out = self.k @ psi
        z = self.zeta(xi)
        if z is not None:
            out = out + np.asarray(z)[..., None, None] * (self.noise_op @ psi)
        return out


def _composite_ops(spec: SchemeSpec):
    p = spec.physics
    a = cavity_op(build_annihilation(spec.n_fock))
    h = build_jc_hamiltonian(p.omega_a, p.omega_c, p.g, spec.n_fock, spec.convention)
    num = a.conj().T @ a
    return a, h, num


@lru_cache(maxsize=64)
def generator(spec: SchemeSpec) -> LinearGenerator:
    """Build the linear generator for any non-hierarchy scheme."""
    kind = spec.kind
    p = spec.physics
    if kind is Scheme.HIERARCHY:
        raise ValueError("use build_hierarchy_rhs for the hierarchy")
    if kind.qubit_only:
        rates = adiabatic_rates(p.g, p.kappa, p.delta)
        proj_e = SIGMA_PLUS @ SIGMA_MINUS
        h_eff = 0.5 * p.omega_a * SIGMA_Z - rates.omega * proj_e
        k = -1j * h_eff - rates.gamma * proj_e
        # (Gamma - i Omega)/g without dividing by g
        den = p.delta ** 2 + 0.25 * p.kappa ** 2
        lop = -1j * p.g * (0.5 * p.kappa - 1j * p.delta) / den * SIGMA_MINUS
        if kind is Scheme.ADIABATIC_ME:
            return LinearGenerator(k, ((2.0 * rates.gamma, SIGMA_MINUS),))
        if kind is Scheme.ADIABATIC:
            return LinearGenerator(k, (), lop, "conj")
        noise_map = "x" if kind is Scheme.ADIABATIC_X else "y"
        return LinearGenerator(k, ((rates.gamma, SIGMA_MINUS),), lop, noise_map)

    a, h, num = _composite_ops(spec)
    kap = p.kappa
    k = -1j * h - 0.5 * kap * num
    a2 = a @ a
    if kind is Scheme.GKSL:
        return LinearGenerator(k, ((kap, a),))
    if kind is Scheme.LINEAR_QSD:
        return LinearGenerator(k, (), a, "conj")
    if kind is Scheme.HET_X:
        return LinearGenerator(k - 0.25 * kap * a2, ((0.5 * kap, a),), a, "x")
    if kind is Scheme.HET_Y:
        return LinearGenerator(k + 0.25 * kap * a2, ((0.5 * kap, a),), a, "y")
    if kind is Scheme.HOM_X:
        return LinearGenerator(k - 0.5 * kap * a2, (), a, "sqrt2x")
    if kind is Scheme.HOM_Y:
        return LinearGenerator(k + 0.5 * kap * a2, (), a, "sqrt2y")
    raise ValueError(f"unhandled scheme {kind}")


def _apply(kind: Scheme, rho, spec: SchemeSpec, xi):
    return generator(spec.with_kind(kind))(rho, xi)


def rhs_gksl(rho, spec: SchemeSpec):
    return _apply(Scheme.GKSL, rho, spec, None)


def rhs_linear_qsd(rho, spec: SchemeSpec, xi):
    return _apply(Scheme.LINEAR_QSD, rho, spec, xi)


def rhs_het_marginal_x(rho, spec: SchemeSpec, x):
    return _apply(Scheme.HET_X, rho, spec, np.asarray(x) + 0j)


def rhs_het_marginal_y(rho, spec: SchemeSpec, y):
    return _apply(Scheme.HET_Y, rho, spec, 1j * np.asarray(y))


def rhs_homodyne_x(rho, spec: SchemeSpec, x):
    return _apply(Scheme.HOM_X, rho, spec, np.asarray(x) + 0j)


def rhs_homodyne_y(rho, spec: SchemeSpec, y):
    return _apply(Scheme.HOM_Y, rho, spec, 1j * np.asarray(y))


def rhs_adiabatic_complex(rho_a, spec: SchemeSpec, xi):
    return _apply(Scheme.ADIABATIC, rho_a, spec, xi)


def rhs_adiabatic_x(rho_a, spec: SchemeSpec, x):
    return _apply(Scheme.ADIABATIC_X, rho_a, spec, np.asarray(x) + 0j)


def rhs_adiabatic_y(rho_a, spec: SchemeSpec, y):
    return _apply(Scheme.ADIABATIC_Y, rho_a, spec, 1j * np.asarray(y))


def rhs_adiabatic_mean(rho_a, spec: SchemeSpec):
    """Shifted amplitude-damping equation obeyed by the adiabatic noise average."""
    return _apply(Scheme.ADIABATIC_ME, rho_a, spec, None)


# --- hierarchy -------------------------------------------------------------

@lru_cache(maxsize=16)
def hierarchy_indices(order: int) -> tuple:
    """Blocks (n, m) with n + m <= order, in a fixed order."""
    if order < 1:
        raise ValueError("hierarchy order must be >= 1")
    return tuple((n, s - n) for s in range(order + 1) for n in range(s + 1))


def hierarchy_block(h, order: int, n: int, m: int):
    return h[..., hierarchy_indices(order).index((n, m)), :, :]


def initial_hierarchy(rho_a, psi_c, g: float, order: int) -> np.ndarray:
    """Blocks (ig)^n (-ig)^m <psi| a^dag^m a^n |psi> rho_A for a product initial state."""
    psi_c = np.asarray(psi_c, dtype=complex)
    a = build_annihilation(len(psi_c))
    idx = hierarchy_indices(order)
    out = np.zeros((len(idx), 2, 2), dtype=complex)
    powers = [psi_c]
    for _ in range(order):
        powers.append(a @ powers[-1])
    for k, (n, m) in enumerate(idx):
        moment = np.vdot(powers[m], powers[n])
        out[k] = (1j * g) ** n * (-1j * g) ** m * moment * np.asarray(rho_a)
    return out


def build_hierarchy_rhs(h, spec: SchemeSpec, xi):
    """Stratonovich hierarchy for the auxiliary matrices rho^{n,m}.

    ``h`` has shape (..., n_blocks, 2, 2); blocks beyond ``spec.order`` are
    taken as zero.  Uses the excitation-conserving coupling throughout.
    """
    order = spec.order
    if order < 1:
        raise ValueError("hierarchy order must be >= 1")
    p = spec.physics
    if p.g <= 0:
        raise ValueError("hierarchy needs g > 0")
    idx = hierarchy_indices(order)
    pos = {nm: k for k, nm in enumerate(idx)}
    h = np.asarray(h)
    if h.shape[-3:] != (len(idx), 2, 2):
        raise ValueError(f"expected trailing shape {(len(idx), 2, 2)}, got {h.shape[-3:]}")
    xi = np.asarray(xi if xi is not None else 0.0, dtype=complex)[..., None, None]
    h_a = 0.5 * p.omega_a * SIGMA_Z
    sm, sp = SIGMA_MINUS, SIGMA_PLUS
    g, kap, wc = p.g, p.kappa, p.omega_c
    out = np.zeros_like(h, dtype=complex)

    def blk(n, m):
        k = pos.get((n, m))
        return None if k is None else h[..., k, :, :]

    for k, (n, m) in enumerate(idx):
        r = h[..., k, :, :]
        d = -1j * (h_a @ r - r @ h_a) - 1j * ((n - m) * wc - 1j * (n + m) * kap / 2) * r
        r_nm1 = blk(n, m + 1)
        r_n1m = blk(n + 1, m)
        if r_nm1 is not None:
            d = d + (sm @ r_nm1 - r_nm1 @ sm) + (1j / g) * xi * r_nm1
        if r_n1m is not None:
            d = d - (sp @ r_n1m - r_n1m @ sp) - (1j / g) * np.conj(xi) * r_n1m
        if n > 0:
            d = d + g * g * n * (sm @ blk(n - 1, m))
        if m > 0:
            d = d + g * g * m * (blk(n, m - 1) @ sp)
        r_n1m1 = blk(n + 1, m + 1)
        if r_n1m1 is not None:
            d = d - (kap / (g * g)) * r_n1m1
        out[..., k, :, :] = d
    return out
