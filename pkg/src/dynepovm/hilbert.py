"""Operators and states on the qubit (x) truncated cavity space.

Basis ordering is qubit-major: composite index ``q * n_fock + n``.  Qubit
level ``|0>`` is the excited state, so ``sigma_z = |0><0| - |1><1|`` and
``sigma_minus = |1><0|`` lowers the energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

EXCITED = np.array([1, 0], dtype=complex)
GROUND = np.array([0, 1], dtype=complex)

CONVENTIONS = ("appendix", "main_text")
HERMITIAN_TOL = 1e-12
DEFICIENCY_TOL = 1e-8
# amplitudes err by ~sqrt(deficiency) and enter effects linearly
TRUNCATION_TOL = 1e-12


class TruncationError(ValueError):
    """The Fock truncation is too small for the requested state."""


def build_annihilation(n_fock: int) -> np.ndarray:
    if n_fock < 2:
        raise ValueError(f"n_fock must be >= 2, got {n_fock}")
    return np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), k=1).astype(complex)


def qubit_op(op: np.ndarray, n_fock: int) -> np.ndarray:
    return np.kron(op, np.eye(n_fock))


def cavity_op(op: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(2), op)


def build_jc_hamiltonian(omega_a: float, omega_c: float, g: float, n_fock: int,
                         convention: str = "appendix") -> np.ndarray:
    """Jaynes-Cummings Hamiltonian on the 2*n_fock dimensional space.

    ``convention="appendix"`` couples ``g(sigma_- a^dag + sigma_+ a)`` (energy
    conserving); ``"main_text"`` couples ``g(sigma_- a + sigma_+ a^dag)``.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown interaction convention {convention!r}")
    a = cavity_op(build_annihilation(n_fock))
    ad = a.conj().T
    sm = qubit_op(SIGMA_MINUS, n_fock)
    sp = qubit_op(SIGMA_PLUS, n_fock)
    h = 0.5 * omega_a * qubit_op(SIGMA_Z, n_fock) + omega_c * (ad @ a)
    if convention == "appendix":
        h = h + g * (sm @ ad + sp @ a)
    else:
        h = h + g * (sm @ a + sp @ ad)
    return h


def squeezed_amplitudes(s: float, n_levels: int) -> np.ndarray:
    """Closed-form Fock amplitudes of exp((s/2)(a^2 - a^dag^2))|0>."""
    c = np.zeros(n_levels)
    t = np.tanh(s)
    for n in range(0, n_levels, 2):
        k = n // 2
        # sqrt((2k)!) / (2^k k!)
        logc = 0.5 * math.lgamma(n + 1) - k * math.log(2.0) - math.lgamma(k + 1)
        c[n] = (-t) ** k * math.exp(logc)
    return c / math.sqrt(math.cosh(s))


def build_squeezed_vacuum(s: float, n_fock: int, *, work_margin: int = 40) -> np.ndarray:
    """Squeezed vacuum truncated to ``n_fock`` levels.

    The generator is exponentiated at ``n_fock + work_margin`` levels and the
    result cut back; a norm deficiency of the cut above 1e-8 raises
    :class:`TruncationError`.
    """
    if abs(s) > 0.5:
        raise ValueError(f"|s| must be <= 0.5, got {s}")
    if n_fock < 2:
        raise ValueError(f"n_fock must be >= 2, got {n_fock}")
    if s == 0:
        psi = np.zeros(n_fock, dtype=complex)
        psi[0] = 1.0
        return psi
    n_work = n_fock + work_margin
    a = build_annihilation(n_work)
    gen = 0.5 * s * (a @ a - a.conj().T @ a.conj().T)
    vac = np.zeros(n_work, dtype=complex)
    vac[0] = 1.0
    full = expm(gen) @ vac
    psi = full[:n_fock].copy()
    psi[1::2] = 0.0  # generator is parity even; clears roundoff only
    deficiency = 1.0 - np.vdot(psi, psi).real
    if deficiency >= DEFICIENCY_TOL:
        raise TruncationError(
            f"n_fock={n_fock} leaves norm deficiency {deficiency:.2e} for s={s}")
    return psi / np.linalg.norm(psi)


def required_levels(s: float, tol: float = DEFICIENCY_TOL) -> int:
    """Smallest number of Fock levels holding the squeezed vacuum to ``tol``."""
    if s == 0:
        return 1
    t2 = np.tanh(s) ** 2
    tail_prob = 1.0
    weight = 1.0 / np.cosh(s)  # |c_0|^2
    n_levels = 1
    k = 0
    while True:
        tail_prob -= weight
        if tail_prob < tol:
            return n_levels
        k += 1
        weight *= t2 * (2 * k - 1) / (2 * k)
        n_levels = 2 * k + 1


def default_truncation(s: float, convention: str = "appendix") -> int:
    """Fock truncation adequate for an initial squeezed vacuum.

    Levels holding the state to TRUNCATION_TOL, plus one for the qubit to
    deposit its excitation (excitation-conserving coupling).  The main-text
    convention creates excitations and keeps at least 15 levels.
    """
    n = max(required_levels(s, TRUNCATION_TOL) + 1, 2)
    if convention == "main_text":
        n = max(n + 6, 15)
    return n


@dataclass(frozen=True)
class CavityState:
    kind: str = "vacuum"
    s: float = 0.0
    n_fock: int | None = None

    def __post_init__(self):
        if self.kind not in ("vacuum", "squeezed"):
            raise ValueError(f"unknown cavity kind {self.kind!r}")
        if self.kind == "vacuum" and self.s != 0:
            raise ValueError("vacuum cavity must have s = 0")

    @classmethod
    def squeezed(cls, s: float, n_fock: int | None = None) -> "CavityState":
        if s == 0:
            return cls("vacuum", 0.0, n_fock)
        return cls("squeezed", float(s), n_fock)

    def truncation(self, convention: str = "appendix") -> int:
        if self.n_fock is not None:
            return self.n_fock
        return default_truncation(self.s, convention)

    def vector(self, convention: str = "appendix") -> np.ndarray:
        return build_squeezed_vacuum(self.s, self.truncation(convention))


def partial_trace_cavity(rho: np.ndarray, n_fock: int) -> np.ndarray:
    """Trace out the cavity; accepts a stack ``(..., 2N, 2N)``."""
    rho = np.asarray(rho)
    d = 2 * n_fock
    if rho.shape[-2:] != (d, d):
        raise ValueError(f"expected trailing shape {(d, d)}, got {rho.shape[-2:]}")
    r = rho.reshape(rho.shape[:-2] + (2, n_fock, 2, n_fock))
    return np.einsum("...injn->...ij", r)


def product_state(rho_qubit: np.ndarray, psi_cavity: np.ndarray) -> np.ndarray:
    return np.kron(rho_qubit, np.outer(psi_cavity, psi_cavity.conj()))


def is_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    op = np.asarray(op)
    return bool(np.max(np.abs(op - np.swapaxes(op, -1, -2).conj()), initial=0.0) <= tol)


def fock(n: int, n_fock: int) -> np.ndarray:
    v = np.zeros(n_fock, dtype=complex)
    v[n] = 1.0
    return v
