"""Compiled RK4 loop for density-matrix generators with sparse operators."""

from __future__ import annotations

import numpy as np
from numba import njit
from scipy import sparse


def to_csr(op, dim: int):
    """(indptr, indices, data) of a dense operator; zero operator if None."""
    if op is None:
        return (np.zeros(dim + 1, np.int64), np.zeros(0, np.int64), np.zeros(0, np.complex128))
    m = sparse.csr_matrix(np.asarray(op, dtype=np.complex128))
    m.eliminate_zeros()
    return (m.indptr.astype(np.int64), m.indices.astype(np.int64), m.data.astype(np.complex128))


@njit(cache=True)
def _rhs(kp, ki, kd, lp, li, ld, ap, ai, ad, c, z, rho, out, tmp, hermitian):
    d = rho.shape[0]
    # tmp = (K + z L) rho
    for i in range(d):
        for j in range(d):
            tmp[i, j] = 0.0
        for p in range(kp[i], kp[i + 1]):
            v = kd[p]
            k = ki[p]
            for j in range(d):
                tmp[i, j] += v * rho[k, j]
        for p in range(lp[i], lp[i + 1]):
            v = z * ld[p]
            k = li[p]
            for j in range(d):
                tmp[i, j] += v * rho[k, j]
    if hermitian:
        for i in range(d):
            for j in range(d):
                out[i, j] = tmp[i, j] + np.conj(tmp[j, i])
    else:
        # rho (K + z L)^dag [i, j] = sum_k rho[i, k] conj(M[j, k])
        zc = np.conj(z)
        for i in range(d):
            for j in range(d):
                out[i, j] = tmp[i, j]
        for j in range(d):
            for p in range(kp[j], kp[j + 1]):
                v = np.conj(kd[p])
                k = ki[p]
                for i in range(d):
                    out[i, j] += rho[i, k] * v
            for p in range(lp[j], lp[j + 1]):
                v = zc * np.conj(ld[p])
                k = li[p]
                for i in range(d):
                    out[i, j] += rho[i, k] * v
    if c != 0.0:
        for i in range(d):
            for p in range(ap[i], ap[i + 1]):
                vi = c * ad[p]
                k = ai[p]
                for j in range(d):
                    for q in range(ap[j], ap[j + 1]):
                        out[i, j] += vi * rho[k, ai[q]] * np.conj(ad[q])


@njit(cache=True)
def rk4_density(kp, ki, kd, lp, li, ld, ap, ai, ad, c, zeta, rho0, dt, n_steps,
                stride, hermitian, records):
    """Integrate one trajectory; ``zeta`` holds the noise scalar at every half step."""
    d = rho0.shape[0]
    rho = rho0.copy()
    k1 = np.empty_like(rho)
    k2 = np.empty_like(rho)
    k3 = np.empty_like(rho)
    k4 = np.empty_like(rho)
    y = np.empty_like(rho)
    tmp = np.empty_like(rho)
    records[0] = rho
    r = 1
    h2 = 0.5 * dt
    for n in range(n_steps):
        z0 = zeta[2 * n]
        zm = zeta[2 * n + 1]
        z1 = zeta[2 * n + 2]
        _rhs(kp, ki, kd, lp, li, ld, ap, ai, ad, c, z0, rho, k1, tmp, hermitian)
        for i in range(d):
            for j in range(d):
                y[i, j] = rho[i, j] + h2 * k1[i, j]
        _rhs(kp, ki, kd, lp, li, ld, ap, ai, ad, c, zm, y, k2, tmp, hermitian)
        for i in range(d):
            for j in range(d):
                y[i, j] = rho[i, j] + h2 * k2[i, j]
        _rhs(kp, ki, kd, lp, li, ld, ap, ai, ad, c, zm, y, k3, tmp, hermitian)
        for i in range(d):
            for j in range(d):
                y[i, j] = rho[i, j] + dt * k3[i, j]
        _rhs(kp, ki, kd, lp, li, ld, ap, ai, ad, c, z1, y, k4, tmp, hermitian)
        for i in range(d):
            for j in range(d):
                rho[i, j] += dt / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
        if (n + 1) % stride == 0:
            records[r] = rho
            r += 1
