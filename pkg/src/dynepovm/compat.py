"""Four-vector algebra of qubit effects: sharpness and joint measurability.

An effect F = (mu 1 + a.sigma)/2 is the four-vector v = (mu, a); its
complement 1 - F is v_perp = (2 - mu, -a).  Functions accept QubitFourVector
instances or float arrays with a trailing axis of length 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .povm import QubitFourVector

RADICAND_TOL = 1e-12
WINDOW_TOL = 1e-6


class InvalidEffectError(ValueError):
    """Four-vector outside the positivity cone."""


def _arr(v) -> np.ndarray:
    if isinstance(v, QubitFourVector):
        return v.as_array()
    return np.asarray(v, dtype=float)


def minkowski(v, w):
    v, w = _arr(v), _arr(w)
    return v[..., 0] * w[..., 0] - np.sum(v[..., 1:] * w[..., 1:], axis=-1)


def perp(v) -> np.ndarray:
    v = _arr(v)
    return np.concatenate([2.0 - v[..., :1], -v[..., 1:]], axis=-1)


def _sqrt_radicand(r, invalid: str):
    r = np.asarray(r, dtype=float)
    bad = r < -RADICAND_TOL
    if np.any(bad) and invalid == "raise":
        raise InvalidEffectError(f"negative radicand {float(r[bad].min()) if r.ndim else float(r):.3e}")
    out = np.sqrt(np.clip(r, 0.0, None))
    return np.where(bad, np.nan, out)


def _result(x):
    return float(x) if np.ndim(x) == 0 else x


def sharpness(v, invalid: str = "raise"):
    """S(v) = (<v, v_perp> - sqrt(<v, v><v_perp, v_perp>)) / 2.

    ``invalid='nan'`` maps points outside the cone to NaN instead of raising.
    """
    v = _arr(v)
    vp = perp(v)
    root = _sqrt_radicand(minkowski(v, v) * minkowski(vp, vp), invalid)
    return _result(0.5 * (minkowski(v, vp) - root))


def compatibility(v, w, invalid: str = "raise"):
    """C(v, w); the pair is jointly measurable iff C >= 0."""
    v, w = _arr(v), _arr(w)
    vp, wp = perp(v), perp(w)
    rad = minkowski(v, v) * minkowski(vp, vp) * minkowski(w, w) * minkowski(wp, wp)
    root = _sqrt_radicand(rad, invalid)
    c = (root - minkowski(v, vp) * minkowski(w, wp)
         + minkowski(v, wp) * minkowski(vp, w)
         + minkowski(v, w) * minkowski(vp, wp))
    return _result(c)


@dataclass(frozen=True)
class BiasBounds:
    lower: float
    upper: float
    in_window: bool
    saturates_lower: bool = False


def bias_bounds(v, tol: float = WINDOW_TOL) -> BiasBounds:
    v = _arr(v)
    n = float(np.linalg.norm(v[1:]))
    mu = float(v[0])
    inside = n - tol <= mu <= 2 - n + tol
    return BiasBounds(n, 2 - n, inside, inside and abs(mu - n) <= tol)


def in_window(v, tol: float = WINDOW_TOL):
    """Vectorized positivity-window membership ||a|| <= mu <= 2 - ||a||."""
    v = _arr(v)
    n = np.linalg.norm(v[..., 1:], axis=-1)
    return (v[..., 0] >= n - tol) & (v[..., 0] <= 2 - n + tol)


def random_effect(rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform-ish valid four-vectors: mu in [0, 2], ||a|| <= min(mu, 2 - mu)."""
    mu = rng.uniform(0, 2, size)
    direction = rng.normal(size=np.shape(mu) + (3,))
    direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
    r = rng.uniform(0, 1, size) * np.minimum(mu, 2 - mu)
    return np.concatenate([np.asarray(mu)[..., None], np.asarray(r)[..., None] * direction], axis=-1)


def _joint_margin(g, v, w):
    """Smallest eigenvalue over the four joint effects built from G = g."""
    one = np.array([2.0, 0, 0, 0])
    parts = (g, v - g, w - g, one - v - w + g)
    return min(0.5 * (p[0] - np.linalg.norm(p[1:])) for p in parts)


def joint_margin(v, w, starts: int = 4, seed: int = 0) -> float:
    """Largest achievable min-eigenvalue of a four-outcome joint POVM with marginals v, w.

    Non-negative iff a joint observable exists.  Solved in epigraph form
    (maximize t subject to every joint effect having eigenvalues >= t) from
    several random starts; the problem is concave so starts mostly agree.
    """
    v, w = _arr(v), _arr(w)
    one = np.array([2.0, 0, 0, 0])
    rng = np.random.default_rng(seed)

    signs = np.array([1.0, -1.0, -1.0, 1.0])

    def parts(g):
        return np.stack([g, v - g, w - g, one - v - w + g])

    def slack(x):
        p = parts(x[:4])
        return 0.5 * (p[:, 0] - np.sqrt(np.sum(p[:, 1:] ** 2, axis=1) + 1e-18)) - x[4]

    def slack_jac(x):
        p = parts(x[:4])
        n = np.sqrt(np.sum(p[:, 1:] ** 2, axis=1) + 1e-18)
        jac = np.empty((4, 5))
        jac[:, 0] = 0.5 * signs
        jac[:, 1:4] = -0.5 * signs[:, None] * p[:, 1:] / n[:, None]
        jac[:, 4] = -1.0
        return jac

    best = _joint_margin(0.25 * (v + w), v, w)
    for k in range(starts):
        g0 = 0.25 * (v + w) + (0.2 * rng.normal(size=4) if k else 0.0)
        res = minimize(lambda x: -x[4], np.r_[g0, -1.0],
                       jac=lambda x: np.r_[0.0, 0.0, 0.0, 0.0, -1.0], method="SLSQP",
                       constraints=[{"type": "ineq", "fun": slack, "jac": slack_jac}],
                       options={"ftol": 1e-14, "maxiter": 500})
        best = max(best, _joint_margin(res.x[:4], v, w))
    return float(best)


def jointly_measurable(v, w) -> bool:
    return compatibility(v, w) >= 0
