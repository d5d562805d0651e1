"""Ensemble statistics of reconstructed effects.

Individual records can leave the positivity window from above (the pathwise
effect is a likelihood ratio, unbounded), where S and C are undefined.  Those
records are excluded from S and C means and the in-window fraction is
reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compat import compatibility, in_window, sharpness
from .dynamics import Scheme
from .povm import PovmEnsemble

PAIRS = {
    "het": (Scheme.HET_X, Scheme.HET_Y),
    "hom": (Scheme.HOM_X, Scheme.HOM_Y),
    "adiabatic": (Scheme.ADIABATIC_X, Scheme.ADIABATIC_Y),
}


@dataclass
class SeriesStats:
    mean: np.ndarray
    std: np.ndarray
    n: np.ndarray

    @property
    def stderr(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.n > 1, self.std / np.sqrt(np.maximum(self.n, 1)), np.nan)


def masked_stats(values, mask=None) -> SeriesStats:
    """Per-time mean/std over axis 0, ignoring entries where ``mask`` is False or NaN."""
    values = np.asarray(values, dtype=float)
    ok = np.isfinite(values) if mask is None else (np.asarray(mask) & np.isfinite(values))
    n = ok.sum(axis=0)
    x = np.where(ok, values, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = x.sum(axis=0) / n
        var = np.where(ok, (values - mean) ** 2, 0.0).sum(axis=0) / (n - 1)
    return SeriesStats(mean, np.sqrt(var), n)


def bias_gap(vectors) -> np.ndarray:
    """(mu - ||a||)/mu, zero when the effect is rank one."""
    v = np.asarray(vectors)
    return (v[..., 0] - np.linalg.norm(v[..., 1:], axis=-1)) / v[..., 0]


def scheme_stats(ens: PovmEnsemble) -> dict:
    v = ens.vectors
    ok = in_window(v)
    return {
        "mu": masked_stats(v[..., 0]),
        "anorm": masked_stats(np.linalg.norm(v[..., 1:], axis=-1)),
        "gap": masked_stats(bias_gap(v)),
        "S": masked_stats(sharpness(v, invalid="nan"), ok),
        "valid": masked_stats(ok.astype(float)),
    }


def pair_stats(ex: PovmEnsemble, ey: PovmEnsemble) -> dict:
    if ex.vectors.shape != ey.vectors.shape:
        raise ValueError("paired ensembles must share streams and records")
    ok = in_window(ex.vectors) & in_window(ey.vectors)
    c = compatibility(ex.vectors, ey.vectors, invalid="nan")
    return {"C": masked_stats(c, ok), "C_valid": masked_stats(ok.astype(float))}


def checkpoints(times, n: int = 20) -> np.ndarray:
    """Indices of the records nearest to n equally spaced times in (0, t_end]."""
    times = np.asarray(times)
    targets = np.linspace(0, times[-1], n + 1)[1:]
    return np.array([int(np.argmin(np.abs(times - t))) for t in targets])
