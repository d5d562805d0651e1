import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynepovm.compat import (
    InvalidEffectError,
    bias_bounds,
    compatibility,
    in_window,
    joint_margin,
    jointly_measurable,
    minkowski,
    perp,
    random_effect,
    sharpness,
)
from dynepovm.povm import QubitFourVector, eigenvalues

seeds = st.integers(0, 2**32 - 1)


def test_minkowski_and_perp():
    assert minkowski([2, 1, 1, 0], [1, 1, 0, 0]) == 1
    assert np.array_equal(perp([0.5, 0.1, 0.2, 0.3]), [1.5, -0.1, -0.2, -0.3])


def test_known_sharpness_values():
    assert sharpness([1, 0, 0, 0]) == pytest.approx(0)
    assert sharpness([1, 1, 0, 0]) == pytest.approx(1)
    assert sharpness(QubitFourVector(0.5, (0.5, 0, 0))) == pytest.approx(0.5)
    with pytest.raises(InvalidEffectError):
        sharpness([0.5, 1.0, 0, 0])
    assert np.isnan(sharpness([0.5, 1.0, 0, 0], invalid="nan"))


def test_orthogonal_projectors_incompatible():
    assert compatibility([1, 1, 0, 0], [1, 0, 1, 0]) == pytest.approx(-2)
    assert compatibility([1, 0, 0, 0], [1, 0, 1, 0]) >= -1e-12
    assert not jointly_measurable([1, 1, 0, 0], [1, 0, 1, 0])


@given(seeds)
def test_symmetries(seed):
    rng = np.random.default_rng(seed)
    v, w = random_effect(rng, 20), random_effect(rng, 20)
    c = compatibility(v, w)
    assert np.allclose(c, compatibility(w, v), atol=1e-12)
    assert np.allclose(c, compatibility(v, perp(w)), atol=1e-12)
    assert np.allclose(sharpness(v), sharpness(perp(v)), atol=1e-12)
    assert np.all(sharpness(v) >= -1e-7)


@given(seeds)
def test_unbiased_pairs_match_closed_criterion(seed):
    # unbiased effects are jointly measurable iff |a + b| + |a - b| <= 2
    rng = np.random.default_rng(seed)
    a, b = (rng.normal(size=(50, 3)) for _ in range(2))
    a *= rng.uniform(0, 1, (50, 1)) / np.linalg.norm(a, axis=1, keepdims=True)
    b *= rng.uniform(0, 1, (50, 1)) / np.linalg.norm(b, axis=1, keepdims=True)
    crit = 2 - np.linalg.norm(a + b, axis=1) - np.linalg.norm(a - b, axis=1)
    c = compatibility(np.c_[np.ones(50), a], np.c_[np.ones(50), b])
    clear = np.abs(crit) > 1e-6
    assert np.all(np.sign(c[clear]) == np.sign(crit[clear]))


def test_oracle_agrees_with_formula():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 60:
        v, w = random_effect(rng), random_effect(rng)
        c = compatibility(v, w)
        if abs(c) < 1e-3:
            continue
        assert (joint_margin(v, w) >= -1e-7) == (c >= 0)
        checked += 1


def test_window():
    b = bias_bounds([0.5, 0.3, 0.4, 0])
    assert b.lower == pytest.approx(0.5) and b.upper == pytest.approx(1.5)
    assert b.in_window and b.saturates_lower
    assert not bias_bounds([1.8, 0.3, 0.4, 0]).in_window
    v = np.array([[1, 0.2, 0, 0], [0.1, 0.2, 0, 0], [1.9, 0.2, 0, 0]])
    assert list(in_window(v)) == [True, False, False]


@given(seeds)
def test_random_effects_are_valid(seed):
    v = random_effect(np.random.default_rng(seed), 100)
    assert np.all(in_window(v))
    assert np.all(eigenvalues(v) >= -1e-12) and np.all(eigenvalues(v) <= 1 + 1e-12)
