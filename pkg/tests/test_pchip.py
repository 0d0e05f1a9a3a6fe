import numpy as np
import pytest
from scipy.interpolate import PchipInterpolator

from tvshape.pchip import pchip_eval, pchip_eval_with_amp_jacobian


def _random_nodes(rng, n, min_gap=5e-2):
    while True:
        t = np.sort(rng.uniform(0, 1, n))
        if n < 2 or np.all(np.diff(t) >= min_gap):
            return t


def test_node_exactness():
    t = np.array([0.0, 0.5, 1.0])
    y = np.array([0.0, 1.0, 0.0])
    assert pchip_eval(t, y, np.array([0.5]))[0] == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(pchip_eval(t, y, t), y)


def test_linear_data_reproduced():
    t = np.array([0.0, 0.3, 0.55, 1.0])
    y = 2.0 * t - 0.7
    q = np.linspace(0, 1, 500)
    assert np.allclose(pchip_eval(t, y, q), 2.0 * q - 0.7, atol=1e-14)


def test_matches_reference_interpolator(rng):
    # independent oracle: scipy's PCHIP implements the same slope rules
    for _ in range(100):
        n = int(rng.integers(2, 12))
        t = _random_nodes(rng, n, min_gap=1e-3)
        y = rng.standard_normal(n)
        q = rng.uniform(t[0], t[-1], 200)
        assert np.allclose(pchip_eval(t, y, q), PchipInterpolator(t, y)(q), atol=1e-12)


def test_monotone_preservation(rng):
    q = np.linspace(0, 1, 10_000)
    for _ in range(50):
        n = int(rng.integers(3, 12))
        t = _random_nodes(rng, n)
        y = np.sort(rng.standard_normal(n))
        v = pchip_eval(t, y, q * (t[-1] - t[0]) + t[0])
        assert np.all(np.diff(v) >= -1e-12)


def test_extrema_preserved(rng):
    # local node extrema remain global bounds of the curve (no overshoot)
    q = np.linspace(0, 1, 10_000)
    for _ in range(50):
        n = int(rng.integers(3, 12))
        t = _random_nodes(rng, n)
        y = rng.standard_normal(n)
        v = pchip_eval(t, y, q * (t[-1] - t[0]) + t[0])
        assert v.min() >= y.min() - 1e-12 and v.max() <= y.max() + 1e-12


def test_c1_continuity():
    t = np.array([0.0, 0.2, 0.45, 0.8, 1.0])
    y = np.array([0.0, 1.0, 0.3, 0.9, 0.2])
    eps = 1e-7
    for tk in t[1:-1]:
        left = (pchip_eval(t, y, [tk]) - pchip_eval(t, y, [tk - eps])) / eps
        right = (pchip_eval(t, y, [tk + eps]) - pchip_eval(t, y, [tk])) / eps
        assert left[0] == pytest.approx(right[0], abs=1e-5)


def test_query_outside_span_rejected():
    t = np.array([0.0, 1.0])
    y = np.array([0.0, 1.0])
    with pytest.raises(ValueError):
        pchip_eval(t, y, np.array([1.5]))
    with pytest.raises(ValueError):
        pchip_eval(np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 2.0]), np.array([0.5]))


def test_amp_jacobian_matches_finite_differences(rng):
    for _ in range(50):
        n = int(rng.integers(3, 9))
        t = _random_nodes(rng, n)
        y = np.cumsum(rng.uniform(0.1, 1.0, n)) * rng.choice([-1.0, 1.0])
        q = rng.uniform(t[0], t[-1], 64)
        _, W = pchip_eval_with_amp_jacobian(t, y, q)
        h = 1e-6
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            fd = (pchip_eval(t, y + e, q) - pchip_eval(t, y - e, q)) / (2 * h)
            scale = max(np.max(np.abs(fd)), 1e-9)
            assert np.max(np.abs(W[:, i] - fd)) / scale < 1e-5


def test_two_node_case_is_linear():
    t = np.array([0.0, 2.0])
    y = np.array([1.0, 3.0])
    q = np.linspace(0, 2, 20)
    assert np.allclose(pchip_eval(t, y, q), 1.0 + q, atol=1e-14)
