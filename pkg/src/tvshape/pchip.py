"""Shape-preserving cubic Hermite interpolation on free nodes.

Node slopes follow the classic monotone rules: interior slopes are zero
whenever the adjacent secants disagree in sign (or vanish), otherwise a
spacing-weighted harmonic mean of the secants; edge slopes use the
one-sided three-point estimate with shape-preserving clipping. The curve
is exact at the nodes, C1 everywhere, monotone wherever the node
amplitudes are monotone, and keeps local extrema at the nodes.

Besides evaluation, this module exposes the exact derivative of the curve
with respect to the node amplitudes (the slope rules are differentiable
inside each branch), which the model fitter uses for analytic jacobian
columns.
"""

from __future__ import annotations

import numpy as np


def _check_nodes(times: np.ndarray, amps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    times = np.asarray(times, dtype=float)
    amps = np.asarray(amps, dtype=float)
    if times.ndim != 1 or times.shape != amps.shape:
        raise ValueError("node times and amplitudes must be 1-d arrays of equal length")
    if times.size < 2:
        raise ValueError("need at least 2 nodes")
    if np.any(np.diff(times) <= 0):
        raise ValueError("node times must be strictly increasing (no duplicates)")
    return times, amps


def pchip_slopes(times: np.ndarray, amps: np.ndarray) -> np.ndarray:
    """Node slopes of the shape-preserving cubic through (times, amps)."""
    d, _ = _slopes_and_jacobian(times, amps, want_jac=False)
    return d


def _slopes_and_jacobian(times, amps, want_jac=True):
    times, amps = _check_nodes(times, amps)
    n = times.size
    h = np.diff(times)
    m = np.diff(amps) / h
    d = np.zeros(n)
    dd_dm = np.zeros((n, n - 1)) if want_jac else None

    if n == 2:
        d[:] = m[0]
        if want_jac:
            dd_dm[:, 0] = 1.0
    else:
        for k in range(1, n - 1):
            m0, m1 = m[k - 1], m[k]
            if m0 == 0.0 or m1 == 0.0 or np.sign(m0) != np.sign(m1):
                continue  # d[k] stays 0; flat branch has zero derivative
            w1 = 2 * h[k] + h[k - 1]
            w2 = h[k] + 2 * h[k - 1]
            denom = w1 * m1 + w2 * m0
            d[k] = (w1 + w2) * m0 * m1 / denom
            if want_jac:
                dd_dm[k, k - 1] = (w1 + w2) * w1 * m1**2 / denom**2
                dd_dm[k, k] = (w1 + w2) * w2 * m0**2 / denom**2
        d[0], j0 = _edge_slope(h[0], h[1], m[0], m[1])
        d[-1], j1 = _edge_slope(h[-1], h[-2], m[-1], m[-2])
        if want_jac:
            dd_dm[0, 0], dd_dm[0, 1] = j0
            dd_dm[-1, -1], dd_dm[-1, -2] = j1

    if not want_jac:
        return d, None
    # chain secants back to amplitudes: m_j = (y_{j+1} - y_j)/h_j
    dm_dy = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    dm_dy[idx, idx] = -1.0 / h
    dm_dy[idx, idx + 1] = 1.0 / h
    return d, dd_dm @ dm_dy


def _edge_slope(h0, h1, m0, m1):
    """One-sided three-point edge slope with shape-preserving clipping.

    Returns (slope, (d slope/d m0, d slope/d m1)).
    """
    if m0 == 0.0:
        # tie point of the clipping rules: directional derivatives disagree,
        # so stay on the flat branch (matches the interior zero-slope rule)
        return 0.0, (0.0, 0.0)
    d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1)
    if np.sign(d) != np.sign(m0):
        return 0.0, (0.0, 0.0)
    if np.sign(m0) != np.sign(m1) and abs(d) > 3.0 * abs(m0):
        return 3.0 * m0, (3.0, 0.0)
    return d, ((2 * h0 + h1) / (h0 + h1), -h0 / (h0 + h1))


def _locate(times: np.ndarray, query: np.ndarray) -> np.ndarray:
    span = times[-1] - times[0]
    tol = 1e-9 * max(span, 1.0)
    if np.any(query < times[0] - tol) or np.any(query > times[-1] + tol):
        raise ValueError("query times outside the node span")
    j = np.searchsorted(times, query, side="right") - 1
    return np.clip(j, 0, times.size - 2)


def _hermite_basis(s):
    s2 = s * s
    s3 = s2 * s
    return (
        2 * s3 - 3 * s2 + 1,   # weight of left amplitude
        s3 - 2 * s2 + s,       # weight of left slope (times h)
        -2 * s3 + 3 * s2,      # weight of right amplitude
        s3 - s2,               # weight of right slope (times h)
    )


def pchip_eval(times: np.ndarray, amps: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Evaluate the shape-preserving cubic at the query times."""
    times, amps = _check_nodes(times, amps)
    query = np.asarray(query, dtype=float)
    d = pchip_slopes(times, amps)
    j = _locate(times, query)
    h = times[j + 1] - times[j]
    s = (query - times[j]) / h
    h00, h10, h01, h11 = _hermite_basis(s)
    return h00 * amps[j] + h * h10 * d[j] + h01 * amps[j + 1] + h * h11 * d[j + 1]


def pchip_eval_with_amp_jacobian(times, amps, query):
    """Curve values plus d(curve)/d(amplitudes).

    Returns (values, W) with W of shape (len(query), len(times)); W is the
    exact jacobian wherever the slope rules are differentiable (everywhere
    except the measure-zero branch switches of the monotonicity limiter).
    """
    times, amps = _check_nodes(times, amps)
    query = np.asarray(query, dtype=float)
    d, dd_dy = _slopes_and_jacobian(times, amps)
    j = _locate(times, query)
    h = times[j + 1] - times[j]
    s = (query - times[j]) / h
    h00, h10, h01, h11 = _hermite_basis(s)
    vals = h00 * amps[j] + h * h10 * d[j] + h01 * amps[j + 1] + h * h11 * d[j + 1]
    n = times.size
    W = np.zeros((query.size, n))
    rows = np.arange(query.size)
    np.add.at(W, (rows, j), h00)
    np.add.at(W, (rows, j + 1), h01)
    W += (h * h10)[:, None] * dd_dy[j, :] + (h * h11)[:, None] * dd_dy[j + 1, :]
    return vals, W
