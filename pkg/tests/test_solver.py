import numpy as np
import pytest

from tvshape import (
    FitError,
    FitOptions,
    FundamentalEstimate,
    HafNodes,
    HarmonicModel,
    RealSignal,
    WaveShapeModel,
    fit,
    residual_and_jacobian,
)
from tvshape.solver import FitContext, _fd_jacobian

FS = 2000.0


def _phi(n, f0=40.0, fm=0.0):
    t = np.arange(n) / FS
    return f0 * t + fm / (2 * np.pi) * np.sin(2 * np.pi * t)


def _fund(n):
    return FundamentalEstimate(B1=np.ones(n), phi1=_phi(n), fs=FS)


def _random_model(rng, n=1200, r=3, n_nodes=5, span=1.0):
    harmonics = []
    for ell in range(2, r + 1):
        times = np.linspace(0.0, span, n_nodes)
        times[1:-1] += rng.uniform(-0.2, 0.2, n_nodes - 2) * span / (2 * n_nodes)
        amps = rng.uniform(0.2, 0.8, n_nodes)
        harmonics.append(
            HarmonicModel(
                e=ell + rng.uniform(-0.05, 0.05),
                c=rng.uniform(-0.5, 0.5),
                nodes=HafNodes(np.sort(times), amps),
            )
        )
    return WaveShapeModel(r=r, harmonics=harmonics, fundamental=_fund(n))


def _context(model, target=None, n=1200):
    phi1 = _phi(n, fm=2.0)
    if target is None:
        target = np.zeros(n)
    return FitContext(
        target=target,
        phi1=phi1,
        t=np.arange(n) / FS,
        template=model.copy(),
        min_node_gap=2.0 / FS,
        e_bound=0.1,
    )


def test_analytic_jacobian_matches_finite_differences(rng):
    for _ in range(10):
        model = _random_model(rng)
        ctx = _context(model)
        gamma = model.flatten()
        _, J = residual_and_jacobian(gamma, ctx)
        J_fd = _fd_jacobian(gamma, ctx)
        for i in range(gamma.size):
            scale = max(np.max(np.abs(J_fd[:, i])), 1e-9)
            err = np.max(np.abs(J[:, i] - J_fd[:, i])) / scale
            assert err < 1e-5, f"column {i} ({ctx.layout[i]}): rel err {err}"


def test_node_time_perturbation_is_local(rng):
    model = _random_model(rng, n_nodes=7)
    ctx = _context(model)
    gamma = model.flatten()
    h = model.harmonics[0]
    sl = model.free_time_slice(h)
    i_node = sl.start + 2
    base = ctx.synthesize(gamma)
    pert = model.copy()
    pert.harmonics[0].nodes.times[i_node] += 1e-3
    after = ctx.synthesize(pert.flatten())
    t = ctx.t
    lo, hi = h.nodes.times[i_node - 1], h.nodes.times[i_node + 1]
    outside = (t < lo - 1e-12) | (t > hi + 1e-12)
    assert np.array_equal(base[outside], after[outside])
    assert not np.allclose(base[~outside], after[~outside])


def test_constant_haf_amp_columns_are_hat_weights(rng):
    # with equal node amplitudes the slope rules sit on the flat branch and
    # the amplitude columns reduce to pure Hermite hat weights times Theta:
    # they partition unity, have two-interval support, and the interior
    # columns agree with central finite differences
    model = _random_model(rng, r=2)
    h = model.harmonics[0]
    h.nodes.amps[:] = 0.5
    h.c = 0.0
    ctx = _context(model)
    gamma = model.flatten()
    _, J = residual_and_jacobian(gamma, ctx)
    n_t = model.free_time_slice(h).stop - model.free_time_slice(h).start
    n_nodes = len(h.nodes)
    amp_cols = J[:, n_t : n_t + n_nodes]
    arg = 2 * np.pi * h.e * ctx.phi1
    theta = np.cos(arg) + h.c * np.sin(arg)
    # hat weights sum to one at every sample: sum_i d model/d alpha_i = Theta
    assert np.allclose(amp_cols.sum(axis=1), -theta, atol=1e-12)
    # each column is supported on the two adjacent intervals only
    times = h.nodes.times
    for i in range(n_nodes):
        lo = times[max(i - 1, 0)]
        hi = times[min(i + 1, n_nodes - 1)]
        outside = (ctx.t < lo - 1e-12) | (ctx.t > hi + 1e-12)
        assert np.all(amp_cols[outside, i] == 0.0)
    # the columns are exactly the zero-slope Hermite basis ("hats"):
    times_all = h.nodes.times
    j = np.clip(np.searchsorted(times_all, ctx.t, side="right") - 1, 0, n_nodes - 2)
    s = (ctx.t - times_all[j]) / (times_all[j + 1] - times_all[j])
    h00 = 2 * s**3 - 3 * s**2 + 1
    expected = np.zeros_like(amp_cols)
    rows = np.arange(ctx.t.size)
    expected[rows, j] = -h00 * theta
    expected[rows, j + 1] = -(1 - h00) * theta
    assert np.allclose(amp_cols, expected, atol=1e-12)


def test_fit_from_ground_truth_converges_fast(recon_signal):
    x, gt = recon_signal
    n = len(x)
    fund = FundamentalEstimate(B1=gt.fundamental.b1, phi1=gt.fundamental.phi1, fs=FS)
    xd = RealSignal(x.samples / gt.fundamental.b1, FS)
    t = x.times()
    harmonics = []
    for ell in (2, 3):
        times = np.linspace(0.0, t[-1], 25)
        amps = np.interp(times, t, gt.fundamental.alphas[ell])
        harmonics.append(HarmonicModel(e=gt.fundamental.e[ell], c=0.0, nodes=HafNodes(times, amps)))
    init = WaveShapeModel(r=3, harmonics=harmonics, fundamental=fund)
    # five iterations from the true coefficients suffice to sit far below
    # the 1e-4 relative-RSS tolerance (truth is near-stationary)
    fitted, diag = fit(xd, gt.fundamental.phi1, init, FitOptions(max_iters=5))
    assert diag.iterations <= 5
    assert diag.final_rss < 1e-4 * np.sum(xd.samples**2)
    assert diag.final_rss <= diag.rss_trace[0]


def test_fit_r1_nothing_to_fit():
    n = 1000
    phi1 = _phi(n)
    xd = RealSignal(np.cos(2 * np.pi * phi1), FS)
    init = WaveShapeModel(r=1, harmonics=[], fundamental=_fund(n))
    fitted, diag = fit(xd, phi1, init)
    assert diag.iterations == 0
    assert diag.rss_trace == [diag.final_rss]


def test_fit_rss_monotone_and_constraints(rng):
    for trial in range(5):
        model = _random_model(rng, n=800, r=3, n_nodes=5)
        phi1 = _phi(800, fm=2.0)
        target = _context(model, n=800).synthesize(model.flatten())
        target = target + 0.05 * rng.standard_normal(800)
        init = _random_model(rng, n=800, r=3, n_nodes=5)
        xd = RealSignal(target, FS)
        fitted, diag = fit(xd, phi1, init, FitOptions(max_iters=50))
        trace = np.array(diag.rss_trace)
        assert np.all(np.diff(trace) <= 0)
        for ell, h in zip((2, 3), fitted.harmonics):
            assert abs(h.e - ell) <= 0.1 + 1e-12
            assert np.all(np.diff(h.nodes.times) >= 2.0 / FS - 1e-12)
            assert h.nodes.times[0] == init.harmonics[ell - 2].nodes.times[0]
            assert h.nodes.times[-1] == init.harmonics[ell - 2].nodes.times[-1]


def test_fit_deterministic(rng):
    model = _random_model(rng, n=600, r=2)
    phi1 = _phi(600, fm=2.0)
    target = _context(model, n=600).synthesize(model.flatten()) + 0.01
    xd = RealSignal(target, FS)
    init = _random_model(np.random.default_rng(5), n=600, r=2)
    f1, d1 = fit(xd, phi1, init, FitOptions(max_iters=30))
    f2, d2 = fit(xd, phi1, init, FitOptions(max_iters=30))
    assert np.array_equal(f1.flatten(), f2.flatten())
    assert d1.rss_trace == d2.rss_trace


def test_fit_improves_rss():
    n = 1000
    phi1 = _phi(n, fm=3.0)
    t = np.arange(n) / FS
    alpha = 0.5 + 0.2 * np.sin(2 * np.pi * t)
    target = np.cos(2 * np.pi * phi1) + alpha * (
        np.cos(2 * np.pi * 2.01 * phi1) + 0.3 * np.sin(2 * np.pi * 2.01 * phi1)
    )
    init = WaveShapeModel(
        r=2,
        harmonics=[HarmonicModel(e=2.0, c=0.0, nodes=HafNodes(np.linspace(0, t[-1], 6), np.full(6, 0.5)))],
        fundamental=_fund(n),
    )
    fitted, diag = fit(RealSignal(target, FS), phi1, init)
    assert diag.final_rss <= diag.rss_trace[0]
    assert diag.final_rss < 0.01 * np.sum(target**2)
    assert fitted.harmonics[0].e == pytest.approx(2.01, abs=2e-3)


def test_frozen_nodes_match_grid_search():
    # with node amplitudes frozen, the 2-parameter optimum per harmonic
    # must match a dense (e, c) grid search within grid resolution
    n = 600
    phi1 = _phi(n)
    alpha = 0.4
    e_true, c_true = 2.03, 0.25
    target = np.cos(2 * np.pi * phi1) + alpha * (
        np.cos(2 * np.pi * e_true * phi1) + c_true * np.sin(2 * np.pi * e_true * phi1)
    )
    nodes = HafNodes(np.array([0.0, (n - 1) / FS]), np.array([alpha, alpha]))
    init = WaveShapeModel(
        r=2, harmonics=[HarmonicModel(e=2.0, c=0.0, nodes=nodes)], fundamental=_fund(n)
    )
    fitted, _ = fit(
        RealSignal(target, FS), phi1, init, FitOptions(freeze_nodes=True, max_iters=100)
    )

    def rss(e, c):
        m = np.cos(2 * np.pi * phi1) + alpha * (
            np.cos(2 * np.pi * e * phi1) + c * np.sin(2 * np.pi * e * phi1)
        )
        return np.sum((target - m) ** 2)

    es = np.linspace(1.9, 2.1, 161)
    cs = np.linspace(-0.5, 0.5, 161)
    grid = np.array([[rss(e, c) for c in cs] for e in es])
    ie, ic = np.unravel_index(np.argmin(grid), grid.shape)
    assert abs(fitted.harmonics[0].e - es[ie]) <= (es[1] - es[0])
    assert abs(fitted.harmonics[0].c - cs[ic]) <= (cs[1] - cs[0])
    # amplitudes stayed frozen
    assert np.array_equal(fitted.harmonics[0].nodes.amps, nodes.amps)


def test_non_finite_init_rejected():
    n = 400
    phi1 = _phi(n)
    nodes = HafNodes(np.array([0.0, (n - 1) / FS]), np.array([np.nan, 1.0]))
    init = WaveShapeModel(
        r=2, harmonics=[HarmonicModel(e=2.0, c=0.0, nodes=nodes)], fundamental=_fund(n)
    )
    with pytest.raises(FitError):
        fit(RealSignal(np.zeros(n) + 1.0, FS), phi1, init)


def test_diagnostics_json():
    n = 500
    phi1 = _phi(n)
    init = WaveShapeModel(r=1, harmonics=[], fundamental=_fund(n))
    _, diag = fit(RealSignal(np.cos(2 * np.pi * phi1), FS), phi1, init)
    text = diag.to_json()
    assert '"converged_by"' in text and '"rss_trace"' in text
