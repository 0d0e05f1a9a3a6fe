"""Gaussian-window short-time Fourier analysis with per-sample hop.

The window is g(n) = exp(-sigma*n^2) with n in samples, truncated where it
falls below 1e-8, and the transform uses a window-centered phase
convention so the phase at a ridge tracks the component's own phase. The
discrete vertical-reconstruction sum is normalized so that summing every
bin inverts the transform exactly: x(n) = Re[(1/(nfft*g(0))) * sum_k w_k F(n,k)]
with w = 2 on interior bins and 1 at DC/Nyquist.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .signals import RealSignal

WINDOW_TRUNCATION = 1e-8


@dataclass
class Spectrogram:
    """Complex STFT matrix indexed [time sample][frequency bin], hop 1."""

    values: np.ndarray            # (N, n_bins) complex
    freq_axis: np.ndarray         # Hz, strictly increasing, max fs/2
    fs: float
    t0: float
    window_sigma: float           # per squared sample index
    window_norm: float            # ||g||_2
    window_peak: float            # g(0) == 1
    window_halfwidth: int         # samples, truncation at 1e-8
    nfft: int
    hop: int = 1
    window_coverage: np.ndarray | None = None  # in-record window mass per frame

    @property
    def n_times(self) -> int:
        return self.values.shape[0]

    @property
    def bin_width(self) -> float:
        return self.fs / self.nfft

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def export(self, matrix_path, meta_path) -> None:
        """Binary magnitude dump plus JSON axis metadata for plotting."""
        np.save(matrix_path, self.magnitude())
        with open(meta_path, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "fs": self.fs,
                    "t0": self.t0,
                    "hop": self.hop,
                    "nfft": self.nfft,
                    "window_sigma": self.window_sigma,
                    "freq_axis_hz": self.freq_axis.tolist(),
                    "n_times": self.n_times,
                },
                fh,
            )


@dataclass
class Ridge:
    """Per-sample frequency track of one component."""

    freq: np.ndarray              # Hz, one entry per time index
    band_halfwidth: float = 0.0   # Hz, reconstruction half-width


def gaussian_window(sigma: float) -> tuple[np.ndarray, int]:
    """Sampled window and its half-width at the 1e-8 truncation level."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    half = int(np.floor(np.sqrt(np.log(1.0 / WINDOW_TRUNCATION) / sigma)))
    n = np.arange(-half, half + 1)
    return np.exp(-sigma * n * n), half


def default_band_halfwidth(sigma: float, fs: float) -> float:
    """Half-support of the window's Fourier transform at the 1e-3 level, Hz."""
    return float(np.sqrt(np.log(1e3) * sigma) / np.pi * fs)


def stft(x: RealSignal, sigma: float, n_bins: int | None = None) -> Spectrogram:
    """Per-sample-hop Gaussian-window STFT with one-sided frequency axis.

    n_bins overrides the FFT length (default: next power of two covering
    both the signal and the truncated window).
    """
    g, half = gaussian_window(sigma)
    if 2 * half + 1 < 8:
        raise ValueError(f"sigma={sigma} leaves a window under 8 samples")
    N = len(x)
    need = max(N, 2 * half + 1)
    nfft = n_bins if n_bins is not None else 1 << int(np.ceil(np.log2(need)))
    if nfft < 2 * half + 1:
        raise ValueError("n_bins smaller than the window support would alias frames")

    padded = np.concatenate([np.zeros(half), x.samples, np.zeros(half)])
    frames = np.lib.stride_tricks.sliding_window_view(padded, 2 * half + 1)
    values = np.empty((N, nfft // 2 + 1), dtype=complex)
    # window-centered phase: place g's center at FFT index 0
    chunk = max(1, int(4e6 // nfft))
    buf = np.zeros((min(chunk, N), nfft))
    for start in range(0, N, chunk):
        stop = min(start + chunk, N)
        b = buf[: stop - start]
        b[:] = 0.0
        wframes = frames[start:stop] * g
        b[:, : half + 1] = wframes[:, half:]
        b[:, nfft - half :] = wframes[:, :half]
        values[start:stop] = np.fft.rfft(b, axis=1)
    freq_axis = np.arange(nfft // 2 + 1) * (x.fs / nfft)
    # fraction of the window mass falling inside the record, per frame
    cg = np.concatenate([[0.0], np.cumsum(g)])
    n_idx = np.arange(N)
    lo = np.maximum(0, half - n_idx)
    hi = np.minimum(2 * half, half + (N - 1 - n_idx))
    coverage = (cg[hi + 1] - cg[lo]) / cg[-1]
    return Spectrogram(
        values=values,
        freq_axis=freq_axis,
        fs=x.fs,
        t0=x.t0,
        window_sigma=sigma,
        window_norm=float(np.linalg.norm(g)),
        window_peak=1.0,
        window_halfwidth=half,
        nfft=nfft,
        window_coverage=coverage,
    )


def extract_ridge(
    spec: Spectrogram,
    max_jump_hz: float,
    band: tuple[float, float] | None = None,
) -> Ridge:
    """Greedy maximum-energy ridge.

    Anchors at the global spectrogram maximum (inside band, if given) and
    extends forward and backward, restricting each step's search to
    +-max_jump_hz around the previous frequency.
    """
    if max_jump_hz <= 0:
        raise ValueError("max frequency jump must be positive")
    if max_jump_hz < spec.bin_width:
        raise ValueError(
            f"max jump {max_jump_hz} Hz is below one bin width {spec.bin_width:.4g} Hz"
        )
    mag = spec.magnitude()
    n_time, n_freq = mag.shape
    lo, hi = 0, n_freq
    if band is not None:
        lo = int(np.searchsorted(spec.freq_axis, band[0], side="left"))
        hi = int(np.searchsorted(spec.freq_axis, band[1], side="right"))
        if hi <= lo:
            raise ValueError(f"empty ridge search band {band}")
    sub = mag[:, lo:hi]
    if not np.any(sub > 0):
        raise ValueError("all-zero spectrogram in the requested band")
    anchor_t, anchor_f = np.unravel_index(np.argmax(sub), sub.shape)
    anchor_f += lo

    jump_bins = max(1, int(np.floor(max_jump_hz / spec.bin_width)))
    idx = np.empty(n_time, dtype=int)
    idx[anchor_t] = anchor_f
    for n in range(anchor_t + 1, n_time):
        a = max(lo, idx[n - 1] - jump_bins)
        b = min(hi, idx[n - 1] + jump_bins + 1)
        idx[n] = a + int(np.argmax(mag[n, a:b]))
    for n in range(anchor_t - 1, -1, -1):
        a = max(lo, idx[n + 1] - jump_bins)
        b = min(hi, idx[n + 1] + jump_bins + 1)
        idx[n] = a + int(np.argmax(mag[n, a:b]))
    return Ridge(freq=spec.freq_axis[idx])


def vertical_reconstruct(
    spec: Spectrogram,
    ridge: Ridge,
    delta: float,
    renormalize_coverage: bool = False,
) -> np.ndarray:
    """Complex component recovered by summing bins within delta of the ridge.

    Normalized so that a full-band sum inverts the transform; with a band
    restricted around one component, the result approximates its analytic
    signal (magnitude = instantaneous amplitude, phase = 2*pi*phase).
    renormalize_coverage divides out the per-frame in-record window mass,
    undoing the amplitude shrinkage of frames whose window overhangs the
    record edges (wanted for component amplitude estimates, not for exact
    full-band inversion).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if ridge.freq.shape[0] != spec.n_times:
        raise ValueError("ridge length does not match the spectrogram")
    if np.any(ridge.freq - delta < -spec.bin_width) or np.any(
        ridge.freq + delta > spec.fs / 2 + spec.bin_width
    ):
        warnings.warn("reconstruction band clipped to [0, fs/2]", stacklevel=2)
    n_freq = spec.freq_axis.size
    lo = np.searchsorted(spec.freq_axis, ridge.freq - delta, side="left")
    hi = np.searchsorted(spec.freq_axis, ridge.freq + delta, side="right")
    lo = np.clip(lo, 0, n_freq)
    hi = np.clip(hi, lo, n_freq)
    # one-sided doubling: weight 2 everywhere except DC and Nyquist
    out = np.empty(spec.n_times, dtype=complex)
    for n in range(spec.n_times):
        seg = spec.values[n, lo[n] : hi[n]]
        s = 2.0 * seg.sum()
        if lo[n] == 0:
            s -= spec.values[n, 0]
        if hi[n] == n_freq:
            s -= spec.values[n, -1]
        out[n] = s
    out /= spec.nfft * spec.window_peak
    if renormalize_coverage and spec.window_coverage is not None:
        out /= spec.window_coverage
    return out


def full_band_resynthesis(spec: Spectrogram) -> np.ndarray:
    """Real signal recovered from all bins (exact inverse of stft)."""
    w = np.full(spec.freq_axis.size, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return (spec.values @ w).real / (spec.nfft * spec.window_peak)


@dataclass
class FundamentalEstimate:
    """Instantaneous amplitude and phase of the fundamental component."""

    B1: np.ndarray      # > 0, signal units
    phi1: np.ndarray    # cycles, unwrapped, non-decreasing
    fs: float

    def mean_if(self) -> float:
        """Average instantaneous frequency in Hz."""
        return float((self.phi1[-1] - self.phi1[0]) / (len(self.phi1) - 1) * self.fs)


def estimate_fundamental(
    spec: Spectrogram,
    max_jump_hz: float,
    delta: float,
    band: tuple[float, float] | None = None,
) -> tuple[FundamentalEstimate, Ridge]:
    """Amplitude/phase of the most energetic ridge.

    B1 is floored at a small positivity guard (the wave-shape pipeline
    divides by it); phi1 is the unwrapped ridge phase in cycles with any
    negative increments clipped to zero.
    """
    ridge = extract_ridge(spec, max_jump_hz, band)
    ridge.band_halfwidth = delta
    y = vertical_reconstruct(spec, ridge, delta, renormalize_coverage=True)
    b1 = np.abs(y)
    scale = max(float(b1.max()), 0.0)
    guard = max(1e-3 * scale, np.finfo(float).eps)
    b1 = np.maximum(b1, guard)
    phi = np.unwrap(np.angle(y)) / (2 * np.pi)
    inc = np.diff(phi)
    phi1 = phi[0] + np.concatenate([[0.0], np.cumsum(np.maximum(inc, 0.0))])
    return FundamentalEstimate(B1=b1, phi1=phi1, fs=spec.fs), ridge


def threshold_coefficients(values: np.ndarray, eta: float, mode: str) -> np.ndarray:
    """Hard/soft thresholding of complex STFT coefficients at level eta."""
    mag = np.abs(values)
    if mode == "hard":
        return np.where(mag < eta, 0.0, values)
    if mode == "soft":
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(mag > 0, np.maximum(mag - eta, 0.0) / np.where(mag > 0, mag, 1.0), 0.0)
        return values * scale
    raise ValueError(f"mode must be 'hard' or 'soft', got {mode!r}")


def noise_sigma_estimate(spec: Spectrogram) -> float:
    """Median-absolute-deviation noise scale from the real part of the STFT.

    sigma_hat = median(|Re F|) / (0.6745 * ||g||_2). Against white noise of
    variance v this statistic concentrates near sqrt(v/2) (the real part of
    a generic bin carries half the coefficient variance); the matching
    sqrt(2) reappears in the denoising threshold.
    """
    med = float(np.median(np.abs(spec.values.real)))
    return med / (0.6745 * spec.window_norm)


def threshold_denoise(x: RealSignal, sigma: float, mode: str = "hard") -> RealSignal:
    """STFT-thresholding denoiser (baseline).

    Threshold eta = 3*sqrt(2)*sigma_hat*||g||_2 applied to coefficient
    magnitudes, then full-band resynthesis trimmed to the input support.
    """
    spec = stft(x, sigma)
    sigma_hat = noise_sigma_estimate(spec)
    eta = 3.0 * np.sqrt(2.0) * sigma_hat * spec.window_norm
    spec.values = threshold_coefficients(spec.values, eta, mode)
    return x.with_samples(full_band_resynthesis(spec))
