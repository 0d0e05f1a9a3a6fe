"""Time-varying wave-shape model: node-encoded harmonic amplitudes.

A fitted model represents the demodulated signal as

    cos(2*pi*phi1(n)) + sum_{l=2}^{r} P_l(t_n) * Theta_l(n),
    Theta_l(n) = cos(2*pi*e_l*phi1(n)) + c_l*sin(2*pi*e_l*phi1(n)),

where each P_l is the shape-preserving cubic through that harmonic's
nodes. Node times at the record edges are fixed; when the record was
boundary-extended, the nodes at the original record edges are fixed too.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .pchip import pchip_eval
from .signals import RealSignal
from .stft import FundamentalEstimate


@dataclass
class HafNodes:
    """Interpolation nodes of one harmonic amplitude function."""

    times: np.ndarray   # seconds, strictly increasing, endpoints fixed
    amps: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.amps = np.asarray(self.amps, dtype=float)
        if self.times.size != self.amps.size or self.times.size < 2:
            raise ValueError("nodes need matching times/amps with at least 2 entries")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("node times must be strictly increasing")

    def __len__(self) -> int:
        return self.times.size

    def copy(self) -> "HafNodes":
        return HafNodes(self.times.copy(), self.amps.copy())

    def evaluate(self, query_times: np.ndarray) -> np.ndarray:
        """Shape-preserving cubic through the nodes at the query times."""
        return pchip_eval(self.times, self.amps, query_times)


@dataclass
class HarmonicModel:
    """One harmonic: phase ratio, quadrature coefficient, HAF nodes."""

    e: float
    c: float
    nodes: HafNodes
    degenerate: bool = False   # warm start found no energy at this harmonic

    def copy(self) -> "HarmonicModel":
        return HarmonicModel(self.e, self.c, self.nodes.copy(), self.degenerate)


@dataclass
class WaveShapeModel:
    """Full coefficient set of the fitted time-varying wave-shape."""

    r: int                                   # number of harmonics incl. fundamental
    harmonics: list[HarmonicModel]           # entries for l = 2..r
    fundamental: FundamentalEstimate | None = None
    extension_map: tuple[int, int] = (0, 0)  # (n_pre, n_post) samples

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if len(self.harmonics) != self.r - 1:
            raise ValueError("expected one harmonic entry per l = 2..r")

    def copy(self) -> "WaveShapeModel":
        return WaveShapeModel(
            self.r,
            [h.copy() for h in self.harmonics],
            self.fundamental,
            self.extension_map,
        )

    # -- coefficient vector ------------------------------------------------
    def free_time_slice(self, harmonic: HarmonicModel) -> slice:
        """Indices of this harmonic's nodes whose times are free."""
        j = len(harmonic.nodes)
        if self.extension_map[0] > 0 or self.extension_map[1] > 0:
            return slice(2, j - 2)
        return slice(1, j - 1)

    def flatten(self) -> np.ndarray:
        """Coefficient vector: per harmonic [inner times, all amps, c, e]."""
        parts = []
        for h in self.harmonics:
            parts.append(h.nodes.times[self.free_time_slice(h)])
            parts.append(h.nodes.amps)
            parts.append([h.c, h.e])
        if not parts:
            return np.empty(0)
        return np.concatenate(parts)

    def unflatten(self, gamma: np.ndarray) -> "WaveShapeModel":
        """Rebuild a model with the same structure from a coefficient vector."""
        out = self.copy()
        pos = 0
        for h in out.harmonics:
            sl = self.free_time_slice(h)
            k = sl.stop - sl.start
            h.nodes.times[sl] = gamma[pos : pos + k]
            pos += k
            j = len(h.nodes)
            h.nodes.amps[:] = gamma[pos : pos + j]
            pos += j
            h.c = float(gamma[pos])
            h.e = float(gamma[pos + 1])
            pos += 2
        if pos != gamma.size:
            raise ValueError(f"coefficient vector has {gamma.size} entries, expected {pos}")
        return out

    # -- serialization -----------------------------------------------------
    def to_json(self) -> str:
        return json.dumps(
            {
                "r": self.r,
                "harmonics": [
                    {
                        "e": h.e,
                        "c": h.c,
                        "nodes": [
                            {"t": float(t), "a": float(a)}
                            for t, a in zip(h.nodes.times, h.nodes.amps)
                        ],
                    }
                    for h in self.harmonics
                ],
                "extension_map": list(self.extension_map),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "WaveShapeModel":
        raw = json.loads(text)
        harmonics = [
            HarmonicModel(
                e=float(h["e"]),
                c=float(h["c"]),
                nodes=HafNodes(
                    np.array([n["t"] for n in h["nodes"]]),
                    np.array([n["a"] for n in h["nodes"]]),
                ),
            )
            for h in raw["harmonics"]
        ]
        return cls(
            r=int(raw["r"]),
            harmonics=harmonics,
            extension_map=tuple(raw["extension_map"]),
        )


def demodulate(x: RealSignal, fund: FundamentalEstimate) -> RealSignal:
    """Divide out the fundamental amplitude (guarded against underflow)."""
    if len(x) != fund.B1.size:
        raise ValueError("signal and fundamental estimate lengths differ")
    guard = max(1e-3 * float(fund.B1.max()), np.finfo(float).eps * float(np.linalg.norm(x.samples)))
    return x.with_samples(x.samples / np.maximum(fund.B1, guard))


def remodulate(x_demod_hat: RealSignal, fund: FundamentalEstimate) -> RealSignal:
    """Multiply by the fundamental amplitude; inverse of demodulate away from the guard."""
    if len(x_demod_hat) != fund.B1.size:
        raise ValueError("signal and fundamental estimate lengths differ")
    return x_demod_hat.with_samples(x_demod_hat.samples * fund.B1)


def evaluate_model(
    model: WaveShapeModel,
    phi1: np.ndarray,
    fs: float | None = None,
    t0: float | None = None,
) -> RealSignal:
    """Synthesize the demodulated wave-shape model along a phase track.

    phi1 must be sampled on the same grid the node spans cover; fs/t0
    default to the model's fundamental reference and node span start.
    """
    phi1 = np.asarray(phi1, dtype=float)
    if fs is None:
        if model.fundamental is None:
            raise ValueError("model has no fundamental reference; pass fs explicitly")
        fs = model.fundamental.fs
    if t0 is None:
        t0 = model.harmonics[0].nodes.times[0] if model.harmonics else 0.0
    t = t0 + np.arange(phi1.size) / fs
    out = np.cos(2 * np.pi * phi1)
    for h in model.harmonics:
        arg = 2 * np.pi * h.e * phi1
        theta = np.cos(arg) + h.c * np.sin(arg)
        out = out + pchip_eval(h.nodes.times, h.nodes.amps, t) * theta
    return RealSignal(out, fs=fs, t0=float(t0))
