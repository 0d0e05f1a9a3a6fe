"""Time-varying wave-shape modeling of non-stationary oscillatory signals.

Fits an adaptive harmonic model whose per-harmonic amplitudes are free
node-encoded functions of time, then uses the fitted model for denoising,
multicomponent decomposition, and sharp-transition segmentation.
"""

from .changepoint import pelt_mean_changes
from .estimate import estimate_node_count, estimate_order, warm_start
from .extend import ExtensionResult, estimate_cycle_len, extend_boundaries, trim
from .generators import ComponentTruth, GroundTruth, SyntheticSpec, generate
from .metrics import (
    MetricsReport,
    acf,
    add_noise,
    pearson_correlation,
    residual_metrics,
    snr_out,
    spectral_entropy,
)
from .model import (
    HafNodes,
    HarmonicModel,
    WaveShapeModel,
    demodulate,
    evaluate_model,
    remodulate,
)
from .pchip import pchip_eval, pchip_eval_with_amp_jacobian
from .pipeline import (
    DenoiseResult,
    PipelineConfig,
    PipelineStageError,
    SegmentationResult,
    decompose,
    denoise,
    preset,
    segment,
)
from .signals import RealSignal, read_signal_csv, write_signal_csv
from .solver import FitDiagnostics, FitError, FitOptions, fit, residual_and_jacobian
from .stft import (
    FundamentalEstimate,
    Ridge,
    Spectrogram,
    default_band_halfwidth,
    estimate_fundamental,
    extract_ridge,
    stft,
    threshold_denoise,
    vertical_reconstruct,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
