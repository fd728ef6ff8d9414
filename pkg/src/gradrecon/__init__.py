"""Reconstruction of missing samples in DFT-sparse signals.

Gradient descent on a spectral concentration measure, with constant or
stage-wise decaying step sizes, plus sweep and case-study harnesses.
"""

from .engine import (
    ConvergenceTrace,
    DecaySchedule,
    DivergenceError,
    GradientConfig,
    ReconstructionState,
    apply_step,
    brute_force_single_sample,
    estimate_gradient,
    initialize,
    reconstruct,
)
from .signal import (
    InfiniteSNRError,
    NoiseSpec,
    SamplingMask,
    add_noise,
    generate_test_signal,
    mae,
    random_mask,
    snr_db,
)
from .transform import concentration_measure, forward, inverse, perturbed_spectrum

__version__ = "0.1.0"
