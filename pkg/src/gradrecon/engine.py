"""Missing-sample reconstruction by gradient descent on the concentration measure.

One iteration:

1. perturb every missing sample by ``+d`` and ``-d`` and measure the
   resulting spectra,
2. take the central difference of the two measures as the gradient entry
   for that sample (zero at available samples),
3. move the missing samples against the gradient scaled by ``mu``.

``d`` and ``mu`` either stay constant or are both divided by a fixed factor
at the end of every stage of ``stage_length`` iterations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .signal import SamplingMask, as_signal, mae
from .transform import concentration_measure, forward, perturbed_measures, twiddles

__all__ = [
    "ContractViolation",
    "ConvergenceTrace",
    "DecaySchedule",
    "DivergenceError",
    "GradientConfig",
    "ReconstructionState",
    "TraceRow",
    "apply_step",
    "brute_force_single_sample",
    "estimate_gradient",
    "initialize",
    "reconstruct",
]


class DivergenceError(FloatingPointError):
    """An iterate became non-finite."""

    def __init__(self, iteration: int):
        super().__init__(f"reconstruction diverged: non-finite iterate at iteration {iteration}")
        self.iteration = iteration


class ContractViolation(ValueError):
    """A gradient touched an available sample."""


@dataclass(frozen=True)
class DecaySchedule:
    """Stage-wise division of ``d`` and ``mu``.

    With ``enabled=False`` both stay at their initial values forever.
    """

    stage_length: int = 20
    decay_factor: float = 10.0
    enabled: bool = True

    def __post_init__(self):
        if self.stage_length < 1:
            raise ValueError(f"stage_length must be >= 1, got {self.stage_length}")
        if not self.decay_factor > 1:
            raise ValueError(f"decay_factor must be > 1, got {self.decay_factor}")

    @classmethod
    def constant(cls) -> "DecaySchedule":
        return cls(enabled=False)

    def divisor(self, iteration: int) -> float:
        if not self.enabled:
            return 1.0
        try:
            return self.decay_factor ** (iteration // self.stage_length)
        except OverflowError:
            return float("inf")


@dataclass(frozen=True)
class GradientConfig:
    """Knobs of the reconstruction loop.

    Defaults reproduce the adaptive 128-sample experiment: ``d0=10``,
    ``mu0=20``, division by 10 every 20 iterations, ``p=1``, 320 iterations.
    ``min_d`` optionally stops the loop once the step drops below it.
    """

    d0: float = 10.0
    mu0: float = 20.0
    order: float = 1.0
    max_iterations: int = 320
    amplitude_bound: float = 5.0
    schedule: DecaySchedule = field(default_factory=DecaySchedule)
    min_d: Optional[float] = None

    def __post_init__(self):
        if not self.d0 > 0:
            raise ValueError(f"d0 must be > 0, got {self.d0}")
        if not self.mu0 > 0:
            raise ValueError(f"mu0 must be > 0, got {self.mu0}")
        if not self.order >= 1:
            raise ValueError(f"norm order must be >= 1, got {self.order}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.amplitude_bound > 0:
            raise ValueError(f"amplitude_bound must be > 0, got {self.amplitude_bound}")

    def d_at(self, iteration: int) -> float:
        return self.d0 / self.schedule.divisor(iteration)

    def mu_at(self, iteration: int) -> float:
        return self.mu0 / self.schedule.divisor(iteration)


@dataclass(frozen=True)
class ReconstructionState:
    x: np.ndarray
    mask: SamplingMask
    iteration: int = 0
    current_d: float = 10.0
    current_mu: float = 20.0


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    measure: float
    mae: Optional[float]
    d: float
    mu: float


@dataclass
class ConvergenceTrace:
    """Per-iteration record.

    Row ``i`` describes the iterate after ``i`` updates together with the
    ``d`` and ``mu`` the next update uses; row 0 is the zero-filled start.
    """

    rows: list[TraceRow] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def iterations(self) -> np.ndarray:
        return np.array([r.iteration for r in self.rows], dtype=int)

    @property
    def measures(self) -> np.ndarray:
        return np.array([r.measure for r in self.rows])

    @property
    def maes(self) -> np.ndarray:
        return np.array([np.nan if r.mae is None else r.mae for r in self.rows])

    def mae_min(self) -> tuple[float, int]:
        """Smallest MAE and the first iteration that reaches it."""
        m = self.maes
        if m.size == 0 or np.all(np.isnan(m)):
            raise ValueError("trace carries no MAE column (no reference supplied)")
        k = int(np.nanargmin(m))
        return float(m[k]), self.rows[k].iteration


def _readonly(x: np.ndarray) -> np.ndarray:
    x.flags.writeable = False
    return x


def initialize(observed, mask: SamplingMask, config: Optional[GradientConfig] = None) -> ReconstructionState:
    """Zero the missing samples, keep the available ones."""
    obs = as_signal(observed, name="observed")
    if mask.n != obs.size:
        raise ValueError(f"mask length {mask.n} does not match signal length {obs.size}")
    config = config or GradientConfig()
    x = obs.copy()
    x[mask.missing_indices] = 0.0
    return ReconstructionState(
        x=_readonly(x), mask=mask, iteration=0,
        current_d=config.d_at(0), current_mu=config.mu_at(0),
    )


def estimate_gradient(state: ReconstructionState, order: float = 1.0, d: Optional[float] = None) -> np.ndarray:
    """Central-difference gradient of the measure over the missing samples.

    The base spectrum is transformed once; each ``+d``/``-d`` perturbation is
    an O(N) update of it.  Available entries are exactly zero.
    """
    d = state.current_d if d is None else d
    if not d > 0:
        raise ValueError(f"d must be > 0, got {d}")
    E = np.zeros(state.x.size)
    miss = state.mask.missing_indices
    if miss.size == 0:
        return E
    S = forward(state.x)
    plus = perturbed_measures(S, miss, d, order)
    minus = perturbed_measures(S, miss, -d, order)
    E[miss] = (plus - minus) / (2 * d)
    return E


def apply_step(state: ReconstructionState, gradient, mu: Optional[float] = None) -> ReconstructionState:
    """Move the missing samples by ``-mu * gradient`` and bump the iteration count."""
    mu = state.current_mu if mu is None else mu
    E = np.asarray(gradient, dtype=float)
    if E.shape != state.x.shape:
        raise ValueError(f"gradient shape {E.shape} does not match state {state.x.shape}")
    if np.any(E[state.mask.available]):
        raise ContractViolation("gradient is nonzero at an available sample")
    miss = state.mask.missing_indices
    x = state.x.copy()
    x[miss] = x[miss] - mu * E[miss]
    return replace(state, x=_readonly(x), iteration=state.iteration + 1)


def reconstruct(observed, mask: SamplingMask, config: Optional[GradientConfig] = None,
                reference=None) -> tuple[np.ndarray, ConvergenceTrace]:
    """Run the full reconstruction loop.

    Parameters
    ----------
    observed : array_like
        Length-N signal; values at missing indices are ignored.
    mask : SamplingMask
        Which samples are missing.
    config : GradientConfig, optional
        Defaults to :class:`GradientConfig()`.
    reference : array_like, optional
        Clean signal used for the MAE column of the trace.

    Returns
    -------
    x : numpy.ndarray
        Final iterate.
    trace : ConvergenceTrace
        ``max_iterations + 1`` rows unless ``config.min_d`` stopped early.

    Raises
    ------
    DivergenceError
        If an iterate contains NaN or Inf.
    """
    config = config or GradientConfig()
    state = initialize(observed, mask, config)
    ref = None
    if reference is not None:
        ref = as_signal(reference, name="reference")
        if ref.size != state.x.size:
            raise ValueError(f"reference length {ref.size} does not match signal length {state.x.size}")
    if mask.num_missing == mask.n:
        warnings.warn("every sample is missing; the result will be near zero", RuntimeWarning, stacklevel=2)

    trace = ConvergenceTrace()
    twiddles(state.x.size)  # warm the cache outside the loop

    def record(st: ReconstructionState):
        trace.rows.append(TraceRow(
            iteration=st.iteration,
            measure=concentration_measure(forward(st.x), config.order),
            mae=None if ref is None else mae(st.x, ref),
            d=st.current_d,
            mu=st.current_mu,
        ))

    record(state)
    for i in range(config.max_iterations):
        if config.min_d is not None and state.current_d < config.min_d:
            break
        E = estimate_gradient(state, config.order, state.current_d)
        state = apply_step(state, E, state.current_mu)
        if not np.all(np.isfinite(state.x)):
            raise DivergenceError(state.iteration)
        state = replace(state, current_d=config.d_at(i + 1), current_mu=config.mu_at(i + 1))
        record(state)
    return np.array(state.x), trace


def brute_force_single_sample(observed, mask: SamplingMask, order: float = 1.0,
                              amplitude_bound: float = 5.0, grid_step: float = 0.01) -> float:
    """Exhaustive grid search for one missing sample.

    Scans ``v`` over ``[-amplitude_bound, amplitude_bound]`` in steps of
    ``grid_step`` and returns the value minimising the concentration measure.
    Intended as a cross-check for :func:`reconstruct`, not for production use.
    """
    if mask.num_missing != 1:
        raise ValueError(f"brute-force search needs exactly one missing sample, got {mask.num_missing}")
    if not grid_step > 0:
        raise ValueError(f"grid_step must be > 0, got {grid_step}")
    obs = as_signal(observed, name="observed")
    if mask.n != obs.size:
        raise ValueError(f"mask length {mask.n} does not match signal length {obs.size}")
    k = mask.missing[0]
    x = obs.copy()
    x[k] = 0.0
    steps = int(np.floor(2 * amplitude_bound / grid_step + 1e-9))
    grid = -amplitude_bound + grid_step * np.arange(steps + 1)
    S = forward(x)
    col = twiddles(obs.size)[:, k]
    mag = np.abs(S[:, None] + col[:, None] * grid[None, :])
    if order != 1:
        mag = mag ** (1.0 / order)
    return float(grid[np.argmin(mag.mean(axis=0))])
