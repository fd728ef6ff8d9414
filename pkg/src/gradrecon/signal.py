"""Test signals, sampling masks, noise injection and quality metrics.

Signals are plain 1-D ``float64`` numpy arrays.  Anything accepting a signal
runs it through :func:`as_signal`, which enforces the length and finiteness
constraints and returns a read-only copy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "InfiniteSNRError",
    "NoiseSpec",
    "SamplingMask",
    "add_noise",
    "as_signal",
    "generate_test_signal",
    "mae",
    "random_mask",
    "rng_for",
    "snr_db",
]

# Independent RNG streams derived from one user seed.
MASK_STREAM = 0
NOISE_STREAM = 1


class InfiniteSNRError(ArithmeticError):
    """Raised by :func:`snr_db` when the error energy is exactly zero."""


def rng_for(seed: int, stream: int) -> np.random.Generator:
    """Return a generator for ``stream`` of ``seed``.

    Masks and noise draw from different streams of the same seed, so
    changing how many noise samples are drawn never shifts a mask.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def as_signal(samples, *, name: str = "signal") -> np.ndarray:
    """Validate ``samples`` as a real signal and return a read-only float copy."""
    x = np.array(samples, dtype=float, copy=True)
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {x.shape}")
    if x.size < 2:
        raise ValueError(f"{name} must have at least 2 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains NaN or Inf")
    x.flags.writeable = False
    return x


@dataclass(frozen=True)
class SamplingMask:
    """Split of ``range(n)`` into missing and available indices.

    ``missing`` is stored sorted and de-duplicated; construct through
    :meth:`from_missing` or :meth:`from_available` to get that normalisation.
    """

    n: int
    missing: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"mask length must be positive, got {self.n}")
        if list(self.missing) != sorted(set(self.missing)):
            raise ValueError("missing indices must be distinct and sorted")
        if self.missing and (self.missing[0] < 0 or self.missing[-1] >= self.n):
            raise ValueError(f"missing indices must lie in [0, {self.n})")

    @classmethod
    def from_missing(cls, n: int, missing: Iterable[int]) -> "SamplingMask":
        idx = sorted({int(i) for i in missing})
        return cls(int(n), tuple(idx))

    @classmethod
    def from_available(cls, available: Sequence[bool]) -> "SamplingMask":
        flags = np.asarray(available, dtype=bool)
        return cls(flags.size, tuple(int(i) for i in np.flatnonzero(~flags)))

    @property
    def missing_indices(self) -> np.ndarray:
        return np.array(self.missing, dtype=np.intp)

    @property
    def available_indices(self) -> np.ndarray:
        return np.flatnonzero(self.available)

    @property
    def available(self) -> np.ndarray:
        """Boolean vector, True where the sample is known."""
        flags = np.ones(self.n, dtype=bool)
        flags[list(self.missing)] = False
        return flags

    @property
    def num_missing(self) -> int:
        return len(self.missing)


@dataclass(frozen=True)
class NoiseSpec:
    variance: float
    seed: int

    def __post_init__(self):
        if not self.variance >= 0:
            raise ValueError(f"noise variance must be >= 0, got {self.variance}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


def generate_test_signal(n: int, components: Sequence[tuple[float, int]]) -> np.ndarray:
    """Sum of integer-cycle sinusoids sampled at ``t = 0 .. n-1``.

    Parameters
    ----------
    n : int
        Number of samples.
    components : sequence of (amplitude, cycles)
        Each term contributes ``amplitude * sin(2*pi*cycles*t/n)``.

    Returns
    -------
    numpy.ndarray
        Read-only length-``n`` signal.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    t = np.arange(n)
    s = np.zeros(n)
    for amplitude, cycles in components:
        if cycles != int(cycles) or not 0 <= cycles < n / 2:
            raise ValueError(
                f"cycles={cycles} must be an integer in [0, {n}/2); "
                "higher values alias onto another DFT bin"
            )
        s += amplitude * np.sin(2 * np.pi * int(cycles) * t / n)
    return as_signal(s)


def random_mask(n: int, num_missing: int, seed: int) -> SamplingMask:
    """Pick ``num_missing`` indices uniformly without replacement."""
    if not 0 <= num_missing <= n:
        raise ValueError(f"num_missing must be in [0, {n}], got {num_missing}")
    rng = rng_for(seed, MASK_STREAM)
    picked = rng.choice(n, size=num_missing, replace=False)
    return SamplingMask.from_missing(n, picked.tolist())


def add_noise(signal, spec: NoiseSpec) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise of variance ``spec.variance``.

    The draw is ``sqrt(variance) * z`` with ``z`` standard normal from the
    seed's noise stream, so the same seed gives proportional noise at every
    variance.
    """
    x = as_signal(signal)
    if spec.variance == 0:
        return x
    z = rng_for(spec.seed, NOISE_STREAM).standard_normal(x.size)
    return as_signal(x + np.sqrt(spec.variance) * z)


def mae(a, b) -> float:
    """Mean absolute error ``mean(|a - b|)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a - b)))


def snr_db(reference, test) -> float:
    """Signal-to-noise ratio of ``test`` against ``reference`` in dB.

    Raises
    ------
    InfiniteSNRError
        If ``test`` equals ``reference`` exactly.
    """
    reference = np.asarray(reference, dtype=float)
    test = np.asarray(test, dtype=float)
    if reference.shape != test.shape:
        raise ValueError(f"length mismatch: {reference.shape} vs {test.shape}")
    err = np.sum((reference - test) ** 2)
    if err == 0:
        raise InfiniteSNRError("zero error energy: SNR is infinite")
    return float(10 * np.log10(np.sum(reference**2) / err))
