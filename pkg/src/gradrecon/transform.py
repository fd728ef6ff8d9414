"""DFT pair, single-sample spectrum updates and the concentration measure.

Forward transform is unnormalised, the inverse carries ``1/N``.  The
concentration measure adds its own ``1/N``, which fixes the scale of the
gradient and therefore the usable range of the update gain.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "concentration_measure",
    "forward",
    "inverse",
    "perturbed_measures",
    "perturbed_spectrum",
    "twiddles",
]

SYMMETRY_RTOL = 1e-12
IMAG_RESIDUE_TOL = 1e-10


def _check_order(p: float) -> float:
    p = float(p)
    if not p >= 1:
        raise ValueError(f"norm order p must be >= 1, got {p}")
    return p


@lru_cache(maxsize=16)
def twiddles(n: int) -> np.ndarray:
    """``W[k, m] = exp(-2j*pi*k*m/n)``; column ``m`` is the spectrum of an impulse at ``m``."""
    k = np.arange(n)
    # reduce k*m mod n before scaling so large products keep full precision
    W = np.exp(-2j * np.pi * (np.outer(k, k) % n) / n)
    W.flags.writeable = False
    return W


def forward(signal) -> np.ndarray:
    x = np.asarray(signal, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains NaN or Inf")
    return np.fft.fft(x)


def inverse(spectrum) -> np.ndarray:
    """Inverse DFT of a conjugate-symmetric spectrum, returned as a real signal.

    Raises ``ValueError`` when the imaginary residue exceeds ``1e-10``,
    i.e. the spectrum does not come from a real signal.
    """
    S = np.asarray(spectrum, dtype=complex)
    x = np.fft.ifft(S)
    scale = max(1.0, float(np.max(np.abs(x.real), initial=0.0)))
    residue = float(np.max(np.abs(x.imag), initial=0.0))
    if residue > IMAG_RESIDUE_TOL * scale:
        raise ValueError(
            f"spectrum is not conjugate-symmetric (imaginary residue {residue:.3g})"
        )
    return x.real.copy()


def perturbed_spectrum(base, index: int, delta: float) -> np.ndarray:
    """Spectrum after adding ``delta`` to sample ``index``, updated in O(N)."""
    S = np.asarray(base, dtype=complex)
    n = S.size
    if not 0 <= index < n:
        raise IndexError(f"index {index} outside [0, {n})")
    return S + delta * twiddles(n)[:, index]


def concentration_measure(spectrum, p: float = 1.0) -> float:
    """``(1/N) * sum_i |S(i)|**(1/p)``; at ``p = 1`` the mean spectral magnitude."""
    p = _check_order(p)
    mag = np.abs(np.asarray(spectrum, dtype=complex))
    if p != 1.0:
        mag = mag ** (1.0 / p)
    return float(np.mean(mag))


def perturbed_measures(base, indices, delta: float, p: float = 1.0) -> np.ndarray:
    """Measure of ``base`` perturbed by ``delta`` at each index, one value per index.

    Vectorised form of ``concentration_measure(perturbed_spectrum(base, i, delta))``.
    """
    p = _check_order(p)
    S = np.asarray(base, dtype=complex)
    idx = np.asarray(indices, dtype=np.intp)
    mag = np.abs(S[:, None] + delta * twiddles(S.size)[:, idx])
    if p != 1.0:
        mag = mag ** (1.0 / p)
    return mag.mean(axis=0)
