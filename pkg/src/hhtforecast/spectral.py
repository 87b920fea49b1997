"""Analytic signals and instantaneous amplitude/frequency via FFT masking.

The analytic signal is built in the frequency domain: zero the negative
bins, double the positive ones, keep DC and Nyquist. Inputs whose length is
not a power of two are zero-padded to the next power, transformed, and
trimmed, so the raw transform stays radix-2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DataError

MIN_ANALYTIC_LEN = 4
MIN_ATTRIBUTE_LEN = 16


@dataclass(frozen=True)
class InstAttributes:
    """Per-sample instantaneous attributes of one component.

    amplitude : |analytic signal|, in signal units, >= 0.
    frequency : d(phase)/dt / (2*pi), in cycles per sample; raw central
        differences, one-sided at the ends, no smoothing.
    valid_range : (start, end) half-open index range of interior samples
        away from transform edge effects.
    """

    amplitude: np.ndarray
    frequency: np.ndarray
    valid_range: tuple[int, int]

    def interior(self, x: np.ndarray) -> np.ndarray:
        lo, hi = self.valid_range
        return x[lo:hi]


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@lru_cache(maxsize=32)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    j = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev = (rev << 1) | ((j >> b) & 1)
    return rev


def fft(x: np.ndarray) -> np.ndarray:
    """Radix-2 decimation-in-time FFT (unnormalized forward transform).

    Requires a power-of-two length; callers that need arbitrary lengths
    zero-pad (see analytic_signal).
    """
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 1:
        raise DataError(f"fft needs a 1-D array, got shape {a.shape}")
    n = a.size
    if not _is_pow2(n):
        raise DataError(f"fft length must be a power of two, got {n}")
    if n == 1:
        return a.copy()

    a = a[_bit_reversal(n)].copy()
    half = 1
    while half < n:
        step = 2 * half
        tw = np.exp(-2j * np.pi * np.arange(half) / step)
        blocks = a.reshape(-1, step)
        u = blocks[:, :half].copy()
        v = blocks[:, half:] * tw
        blocks[:, :half] = u + v
        blocks[:, half:] = u - v
        half = step
    return a


def ifft(x: np.ndarray) -> np.ndarray:
    """Inverse of fft, same power-of-two constraint."""
    a = np.asarray(x, dtype=np.complex128)
    return np.conj(fft(np.conj(a))) / a.size


def analytic_signal(x: np.ndarray) -> np.ndarray:
    """Complex signal whose real part is x and imaginary part its Hilbert transform."""
    xr = np.asarray(x, dtype=np.float64)
    if xr.ndim != 1 or xr.size < MIN_ANALYTIC_LEN:
        raise DataError(f"analytic_signal needs length >= {MIN_ANALYTIC_LEN}, got {xr.size}")
    n = xr.size
    m = 1 << (n - 1).bit_length()
    padded = np.zeros(m, dtype=np.float64)
    padded[:n] = xr

    spec = fft(padded)
    weights = np.zeros(m)
    weights[0] = 1.0
    weights[m // 2] = 1.0
    weights[1 : m // 2] = 2.0
    z = ifft(spec * weights)
    return z[:n]


def inst_attributes(imf: np.ndarray, valid_frac: float = 0.05) -> InstAttributes:
    """Instantaneous amplitude and frequency of one IMF.

    Amplitude is the modulus of the analytic signal; frequency is the
    central difference of the unwrapped phase divided by 2*pi (one-sided at
    the ends). Frequencies are reported raw and may be negative for inputs
    that are not well-formed IMFs. valid_range marks the samples at least
    ceil(valid_frac * n) away from each end.
    """
    x = np.asarray(imf, dtype=np.float64)
    if x.size < MIN_ATTRIBUTE_LEN:
        raise DataError(f"inst_attributes needs length >= {MIN_ATTRIBUTE_LEN}, got {x.size}")
    if not 0 <= valid_frac < 0.5:
        raise DataError(f"valid_frac must be in [0, 0.5), got {valid_frac}")

    z = analytic_signal(x)
    amplitude = np.abs(z)
    phase = np.unwrap(np.angle(z))
    frequency = np.gradient(phase) / (2.0 * np.pi)

    margin = int(np.ceil(valid_frac * x.size))
    return InstAttributes(
        amplitude=amplitude,
        frequency=frequency,
        valid_range=(margin, x.size - margin),
    )
