"""Sampling, tapering, resampling, and spectral primitives.

All signals are stored as complex analytic passband time series.  The real
transmitted signal is ``Re{s(t)}`` and is only materialized where a metric
requires it (PAPR, transducer drive).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from scipy.signal import windows


class ParameterError(ValueError):
    """Raised when an operation receives out-of-contract parameters."""


TaperKind = Literal["rectangular", "tukey", "hann"]
TaperScope = Literal["whole-pulse", "per-chip"]


@dataclass(frozen=True)
class Taper:
    """Amplitude taper description.

    ``shape_param`` is the Tukey cosine-fraction in [0, 1]; 0 degenerates to
    rectangular and 1 to Hann.  ``scope`` selects whether coded waveforms
    taper each chip individually or the whole pulse.
    """

    kind: TaperKind = "rectangular"
    shape_param: float = 0.0
    scope: TaperScope = "whole-pulse"

    def __post_init__(self):
        if self.kind not in ("rectangular", "tukey", "hann"):
            raise ParameterError(f"unknown taper kind {self.kind!r}")
        if not 0.0 <= self.shape_param <= 1.0:
            raise ParameterError(
                f"taper shape_param must be in [0, 1], got {self.shape_param}"
            )
        if self.scope not in ("whole-pulse", "per-chip"):
            raise ParameterError(f"unknown taper scope {self.scope!r}")


@dataclass(frozen=True)
class SampledSignal:
    """Complex analytic passband time series.

    Samples are taken at cell centers ``t0 + (n + 1/2)/sample_rate`` so the
    discrete energy ``sum |s|^2 / sample_rate`` is a midpoint-rule estimate
    of the continuous energy.
    """

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0
    energy_normalized: bool = False

    def __post_init__(self):
        object.__setattr__(
            self, "samples", np.asarray(self.samples, dtype=np.complex128)
        )
        if self.sample_rate <= 0:
            raise ParameterError("sample_rate must be positive")
        if self.samples.size == 0:
            raise ParameterError("samples must be nonempty")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        n = np.arange(len(self.samples))
        return self.t0 + (n + 0.5) / self.sample_rate

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) / self.sample_rate)

    def real_signal(self) -> np.ndarray:
        return self.samples.real.copy()

    def normalized(self) -> "SampledSignal":
        """Unit-energy copy (discrete energy 1 within 1e-9 relative)."""
        e = self.energy
        if e == 0:
            raise ParameterError("cannot normalize an all-zero signal")
        return replace(
            self, samples=self.samples / np.sqrt(e), energy_normalized=True
        )

    def scaled(self, factor: complex) -> "SampledSignal":
        return replace(
            self, samples=self.samples * factor, energy_normalized=False
        )


@dataclass(frozen=True)
class Spectrum:
    """Uniform frequency grid with complex amplitudes in continuous-FT units.

    Satisfies Parseval against the originating time series:
    ``sum |values|^2 * df`` equals the time-domain energy.
    """

    freqs: np.ndarray
    values: np.ndarray
    df: float

    def __post_init__(self):
        object.__setattr__(self, "freqs", np.asarray(self.freqs, dtype=float))
        object.__setattr__(
            self, "values", np.asarray(self.values, dtype=np.complex128)
        )
        if len(self.freqs) != len(self.values):
            raise ParameterError("freqs and values must have equal length")

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.df)

    def power_db(self, floor_db: float = -300.0) -> np.ndarray:
        p = np.abs(self.values) ** 2
        ref = p.max()
        with np.errstate(divide="ignore"):
            db = 10.0 * np.log10(p / ref)
        return np.maximum(db, floor_db)


def make_taper(taper: Taper, n: int) -> np.ndarray:
    """Return the length-``n`` taper window ``w[n]``.

    Rectangular returns all ones; unit-energy scaling happens at signal
    assembly, not here.
    """
    if n < 2:
        raise ParameterError("taper length must be at least 2")
    if taper.kind == "rectangular":
        return np.ones(n)
    if taper.kind == "hann":
        return windows.hann(n, sym=True)
    return windows.tukey(n, alpha=taper.shape_param, sym=True)


# Kaiser beta giving >= 80 dB image rejection for the windowed-sinc kernel.
_KAISER_BETA = 7.857
_TAPS = 32


def resample_scale(sig: SampledSignal, eta: float) -> SampledSignal:
    """Time-scale a signal: returns y with y(t) = s(eta * t).

    Band-limited interpolation with a 32-tap Kaiser-windowed sinc kernel.
    Output duration is T/eta and energy scales by 1/eta.
    """
    if not 0.5 < eta < 2.0:
        raise ParameterError(f"eta must be in (0.5, 2), got {eta}")
    if eta == 1.0:
        return sig

    fs = sig.sample_rate
    n_in = len(sig.samples)
    n_out = int(round(n_in / eta))
    # Output sample m sits at t = (t0 + (p_m + 1/2)/fs) / eta in output time,
    # i.e. reads fractional input index p_m = (m + 1/2) * eta - 1/2.
    p = (np.arange(n_out) + 0.5) * eta - 0.5
    base = np.floor(p).astype(int)
    frac = p - base

    half = _TAPS // 2
    offsets = np.arange(-half + 1, half + 1)  # 32 taps around the fraction
    # Kernel is evaluated at (offset - frac); cutoff at the lower Nyquist.
    x = offsets[None, :] - frac[:, None]
    cutoff = min(1.0, 1.0 / eta)
    kern = cutoff * np.sinc(cutoff * x)
    win_arg = x / half
    win = np.where(
        np.abs(win_arg) <= 1.0,
        np.i0(_KAISER_BETA * np.sqrt(np.maximum(0.0, 1.0 - win_arg**2)))
        / np.i0(_KAISER_BETA),
        0.0,
    )
    kern *= win

    idx = base[:, None] + offsets[None, :]
    padded = np.zeros(n_in + 2 * _TAPS, dtype=np.complex128)
    padded[_TAPS : _TAPS + n_in] = sig.samples
    gathered = padded[idx + _TAPS]
    out = np.sum(gathered * kern, axis=1)

    return SampledSignal(
        samples=out,
        sample_rate=fs,
        t0=sig.t0 / eta,
        energy_normalized=False,
    )


def spectrum_of(sig: SampledSignal, nfft: int | None = None) -> Spectrum:
    """Zero-padded FFT spectrum in continuous-FT units.

    The bin values approximate S(f) = integral s(t) exp(-j2 pi f t) dt, so
    the sample-position phase (including t0) is folded in and Parseval holds
    against the time-domain energy.
    """
    n = len(sig.samples)
    if nfft is None:
        nfft = 1 << max(int(np.ceil(np.log2(n))), 8)
    if nfft < n:
        raise ParameterError(f"nfft ({nfft}) must be >= signal length ({n})")
    fs = sig.sample_rate
    df = fs / nfft
    freqs = np.arange(nfft) * df
    vals = np.fft.fft(sig.samples, nfft) / fs
    # First sample sits at t0 + 0.5/fs, not at t = 0.
    vals *= np.exp(-2j * np.pi * freqs * (sig.t0 + 0.5 / fs))
    return Spectrum(freqs=freqs, values=vals, df=df)
