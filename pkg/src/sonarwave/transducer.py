"""Transmit-chain frequency response simulation and replica evaluation.

Models a resonant projector/receive chain as a frequency response, drives
peak-normalized waveforms through it, and evaluates the resulting replica
waveforms ("TRW"s) for energy efficiency and ambiguity-shape fidelity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.signal import hilbert

from .ambiguity import compare_af  # re-exported: part of this module's API
from .analysis import energy_efficiency
from .signal_core import ParameterError, SampledSignal
from .waveforms import WaveformSpec, generate

__all__ = [
    "FormatError",
    "TransducerResponse",
    "make_response",
    "load_response_table",
    "equalize",
    "apply_response",
    "peak_normalized",
    "trw_report",
    "compare_af",
]

# Out-of-band magnitude slope, dB per octave.
_ROLLOFF_DB_PER_OCTAVE = 12.0

# Dense evaluation grid size for the parametric model.
_GRID_N = 4097


class FormatError(ValueError):
    """Raised for malformed or insufficient response tables."""


@dataclass(frozen=True)
class TransducerResponse:
    """Sampled transmit-chain frequency response.

    ``freqs``/``mag_db``/``phase_rad`` hold the stored curve; queries
    outside the stored grid continue at the fixed dB-per-octave rolloff.
    ``peak_gain_db`` is never positive: the chain is peak-power limited
    and referenced to its own maximum.
    """

    mode: str
    f_r: float
    band: tuple[float, float]
    ripple_db: float
    freqs: np.ndarray
    mag_db: np.ndarray
    phase_rad: np.ndarray
    flags: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "freqs", np.asarray(self.freqs, dtype=float))
        object.__setattr__(self, "mag_db", np.asarray(self.mag_db, dtype=float))
        object.__setattr__(
            self, "phase_rad", np.asarray(self.phase_rad, dtype=float)
        )

    @property
    def peak_gain_db(self) -> float:
        return float(np.max(self.mag_db))

    def in_band_ripple(self) -> float:
        """Measured max - min magnitude over the operational band."""
        lo, hi = self.band
        sel = (self.freqs >= lo) & (self.freqs <= hi)
        if not np.any(sel):
            # Sparse table (e.g. the transparent zero-ripple model):
            # interpolate the curve across the band instead.
            m = self.magnitude_at(np.linspace(lo, hi, 1025))
        else:
            m = self.mag_db[sel]
        return float(m.max() - m.min())

    def magnitude_at(self, f) -> np.ndarray:
        """Magnitude in dB at arbitrary nonnegative frequencies."""
        f = np.asarray(f, dtype=float)
        out = np.interp(f, self.freqs, self.mag_db)
        f_lo, f_hi = self.freqs[0], self.freqs[-1]
        with np.errstate(divide="ignore"):
            below = f < f_lo
            out = np.where(
                below,
                self.mag_db[0]
                - _ROLLOFF_DB_PER_OCTAVE
                * np.log2(np.maximum(f_lo / np.maximum(f, 1e-300), 1.0)),
                out,
            )
            above = f > f_hi
            out = np.where(
                above,
                self.mag_db[-1]
                - _ROLLOFF_DB_PER_OCTAVE * np.log2(np.maximum(f / f_hi, 1.0)),
                out,
            )
        return out

    def response_at(self, f) -> np.ndarray:
        """Complex response at arbitrary nonnegative frequencies."""
        f = np.asarray(f, dtype=float)
        mag = 10.0 ** (self.magnitude_at(f) / 20.0)
        phase = np.interp(f, self.freqs, self.phase_rad)
        # Phase beyond the stored grid continues linearly (constant group
        # delay), using the end-segment slope.
        for edge, sl in ((0, slice(0, 2)), (-1, slice(-2, None))):
            fe = self.freqs[edge]
            slope = np.diff(self.phase_rad[sl])[0] / np.diff(self.freqs[sl])[0]
            mask = f < fe if edge == 0 else f > fe
            phase = np.where(
                mask, self.phase_rad[edge] + slope * (f - fe), phase
            )
        return mag * np.exp(1j * phase)


def _second_order_phase(f: np.ndarray, f_r: float, band) -> np.ndarray:
    """Phase of a unit second-order resonance matched to the band width."""
    zeta = (band[1] - band[0]) / (2.0 * f_r)
    r = f / f_r
    return -np.arctan2(2.0 * zeta * r, 1.0 - r**2)


def make_response(
    mode: str,
    f_r: float,
    band: tuple[float, float],
    ripple_db: float,
    table_path: Optional[str] = None,
) -> TransducerResponse:
    """Build a transmit-chain response.

    Parametric mode: concave quadratic magnitude (dB) peaking at ``f_r``,
    scaled so the in-band max - min equals ``ripple_db``, with fixed
    dB-per-octave rolloff outside the band and a second-order phase.
    Tabulated mode: load the curve from a CSV of (freq_hz, mag_db,
    phase_rad) rows via :func:`load_response_table`.
    """
    f_lo, f_hi = band
    if not f_lo < f_r < f_hi:
        raise ParameterError("resonance must lie inside the band")
    if ripple_db < 0:
        raise ParameterError("ripple_db must be nonnegative")
    if mode == "tabulated":
        if table_path is None:
            raise ParameterError("tabulated mode requires table_path")
        return load_response_table(table_path, f_r=f_r, band=band)
    if mode != "parametric":
        raise ParameterError(f"unknown response mode {mode!r}")

    freqs = np.linspace(f_lo / 4.0, 4.0 * f_hi, _GRID_N)
    if ripple_db == 0:
        # Zero ripple models a transparent chain: unit gain, zero phase,
        # at every frequency the drive can contain.
        return TransducerResponse(
            mode="parametric",
            f_r=f_r,
            band=(f_lo, f_hi),
            ripple_db=0.0,
            freqs=np.array([0.0, 1e12]),
            mag_db=np.zeros(2),
            phase_rad=np.zeros(2),
        )
    half_width = max(f_hi - f_r, f_r - f_lo)
    mag = -ripple_db * ((freqs - f_r) / half_width) ** 2
    # Beyond the band the quadratic hands off to the octave rolloff.
    edge_lo = -ripple_db * ((f_lo - f_r) / half_width) ** 2
    edge_hi = -ripple_db * ((f_hi - f_r) / half_width) ** 2
    below = freqs < f_lo
    mag[below] = edge_lo - _ROLLOFF_DB_PER_OCTAVE * np.log2(f_lo / freqs[below])
    above = freqs > f_hi
    mag[above] = edge_hi - _ROLLOFF_DB_PER_OCTAVE * np.log2(freqs[above] / f_hi)
    phase = _second_order_phase(freqs, f_r, band)
    return TransducerResponse(
        mode="parametric",
        f_r=f_r,
        band=(f_lo, f_hi),
        ripple_db=ripple_db,
        freqs=freqs,
        mag_db=mag,
        phase_rad=phase,
    )


def load_response_table(
    path, f_r: float, band: tuple[float, float]
) -> TransducerResponse:
    """Read a (freq_hz, mag_db, phase_rad) CSV into a response."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if i == 0 and not _is_number(row[0]):
                continue  # header line
            if len(row) != 3:
                raise FormatError(f"row {i}: expected 3 columns, got {len(row)}")
            try:
                rows.append(tuple(float(x) for x in row))
            except ValueError as exc:
                raise FormatError(f"row {i}: non-numeric value ({exc})")
    if len(rows) < 2:
        raise FormatError("response table needs at least 2 rows")
    arr = np.array(sorted(rows))
    freqs, mag, phase = arr[:, 0], arr[:, 1], arr[:, 2]
    if np.any(np.diff(freqs) <= 0):
        raise FormatError("response table frequencies must be distinct")
    if band[0] < freqs[0] or band[1] > freqs[-1]:
        raise FormatError("operational band extends outside the table")
    mag = mag - mag.max()  # peak-power reference
    sel = (freqs >= band[0]) & (freqs <= band[1])
    ripple = float(mag[sel].max() - mag[sel].min())
    return TransducerResponse(
        mode="tabulated",
        f_r=f_r,
        band=band,
        ripple_db=ripple,
        freqs=freqs,
        mag_db=mag,
        phase_rad=phase,
    )


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def equalize(
    resp: TransducerResponse, target_ripple_db: float
) -> TransducerResponse:
    """Flatten the in-band magnitude to the target ripple by attenuation.

    Components above (in-band minimum + target) are clipped down; nothing
    is ever amplified and out-of-band magnitude is untouched.  A target at
    or above the current ripple is a no-op, flagged on the result.
    """
    if target_ripple_db < 0:
        raise ParameterError("target_ripple_db must be nonnegative")
    current = resp.in_band_ripple()
    if target_ripple_db >= current:
        return replace(
            resp, flags=resp.flags + ("equalize: no-op, target >= current",)
        )
    lo, hi = resp.band
    sel = (resp.freqs >= lo) & (resp.freqs <= hi)
    ceiling = resp.mag_db[sel].min() + target_ripple_db
    mag = resp.mag_db.copy()
    mag[sel] = np.minimum(mag[sel], ceiling)
    return replace(
        resp,
        mag_db=mag,
        ripple_db=target_ripple_db,
        flags=resp.flags + ("equalized",),
    )


def apply_response(
    sig: SampledSignal, resp: TransducerResponse
) -> SampledSignal:
    """Drive a waveform through the chain; returns the analytic TRW.

    The real drive signal is filtered by the response in the frequency
    domain and the output converted back to its analytic form.  The
    operation is linear: the caller is expected to peak-normalize the
    drive first (the peak-power-limit convention; see peak_normalized).
    Output energy is NOT renormalized -- it reflects the waveform's taper,
    spectral containment, and the chain response jointly.
    """
    x = sig.samples.real
    if np.max(np.abs(x)) == 0:
        raise ParameterError("cannot drive an all-zero signal")
    n = len(x)
    spec = np.fft.rfft(x)
    f = np.fft.rfftfreq(n, d=1.0 / sig.sample_rate)
    if f[-1] < resp.freqs[0] or f[1] > resp.freqs[-1]:
        raise FormatError("signal band lies entirely outside the response")
    y = np.fft.irfft(spec * resp.response_at(f), n)
    return SampledSignal(
        samples=hilbert(y),
        sample_rate=sig.sample_rate,
        t0=sig.t0,
        energy_normalized=False,
    )


def peak_normalized(sig: SampledSignal) -> SampledSignal:
    """Scale so the real drive signal peaks at unit amplitude."""
    peak = np.max(np.abs(sig.samples.real))
    if peak == 0:
        raise ParameterError("cannot peak-normalize an all-zero signal")
    return sig.scaled(1.0 / peak)


def trw_report(
    specs: Sequence[tuple[str, WaveformSpec]],
    resp: TransducerResponse,
    reference: str,
) -> list[dict]:
    """Energy efficiency of each waveform's TRW relative to a reference.

    Every waveform is peak-normalized, driven through ``resp``, and its
    output energy compared to the reference row's:
    ``e_tilde_db = 10 log10(E_w / E_ref)``.  Row failures are recorded
    without aborting the report.
    """
    labels = [label for label, _ in specs]
    if reference not in labels:
        raise ParameterError(f"reference {reference!r} not among the specs")
    energies: dict = {}
    errors: dict = {}
    for label, sp in specs:
        try:
            drive = peak_normalized(generate(sp))
            energies[label] = apply_response(drive, resp).energy
        except (ParameterError, FormatError) as exc:
            errors[label] = str(exc)
    if reference not in energies:
        raise ParameterError(
            f"reference waveform failed: {errors[reference]}"
        )
    e_ref = energies[reference]
    rows = []
    for label, sp in specs:
        row = {"label": label, "family": sp.family}
        if label in energies:
            row["energy"] = energies[label]
            row["e_tilde_db"] = energy_efficiency(energies[label], e_ref)
            row["error"] = None
        else:
            row.update(energy=None, e_tilde_db=None, error=errors[label])
        rows.append(row)
    return rows
