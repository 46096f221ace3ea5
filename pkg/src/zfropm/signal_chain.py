"""Simulated measurement chain and its spectral analysis.

Field modulation -> ZFR photodetector voltage -> lock-in mixing -> cascaded
single-pole low-pass -> sampled output, then a Welch amplitude spectral
density and its conversion to an equivalent magnetic noise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from .lineshape import DispersiveParams, ZfrParams, slope_at_center, zfr_voltage

DEFAULT_SAMPLE_RATE = 5e6
DEFAULT_DURATION = 0.5
DEFAULT_SEGMENT = 2**18


@dataclass(frozen=True)
class TimeSeries:
    sample_rate: float
    samples: np.ndarray
    start_time: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("a time series needs at least two samples")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) / self.sample_rate

    def with_samples(self, samples) -> "TimeSeries":
        return TimeSeries(self.sample_rate, samples, self.start_time, self.seed)


@dataclass(frozen=True)
class LowPassSpec:
    time_constant: float = 1e-3  # s
    stages: int = 4  # 6 dB/oct each

    def __post_init__(self):
        if self.time_constant <= 0:
            raise ValueError("time constant must be positive")
        if self.stages < 1:
            raise ValueError("need at least one filter stage")


@dataclass(frozen=True)
class ModulationSpec:
    frequency: float = 2e3  # Hz
    amplitude: float = 18.2e-9  # T, peak
    offset: float = 0.0  # T, static field along the modulation axis
    phase: float = 0.0  # rad

    def __post_init__(self):
        if self.frequency <= 0:
            raise ValueError("modulation frequency must be positive")
        if self.amplitude < 0:
            raise ValueError("modulation amplitude must be non-negative")


@dataclass(frozen=True)
class Spectrum:
    """One-sided amplitude spectral density."""

    freqs: np.ndarray  # Hz
    asd: np.ndarray  # units/sqrt(Hz)
    resolution_bandwidth: float  # Hz, bin spacing
    enbw: float = field(default=0.0)  # Hz, equivalent noise bandwidth of the window

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        a = np.asarray(self.asd, dtype=float)
        if f.shape != a.shape or f.ndim != 1:
            raise ValueError("frequency and ASD arrays must be 1-D and equally long")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequency bins must be strictly increasing")
        if np.any(a < 0):
            raise ValueError("ASD values must be non-negative")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "asd", a)

    @property
    def psd(self) -> np.ndarray:
        return self.asd**2

    def asd_at(self, f: float, band: float | None = None) -> float:
        """ASD at ``f``; with ``band`` the PSD is averaged over f +- band/2 first."""
        if not self.freqs[0] <= f <= self.freqs[-1]:
            raise ValueError(f"{f} Hz outside spectrum range [{self.freqs[0]}, {self.freqs[-1]}] Hz")
        if band is None:
            return float(np.sqrt(np.interp(f, self.freqs, self.psd)))
        sel = np.abs(self.freqs - f) <= band / 2.0
        if not np.any(sel):
            raise ValueError(f"no bins within {band} Hz of {f} Hz")
        return float(np.sqrt(np.mean(self.psd[sel])))

    def band_power(self, f_lo: float, f_hi: float) -> float:
        sel = (self.freqs >= f_lo) & (self.freqs <= f_hi)
        return float(np.sum(self.psd[sel]) * self.resolution_bandwidth)


def pd_noise_for_output_asd(output_asd: float) -> float:
    """Photodetector white-noise ASD that reads ``output_asd`` after demodulation.

    Mixing with 2 cos(wt) doubles the white-noise PSD, so the input level is
    the output level over sqrt(2).
    """
    return output_asd / math.sqrt(2.0)


def synthesize_pd_signal(zfr: ZfrParams, mod: ModulationSpec, fs: float = DEFAULT_SAMPLE_RATE,
                         duration: float = DEFAULT_DURATION, noise_asd: float | None = None,
                         tones=(), seed: int | None = None) -> TimeSeries:
    """Photodetector voltage for a modulated field swept through the resonance.

    ``noise_asd`` is the one-sided white-noise ASD added to the voltage, V/sqrt(Hz).
    ``tones`` is an iterable of (frequency Hz, field rms T) added to the field.
    """
    n = int(round(duration * fs))
    if n < 2:
        raise ValueError("duration * sample rate must give at least two samples")
    if mod.frequency >= fs / 2:
        raise ValueError("modulation frequency must be below Nyquist")
    t = np.arange(n) / fs
    b = mod.offset + mod.amplitude * np.cos(2.0 * np.pi * mod.frequency * t + mod.phase)
    for f_tone, b_rms in tones:
        if f_tone <= 0 or f_tone >= fs / 2 or b_rms < 0:
            raise ValueError(f"invalid tone ({f_tone} Hz, {b_rms} T)")
        b = b + math.sqrt(2.0) * b_rms * np.sin(2.0 * np.pi * f_tone * t)
    v = zfr_voltage(zfr, b)
    if noise_asd:
        if noise_asd < 0:
            raise ValueError("noise ASD must be non-negative")
        rng = np.random.default_rng(seed)
        # one-sided ASD A of white noise at rate fs has per-sample std A sqrt(fs/2)
        v = v + rng.standard_normal(n) * noise_asd * math.sqrt(fs / 2.0)
    return TimeSeries(fs, v, 0.0, seed)


def _stage_alpha(spec: LowPassSpec, fs: float) -> float:
    return math.exp(-1.0 / (fs * spec.time_constant))


def lowpass_filter(ts: TimeSeries, spec: LowPassSpec) -> TimeSeries:
    """Cascade of identical exact-ZOH single-pole sections, starting from rest."""
    if ts.sample_rate * spec.time_constant < 10:
        warnings.warn(
            f"fs * tau = {ts.sample_rate * spec.time_constant:.3g} < 10; "
            "discrete filter departs from its analogue response",
            RuntimeWarning,
            stacklevel=2,
        )
    alpha = _stage_alpha(spec, ts.sample_rate)
    y = ts.samples
    for _ in range(spec.stages):
        y = sps.lfilter([1.0 - alpha], [1.0, -alpha], y)
    return ts.with_samples(y)


def filter_response(spec: LowPassSpec, f, fs: float):
    """|H(f)| of the discrete cascade at sample rate ``fs``."""
    alpha = _stage_alpha(spec, fs)
    z_inv = np.exp(-2j * np.pi * np.asarray(f, dtype=float) / fs)
    h = ((1.0 - alpha) / (1.0 - alpha * z_inv)) ** spec.stages
    out = np.abs(h)
    return float(out) if np.ndim(out) == 0 else out


def lockin_demodulate(ts: TimeSeries, ref_freq: float, ref_phase: float = 0.0,
                      spec: LowPassSpec = LowPassSpec()) -> tuple[TimeSeries, TimeSeries]:
    """In-phase and quadrature outputs, LPF(2 v cos) and LPF(2 v sin).

    The factor 2 makes a phase-aligned tone of amplitude A read A.
    """
    if not 0 < ref_freq < ts.sample_rate / 2:
        raise ValueError("reference frequency must lie in (0, Nyquist)")
    theta = 2.0 * np.pi * ref_freq * ts.times() + ref_phase
    x = lowpass_filter(ts.with_samples(2.0 * ts.samples * np.cos(theta)), spec)
    y = lowpass_filter(ts.with_samples(2.0 * ts.samples * np.sin(theta)), spec)
    return x, y


def asd_estimate(ts: TimeSeries, segment_length: int = DEFAULT_SEGMENT, overlap: float = 0.5,
                 window: str = "hann") -> Spectrum:
    """One-sided Welch ASD, density-normalised (white noise of std s reads s sqrt(2/fs))."""
    if segment_length < 2:
        raise ValueError("segment too short")
    if segment_length > len(ts):
        raise ValueError(f"segment length {segment_length} exceeds series length {len(ts)}")
    if not 0 <= overlap < 1:
        raise ValueError("overlap fraction must lie in [0, 1)")
    f, psd = sps.welch(
        ts.samples,
        fs=ts.sample_rate,
        window=window,
        nperseg=segment_length,
        noverlap=int(segment_length * overlap),
        detrend="constant",
        scaling="density",
        return_onesided=True,
    )
    w = sps.get_window(window, segment_length)
    enbw = ts.sample_rate * np.sum(w**2) / np.sum(w) ** 2
    return Spectrum(f, np.sqrt(np.maximum(psd, 0.0)), ts.sample_rate / segment_length, enbw)


def equivalent_magnetic_noise(spectrum: Spectrum, disp: DispersiveParams, f_query: float,
                              band: float | None = None) -> float:
    """Voltage ASD at ``f_query`` over the dispersive slope 2u/delta_b, T/sqrt(Hz)."""
    return spectrum.asd_at(f_query, band) / slope_at_center(disp)


def bandwidth_3db(spec: LowPassSpec) -> tuple[float, float]:
    """(single-section corner, cascade -3 dB frequency) in Hz."""
    fc = 1.0 / (2.0 * math.pi * spec.time_constant)
    return fc, fc * math.sqrt(2.0 ** (1.0 / spec.stages) - 1.0)


def first_harmonic(zfr: ZfrParams, offset, amplitude: float):
    """cos-coefficient c1 of V(offset + amplitude cos th) for the ZFR Lorentzian.

    Closed form from the generating function of 1/(a + b cos th); this is what
    the in-phase lock-in output settles to with the reference aligned to the
    modulation.
    """
    hw = zfr.delta_b / 2.0
    x0 = (np.asarray(offset, dtype=float) - zfr.b0) / hw
    mu = amplitude / hw
    if mu == 0:
        return np.zeros_like(x0) if np.ndim(x0) else 0.0
    a = 1.0 + 1j * x0
    s = np.sqrt(a * a + mu * mu)
    r = (a - s) / (1j * mu)
    flip = np.abs(r) > 1.0
    s = np.where(flip, -s, s)
    c1 = (2j / mu) * (a / s - 1.0)
    out = zfr.amplitude * np.real(c1)
    return float(out) if np.ndim(out) == 0 else out


def demodulated_slope(zfr: ZfrParams, amplitude: float) -> float:
    """d(first harmonic)/d(offset) at the line centre, V/T (negative for a peak)."""
    hw = zfr.delta_b / 2.0
    mu = amplitude / hw
    return -zfr.amplitude * 2.0 * mu / (1.0 + mu * mu) ** 1.5 / hw


def zfr_for_slope(slope: float, delta_b: float, amplitude: float, a: float = 0.0,
                  b0: float = 0.0) -> ZfrParams:
    """ZFR parameters whose demodulated slope magnitude at the centre is ``slope``."""
    if amplitude <= 0:
        raise ValueError("modulation amplitude must be positive to produce a slope")
    unit = ZfrParams(a=0.0, b=1.0, b0=b0, delta_b=delta_b)
    height = abs(slope) / abs(demodulated_slope(unit, amplitude))
    return ZfrParams(a=a, b=a + height, b0=b0, delta_b=delta_b)


def tone_rms(spectrum: Spectrum, f_tone: float, halfwidth: float | None = None,
             floor_from: float | None = None) -> float:
    """RMS of a spectral line: integrated PSD around ``f_tone`` less the noise floor.

    ``halfwidth`` defaults to four bins. The floor is the median PSD in the
    annulus between ``halfwidth`` and ``floor_from`` (default 3 x halfwidth).
    """
    df = spectrum.resolution_bandwidth
    halfwidth = 4.0 * df if halfwidth is None else halfwidth
    floor_from = 3.0 * halfwidth if floor_from is None else floor_from
    dist = np.abs(spectrum.freqs - f_tone)
    core = dist <= halfwidth
    ring = (dist > halfwidth) & (dist <= floor_from) & (spectrum.freqs > 0)
    floor = float(np.median(spectrum.psd[ring])) if np.any(ring) else 0.0
    power = np.sum(spectrum.psd[core] - floor) * df
    return math.sqrt(max(power, 0.0))


@dataclass(frozen=True)
class ChainResult:
    zfr: ZfrParams
    pd: TimeSeries
    in_phase: TimeSeries
    quadrature: TimeSeries  # settled part only
    spectrum: Spectrum
    slope: float  # quadrature V/T at the working point


def simulate_measurement(disp: DispersiveParams, mod: ModulationSpec, lowpass: LowPassSpec = LowPassSpec(),
                         fs: float = DEFAULT_SAMPLE_RATE, duration: float = DEFAULT_DURATION,
                         output_noise_asd: float = 0.0, tones=(), seed: int | None = None,
                         baseline: float = 1.0, settle: float = 0.01,
                         segment_length: int = DEFAULT_SEGMENT, overlap: float = 0.5) -> ChainResult:
    """Run the whole chain with the ZFR height chosen so the quadrature slope is 2u/delta_b.

    The reference is shifted by -pi/2 from the modulation so the first
    harmonic lands on the quadrature channel with a positive slope. The
    working point is ``mod.offset``; ``output_noise_asd`` is referred to the
    lock-in output. The first ``settle`` seconds are dropped before the ASD.
    """
    target = slope_at_center(disp)
    zfr = zfr_for_slope(target, disp.delta_b, mod.amplitude, a=baseline, b0=disp.b0)
    pd = synthesize_pd_signal(zfr, mod, fs, duration,
                              pd_noise_for_output_asd(output_noise_asd) if output_noise_asd else None,
                              tones, seed)
    x, y = lockin_demodulate(pd, mod.frequency, mod.phase - math.pi / 2.0, lowpass)
    skip = int(round(settle * fs))
    if len(y) - skip < 2:
        raise ValueError("settling time leaves no samples")
    q = TimeSeries(fs, y.samples[skip:], skip / fs, seed)
    seg = min(segment_length, len(q))
    return ChainResult(zfr, pd, x, q, asd_estimate(q, seg, overlap), target)
