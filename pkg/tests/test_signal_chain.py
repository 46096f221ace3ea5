import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zfropm.lineshape import DispersiveParams, ZfrParams, zfr_voltage
from zfropm.signal_chain import (
    LowPassSpec,
    ModulationSpec,
    Spectrum,
    TimeSeries,
    asd_estimate,
    bandwidth_3db,
    demodulated_slope,
    filter_response,
    first_harmonic,
    lockin_demodulate,
    lowpass_filter,
    simulate_measurement,
    synthesize_pd_signal,
    tone_rms,
    zfr_for_slope,
)

ZFR = ZfrParams(a=1.0, b=3.0, b0=0.0, delta_b=182e-9)


def c1_oracle(zfr, offset, amplitude):
    """(1/pi) * integral of V(offset + A cos th) cos th over a period."""
    f = lambda th: zfr_voltage(zfr, offset + amplitude * float(mp.cos(th))) * mp.cos(th)  # noqa: E731
    return float(mp.quad(f, [0, mp.pi / 2, mp.pi, 3 * mp.pi / 2, 2 * mp.pi]) / mp.pi)


@pytest.mark.parametrize("offset", [-300e-9, -91e-9, -10e-9, 0.0, 20e-9, 91e-9, 500e-9])
@pytest.mark.parametrize("amplitude", [5e-9, 18.2e-9, 91e-9, 300e-9])
def test_first_harmonic_matches_quadrature(offset, amplitude):
    got = first_harmonic(ZFR, offset, amplitude)
    ref = c1_oracle(ZFR, offset, amplitude)
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-12)


@given(st.floats(0.01, 5.0), st.floats(-3.0, 3.0))
def test_first_harmonic_is_odd_in_offset(mu, x):
    hw = ZFR.delta_b / 2
    a = first_harmonic(ZFR, x * hw, mu * hw)
    b = first_harmonic(ZFR, -x * hw, mu * hw)
    assert a == pytest.approx(-b, rel=1e-9, abs=1e-12)


def test_slope_matches_finite_difference():
    h = 1e-12
    fd = (first_harmonic(ZFR, h, 18.2e-9) - first_harmonic(ZFR, -h, 18.2e-9)) / (2 * h)
    assert demodulated_slope(ZFR, 18.2e-9) == pytest.approx(fd, rel=1e-6)


def test_zfr_for_slope_hits_target():
    z = zfr_for_slope(7.033e7, 182e-9, 18.2e-9, a=1.0)
    assert abs(demodulated_slope(z, 18.2e-9)) == pytest.approx(7.033e7, rel=1e-12)
    with pytest.raises(ValueError):
        zfr_for_slope(1.0, 1e-7, 0.0)


def test_lockin_settles_to_first_harmonic():
    fs, fm = 400e3, 2e3
    spec = LowPassSpec(1e-3, 4)
    for offset in (0.0, 30e-9, -91e-9):
        mod = ModulationSpec(fm, 18.2e-9, offset)
        pd = synthesize_pd_signal(ZFR, mod, fs, 0.06)
        x, y = lockin_demodulate(pd, fm, 0.0, spec)
        tail = x.samples[-4000:]
        ref = first_harmonic(ZFR, offset, 18.2e-9)
        assert np.mean(tail) == pytest.approx(ref, rel=1e-2, abs=1e-4 * ZFR.amplitude)
        assert abs(np.mean(y.samples[-4000:])) < 1e-3 * ZFR.amplitude


def test_quadrature_with_shifted_reference_has_positive_slope():
    fs, fm = 400e3, 2e3
    spec = LowPassSpec(1e-3, 4)
    out = []
    for offset in (-5e-9, 5e-9):
        pd = synthesize_pd_signal(ZFR, ModulationSpec(fm, 18.2e-9, offset), fs, 0.06)
        _, y = lockin_demodulate(pd, fm, -math.pi / 2, spec)
        out.append(np.mean(y.samples[-4000:]))
    assert (out[1] - out[0]) / 10e-9 == pytest.approx(-demodulated_slope(ZFR, 18.2e-9), rel=1e-2)


def test_filter_corner_and_rolloff():
    fc, f3 = bandwidth_3db(LowPassSpec(1e-3, 4))
    assert fc == pytest.approx(159.15, abs=0.01)
    assert f3 == pytest.approx(fc * math.sqrt(2 ** 0.25 - 1))
    one = LowPassSpec(1e-3, 1)
    assert 20 * math.log10(filter_response(one, fc, 5e6)) == pytest.approx(-3.0103, abs=0.01)
    spec = LowPassSpec()
    drop = 20 * math.log10(filter_response(spec, 4000, 5e6) / filter_response(spec, 2000, 5e6))
    assert drop == pytest.approx(-24.0, abs=0.5)


def test_filter_amplitude_of_sine_matches_response():
    fs, f = 50e3, 120.0
    spec = LowPassSpec()
    t = np.arange(int(fs * 1.0)) / fs
    ts = TimeSeries(fs, np.sin(2 * np.pi * f * t))
    out = lowpass_filter(ts, spec).samples[int(0.5 * fs):]
    amp = math.sqrt(2) * np.std(out)
    assert amp == pytest.approx(filter_response(spec, f, fs), rel=1e-3)


def test_filter_warns_when_undersampled():
    with pytest.warns(RuntimeWarning):
        lowpass_filter(TimeSeries(1e3, np.zeros(10)), LowPassSpec(1e-3, 1))


def test_filter_preserves_dc():
    out = lowpass_filter(TimeSeries(1e5, np.ones(20000)), LowPassSpec())
    assert out.samples[-1] == pytest.approx(1.0, rel=1e-9)


def test_white_noise_asd_level():
    fs, s = 10e3, 0.3
    rng = np.random.default_rng(1)
    ts = TimeSeries(fs, rng.standard_normal(2**18) * s)
    sp = asd_estimate(ts, 4096)
    assert np.median(sp.asd[5:-5]) ** 2 == pytest.approx(s**2 * 2 / fs, rel=0.03)


def test_parseval():
    fs = 1e3
    rng = np.random.default_rng(2)
    x = rng.standard_normal(2**16)
    sp = asd_estimate(TimeSeries(fs, x), 1024)
    assert sp.band_power(0, fs / 2) == pytest.approx(np.var(x), rel=0.03)


def test_tone_rms_recovers_sine():
    fs = 2e3
    t = np.arange(2**18) / fs
    rng = np.random.default_rng(3)
    x = 0.5 * math.sqrt(2) * np.sin(2 * np.pi * 30.0 * t) + 0.01 * rng.standard_normal(t.size)
    sp = asd_estimate(TimeSeries(fs, x), 2**15)
    assert tone_rms(sp, 30.0) == pytest.approx(0.5, rel=0.01)


def test_spectrum_validation_and_queries():
    sp = Spectrum(np.array([0.0, 1.0, 2.0]), np.array([1.0, 2.0, 3.0]), 1.0)
    assert sp.asd_at(1.0) == 2.0
    assert sp.asd_at(1.0, band=2.0) == pytest.approx(math.sqrt((1 + 4 + 9) / 3))
    with pytest.raises(ValueError):
        sp.asd_at(5.0)


def test_asd_rejects_bad_arguments():
    ts = TimeSeries(1e3, np.zeros(100))
    with pytest.raises(ValueError):
        asd_estimate(ts, 200)
    with pytest.raises(ValueError):
        asd_estimate(ts, 50, overlap=1.0)


def test_synthesis_is_seeded():
    mod = ModulationSpec()
    a = synthesize_pd_signal(ZFR, mod, 100e3, 0.01, 1e-4, seed=7)
    b = synthesize_pd_signal(ZFR, mod, 100e3, 0.01, 1e-4, seed=7)
    c = synthesize_pd_signal(ZFR, mod, 100e3, 0.01, 1e-4, seed=8)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)
    assert not a.samples.flags.writeable


def test_synthesis_rejects_modulation_above_nyquist():
    with pytest.raises(ValueError):
        synthesize_pd_signal(ZFR, ModulationSpec(frequency=6e4), 100e3, 0.01)


def test_noiseless_chain_is_modulation_harmonics_only():
    disp = DispersiveParams(6.4, 0.0, 182e-9)
    res = simulate_measurement(disp, ModulationSpec(), fs=50e3, duration=2.0, segment_length=2**15)
    sp = res.spectrum
    floor = np.median(sp.asd[(sp.freqs > 5) & (sp.freqs < 1500)])
    harmonics = [sp.asd_at(k * 2e3) for k in (1, 3)]
    assert min(harmonics) > 1e4 * floor
    # floor is far below a 1 fT/sqrt(Hz) equivalent
    assert floor / res.slope < 1e-15
    assert res.slope == pytest.approx(7.033e7, rel=1e-3)
