import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from zfropm.units import (
    CONSTANTS,
    N_AMAGAT,
    RateConvention,
    RateValue,
    amagat_to_density,
    celsius_to_kelvin,
    density_to_amagat,
    kelvin_to_celsius,
    rate_convert,
)

rates = st.floats(min_value=0.0, max_value=1e9, allow_nan=False)


def test_constants_match_codata():
    assert CONSTANTS.r_e == pytest.approx(oracles.RE, rel=1e-9)
    assert CONSTANTS.k_B == pytest.approx(oracles.KB, rel=1e-12)
    assert CONSTANTS.hbar == pytest.approx(oracles.HBAR, rel=1e-9)
    assert CONSTANTS.amu == pytest.approx(oracles.AMU, rel=1e-9)


def test_cyclic_value_of_spin_exchange():
    r = RateValue(111.2, RateConvention.CYCLIC)
    assert r.per_second == pytest.approx(698.69, rel=1e-4)


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        RateValue(-1.0)


@given(rates)
def test_rate_round_trip(x):
    r = RateValue(x)
    back = rate_convert(rate_convert(r, RateConvention.CYCLIC), RateConvention.EVENTS)
    assert back.value == pytest.approx(x, rel=1e-12, abs=1e-300)


@given(rates)
def test_cyclic_is_events_over_two_pi(x):
    assert RateValue(x).cyclic == pytest.approx(x / (2 * math.pi), rel=1e-12, abs=1e-300)


def test_amagat():
    assert amagat_to_density(1.0) == N_AMAGAT
    assert density_to_amagat(amagat_to_density(0.75)) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        amagat_to_density(-0.1)


def test_temperature():
    assert celsius_to_kelvin(96.0) == pytest.approx(369.15)
    assert kelvin_to_celsius(369.15) == pytest.approx(96.0)
    with pytest.raises(ValueError):
        celsius_to_kelvin(-300.0)
    with pytest.raises(ValueError):
        kelvin_to_celsius(0.0)
