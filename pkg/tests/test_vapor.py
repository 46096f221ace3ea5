import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from zfropm.vapor import (
    N2,
    RB85,
    RB87,
    CellGeometry,
    OperatingPoint,
    density_from_fwhm,
    diffusion_coefficient,
    fwhm_from_density,
    mean_relative_speed,
    vapor_density,
    vapor_pressure,
)

temps = st.floats(min_value=312.0, max_value=550.0)


def test_density_at_operating_point():
    assert vapor_density(RB85, oracles.T_OP) == pytest.approx(oracles.rb_density(), rel=1e-9)
    assert vapor_density(RB85, oracles.T_OP) == pytest.approx(oracles.FROZEN["n"], rel=1e-4)


def test_pressure_correlation_at_reference_point():
    # log10 P[atm] = 4.312 - 4040/T at T = 404 K gives exactly 10^-5.688 atm
    assert vapor_pressure(RB85, 404.0) == pytest.approx(10 ** (4.312 - 10.0) * 101325.0, rel=1e-12)


@pytest.mark.parametrize("T", [311.9, 550.1])
def test_out_of_range_temperature(T):
    with pytest.raises(ValueError):
        vapor_density(RB85, T)


@given(temps, temps)
def test_density_monotone_in_temperature(t1, t2):
    if t1 < t2:
        assert vapor_density(RB85, t1) < vapor_density(RB85, t2)


def test_relative_speed():
    v = mean_relative_speed(RB85.mass, RB85.mass, oracles.T_OP)
    assert v == pytest.approx(oracles.vrel(oracles.M_RB85, oracles.M_RB85), rel=1e-9)
    with pytest.raises(ValueError):
        mean_relative_speed(0.0, RB85.mass, 300.0)


@given(st.floats(min_value=1.0, max_value=600.0))
def test_speed_scales_as_sqrt_temperature(T):
    ratio = mean_relative_speed(RB85.mass, N2.mass, 4 * T) / mean_relative_speed(RB85.mass, N2.mass, T)
    assert ratio == pytest.approx(2.0, rel=1e-12)


def test_pressure_broadening_round_trip():
    assert fwhm_from_density(N2, 0.75) == pytest.approx(13.5e9)
    assert density_from_fwhm(N2, 13.5e9) == pytest.approx(0.75)


def test_diffusion():
    assert diffusion_coefficient(1.0, 273.15) == pytest.approx(1.2e-5)
    assert diffusion_coefficient(0.5, 273.15) == pytest.approx(2.4e-5)
    with pytest.raises(ValueError):
        diffusion_coefficient(0.0, 300.0)


def test_species_records():
    assert RB87.gamma == pytest.approx(2 * math.pi * 7.0e9, rel=2e-3)
    assert RB85.gamma == pytest.approx(2 * math.pi * 4.667e9, rel=2e-3)


def test_geometry_volume_scaling():
    g = CellGeometry()
    assert g.volume() == pytest.approx(2.25e-9)
    assert CellGeometry.with_volume(1e-8, g).volume() == pytest.approx(1e-8)
    with pytest.raises(ValueError):
        CellGeometry(l_x=0.0)


def test_operating_point_validation():
    op = OperatingPoint()
    assert op.T == pytest.approx(369.15)
    assert op.gamma_l(N2) == pytest.approx(2 * math.pi * 13.5e9)
    with pytest.raises(ValueError):
        OperatingPoint(transmission_factor=1.5)
    with pytest.raises(ValueError):
        OperatingPoint(eta=-1.0)
