import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from zfropm.relaxation import (
    KNOWN_DEVIATIONS,
    QUOTED_CYCLIC,
    RateBudget,
    beam_area,
    buffer_gas_rate,
    dark_rate,
    pumping_rate,
    spin_destruction_rate,
    spin_exchange_rate,
    wall_rate,
)
from zfropm.vapor import N2, RB85, CellGeometry, OperatingPoint, vapor_density

T = oracles.T_OP
N = oracles.rb_density()
G = CellGeometry()
OP = OperatingPoint()

nonneg = st.floats(min_value=0.0, max_value=1e6)


def test_spin_exchange_matches_oracle():
    assert spin_exchange_rate(RB85, N, T) == pytest.approx(oracles.gamma_se(), rel=1e-8)


def test_spin_destruction_matches_oracle():
    assert spin_destruction_rate(RB85, N, T) == pytest.approx(oracles.gamma_sd(), rel=1e-8)


def test_wall_rate_matches_oracle():
    assert wall_rate(G, 0.75, T) == pytest.approx(oracles.gamma_wd(), rel=1e-12)


def test_buffer_gas_matches_oracle():
    assert buffer_gas_rate(RB85, N2, 0.75, T) == pytest.approx(oracles.gamma_bg(), rel=1e-8)


def test_pumping_matches_oracle():
    assert pumping_rate(OP, RB85, N2) == pytest.approx(oracles.r_op(), rel=1e-8)


def test_frozen_values():
    b = dark_rate(G, OP, RB85, N2)
    for k in ("gamma_se", "gamma_sd", "gamma_wd", "gamma_bg", "r_op"):
        assert b.components()[k] == pytest.approx(oracles.FROZEN[k], rel=1e-4), k


def test_wall_rate_scales_inverse_with_buffer_density():
    assert wall_rate(G, 1.5, T) == pytest.approx(wall_rate(G, 0.75, T) / 2)


def test_density_override():
    b = dark_rate(G, OP, RB85, N2, n=2 * N)
    assert b.gamma_se == pytest.approx(2 * spin_exchange_rate(RB85, N, T))


def test_no_pumping_gives_zero_rop():
    assert dark_rate(G, OP, RB85, N2, include_pumping=False).r_op == 0.0
    assert pumping_rate(OperatingPoint(pump_power=0.0), RB85, N2) == 0.0


def test_transmission_scales_pumping():
    half = OperatingPoint(transmission_factor=0.5)
    assert pumping_rate(half, RB85, N2) == pytest.approx(0.5 * pumping_rate(OP, RB85, N2))


def test_beam_area_conventions():
    assert beam_area(OP) == pytest.approx(math.pi * 250e-6**2 / 2)
    assert beam_area(OP, G, "channel") == pytest.approx(2.5e-7)
    with pytest.raises(ValueError):
        beam_area(OP, None, "channel")
    with pytest.raises(ValueError):
        beam_area(OP, G, "square")


@given(nonneg, nonneg, nonneg, nonneg, nonneg)
def test_budget_sum_is_exact(wd, se, sd, bg, rop):
    b = RateBudget(wd, se, sd, bg, rop)
    assert b.gamma_dk == wd + se + sd + bg
    assert b.gamma_total == rop + b.gamma_dk
    assert all(v >= 0 for v in b.components().values())


def test_budget_rejects_negative():
    with pytest.raises(ValueError):
        RateBudget(1.0, -1.0, 0.0, 0.0)


def test_from_cyclic():
    b = RateBudget.from_cyclic(1.0, 0.0, 0.0, 0.0)
    assert b.gamma_wd == pytest.approx(2 * math.pi)
    assert b.cyclic()["gamma_wd"] == pytest.approx(1.0)


def test_known_deviations_are_what_the_code_produces():
    b = dark_rate(G, OP, RB85, N2)
    cyc = b.cyclic()
    assert 2 * math.pi * QUOTED_CYCLIC["gamma_wd"] / (math.pi**2 * b.gamma_wd) == pytest.approx(
        KNOWN_DEVIATIONS["gamma_wd_pi2_ratio"], rel=1e-3)
    assert cyc["gamma_bg"] / QUOTED_CYCLIC["gamma_bg"] == pytest.approx(
        KNOWN_DEVIATIONS["gamma_bg_ratio"], rel=2e-3)
    assert cyc["r_op"] / QUOTED_CYCLIC["r_op"] == pytest.approx(KNOWN_DEVIATIONS["r_op_ratio"], rel=2e-3)


def test_saturated_density_used_by_default():
    b = dark_rate(G, OP, RB85, N2)
    assert b.gamma_se == pytest.approx(spin_exchange_rate(RB85, vapor_density(RB85, T), T))
