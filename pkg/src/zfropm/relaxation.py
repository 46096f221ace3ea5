"""Spin-relaxation and optical-pumping rates and their budget.

All rates are returned as events per second. Quoted literature figures of the
form "2pi x X s^-1" compare directly against these numbers; use
:func:`zfropm.units.rate_convert` for the cyclic value X.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .units import HBAR, R_E, C, RateConvention, RateValue, amagat_to_density
from .vapor import (
    AlkaliSpecies,
    BufferGas,
    CellGeometry,
    OperatingPoint,
    diffusion_coefficient,
    mean_relative_speed,
    vapor_density,
)

BEAM_AREA_HALF_GAUSSIAN = "half_gaussian"  # pi w^2 / 2
BEAM_AREA_CHANNEL = "channel"  # l_x * l_y

# Figures quoted alongside the rate equations for the 0.75 amg, 96 degC cell,
# cyclic convention (the X in 2pi x X s^-1).
QUOTED_CYCLIC = {
    "gamma_wd": 2326.0,
    "gamma_se": 111.2,
    "gamma_bg": 25.7,
    "gamma_sd": 0.5,
    "gamma_dk": 2483.0,
    "r_op": 1513.0,
    "gamma_dk_opt": 600.0,
}
QUOTED_ETA = 0.75
QUOTED_ETA_OPT = 7.1

# Known, deliberately unreconciled offsets between a direct evaluation of the
# rate formulas and the quoted figures. Tests pin these so that a silent
# "fix" of either side shows up.
KNOWN_DEVIATIONS = {
    # direct wall rate times pi^2 lands on the quoted value
    "gamma_wd_pi2_ratio": 1.0067,
    # direct buffer-gas rate / quoted
    "gamma_bg_ratio": 0.760,
    # direct pumping rate / quoted
    "r_op_ratio": 1.608,
}


@dataclass(frozen=True)
class RateBudget:
    """Per-mechanism relaxation rates, events per second."""

    gamma_wd: float
    gamma_se: float
    gamma_sd: float
    gamma_bg: float
    r_op: float = 0.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value < 0 or math.isnan(value):
                raise ValueError(f"{name} must be non-negative, got {value}")

    @property
    def gamma_coll(self) -> float:
        return self.gamma_se + self.gamma_sd + self.gamma_bg

    @property
    def gamma_dk(self) -> float:
        return self.gamma_wd + self.gamma_se + self.gamma_sd + self.gamma_bg

    @property
    def gamma_total(self) -> float:
        return self.r_op + self.gamma_dk

    def components(self) -> dict[str, float]:
        return {
            "gamma_wd": self.gamma_wd,
            "gamma_se": self.gamma_se,
            "gamma_sd": self.gamma_sd,
            "gamma_bg": self.gamma_bg,
            "gamma_dk": self.gamma_dk,
            "r_op": self.r_op,
            "gamma_total": self.gamma_total,
        }

    def rate(self, name: str) -> RateValue:
        return RateValue(self.components()[name])

    def cyclic(self) -> dict[str, float]:
        return {
            k: RateValue(v).cyclic for k, v in self.components().items()
        }

    @classmethod
    def from_cyclic(cls, gamma_wd, gamma_se, gamma_sd, gamma_bg, r_op=0.0) -> "RateBudget":
        conv = lambda x: RateValue(x, RateConvention.CYCLIC).per_second  # noqa: E731
        return cls(conv(gamma_wd), conv(gamma_se), conv(gamma_sd), conv(gamma_bg), conv(r_op))


def diffusion_mode_factor(geom: CellGeometry) -> float:
    """(pi/l_x)^2 + (pi/l_y)^2 + (pi/l_z)^2 for the lowest diffusion mode, 1/m^2."""
    return (
        (math.pi / geom.l_x) ** 2
        + (math.pi / geom.l_y) ** 2
        + (math.pi / geom.l_z) ** 2
    )


def wall_rate(geom: CellGeometry, eta: float, T: float) -> float:
    return diffusion_mode_factor(geom) * diffusion_coefficient(eta, T)


def spin_exchange_rate(species: AlkaliSpecies, n: float, T: float) -> float:
    if n < 0:
        raise ValueError("alkali density must be non-negative")
    v = mean_relative_speed(species.mass, species.mass, T)
    return species.q_se * n * species.sigma_se * v


def spin_destruction_rate(species: AlkaliSpecies, n: float, T: float) -> float:
    if n < 0:
        raise ValueError("alkali density must be non-negative")
    v = mean_relative_speed(species.mass, species.mass, T)
    return n * species.sigma_sd * v


def buffer_gas_rate(species: AlkaliSpecies, gas: BufferGas, eta: float, T: float) -> float:
    n_bg = amagat_to_density(eta)
    return n_bg * gas.sigma_alkali_bg * mean_relative_speed(species.mass, gas.mass, T)


def beam_area(op: OperatingPoint, geom: CellGeometry | None = None,
              convention: str = BEAM_AREA_HALF_GAUSSIAN) -> float:
    if convention == BEAM_AREA_HALF_GAUSSIAN:
        if op.beam_waist_radius <= 0:
            raise ValueError("beam waist must be positive")
        return math.pi * op.beam_waist_radius**2 / 2.0
    if convention == BEAM_AREA_CHANNEL:
        if geom is None:
            raise ValueError("channel beam area needs a geometry")
        return geom.l_x * geom.l_y
    raise ValueError(f"unknown beam-area convention {convention!r}")


def pumping_rate(op: OperatingPoint, species: AlkaliSpecies, gas: BufferGas,
                 geom: CellGeometry | None = None,
                 area_convention: str = BEAM_AREA_HALF_GAUSSIAN) -> float:
    """On-resonance optical pumping rate, 1/s.

    Photon flux times the peak absorption cross-section of the
    pressure-broadened line.
    """
    intensity = op.effective_pump_power / beam_area(op, geom, area_convention)
    gamma_l = op.gamma_l(gas)
    if gamma_l <= 0:
        raise ValueError("optical linewidth must be positive")
    photon_energy = HBAR * 2.0 * math.pi * op.pump_frequency
    return R_E * C * species.f_osc_d1 * intensity / ((gamma_l / 2.0) * photon_energy)


def dark_rate(geom: CellGeometry, op: OperatingPoint, species: AlkaliSpecies,
              gas: BufferGas, n: float | None = None, include_pumping: bool = True,
              area_convention: str = BEAM_AREA_HALF_GAUSSIAN) -> RateBudget:
    """Assemble the full budget at an operating point.

    ``n`` overrides the saturated vapour density.
    """
    if n is None:
        n = vapor_density(species, op.T)
    r_op = pumping_rate(op, species, gas, geom, area_convention) if include_pumping else 0.0
    return RateBudget(
        gamma_wd=wall_rate(geom, op.eta, op.T),
        gamma_se=spin_exchange_rate(species, n, op.T),
        gamma_sd=spin_destruction_rate(species, n, op.T),
        gamma_bg=buffer_gas_rate(species, gas, op.eta, op.T),
        r_op=r_op,
    )


def linewidth_from_rates(budget: RateBudget, species: AlkaliSpecies) -> float:
    """Field linewidth Gamma_total / gamma in tesla.

    Only meaningful at low optical depth; above that the polarisation is not
    uniform along the beam and the relation is no longer a simple ratio.
    """
    return budget.gamma_total / species.gamma
