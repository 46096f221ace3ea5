"""Alkali and buffer-gas thermophysics.

Records for the atomic species, the buffer gas, the cell and the operating
point, plus the handful of closed-form quantities every rate builds on:
saturated vapour density, mean relative thermal speed, pressure broadening and
buffer-gas diffusion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .units import AMU, ATM, K_B, ZERO_CELSIUS, celsius_to_kelvin

# Liquid-phase validity window of the two-coefficient vapour-pressure fit.
VAPOR_T_MIN = 312.0
VAPOR_T_MAX = 550.0

D0_N2 = 1.2e-5  # m^2/s, Rb in 1 amg N2 at 273.15 K


@dataclass(frozen=True)
class AlkaliSpecies:
    name: str
    mass: float  # kg
    nuclear_spin: float
    f_osc_d1: float
    gamma: float  # rad s^-1 T^-1
    a_vp: float = 4.312  # log10(P/atm) = a_vp - b_vp / T
    b_vp: float = 4040.0  # K
    sigma_se: float = 1.9e-18  # m^2
    sigma_sd: float = 1.6e-21  # m^2
    q_se: float = 5.0 / 27.0

    def __post_init__(self):
        if self.mass <= 0 or self.gamma <= 0:
            raise ValueError(f"{self.name}: mass and gamma must be positive")
        if self.sigma_se <= 0 or self.sigma_sd <= 0:
            raise ValueError(f"{self.name}: cross sections must be positive")
        if not 0 < self.f_osc_d1 < 1:
            raise ValueError(f"{self.name}: oscillator strength must lie in (0, 1)")
        if not 0 < self.q_se <= 1:
            raise ValueError(f"{self.name}: q_se must lie in (0, 1]")


@dataclass(frozen=True)
class BufferGas:
    name: str
    mass: float  # kg
    sigma_alkali_bg: float = 1e-26  # m^2
    kappa_broad: float = 1.8e10  # Hz FWHM per amg

    def __post_init__(self):
        if self.mass <= 0 or self.sigma_alkali_bg <= 0 or self.kappa_broad <= 0:
            raise ValueError(f"{self.name}: mass, cross section and broadening must be positive")


@dataclass(frozen=True)
class CellGeometry:
    l_x: float = 5e-4  # m
    l_y: float = 5e-4
    l_z: float = 9e-3  # along the beam
    standoff: float = 7.5e-4

    def __post_init__(self):
        if min(self.l_x, self.l_y, self.l_z) <= 0:
            raise ValueError("cell side lengths must be positive")
        if self.standoff <= 0:
            raise ValueError("standoff must be positive")

    def volume(self) -> float:
        return self.l_x * self.l_y * self.l_z

    def scaled(self, k: float) -> "CellGeometry":
        """Same aspect ratio, every side multiplied by ``k``."""
        return replace(self, l_x=self.l_x * k, l_y=self.l_y * k, l_z=self.l_z * k)

    @classmethod
    def with_volume(cls, volume: float, template: "CellGeometry | None" = None) -> "CellGeometry":
        template = template or cls()
        return template.scaled((volume / template.volume()) ** (1.0 / 3.0))


@dataclass(frozen=True)
class OperatingPoint:
    T: float = celsius_to_kelvin(96.0)  # K
    eta: float = 0.75  # amg
    pump_power: float = 55e-6  # W, already the in-channel power
    beam_waist_radius: float = 250e-6  # m
    transmission_factor: float = 1.0
    pump_frequency: float = 3.77e14  # Hz (optical, cyclic)
    measurement_time: float = 0.5  # s
    line_fwhm: float | None = None  # rad/s; None -> derived from eta

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("temperature must be positive")
        if self.eta < 0:
            raise ValueError("buffer density must be non-negative")
        if not 0 <= self.transmission_factor <= 1:
            raise ValueError("transmission factor must lie in [0, 1]")
        if self.measurement_time <= 0:
            raise ValueError("measurement time must be positive")
        if self.pump_power < 0:
            raise ValueError("pump power must be non-negative")

    @property
    def effective_pump_power(self) -> float:
        return self.pump_power * self.transmission_factor

    def gamma_l(self, gas: "BufferGas") -> float:
        """Optical linewidth in rad/s (override, or 2pi times the pressure FWHM)."""
        if self.line_fwhm is not None:
            return self.line_fwhm
        return 2.0 * math.pi * fwhm_from_density(gas, self.eta)


RB85 = AlkaliSpecies(
    name="Rb85",
    mass=84.911789738 * AMU,
    nuclear_spin=2.5,
    f_osc_d1=0.3423,
    gamma=2.9327e10,
)
RB87 = AlkaliSpecies(
    name="Rb87",
    mass=86.909180527 * AMU,
    nuclear_spin=1.5,
    f_osc_d1=0.3423,
    gamma=4.3966e10,
)
N2 = BufferGas(name="N2", mass=28.0134 * AMU)

SPECIES = {s.name: s for s in (RB85, RB87)}
GASES = {g.name: g for g in (N2,)}


def vapor_pressure(species: AlkaliSpecies, T: float) -> float:
    """Saturated vapour pressure in Pa."""
    _check_vapor_range(T)
    return ATM * 10.0 ** (species.a_vp - species.b_vp / T)


def vapor_density(species: AlkaliSpecies, T: float) -> float:
    """Saturated alkali number density in 1/m^3 (ideal gas over the liquid)."""
    return vapor_pressure(species, T) / (K_B * T)


def _check_vapor_range(T):
    if not VAPOR_T_MIN <= T <= VAPOR_T_MAX:
        raise ValueError(
            f"T = {T} K outside vapour-pressure validity range [{VAPOR_T_MIN}, {VAPOR_T_MAX}] K"
        )


def mean_relative_speed(m1: float, m2: float, T: float) -> float:
    """Mean relative thermal speed sqrt(8 k_B T / (pi mu)) in m/s."""
    if m1 <= 0 or m2 <= 0 or T <= 0:
        raise ValueError("masses and temperature must be positive")
    mu = m1 * m2 / (m1 + m2)
    return math.sqrt(8.0 * K_B * T / (math.pi * mu))


def fwhm_from_density(gas: BufferGas, eta: float) -> float:
    """Pressure-broadened optical FWHM in Hz for ``eta`` amagat of ``gas``."""
    if eta < 0:
        raise ValueError("buffer density must be non-negative")
    return gas.kappa_broad * eta


def density_from_fwhm(gas: BufferGas, fwhm: float) -> float:
    if fwhm < 0:
        raise ValueError("linewidth must be non-negative")
    return fwhm / gas.kappa_broad


def diffusion_coefficient(eta: float, T: float, d0: float = D0_N2) -> float:
    """Alkali diffusion constant in the buffer gas, m^2/s.

    ``d0`` is the value at 1 amg and 273.15 K; the density scaling is 1/eta
    and the temperature scaling sqrt(T / 273.15 K).
    """
    if eta <= 0:
        raise ValueError("diffusion needs a positive buffer density")
    if T <= 0:
        raise ValueError("temperature must be positive")
    return d0 / eta * math.sqrt(T / ZERO_CELSIUS)
