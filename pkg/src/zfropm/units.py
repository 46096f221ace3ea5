"""Physical constants and the few unit conversions used across the package.

Everything inside the package is SI. Amagat densities, Celsius temperatures
and cyclic ("2pi x X") rate figures are converted at the API boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import scipy.constants as _sc

R_E = _sc.physical_constants["classical electron radius"][0]  # m
C = _sc.c  # m/s
K_B = _sc.k  # J/K
HBAR = _sc.hbar  # J s
AMU = _sc.physical_constants["atomic mass constant"][0]  # kg
ATM = _sc.atm  # Pa
N_AMAGAT = 2.6868e25  # 1/m^3, ideal gas at 273.15 K and 1 atm
EULER_E = math.e
ZERO_CELSIUS = 273.15  # K


@dataclass(frozen=True)
class Constants:
    """Read-only bundle of the constants above, for callers that want one object."""

    r_e: float = R_E
    c: float = C
    k_B: float = K_B
    hbar: float = HBAR
    amu: float = AMU
    n_amagat: float = N_AMAGAT
    euler_e: float = EULER_E


CONSTANTS = Constants()


class RateConvention(enum.Enum):
    EVENTS = "events"  # events per second, 1/s
    CYCLIC = "cyclic"  # the X in "2pi x X s^-1"


@dataclass(frozen=True)
class RateValue:
    value: float
    convention: RateConvention = RateConvention.EVENTS

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"rate must be non-negative, got {self.value}")

    @property
    def per_second(self) -> float:
        return rate_convert(self, RateConvention.EVENTS).value

    @property
    def cyclic(self) -> float:
        return rate_convert(self, RateConvention.CYCLIC).value

    def __str__(self):
        if self.convention is RateConvention.CYCLIC:
            return f"2pi x {self.value:.6g} s^-1"
        return f"{self.value:.6g} s^-1"


def rate_convert(rate: RateValue, target: RateConvention) -> RateValue:
    """Re-express ``rate`` in ``target`` convention (cyclic = events / 2pi)."""
    if rate.convention is target:
        return rate
    if target is RateConvention.CYCLIC:
        return RateValue(rate.value / (2.0 * math.pi), target)
    return RateValue(rate.value * (2.0 * math.pi), target)


def amagat_to_density(eta: float) -> float:
    """Buffer-gas density in amagat -> number density in 1/m^3."""
    if eta < 0:
        raise ValueError(f"density must be non-negative, got {eta} amg")
    return eta * N_AMAGAT


def density_to_amagat(n: float) -> float:
    if n < 0:
        raise ValueError(f"density must be non-negative, got {n} m^-3")
    return n / N_AMAGAT


def celsius_to_kelvin(t: float) -> float:
    if t <= -ZERO_CELSIUS:
        raise ValueError(f"temperature {t} degC is at or below absolute zero")
    return t + ZERO_CELSIUS


def kelvin_to_celsius(t: float) -> float:
    if t <= 0:
        raise ValueError(f"temperature must be positive, got {t} K")
    return t - ZERO_CELSIUS
