"""Zero-field-resonance line shapes.

The transmission resonance is an absorptive Lorentzian in the transverse
field; the lock-in quadrature output near zero field is the dispersive
Lorentzian. Fields are scalars along the modulation axis, in tesla.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ZfrParams:
    a: float  # wing (minimum) voltage, V
    b: float  # peak (maximum) voltage, V
    b0: float  # line centre, T
    delta_b: float  # FWHM, T

    def __post_init__(self):
        if self.delta_b <= 0:
            raise ValueError("ZFR linewidth must be positive")
        if self.b < self.a:
            raise ValueError("ZFR maximum b must not be below minimum a")

    @property
    def amplitude(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class DispersiveParams:
    u: float  # V
    b0: float  # T
    delta_b: float  # FWHM, T

    def __post_init__(self):
        if self.delta_b <= 0:
            raise ValueError("dispersive linewidth must be positive")


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


def zfr_voltage(p: ZfrParams, b):
    x = np.asarray(b, dtype=float) - p.b0
    hw2 = p.delta_b**2 / 4.0
    return _scalar_or_array(p.a + (p.b - p.a) * hw2 / (x**2 + hw2))


def dispersive_voltage(p: DispersiveParams, b):
    x = np.asarray(b, dtype=float) - p.b0
    return _scalar_or_array(0.5 * p.u * x * p.delta_b / (x**2 + p.delta_b**2 / 4.0))


def sharpness(p: ZfrParams) -> float:
    """Resonance amplitude over linewidth, V/T."""
    return (p.b - p.a) / p.delta_b


def slope_at_center(p: DispersiveParams) -> float:
    """dV/dB of the dispersive line at its zero crossing, 2u / delta_b."""
    return 2.0 * p.u / p.delta_b


def best_sharpness(sweep) -> tuple[int, float]:
    """Index and value of the sharpest resonance in an iterable of ZfrParams."""
    values = [sharpness(p) for p in sweep]
    if not values:
        raise ValueError("empty sweep")
    i = int(np.argmax(values))
    return i, values[i]
