"""Optical depth, Beer-Lambert transmission and the absorption-spectrum model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .units import R_E, C
from .vapor import AlkaliSpecies


@dataclass(frozen=True)
class OpticalDepthResult:
    d0: float
    n: float  # 1/m^3
    length: float  # m
    gamma_l: float  # rad/s


@dataclass(frozen=True)
class AbsorptionModelParams:
    """Absorptive Lorentzian dip on an additive linear baseline.

    ``c1`` multiplies (nu - nu0), so the baseline is pinned at the line centre.
    """

    c0: float
    c1: float
    nu0: float  # Hz
    fwhm: float  # Hz
    depth: float

    def __post_init__(self):
        if self.fwhm <= 0:
            raise ValueError("absorption FWHM must be positive")
        if self.depth < 0:
            raise ValueError("absorption depth must be non-negative")


def peak_cross_section(species: AlkaliSpecies, gamma_l: float) -> float:
    """On-resonance cross-section pi r_e c f / (Gamma_L / 2), m^2."""
    if gamma_l <= 0:
        raise ValueError("optical linewidth must be positive")
    return math.pi * R_E * C * species.f_osc_d1 / (gamma_l / 2.0)


def optical_depth(species: AlkaliSpecies, n: float, length: float, gamma_l: float) -> OpticalDepthResult:
    if n < 0 or length < 0:
        raise ValueError("density and length must be non-negative")
    d0 = n * peak_cross_section(species, gamma_l) * length
    return OpticalDepthResult(d0=d0, n=n, length=length, gamma_l=gamma_l)


def transmitted_intensity(i0, d0: float, p_z):
    """Beer-Lambert output for a uniformly polarised column, I0 exp(-D0 (1 - P_z))."""
    p_z_arr = np.asarray(p_z, dtype=float)
    if np.any(np.abs(p_z_arr) > 1):
        raise ValueError("polarisation must lie in [-1, 1]")
    if np.any(np.asarray(i0) < 0):
        raise ValueError("input intensity must be non-negative")
    out = i0 * np.exp(-d0 * (1.0 - p_z_arr))
    return float(out) if np.ndim(out) == 0 else out


def absorption_model(params: AbsorptionModelParams, nu):
    x = np.asarray(nu, dtype=float) - params.nu0
    hw2 = params.fwhm**2 / 4.0
    out = params.c0 + params.c1 * x - params.depth * hw2 / (x**2 + hw2)
    return float(out) if np.ndim(out) == 0 else out
