"""Independent reference values.

Plain-arithmetic re-derivations that import nothing from the package; the
constants are typed in from CODATA 2018. The frozen numbers at the bottom
were produced by these functions and are pinned so a silent change to
either side shows up.
"""

import math

KB = 1.380649e-23
AMU = 1.66053906660e-27
RE = 2.8179403262e-15
CL = 299792458.0
HBAR = 1.054571817e-34
ATM = 101325.0
AMG = 2.6868e25

M_RB85 = 84.911789738 * AMU
M_N2 = 28.0134 * AMU
T_OP = 273.15 + 96.0


def rb_density(T=T_OP):
    p = 10 ** (4.312 - 4040.0 / T) * ATM
    return p / (KB * T)


def vrel(m1, m2, T=T_OP):
    mu = m1 * m2 / (m1 + m2)
    return math.sqrt(8 * KB * T / (math.pi * mu))


def gamma_se(T=T_OP):
    return 5.0 / 27.0 * rb_density(T) * 1.9e-18 * vrel(M_RB85, M_RB85, T)


def gamma_sd(T=T_OP):
    return rb_density(T) * 1.6e-21 * vrel(M_RB85, M_RB85, T)


def gamma_wd(eta=0.75, T=T_OP, lx=5e-4, ly=5e-4, lz=9e-3):
    d = 1.2e-5 / eta * math.sqrt(T / 273.15)
    return ((math.pi / lx) ** 2 + (math.pi / ly) ** 2 + (math.pi / lz) ** 2) * d


def gamma_bg(eta=0.75, T=T_OP):
    return eta * AMG * 1e-26 * vrel(M_RB85, M_N2, T)


def gamma_l(eta=0.75):
    return 2 * math.pi * 1.8e10 * eta


def optical_depth(eta=0.75, T=T_OP, f=0.3423, length=9e-3):
    return math.pi * rb_density(T) * RE * CL * f * length / (gamma_l(eta) / 2)


def r_op(power=55e-6, w=250e-6, nu=3.77e14, eta=0.75, f=0.3423):
    intensity = power / (math.pi * w * w / 2)
    return RE * CL * f * intensity / ((gamma_l(eta) / 2) * HBAR * 2 * math.pi * nu)


def asn(gamma_cyc, n, volume, t=0.5, gamma=4.3966e10):
    return math.sqrt(2 * math.e * gamma_cyc / (n * volume * t)) / gamma


# frozen outputs of the functions above at the default operating point
FROZEN = {
    "n": 4.6384e18,
    "gamma_se": 700.24,
    "gamma_sd": 3.1843,
    "gamma_wd": 1470.89,
    "gamma_bg": 122.748,
    "d0": 0.89421,
    "r_op": 15291.2,
}
