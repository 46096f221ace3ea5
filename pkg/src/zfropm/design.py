"""Atomic-shot-noise sensitivity and buffer-gas / cell-size design scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .relaxation import (
    QUOTED_CYCLIC,
    QUOTED_ETA,
    RateBudget,
    buffer_gas_rate,
    spin_destruction_rate,
    spin_exchange_rate,
    wall_rate,
)
from .units import EULER_E, RateConvention, RateValue, rate_convert
from .vapor import RB87, AlkaliSpecies, BufferGas, CellGeometry, vapor_density

ETA_RANGE_MAX = 1000.0
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def asn_sensitivity(gamma_dk: RateValue, n: float, volume: float, t: float,
                    gamma: float = RB87.gamma) -> float:
    """Projected atomic-shot-noise-limited field sensitivity, T/sqrt(Hz).

    (1/gamma) sqrt(2 e Gamma_dk / (n V t)) with Gamma_dk taken as its cyclic
    value; that is the reading under which the gyromagnetic ratio in rad/s/T
    reproduces the quoted 18 fT/sqrt(Hz) scale.
    """
    if n <= 0 or volume <= 0:
        raise ValueError("atom number n * V must be positive")
    if t <= 0 or gamma <= 0:
        raise ValueError("measurement time and gyromagnetic ratio must be positive")
    rate = rate_convert(gamma_dk, RateConvention.CYCLIC).value
    return math.sqrt(2.0 * EULER_E * rate / (n * volume * t)) / gamma


@dataclass(frozen=True)
class Optimum:
    eta: float  # amg
    gamma_dk: float  # objective value at eta, same units as the objective
    budget: RateBudget | None = None
    degenerate: bool = False


def golden_section(f, lo: float, hi: float, rtol: float = 1e-12, max_iter: int = 200):
    """Minimum of a unimodal ``f`` on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= rtol * (abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def minimize_over_eta(objective, eta_min: float, eta_max: float, points: int = 64) -> Optimum:
    """Coarse log grid, then golden-section in log(eta) around the best grid point.

    A constant objective returns the arithmetic midpoint of the range with
    ``degenerate`` set.
    """
    if not 0 < eta_min < eta_max <= ETA_RANGE_MAX:
        raise ValueError(f"search range must satisfy 0 < min < max <= {ETA_RANGE_MAX} amg")
    if points < 3:
        raise ValueError("need at least three coarse grid points")
    grid = np.geomspace(eta_min, eta_max, points)
    values = np.array([objective(e) for e in grid])
    if np.ptp(values) <= 1e-15 * max(1.0, float(np.max(np.abs(values)))):
        mid = 0.5 * (eta_min + eta_max)
        return Optimum(mid, float(objective(mid)), degenerate=True)
    i = int(np.argmin(values))
    lo = math.log(grid[max(i - 1, 0)])
    hi = math.log(grid[min(i + 1, points - 1)])
    x, fx = golden_section(lambda s: objective(math.exp(s)), lo, hi)
    return Optimum(math.exp(x), float(fx))


@dataclass(frozen=True)
class QuotedRateModel:
    """Dark rate A/eta + B*eta + C built from rates quoted at one density.

    Rates are in whatever convention they were supplied in; the optimum
    location does not depend on it.
    """

    a: float  # wall coefficient, rate * amg
    b: float  # buffer-gas coefficient, rate / amg
    se: float = 0.0  # density-independent spin exchange
    sd: float = 0.0  # density-independent spin destruction

    @property
    def c(self) -> float:
        return self.se + self.sd

    @classmethod
    def from_quoted(cls, gamma_wd=QUOTED_CYCLIC["gamma_wd"], gamma_bg=QUOTED_CYCLIC["gamma_bg"],
                    gamma_se=QUOTED_CYCLIC["gamma_se"], gamma_sd=QUOTED_CYCLIC["gamma_sd"],
                    eta=QUOTED_ETA) -> "QuotedRateModel":
        return cls(a=gamma_wd * eta, b=gamma_bg / eta, se=gamma_se, sd=gamma_sd)

    def budget(self, eta: float) -> RateBudget:
        """Budget at ``eta``, treating the coefficients as cyclic rates."""
        return RateBudget.from_cyclic(self.a / eta, self.se, self.sd, self.b * eta)

    def dark_rate(self, eta: float) -> float:
        return self.a / eta + self.b * eta + self.c

    def closed_form_optimum(self) -> tuple[float, float]:
        if self.a <= 0 or self.b <= 0:
            raise ValueError("closed form needs positive wall and buffer-gas coefficients")
        return math.sqrt(self.a / self.b), 2.0 * math.sqrt(self.a * self.b) + self.c

    def scaled_geometry(self, k: float) -> "QuotedRateModel":
        """Wall coefficient for a cell whose sides are all multiplied by ``k``."""
        return QuotedRateModel(self.a / k**2, self.b, self.se, self.sd)


def _physical_budget(geom, species, gas, T, eta, n):
    return RateBudget(
        gamma_wd=wall_rate(geom, eta, T),
        gamma_se=spin_exchange_rate(species, n, T),
        gamma_sd=spin_destruction_rate(species, n, T),
        gamma_bg=buffer_gas_rate(species, gas, eta, T),
    )


def optimal_buffer_density(geom: CellGeometry, species: AlkaliSpecies, gas: BufferGas, T: float,
                           eta_range=(0.01, ETA_RANGE_MAX), points: int = 64) -> Optimum:
    """Buffer density minimising the physical dark rate at fixed cell and temperature."""
    n = vapor_density(species, T)
    opt = minimize_over_eta(
        lambda e: _physical_budget(geom, species, gas, T, e, n).gamma_dk, *eta_range, points=points
    )
    budget = _physical_budget(geom, species, gas, T, opt.eta, n)
    return Optimum(opt.eta, budget.gamma_dk, budget, opt.degenerate)


@dataclass
class DesignScan:
    variable: str  # "eta" | "temperature" | "volume"
    grid: np.ndarray
    budgets: list[RateBudget]
    delta_b: np.ndarray  # T/sqrt(Hz)
    optimum_at: float = float("nan")
    optimum_value: float = float("nan")
    extra: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("scan grid must be strictly increasing")

    def column(self, name: str) -> np.ndarray:
        return np.array([b.components()[name] for b in self.budgets])


def _check_grid(grid):
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2 or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be 1-D, strictly increasing, with at least two points")
    return g


def rate_scan(geom: CellGeometry, species: AlkaliSpecies, gas: BufferGas, T: float, eta_grid,
              t: float = 0.5, gamma: float = RB87.gamma) -> DesignScan:
    """Per-mechanism dark rates and projected sensitivity across buffer densities."""
    grid = _check_grid(eta_grid)
    if grid[0] <= 0:
        raise ValueError("buffer densities must be positive")
    n = vapor_density(species, T)
    budgets = [_physical_budget(geom, species, gas, T, e, n) for e in grid]
    db = np.array([asn_sensitivity(RateValue(b.gamma_dk), n, geom.volume(), t, gamma) for b in budgets])
    i = int(np.argmin(db))
    return DesignScan("eta", grid, budgets, db, float(grid[i]), float(db[i]))


def temperature_scan(geom: CellGeometry, species: AlkaliSpecies, gas: BufferGas, eta: float,
                     t_grid, t: float = 0.5, gamma: float = RB87.gamma) -> DesignScan:
    """Dark rates and projected sensitivity across cell temperatures (K) at fixed density."""
    grid = _check_grid(t_grid)
    budgets, db = [], []
    for T in grid:
        n = vapor_density(species, T)
        b = _physical_budget(geom, species, gas, T, eta, n)
        budgets.append(b)
        db.append(asn_sensitivity(RateValue(b.gamma_dk), n, geom.volume(), t, gamma))
    db = np.array(db)
    i = int(np.argmin(db))
    return DesignScan("temperature", grid, budgets, db, float(grid[i]), float(db[i]))


def sensitivity_vs_volume(species: AlkaliSpecies, gas: BufferGas, T: float, t: float, volume_grid,
                          template: CellGeometry = CellGeometry(), gamma: float = RB87.gamma,
                          rate_model: QuotedRateModel | None = None,
                          eta_range=(0.01, ETA_RANGE_MAX)) -> DesignScan:
    """Optimal buffer density and its shot-noise sensitivity for each cell volume.

    Cells keep the aspect ratio of ``template``. Without ``rate_model`` the
    rates are computed from first principles; with one, its quoted
    coefficients (cyclic convention) are carried to each volume by the
    1/size^2 wall scaling.
    """
    grid = _check_grid(volume_grid)
    if grid[0] <= 0:
        raise ValueError("volumes must be positive")
    n = vapor_density(species, T)
    budgets, db, etas = [], [], []
    for v in grid:
        geom = CellGeometry.with_volume(v, template)
        if rate_model is None:
            opt = optimal_buffer_density(geom, species, gas, T, eta_range)
            budget = opt.budget
            rate = RateValue(budget.gamma_dk)
        else:
            k = (v / template.volume()) ** (1.0 / 3.0)
            model = rate_model.scaled_geometry(k)
            opt = minimize_over_eta(model.dark_rate, *eta_range)
            budget = model.budget(opt.eta)
            rate = RateValue(opt.gamma_dk, RateConvention.CYCLIC)
        budgets.append(budget)
        etas.append(opt.eta)
        db.append(asn_sensitivity(rate, n, v, t, gamma))
    db = np.array(db)
    i = int(np.argmin(db))
    return DesignScan("volume", grid, budgets, db, float(grid[i]), float(db[i]),
                      extra={"eta_opt": np.array(etas)})
