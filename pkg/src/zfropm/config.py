"""Flat ``key = value`` run configuration.

Every key has a default matching the micro-channel cell experiment; unknown
keys are rejected. Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .lineshape import DispersiveParams
from .signal_chain import LowPassSpec, ModulationSpec
from .units import celsius_to_kelvin
from .vapor import GASES, SPECIES, AlkaliSpecies, BufferGas, CellGeometry, OperatingPoint, vapor_density


class ConfigError(ValueError):
    pass


@dataclass
class ScanSpec:
    variable: str
    lo: float
    hi: float
    scale: str
    points: int

    VARIABLES = ("eta", "temperature", "volume")

    @classmethod
    def parse(cls, text: str) -> "ScanSpec":
        """Parse ``var=min:max:scale:n``, e.g. ``eta=0.05:100:log:200``."""
        try:
            var, rest = text.split("=", 1)
            lo, hi, scale, n = rest.split(":")
            spec = cls(var.strip(), float(lo), float(hi), scale.strip(), int(n))
        except ValueError as exc:
            raise ConfigError(f"bad scan spec {text!r}; expected var=min:max:log|lin:n") from exc
        if spec.variable not in cls.VARIABLES:
            raise ConfigError(f"scan variable must be one of {cls.VARIABLES}, got {spec.variable!r}")
        if spec.scale not in ("log", "lin"):
            raise ConfigError(f"scan scale must be 'log' or 'lin', got {spec.scale!r}")
        if spec.points < 2 or not spec.lo < spec.hi:
            raise ConfigError("scan needs min < max and at least two points")
        if spec.scale == "log" and spec.lo <= 0:
            raise ConfigError("log scan needs a positive minimum")
        return spec

    def grid(self):
        import numpy as np

        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass
class RunConfig:
    # species and gas
    species: str = "Rb85"
    sensitivity_species: str = "Rb87"
    gas: str = "N2"
    vapor_a: float = 4.312
    vapor_b_k: float = 4040.0
    sigma_se_m2: float = 1.9e-18
    sigma_sd_m2: float = 1.6e-21
    q_se: float = 5.0 / 27.0
    f_osc_d1: float = 0.3423
    sigma_bg_m2: float = 1e-26
    kappa_broad_hz_per_amg: float = 1.8e10
    # geometry
    l_x_m: float = 5e-4
    l_y_m: float = 5e-4
    l_z_m: float = 9e-3
    standoff_m: float = 7.5e-4
    # operating point
    temperature_k: float = celsius_to_kelvin(96.0)
    eta_amg: float = 0.75
    pump_power_w: float = 55e-6
    transmission: float = 1.0
    beam_waist_m: float = 250e-6
    pump_frequency_hz: float = 3.77e14
    line_fwhm_rad_s: float = 0.0  # 0 -> derived from eta_amg
    beam_area: str = "half_gaussian"
    measurement_time_s: float = 0.5
    # optimiser
    rate_model: str = "physical"  # or "quoted"
    eta_min_amg: float = 0.01
    eta_max_amg: float = 1000.0
    # simulation
    sample_rate_hz: float = 5e6
    duration_s: float = 0.5
    seed: int = 0
    filter_tau_s: float = 1e-3
    filter_stages: int = 4
    mod_frequency_hz: float = 2e3
    mod_amplitude_t: float = 18.2e-9
    mod_phase_rad: float = 0.0
    bias_field_t: float = 0.0
    zfr_baseline_v: float = 1.0
    linewidth_t: float = 182e-9
    dispersive_u_v: float = 6.4
    noise_asd_v: float = 0.0  # white noise at the lock-in output, V/sqrt(Hz)
    tone_frequency_hz: float = 30.0
    tone_rms_t: float = 0.0
    settle_s: float = 0.01
    segment_length: int = 2**18
    overlap: float = 0.5
    query_frequency_hz: float = 10.0
    query_band_hz: float = 0.0  # 0 -> interpolate at the query frequency
    # scans and output
    scan: str = ""
    out_dir: str = "."

    def validate(self) -> "RunConfig":
        if self.species not in SPECIES or self.sensitivity_species not in SPECIES:
            raise ConfigError(f"species must be one of {sorted(SPECIES)}")
        if self.gas not in GASES:
            raise ConfigError(f"gas must be one of {sorted(GASES)}")
        if self.eta_amg <= 0:
            raise ConfigError("eta_amg must be positive (wall rate diverges at zero buffer gas)")
        if self.rate_model not in ("physical", "quoted"):
            raise ConfigError("rate_model must be 'physical' or 'quoted'")
        if self.beam_area not in ("half_gaussian", "channel"):
            raise ConfigError("beam_area must be 'half_gaussian' or 'channel'")
        if self.scan:
            ScanSpec.parse(self.scan)
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        positive = (
            "l_x_m", "l_y_m", "l_z_m", "standoff_m", "temperature_k", "beam_waist_m",
            "pump_frequency_hz", "measurement_time_s", "sample_rate_hz", "duration_s",
            "filter_tau_s", "mod_frequency_hz", "linewidth_t", "segment_length",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("noise_asd_v", "tone_rms_t", "mod_amplitude_t", "settle_s", "pump_power_w"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if not 0 <= self.transmission <= 1:
            raise ConfigError("transmission must lie in [0, 1]")
        if self.filter_stages < 1:
            raise ConfigError("filter_stages must be at least 1")
        try:
            vapor_density(self.species_record(), self.temperature_k)
            self.gas_record()
            self.operating_point()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    # -- typed views -------------------------------------------------------
    def species_record(self, name: str | None = None) -> AlkaliSpecies:
        base = SPECIES[name or self.species]
        return dataclasses.replace(
            base, a_vp=self.vapor_a, b_vp=self.vapor_b_k, sigma_se=self.sigma_se_m2,
            sigma_sd=self.sigma_sd_m2, q_se=self.q_se, f_osc_d1=self.f_osc_d1,
        )

    def gas_record(self) -> BufferGas:
        return dataclasses.replace(
            GASES[self.gas], sigma_alkali_bg=self.sigma_bg_m2, kappa_broad=self.kappa_broad_hz_per_amg
        )

    def geometry(self) -> CellGeometry:
        return CellGeometry(self.l_x_m, self.l_y_m, self.l_z_m, self.standoff_m)

    def operating_point(self) -> OperatingPoint:
        return OperatingPoint(
            T=self.temperature_k, eta=self.eta_amg, pump_power=self.pump_power_w,
            beam_waist_radius=self.beam_waist_m, transmission_factor=self.transmission,
            pump_frequency=self.pump_frequency_hz, measurement_time=self.measurement_time_s,
            line_fwhm=self.line_fwhm_rad_s or None,
        )

    def lowpass(self) -> LowPassSpec:
        return LowPassSpec(self.filter_tau_s, self.filter_stages)

    def modulation(self) -> ModulationSpec:
        return ModulationSpec(self.mod_frequency_hz, self.mod_amplitude_t, self.bias_field_t,
                              self.mod_phase_rad)

    def dispersive(self) -> DispersiveParams:
        return DispersiveParams(self.dispersive_u_v, 0.0, self.linewidth_t)

    # -- serialisation -----------------------------------------------------
    def to_text(self) -> str:
        return "".join(f"{f.name} = {_fmt(getattr(self, f.name))}\n" for f in fields(self))

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(name: str, typ, raw: str):
    try:
        if typ is int or typ == "int":
            f = float(raw)
            if not f.is_integer():
                raise ValueError
            return int(f)
        if typ is float or typ == "float":
            v = float(raw)
            if math.isnan(v) or math.isinf(v):
                raise ValueError
            return v
    except ValueError:
        raise ConfigError(f"{name}: cannot read {raw!r} as {typ}") from None
    return raw


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = dataclasses.replace(base) if base else RunConfig()
    types = {f.name: f.type for f in fields(RunConfig)}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _coerce(key, types[key], raw))
    return cfg


def load_config(path: str | Path | None = None, **overrides) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        cfg = parse_config_text(text, cfg)
    for k, v in overrides.items():
        if v is None:
            continue
        if not hasattr(cfg, k):
            raise ConfigError(f"unknown key {k!r}")
        setattr(cfg, k, v)
    return cfg.validate()
