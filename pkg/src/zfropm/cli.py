"""Command-line front end.

    zfropm rates     [--config F] [--out D] [--scan var=min:max:log|lin:n]
    zfropm optimize  [--config F] [--out D] [--scan volume=...]
    zfropm simulate  [--config F] [--out D] [--seed N]
    zfropm fit       --model zfr|dispersive|absorption DATA.csv [--init k=v,...] [--max-iter N]
    zfropm asd       SERIES.csv [--out D]

Exit codes: 0 ok, 2 config, 3 I/O, 4 input schema, 5 fit did not converge.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from . import io as zio
from .config import ConfigError, RunConfig, ScanSpec, load_config
from .design import (
    QuotedRateModel,
    asn_sensitivity,
    minimize_over_eta,
    optimal_buffer_density,
    rate_scan,
    sensitivity_vs_volume,
    temperature_scan,
)
from .fitting import MAX_ITER, FitError, derive_pressure, fit_curve
from .optics import optical_depth
from .relaxation import KNOWN_DEVIATIONS, QUOTED_CYCLIC, dark_rate, linewidth_from_rates
from .signal_chain import (
    asd_estimate,
    bandwidth_3db,
    equivalent_magnetic_noise,
    filter_response,
    simulate_measurement,
    tone_rms,
)
from .units import RateConvention, RateValue
from .vapor import vapor_density

log = logging.getLogger("zfropm")

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SCHEMA = 4
EXIT_NOCONV = 5


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _out_dir(cfg: RunConfig, args) -> Path:
    d = Path(args.out or cfg.out_dir)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {d}: {exc}", EXIT_IO) from exc
    return d


def _config(args, **extra) -> RunConfig:
    overrides = dict(extra)
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "scan", None):
        overrides["scan"] = args.scan
    return load_config(args.config, **overrides)


def _write(path, writer, *a, **kw):
    try:
        return writer(path, *a, **kw)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _emit(text):
    sys.stdout.write(text)


def cmd_rates(args) -> int:
    cfg = _config(args)
    sp, gas, geom, op = cfg.species_record(), cfg.gas_record(), cfg.geometry(), cfg.operating_point()
    n = vapor_density(sp, op.T)
    budget = dark_rate(geom, op, sp, gas, n, area_convention=cfg.beam_area)
    d0 = optical_depth(sp, n, geom.l_z, op.gamma_l(gas)).d0
    items = {"temperature_k": op.T, "eta_amg": op.eta, "alkali_density_per_m3": n,
             "optical_depth": d0}
    for k, v in budget.components().items():
        items[f"{k}_per_s"] = v
    for k, v in budget.cyclic().items():
        items[f"{k}_cyclic"] = v
    items["linewidth_low_od_t"] = linewidth_from_rates(budget, sp)
    for k in ("gamma_wd", "gamma_se", "gamma_sd", "gamma_bg", "gamma_dk", "r_op"):
        items[f"quoted_{k}_cyclic"] = QUOTED_CYCLIC[k]
    for k, v in KNOWN_DEVIATIONS.items():
        items[f"known_deviation_{k}"] = v
    header = zio.provenance_lines(cfg.digest(), cfg.seed, command="rates",
                                  note="rates in events per second; *_cyclic = value / 2pi")
    out = _out_dir(cfg, args)
    _emit(_write(out / "rates.txt", zio.write_report, items, header))
    if cfg.scan:
        spec = ScanSpec.parse(cfg.scan)
        scan = _scan(cfg, spec)
        _write(out / f"scan_{spec.variable}.csv", zio.write_scan, scan, header)
        log.info("wrote %s", out / f"scan_{spec.variable}.csv")
    return 0


def _scan(cfg: RunConfig, spec: ScanSpec):
    sp, gas, geom, op = cfg.species_record(), cfg.gas_record(), cfg.geometry(), cfg.operating_point()
    gamma = cfg.species_record(cfg.sensitivity_species).gamma
    grid = spec.grid()
    try:
        if spec.variable == "eta":
            return rate_scan(geom, sp, gas, op.T, grid, op.measurement_time, gamma)
        if spec.variable == "temperature":
            return temperature_scan(geom, sp, gas, op.eta, grid, op.measurement_time, gamma)
        model = QuotedRateModel.from_quoted() if cfg.rate_model == "quoted" else None
        return sensitivity_vs_volume(sp, gas, op.T, op.measurement_time, grid, geom, gamma, model,
                                     (cfg.eta_min_amg, cfg.eta_max_amg))
    except ValueError as exc:
        raise ConfigError(f"scan: {exc}") from exc


def cmd_optimize(args) -> int:
    cfg = _config(args)
    sp, gas, geom, op = cfg.species_record(), cfg.gas_record(), cfg.geometry(), cfg.operating_point()
    gamma = cfg.species_record(cfg.sensitivity_species).gamma
    n = vapor_density(sp, op.T)
    rng = (cfg.eta_min_amg, cfg.eta_max_amg)
    try:
        phys = optimal_buffer_density(geom, sp, gas, op.T, rng)
        quoted = QuotedRateModel.from_quoted()
        q_opt = minimize_over_eta(quoted.dark_rate, *rng)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    q_eta_cf, q_rate_cf = quoted.closed_form_optimum()
    v = geom.volume()
    t = op.measurement_time
    items = {
        "formula_sensitivity": "delta_b = sqrt(2 e gamma_dk_cyclic / (n V t)) / gamma",
        "formula_optimum": "argmin over eta of gamma_wd + gamma_se + gamma_sd + gamma_bg",
        "alkali_density_per_m3": n,
        "volume_m3": v,
        "measurement_time_s": t,
        "gyromagnetic_ratio_rad_per_s_t": gamma,
        "physical_eta_opt_amg": phys.eta,
        "physical_gamma_dk_min_per_s": phys.gamma_dk,
        "physical_gamma_dk_min_cyclic": RateValue(phys.gamma_dk).cyclic,
        "physical_delta_b_t_per_sqrt_hz": asn_sensitivity(RateValue(phys.gamma_dk), n, v, t, gamma),
        "quoted_eta_opt_amg": q_opt.eta,
        "quoted_eta_opt_closed_form_amg": q_eta_cf,
        "quoted_gamma_dk_min_cyclic": q_opt.gamma_dk,
        "quoted_gamma_dk_min_closed_form_cyclic": q_rate_cf,
        "quoted_delta_b_t_per_sqrt_hz": asn_sensitivity(
            RateValue(q_opt.gamma_dk, RateConvention.CYCLIC), n, v, t, gamma),
        "quoted_delta_b_at_eta_cyclic_2483_t_per_sqrt_hz": asn_sensitivity(
            RateValue(QUOTED_CYCLIC["gamma_dk"], RateConvention.CYCLIC), n, v, t, gamma),
        "degenerate": phys.degenerate,
    }
    header = zio.provenance_lines(cfg.digest(), cfg.seed, command="optimize")
    out = _out_dir(cfg, args)
    _emit(_write(out / "optimize.txt", zio.write_report, items, header))
    if cfg.scan:
        spec = ScanSpec.parse(cfg.scan)
        _write(out / f"scan_{spec.variable}.csv", zio.write_scan, _scan(cfg, spec), header)
    return 0


def cmd_simulate(args) -> int:
    cfg = _config(args)
    disp = cfg.dispersive()
    tones = [(cfg.tone_frequency_hz, cfg.tone_rms_t)] if cfg.tone_rms_t > 0 else []
    try:
        res = simulate_measurement(
            disp, cfg.modulation(), cfg.lowpass(), cfg.sample_rate_hz, cfg.duration_s,
            cfg.noise_asd_v, tones, cfg.seed, cfg.zfr_baseline_v, cfg.settle_s,
            cfg.segment_length, cfg.overlap,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    sp = res.spectrum
    band = cfg.query_band_hz or None
    items = {
        "zfr_a_v": res.zfr.a,
        "zfr_b_v": res.zfr.b,
        "zfr_delta_b_t": res.zfr.delta_b,
        "slope_v_per_t": res.slope,
        "resolution_bandwidth_hz": sp.resolution_bandwidth,
        "query_frequency_hz": cfg.query_frequency_hz,
        "query_band_hz": cfg.query_band_hz,
        "asd_at_query_v_per_sqrt_hz": sp.asd_at(cfg.query_frequency_hz, band),
        "magnetic_noise_t_per_sqrt_hz": equivalent_magnetic_noise(sp, disp, cfg.query_frequency_hz, band),
        "filter_corner_hz": bandwidth_3db(cfg.lowpass())[0],
        "filter_f3db_hz": bandwidth_3db(cfg.lowpass())[1],
    }
    if tones:
        f_t = cfg.tone_frequency_hz
        raw = tone_rms(sp, f_t)
        items["tone_rms_v"] = raw
        items["tone_rms_t"] = raw / filter_response(cfg.lowpass(), f_t, cfg.sample_rate_hz) / res.slope
    header = zio.provenance_lines(cfg.digest(), cfg.seed, command="simulate")
    out = _out_dir(cfg, args)
    _write(out / "pd_signal.csv", zio.write_timeseries, res.pd, header)
    _write(out / "quadrature.csv", zio.write_timeseries, res.quadrature, header)
    _write(out / "asd.csv", zio.write_spectrum, sp, header)
    _emit(_write(out / "simulate.txt", zio.write_report, items, header))
    return 0


def _parse_init(text):
    if not text:
        return None
    init = {}
    for part in text.split(","):
        if "=" not in part:
            raise ConfigError(f"--init expects k=v pairs, got {part!r}")
        k, v = part.split("=", 1)
        try:
            init[k.strip()] = float(v)
        except ValueError:
            raise ConfigError(f"--init value for {k!r} is not a number") from None
    return init


def cmd_fit(args) -> int:
    cfg = _config(args)
    model = args.model
    init = _parse_init(args.init)
    path = Path(args.data)
    try:
        x, y = zio.read_fit_data(path, model)
        digest = zio.file_sha256(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    except zio.SchemaError as exc:
        raise CliError(str(exc), EXIT_SCHEMA) from exc
    try:
        res = fit_curve(model, x, y, init, args.max_iter)
    except FitError as exc:
        raise CliError(str(exc), EXIT_SCHEMA) from exc
    items = {"model": model, "converged": res.converged, "iterations": res.iterations,
             "message": res.message, "residual_rms": res.residual_rms,
             "gradient_norm": res.gradient_norm, "rank_deficient": res.rank_deficient}
    for k in res.params:
        items[k] = res.params[k]
        items[f"{k}_stderr"] = res.stderr[k]
    if model == "absorption" and res.converged:
        items["derived_eta_amg"] = derive_pressure(res, cfg.gas_record())
    if model == "dispersive":
        items["slope_v_per_t"] = 2.0 * res.params["u"] / res.params["delta_b"]
    init_text = ",".join(f"{k}={v!r}" for k, v in res.init.items())
    header = zio.provenance_lines(cfg.digest(), None, command="fit", input_file=path.name,
                                  input_sha256=digest, model=model, init=init_text)
    out = _out_dir(cfg, args)
    _emit(_write(out / f"fit_{model}.txt", zio.write_report, items, header))
    return 0 if res.converged else EXIT_NOCONV


def cmd_asd(args) -> int:
    cfg = _config(args)
    try:
        ts = zio.read_timeseries(args.series)
    except OSError as exc:
        raise CliError(f"cannot read {args.series}: {exc}", EXIT_IO) from exc
    except zio.SchemaError as exc:
        raise CliError(str(exc), EXIT_SCHEMA) from exc
    seg = args.segment or min(cfg.segment_length, len(ts))
    try:
        sp = asd_estimate(ts, seg, cfg.overlap)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_SCHEMA) from exc
    header = zio.provenance_lines(cfg.digest(), ts.seed, command="asd", input_file=Path(args.series).name)
    out = _out_dir(cfg, args)
    _write(out / "asd.csv", zio.write_spectrum, sp, header)
    _emit(f"wrote {out / 'asd.csv'} ({sp.freqs.size} bins, rbw {sp.resolution_bandwidth:.6g} Hz)\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--out", help="output directory (default: config out_dir)")
    common.add_argument("--seed", type=int, help="noise seed (overrides config)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="zfropm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"zfropm {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rates", parents=[common], help="relaxation and pumping rate budget")
    s.add_argument("--scan", help="var=min:max:log|lin:n with var in eta, temperature, volume")
    s.set_defaults(func=cmd_rates)

    s = sub.add_parser("optimize", parents=[common], help="buffer-gas optimum and shot-noise sensitivity")
    s.add_argument("--scan", help="var=min:max:log|lin:n, e.g. volume=1e-10:1e-7:log:30")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("simulate", parents=[common], help="simulate the lock-in chain and its ASD")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit", parents=[common], help="fit a line model to a CSV file")
    s.add_argument("--model", required=True, choices=sorted(zio.SCHEMAS))
    s.add_argument("--init", help="initial values, e.g. u=6,delta_b=2e-7")
    s.add_argument("--max-iter", type=int, default=MAX_ITER, help="iteration cap (default %(default)s)")
    s.add_argument("data")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("asd", parents=[common], help="Welch ASD of a time-series file")
    s.add_argument("series")
    s.add_argument("--segment", type=int, help="segment length in samples")
    s.set_defaults(func=cmd_asd)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"zfropm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CliError as exc:
        print(f"zfropm: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
