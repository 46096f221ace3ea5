"""CSV and structured-text readers/writers.

Every file opens with ``#`` comment lines carrying provenance; readers skip
them. Numeric columns are SI with unit suffixes in their names.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from . import __version__
from .design import DesignScan
from .signal_chain import Spectrum, TimeSeries

SCHEMAS = {
    "zfr": ("field_t", "voltage_v"),
    "dispersive": ("field_t", "voltage_v"),
    "absorption": ("freq_hz", "transmission"),
}


class SchemaError(ValueError):
    pass


def provenance_lines(config_hash: str = "", seed=None, **extra) -> list[str]:
    lines = [f"# tool = zfropm {__version__}", f"# config_sha256 = {config_hash or 'none'}",
             f"# seed = {'none' if seed is None else seed}"]
    lines += [f"# {k} = {v}" for k, v in extra.items()]
    return lines


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt_array(a):
    return "\n".join(np.char.mod("%.12e", np.asarray(a, dtype=float)))


def write_timeseries(path, ts: TimeSeries, header: list[str] = ()) -> None:
    seed = "none" if ts.seed is None else ts.seed
    lines = [f"# sample_rate_hz={ts.sample_rate!r} seed={seed}", *header]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
        fh.write(_fmt_array(ts.samples) + "\n")


def read_timeseries(path) -> TimeSeries:
    fs = None
    seed = None
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("#"):
        for tok in first[1:].split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                if k == "sample_rate_hz":
                    fs = float(v)
                elif k == "seed" and v != "none":
                    seed = int(v)
    if fs is None:
        raise SchemaError(f"{path}: missing '# sample_rate_hz=<v>' header line")
    try:
        data = np.loadtxt(path, comments="#", ndmin=1)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    if data.ndim != 1:
        raise SchemaError(f"{path}: expected one voltage per line")
    try:
        return TimeSeries(fs, data, 0.0, seed)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def write_spectrum(path, sp: Spectrum, header: list[str] = ()) -> None:
    with open(path, "w") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write(f"# resolution_bandwidth_hz = {sp.resolution_bandwidth!r}\n")
        fh.write("freq_hz,asd_v_per_sqrt_hz\n")
        for f, a in zip(sp.freqs, sp.asd):
            fh.write(f"{f:.12e},{a:.12e}\n")


def read_spectrum(path) -> Spectrum:
    rbw = None
    with open(path) as fh:
        for line in fh:
            if line.startswith("# resolution_bandwidth_hz"):
                rbw = float(line.split("=", 1)[1])
    x, y = read_columns(path, ("freq_hz", "asd_v_per_sqrt_hz"))
    if rbw is None:
        rbw = float(x[1] - x[0])
    return Spectrum(x, y, rbw)


def read_columns(path, names) -> tuple[np.ndarray, ...]:
    """Read a comma-separated file whose first non-comment line names ``names``."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    head = [h.strip() for h in lines[0].split(",")]
    if tuple(head) != tuple(names):
        raise SchemaError(f"{path}: expected columns {','.join(names)}, got {lines[0]!r}")
    rows = []
    for i, ln in enumerate(lines[1:], 2):
        parts = ln.split(",")
        if len(parts) != len(names):
            raise SchemaError(f"{path}: row {i} has {len(parts)} fields, expected {len(names)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise SchemaError(f"{path}: row {i} is not numeric: {ln!r}") from None
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    arr = np.array(rows)
    return tuple(arr[:, j] for j in range(len(names)))


def read_fit_data(path, model: str):
    if model not in SCHEMAS:
        raise SchemaError(f"unknown model {model!r}")
    return read_columns(path, SCHEMAS[model])


def write_xy(path, x, y, model: str, header: list[str] = ()) -> None:
    with open(path, "w") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write(",".join(SCHEMAS[model]) + "\n")
        for a, b in zip(x, y):
            fh.write(f"{a:.15e},{b:.15e}\n")


def write_report(path, items: dict, header: list[str] = ()) -> str:
    """Structured text: comment header, then ``key = value`` lines. Returns the text."""
    lines = list(header)
    for k, v in items.items():
        if isinstance(v, float):
            v = repr(v)
        lines.append(f"{k} = {v}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def read_report(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


SCAN_COLUMNS = {
    "eta": "eta_amg",
    "temperature": "temperature_k",
    "volume": "volume_m3",
}


def write_scan(path, scan: DesignScan, header: list[str] = ()) -> None:
    cols = [SCAN_COLUMNS[scan.variable], "gamma_wd_per_s", "gamma_se_per_s", "gamma_sd_per_s",
            "gamma_bg_per_s", "gamma_dk_per_s", "delta_b_asn_t_per_sqrt_hz"]
    data = [scan.grid] + [scan.column(n) for n in ("gamma_wd", "gamma_se", "gamma_sd",
                                                   "gamma_bg", "gamma_dk")] + [scan.delta_b]
    for name, values in scan.extra.items():
        cols.append(f"{name}_amg" if name.startswith("eta") else name)
        data.append(values)
    with open(path, "w") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write(",".join(cols) + "\n")
        for row in zip(*data):
            fh.write(",".join(f"{v:.12e}" for v in row) + "\n")
