"""CSV report writers. Headers are fixed; provenance goes in leading '#' lines."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

RATES_HEADER = ("eps", "n", "worst_upper_ratio", "worst_lower_ratio", "C_emp")
SWEEP_HEADER = ("eps", "C_emp", "mean_return_time")
PH_HEADER = ("band", "exponent_low", "exponent_high", "delta_margin", "verdict")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows, config_hash: str, seed: int, extra: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# config_sha256={config_hash}\n# seed={seed}\n")
        for key, val in (extra or {}).items():
            fh.write(f"# {key}={val}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """(comment dict, header, rows) of a report written by write_csv."""
    meta, lines = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key] = val
        else:
            lines.append(line)
    rows = list(csv.reader(lines))
    return meta, tuple(rows[0]), rows[1:]


def write_rates(path, certs, config_hash, seed):
    rows = (row for cert in certs for row in cert.rows())
    extra = {"regions": ",".join(c.region for c in certs)}
    return write_csv(path, RATES_HEADER, rows, config_hash, seed, extra)


def write_sweep(path, report, config_hash, seed):
    return write_csv(path, SWEEP_HEADER, report.rows(), config_hash, seed, {"return_constant_c": repr(report.c)})


def write_ph(path, cert, config_hash, seed):
    return write_csv(path, PH_HEADER, cert.rows(), config_hash, seed)
