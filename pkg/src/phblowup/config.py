"""Run configuration: an INI file with [system], [verify] and [output] sections.

Grammar (all keys optional unless marked)::

    [system]
    variant = product | twisted | blownup | double | suspension   (required)
    A = [[1.2, 0], [0, 0.8333333333333334]]     (required) JSON rows; a complex
                                                entry is written [re, im]
    B = [[2, 1], [1, 1]]                        (required) integer matrix
    r0 = 0.2
    r1 = 0.4
    eps = 0.05            blow-up radius; used by blownup, double, suspension
    blown = false         suspension only: suspend the blown-up system
    twist = 0.0
    lam, mu               chain constants; derived from A and B when absent
    delta = 0.02
    K = 1.0

    [verify]
    n_max = 50
    samples = 1000
    seed = 0
    eps_list = [0.2, 0.1, 0.05, 0.025]
    regions = all, core, sphere
    t_list = [1, 2, 5]
    tol = 1e-6
    iters = 200

    [output]
    dir = out
    formats = csv
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .systems import ConnectedSum, ModelSystem, PHConstants, Suspension, default_ph_constants

SYSTEM_VARIANTS = ("product", "twisted", "blownup", "double", "suspension")


def _entry(x):
    if isinstance(x, list):
        if len(x) != 2:
            raise ConfigError(f"complex entry must be [re, im], got {x}")
        return complex(float(x[0]), float(x[1]))
    return x


def parse_matrix(text: str) -> np.ndarray:
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"matrix is not valid JSON: {text!r}") from exc
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(f"matrix must be a list of rows: {text!r}")
    vals = [[_entry(x) for x in r] for r in rows]
    if any(isinstance(x, complex) for r in vals for x in r):
        return np.array(vals, dtype=complex)
    return np.array(vals, dtype=float)


def format_matrix(M) -> str:
    M = np.asarray(M)
    if np.iscomplexobj(M):
        rows = [[[float(z.real), float(z.imag)] for z in r] for r in M]
    else:
        rows = [[float(x) for x in r] for r in M]
    return json.dumps(rows)


@dataclass
class RunConfig:
    system: dict
    verify: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    text: str = ""

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()

    @property
    def variant(self) -> str:
        return self.system["variant"]

    @property
    def seed(self) -> int:
        return self.verify["seed"]

    def build(self):
        """ModelSystem, ConnectedSum or Suspension described by the [system] section."""
        s = self.system
        blown = s["variant"] in ("blownup", "double") or (s["variant"] == "suspension" and s["blown"])
        kwargs = dict(r0=s["r0"], r1=s["r1"], twist=s["twist"], blown=blown, eps=s["eps"])
        sys = ModelSystem(s["A"], s["B"], **kwargs)
        base = default_ph_constants(sys.A, sys.B)
        lam = s["lam"] if s["lam"] is not None else base.lam
        mu = s["mu"] if s["mu"] is not None else base.mu
        sys.ph = PHConstants(lam, mu, s["delta"], s["K"])
        if s["variant"] == "double":
            return ConnectedSum(sys, sys)
        if s["variant"] == "suspension":
            return Suspension(sys)
        return sys


def _get(section, key, conv, default):
    if key not in section:
        return default
    raw = section[key]
    try:
        return conv(raw)
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def _bool(text):
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def _float_list(text):
    return [float(x) for x in json.loads(text)]


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    if "system" not in cp:
        raise ConfigError("missing [system] section")
    sec = cp["system"]
    for key in ("variant", "A", "B"):
        if key not in sec:
            raise ConfigError(f"[system] needs '{key}'")
    variant = sec["variant"].strip()
    if variant not in SYSTEM_VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; expected one of {SYSTEM_VARIANTS}")
    system = {
        "variant": variant,
        "A": parse_matrix(sec["A"]),
        "B": parse_matrix(sec["B"]),
        "r0": _get(sec, "r0", float, 0.2),
        "r1": _get(sec, "r1", float, 0.4),
        "eps": _get(sec, "eps", float, 0.05),
        "blown": _get(sec, "blown", _bool, False),
        "twist": _get(sec, "twist", float, 0.0),
        "lam": _get(sec, "lam", float, None),
        "mu": _get(sec, "mu", float, None),
        "delta": _get(sec, "delta", float, 0.02),
        "K": _get(sec, "K", float, 1.0),
    }
    ver = cp["verify"] if "verify" in cp else {}
    verify = {
        "n_max": _get(ver, "n_max", int, 50),
        "samples": _get(ver, "samples", int, 1000),
        "seed": _get(ver, "seed", int, 0),
        "eps_list": _get(ver, "eps_list", _float_list, [0.2, 0.1, 0.05, 0.025]),
        "regions": _get(ver, "regions", lambda x: [r.strip() for r in x.split(",") if r.strip()],
                        ["all", "core", "sphere"]),
        "t_list": _get(ver, "t_list", _float_list, [1.0, 2.0, 5.0]),
        "tol": _get(ver, "tol", float, 1e-6),
        "iters": _get(ver, "iters", int, 200),
    }
    out = cp["output"] if "output" in cp else {}
    output = {
        "dir": _get(out, "dir", str, "out"),
        "formats": _get(out, "formats", lambda x: [f.strip() for f in x.split(",")], ["csv"]),
    }
    if output["formats"] != ["csv"]:
        raise ConfigError("only csv output is supported")
    cfg = RunConfig(system, verify, output, text)
    # every matrix must pass its own checks before any run starts
    try:
        cfg.build()
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid system: {exc}") from exc
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


# -- shipped presets ------------------------------------------------------------------
_CAT = "[[2, 1], [1, 1]]"
_DIAG12 = format_matrix(np.diag([1.2, 1 / 1.2]))


def _preset(variant, A=_DIAG12, extra_system="", verify="", samples=1000):
    return (
        f"[system]\nvariant = {variant}\nA = {A}\nB = {_CAT}\n{extra_system}"
        f"\n[verify]\nn_max = 50\nsamples = {samples}\nseed = 0\n{verify}"
        f"\n[output]\ndir = out\nformats = csv\n"
    )


PRESETS = {
    "product": _preset("product"),
    "twisted": _preset("twisted", extra_system="twist = 0.1\n"),
    "blownup-real": _preset("blownup", extra_system="eps = 0.05\n"),
    "blownup-complex": _preset(
        "blownup",
        A=format_matrix(np.array([[1.2 * np.exp(0.3j), 0.1], [0, np.exp(-0.5j) / 1.2]])),
        extra_system="eps = 0.05\n",
        samples=256,
    ),
    "double": _preset("double", extra_system="eps = 0.05\ntwist = 0.1\n"),
    "suspension": _preset("suspension", samples=200, verify="t_list = [1, 2, 5]\n"),
}
CONTROL_PRESETS = {
    "sabotage": _preset("blownup", A=format_matrix(np.diag([2.0, 0.5])), extra_system="eps = 0.05\n"),
}


def preset_text(name: str) -> str:
    if name in PRESETS:
        return PRESETS[name]
    if name in CONTROL_PRESETS:
        return CONTROL_PRESETS[name]
    raise ConfigError(f"unknown preset {name!r}")
