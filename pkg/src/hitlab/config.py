"""Run configuration: a strict TOML tree with defaults and path-named errors.

The schema is flat sections of scalar keys (plus a few float arrays).
Unknown sections or keys are rejected rather than ignored, so a typo in a
config file fails loudly with the offending dotted path.  validate_config
returns the fully resolved tree (defaults filled in), which is what run
manifests echo.
"""
from __future__ import annotations

import math
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:      # python < 3.11
    import tomli as tomllib

from .errors import ConfigError

__all__ = ["SCHEMA_VERSION", "load_config", "validate_config", "resolved_defaults"]

SCHEMA_VERSION = 1


def _positive(x):
    return math.isfinite(x) and x > 0.0


def _non_negative(x):
    return math.isfinite(x) and x >= 0.0


def _fraction(x):
    return 0.0 < x < 1.0


# (type, default, check or None); check returns False to reject the value
_SCHEMA = {
    "": {
        "schema_version": (int, SCHEMA_VERSION, lambda v: v == SCHEMA_VERSION),
        "seed": (int, 0, lambda v: v >= 0),
        "out": (str, "out", None),
        "workers": (int, 1, lambda v: v >= 1),
        "quiet": (bool, False, None),
    },
    "grid": {
        "k_min": (float, 0.02, _positive),
        "nodes_per_decade": (int, 32, lambda v: v >= 4),
        "kmax_over_kd": (float, 2.5, lambda v: v >= 1.0),
        "k_max": (float, 0.0, _non_negative),  # 0 means derive from kmax_over_kd
    },
    "initial": {
        "peak_wavenumber": (float, 0.12, _positive),
        "energy": (float, 0.5, _positive),
    },
    "closure": {
        "damping_constant": (float, 0.36, _positive),
    },
    "forcing": {
        "mode": (str, "band", lambda v: v in ("none", "band")),
        "band_top": (float, 0.16, _positive),
        "band_bottom": (float, 0.1, _non_negative),
        "injection_rate": (float, 1.0, _non_negative),
    },
    "run": {
        "nu": (float, 0.0015, _positive),
        "t_end": (float, 10.0, _positive),
        "max_time": (float, 400.0, _positive),
        "safety": (float, 0.25, _fraction),
        "sample_every": (int, 10, lambda v: v >= 1),
        "stationarity_rtol": (float, 0.01, _positive),
        "keep_spectra": (bool, False, None),
    },
    "sweep": {
        "nu_list": (list, [], lambda v: all(_positive(x) for x in v)),
        "max_time": (float, 400.0, _positive),
    },
    "collapse": {
        "mode": (str, "k41", lambda v: v in ("k41", "k62")),
        "mu": (float, 0.1, lambda v: 0.0 <= v < 1.0),
        "members": (int, 3, lambda v: v >= 2),
        "external_scale_factor": (float, 1.0, _positive),
    },
    "temporal": {
        "mode": (str, "kolmogorov", lambda v: v in ("kolmogorov", "sweeping")),
        "n_realizations": (int, 64, lambda v: v >= 1),
        "n_modes": (int, 36, lambda v: v >= 2),
        "k_lo": (float, 1.0, _positive),
        "k_hi": (float, 316.23, _positive),
        "epsilon": (float, 1.0, _positive),
        "sweep_velocity": (float, 1.0, _positive),
        "broadening": (float, 1.0, _positive),
        "window": (str, "hann", None),
    },
    "rg": {
        "h": (float, 0.7, _fraction),
        "h_list": (list, [], lambda v: all(_fraction(x) for x in v)),
        "nu0": (float, 1.0, _positive),
        "amplitude": (float, 0.11, _positive),
        "tolerance": (float, 1e-8, _positive),
    },
    "khe": {
        "r_per_decade": (int, 48, lambda v: v >= 8),
    },
}

_FLOAT_LISTS = {("sweep", "nu_list"), ("rg", "h_list")}


def resolved_defaults() -> dict:
    """The full config tree with every key at its default."""
    out = {}
    for section, keys in _SCHEMA.items():
        tree = {k: (list(d) if isinstance(d, list) else d) for k, (_, d, _) in keys.items()}
        if section == "":
            out.update(tree)
        else:
            out[section] = tree
    return out


def _check_scalar(path, value, typ, check):
    # bool is an int subclass; keep the two apart
    if typ is int and isinstance(value, bool):
        raise ConfigError(f"{path}: expected int, got bool")
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, typ):
        raise ConfigError(
            f"{path}: expected {typ.__name__}, got {type(value).__name__}")
    if check is not None and not check(value):
        raise ConfigError(f"{path}: value {value!r} out of range")
    return value


def validate_config(doc: dict) -> dict:
    """Validate a parsed tree against the schema; return it fully resolved."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a table")
    resolved = resolved_defaults()
    for key, value in doc.items():
        if isinstance(value, dict):
            if key not in _SCHEMA or key == "":
                raise ConfigError(f"unknown section: {key}")
            for sub, sub_value in value.items():
                if sub not in _SCHEMA[key]:
                    raise ConfigError(f"unknown key: {key}.{sub}")
                typ, _, check = _SCHEMA[key][sub]
                if (key, sub) in _FLOAT_LISTS:
                    if not isinstance(sub_value, list):
                        raise ConfigError(f"{key}.{sub}: expected array")
                    vals = []
                    for i, item in enumerate(sub_value):
                        if isinstance(item, bool) or not isinstance(item, (int, float)):
                            raise ConfigError(f"{key}.{sub}[{i}]: expected number")
                        vals.append(float(item))
                    if check is not None and not check(vals):
                        raise ConfigError(f"{key}.{sub}: values out of range")
                    resolved[key][sub] = vals
                else:
                    resolved[key][sub] = _check_scalar(f"{key}.{sub}", sub_value, typ, check)
        else:
            if key not in _SCHEMA[""]:
                raise ConfigError(f"unknown key: {key}")
            typ, _, check = _SCHEMA[""][key]
            resolved[key] = _check_scalar(key, value, typ, check)
    return resolved


def load_config(path) -> dict:
    """Parse a TOML file and validate it; ConfigError on any schema breach."""
    path = Path(path)
    try:
        with open(path, "rb") as f:
            doc = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return validate_config(doc)
