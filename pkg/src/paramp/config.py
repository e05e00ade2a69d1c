"""Experiment configuration: schema, defaults and line-numbered validation.

Configurations are YAML files with the sections ``model``, ``drive``,
``numerics`` and ``circuit`` plus the top-level keys ``task`` and ``seed``.
Every key has an explicit default (see :data:`SCHEMA`); unknown keys are
rejected with the line they appear on. Frequencies and rates are linear
(Hz) in the file and converted to rad/s by the consumers.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import yaml

from .errors import ConfigError

TASKS = ("scatter", "gain-sweep", "pout-sweep", "threshold-sweep", "wigner", "mc", "circuit-params")


@dataclass(frozen=True)
class Field:
    default: Any
    kind: str  # float | int | str | bool | floats | sweep
    doc: str = ""
    nullable: bool = False
    choices: Optional[tuple] = None
    positive: bool = False


def _f(default, doc="", **kw):
    return Field(default, "float", doc, **kw)


SCHEMA = {
    "task": Field(None, "str", "task name; must match the command line if given", nullable=True, choices=TASKS),
    "seed": Field(0, "int", "master seed for stochastic tasks"),
    "model": {
        "topology": Field("non-degenerate", "str", "degenerate | non-degenerate", choices=("degenerate", "non-degenerate")),
        "signal_frequency_hz": _f(10.0e9, "signal mode frequency", positive=True),
        "signal_kappa_hz": _f(100.0e6, "signal mode linewidth", positive=True),
        "idler_frequency_hz": _f(7.0e9, "idler mode frequency (non-degenerate only)", positive=True),
        "idler_kappa_hz": _f(100.0e6, "idler mode linewidth (non-degenerate only)", positive=True),
        "pump_frequency_hz": _f(
            None, "pump mode frequency; null puts it at the sum frequency", nullable=True, positive=True
        ),
        "pump_kappa_hz": _f(600.0e6, "pump mode linewidth", positive=True),
        "coupling_hz": _f(1.0e5, "three-wave coupling g3 (or g2 for degenerate)", positive=True),
    },
    "drive": {
        "pump_by": Field("gain_db", "str", "how pump_values are read", choices=("gain_db", "rho0", "power_dbm")),
        "pump_values": Field([5.0, 10.0, 15.0, 20.0, 25.0, 30.0], "floats", "pump settings, one curve each"),
        "pump_phase": _f(0.0, "pump phase (rad)"),
        "signal_power_dbm": Field(
            {"start": -160.0, "stop": -50.0, "points": 221}, "sweep", "incident signal power sweep or list"
        ),
        "signal_phase": _f(None, "signal phase (rad); null picks the topology default", nullable=True),
        "signal_detuning_hz": Field(
            {"start": -200.0e6, "stop": 200.0e6, "points": 401}, "sweep", "signal detuning for scatter"
        ),
    },
    "numerics": {
        "depletion": {
            "tol": _f(1e-12, positive=True),
            "damping": _f(0.3, positive=True),
            "max_iter": Field(100_000, "int"),
        },
        "compression": {
            "drop_db": _f(1.0, positive=True),
            "reference": Field("small-signal", "str", choices=("small-signal", "undepleted")),
            "window_dbm": Field([-160.0, -50.0], "floats"),
            "points_per_decade": Field(20, "int"),
            "rtol": _f(1e-6, positive=True),
        },
        "threshold": {
            "cap_db": _f(40.0, positive=True),
            "rtol": _f(1e-4, positive=True),
            "scan_step_db": _f(1.0, positive=True),
            "manifold": Field(None, "str", nullable=True, choices=("full", "phase-locked")),
            "max_output_step_db": _f(0.01, positive=True),
        },
        "wigner": {
            "points": Field(161, "int", "grid points per axis"),
            "halfwidth_sigma": _f(6.0, "grid half-width in standard deviations", positive=True),
        },
        "mc": {
            "n_traj": Field(10_000, "int"),
            "burn_in_kappa": _f(40.0, "burn-in in units of 1/kappa_a", positive=True),
            "n_samples": Field(4, "int"),
            "sample_interval_kappa": _f(2.0, "sample spacing in units of 1/kappa_a", positive=True),
            "dt_kappa": _f(None, "time step in units of 1/kappa_a; null uses the default", nullable=True, positive=True),
            "integrator": Field("heun", "str", choices=("euler", "heun")),
            "workers": Field(1, "int"),
            "bins": Field(61, "int"),
        },
    },
    "circuit": {
        "duffing": {
            "L_J_h": _f(1.0e-9, positive=True),
            "C_sigma_f": _f(1.0e-12, positive=True),
            "kappa_hz": _f(50.0e6, positive=True),
            "drive_detuning_hz": _f(0.0, "drive frequency minus small-amplitude resonance"),
            "drive_power_dbm": Field([-150.0, -140.0, -135.0, -130.0], "floats"),
        },
        "squid": {
            "L_J_h": _f(0.5e-9, positive=True),
            "C_sigma_f": _f(1.0e-12, positive=True),
            "flux_bias": _f(0.25),
            "modulation_depth": _f(0.02),
            "pump_frequency_hz": _f(None, nullable=True, positive=True),
        },
        "double_pump": {
            "phi_a": _f(0.1, positive=True),
            "phi_c": _f(0.1, positive=True),
            "phi_q": _f(0.3, positive=True),
            "E_J_hz": _f(20.0e9, "Josephson energy divided by h", positive=True),
            "omega_a_hz": _f(8.0e9, positive=True),
            "omega_c_hz": _f(10.0e9, positive=True),
            "kappa_c_hz": _f(20.0e6, positive=True),
            "eps_p_hz": _f(100.0e6),
            "eps_c_hz": _f(0.0),
        },
        "jrm": {
            "g3_hz": _f(1.0e5, positive=True),
            "pump_power_dbm": _f(-90.0),
            "drive_frequency_hz": _f(17.0e9, positive=True),
            "omega_a_hz": _f(7.0e9, positive=True),
            "omega_b_hz": _f(10.0e9, positive=True),
            "omega_c_hz": _f(17.0e9, positive=True),
            "kappa_a_hz": _f(100.0e6, positive=True),
            "kappa_b_hz": _f(100.0e6, positive=True),
            "kappa_c_hz": _f(600.0e6, positive=True),
        },
    },
}


def defaults(schema=SCHEMA):
    out = {}
    for key, spec in schema.items():
        out[key] = defaults(spec) if isinstance(spec, dict) else copy.deepcopy(spec.default)
    return out


def _line(node):
    return node.start_mark.line + 1


def _construct(node):
    return yaml.SafeLoader(b"").construct_object(node, deep=True)


def _check_value(spec: Field, node, path):
    line = _line(node)
    try:
        value = _construct(node)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}", line) from None
    if value is None:
        if spec.nullable:
            return None
        raise ConfigError(f"{path} may not be null", line)
    kind = spec.kind
    # YAML 1.1 reads 1e-12 (no dot) as a string
    if kind in ("float", "floats", "sweep"):
        value = _numeric(value)
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be a number, got {value!r}", line)
        value = float(value)
        if spec.positive and not value > 0:
            raise ConfigError(f"{path} must be positive", line)
    elif kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path} must be an integer, got {value!r}", line)
    elif kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{path} must be a string, got {value!r}", line)
    elif kind == "floats":
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{path} must be a non-empty list of numbers", line)
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
            raise ConfigError(f"{path} must contain numbers only", line)
        value = [float(v) for v in value]
    elif kind == "sweep":
        value = _check_sweep(value, path, line)
    if spec.choices is not None and value not in spec.choices:
        raise ConfigError(f"{path} must be one of {', '.join(map(str, spec.choices))}; got {value!r}", line)
    return value


def _numeric(value):
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    if isinstance(value, list):
        return [_numeric(v) for v in value]
    if isinstance(value, dict):
        return {k: _numeric(v) for k, v in value.items()}
    return value


def _check_sweep(value, path, line):
    if isinstance(value, bool):
        raise ConfigError(f"{path} must be a number, list or start/stop/points mapping", line)
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, list):
        if not value or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
            raise ConfigError(f"{path} must be a non-empty list of numbers", line)
        return [float(v) for v in value]
    if isinstance(value, dict):
        if set(value) != {"start", "stop", "points"}:
            raise ConfigError(f"{path} mapping needs exactly start, stop, points", line)
        pts = value["points"]
        if isinstance(pts, bool) or not isinstance(pts, int) or pts < 1:
            raise ConfigError(f"{path}.points must be a positive integer", line)
        try:
            return {"start": float(value["start"]), "stop": float(value["stop"]), "points": pts}
        except (TypeError, ValueError):
            raise ConfigError(f"{path} start/stop must be numbers", line) from None
    raise ConfigError(f"{path} must be a number, list or start/stop/points mapping", line)


def _merge(schema, node, out, path, lines):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"{path or 'document'} must be a mapping", _line(node))
    seen = set()
    for key_node, value_node in node.value:
        key = key_node.value
        full = f"{path}.{key}" if path else key
        if key in seen:
            raise ConfigError(f"duplicate key {full}", _line(key_node))
        seen.add(key)
        if key not in schema:
            raise ConfigError(f"unknown key {full}", _line(key_node))
        spec = schema[key]
        lines[full] = _line(value_node)
        if isinstance(spec, dict):
            if isinstance(value_node, yaml.ScalarNode) and value_node.tag.endswith(":null"):
                continue
            _merge(spec, value_node, out[key], full, lines)
        else:
            out[key] = _check_value(spec, value_node, full)


def loads(text: str) -> dict:
    """Validate YAML text and return the full configuration with defaults.

    Raises
    ------
    ConfigError
        With the offending line number for schema violations.
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", mark.line + 1 if mark else None) from None
    cfg = defaults()
    lines = {}
    if node is not None:
        _merge(SCHEMA, node, cfg, "", lines)
    _cross_check(cfg, lines)
    return cfg


def load(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def _cross_check(cfg, lines):
    def fail(path, message):
        raise ConfigError(f"{path}: {message}", lines.get(path))

    w = cfg["numerics"]["compression"]["window_dbm"]
    if len(w) != 2 or not w[0] < w[1]:
        fail("numerics.compression.window_dbm", "must be [low, high] with low < high")
    mc = cfg["numerics"]["mc"]
    for key in ("n_traj", "n_samples", "workers", "bins"):
        if mc[key] < 1:
            fail(f"numerics.mc.{key}", "must be >= 1")
    if cfg["numerics"]["wigner"]["points"] < 3:
        fail("numerics.wigner.points", "must be >= 3")
    for key in ("max_iter",):
        if cfg["numerics"]["depletion"][key] < 1:
            fail(f"numerics.depletion.{key}", "must be >= 1")
    if cfg["numerics"]["compression"]["points_per_decade"] < 1:
        fail("numerics.compression.points_per_decade", "must be >= 1")
    drive = cfg["drive"]
    if drive["pump_by"] == "gain_db" and min(drive["pump_values"]) < 0:
        fail("drive.pump_values", "gains must be >= 0 dB")
    if drive["pump_by"] == "rho0" and min(drive["pump_values"]) < 0:
        fail("drive.pump_values", "rho0 must be >= 0")


def dumps(cfg: dict) -> str:
    """Render a configuration as YAML (keys in schema order)."""
    return yaml.safe_dump(cfg, sort_keys=False, default_flow_style=None, width=100)


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical JSON form, independent of file formatting."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def sweep_values(spec) -> np.ndarray:
    """Expand a sweep entry (list or start/stop/points mapping)."""
    if isinstance(spec, dict):
        return np.linspace(spec["start"], spec["stop"], spec["points"])
    return np.asarray(spec, dtype=float)
