"""Experiment configuration: JSON file merged over defaults, schema-checked."""

from __future__ import annotations

import copy
import json

import jsonschema

DEFAULTS = {
    "landscape": {
        "type": "quantum",
        "qubits": 4,
        "layers": 4,
        "observable": "global",
        "kind": "cosine",
        "coefficients": [1.0, 1.0],
        "value": 0.0,
    },
    "walk": {
        "mode": "isotropic",
        "step_size": 0.1,
        "multiplier": 50,
        "steps": None,
        "seed": 0,
        "start": None,
        "repetitions": 5,
        "write_theta": False,
    },
    "ic": {
        "eta": 0.05,
        "grid_size": 200,
        "grid_low": 1e-8,
        "grid_high": 10.0,
        "epsilons": None,
    },
    "scan": {
        "qubits": list(range(2, 15)),
        "layers": list(range(4, 17, 2)),
        "observables": ["local", "global"],
        "repetitions": 5,
    },
    "fit": {"weighted": False},
    "jobs": 1,
    "output": "out",
}

_POS_INT = {"type": "integer", "minimum": 1}
_POS_NUM = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "landscape": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "type": {"enum": ["quantum", "analytic"]},
                "qubits": {"type": "integer", "minimum": 2, "maximum": 16},
                "layers": _POS_INT,
                "observable": {"enum": ["local", "global"]},
                "kind": {"enum": ["linear", "cosine", "constant"]},
                "coefficients": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "value": {"type": "number"},
            },
        },
        "walk": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["isotropic", "over-sample"]},
                "step_size": _POS_NUM,
                "multiplier": _POS_INT,
                "steps": {"oneOf": [{"type": "null"}, {"type": "integer", "minimum": 2}]},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "start": {
                    "oneOf": [
                        {"type": "null"},
                        {"const": "zero"},
                        {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    ]
                },
                "repetitions": _POS_INT,
                "write_theta": {"type": "boolean"},
            },
        },
        "ic": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1 / 6},
                "grid_size": {"type": "integer", "minimum": 2},
                "grid_low": _POS_NUM,
                "grid_high": _POS_NUM,
                "epsilons": {
                    "oneOf": [
                        {"type": "null"},
                        {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2},
                    ]
                },
            },
        },
        "scan": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "qubits": {"type": "array", "items": {"type": "integer", "minimum": 2, "maximum": 16},
                           "minItems": 1, "uniqueItems": True},
                "layers": {"type": "array", "items": _POS_INT, "minItems": 1, "uniqueItems": True},
                "observables": {"type": "array", "items": {"enum": ["local", "global"]},
                                "minItems": 1, "uniqueItems": True},
                "repetitions": _POS_INT,
            },
        },
        "fit": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"weighted": {"type": "boolean"}},
        },
        "jobs": _POS_INT,
        "output": {"type": "string", "minLength": 1},
    },
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def _path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) if parts else "<root>"


def validate(config: dict) -> dict:
    """Check ``config`` against the schema and cross-field rules; returns it."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        msg = "; ".join(f"{_path(e)}: {e.message}" for e in errors)
        raise ConfigError(f"invalid config: {msg}")
    ic = config.get("ic", {})
    if ic.get("grid_low", 0) >= ic.get("grid_high", 1):
        raise ConfigError("invalid config: ic.grid_low: must be smaller than ic.grid_high")
    eps = ic.get("epsilons")
    if eps is not None and any(b <= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("invalid config: ic.epsilons: must be strictly increasing")
    land = config.get("landscape", {})
    if land.get("type") == "analytic" and land.get("kind") != "constant":
        start = config.get("walk", {}).get("start")
        if isinstance(start, list) and len(start) != len(land.get("coefficients", [])):
            raise ConfigError("invalid config: walk.start: length must match landscape.coefficients")
    return config


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the JSON file at ``path``, then ``overrides``; validated."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        cfg = _merge(cfg, user)
    if overrides:
        cfg = _merge(cfg, overrides)
    return validate(cfg)
