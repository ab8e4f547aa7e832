"""Experiment configuration: JSON schema, defaults and resolution."""
from __future__ import annotations

import copy
import json
import os

import jsonschema

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_SITES = {"type": "array", "items": {"type": "integer", "minimum": 1}}

SCHEMA = {
    "type": "object",
    "required": ["chain"],
    "additionalProperties": False,
    "properties": {
        "chain": {
            "type": "object",
            "required": ["n_sites"],
            "additionalProperties": False,
            "properties": {
                "scheme": {"enum": ["uniform_pst", "explicit"]},
                "n_sites": {"type": "integer", "minimum": 2},
                "couplings": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "fields": {"type": "array", "items": {"type": "number"}},
                "transfer_time": {"type": "number", "exclusiveMinimum": 0},
            },
            "if": {"properties": {"scheme": {"const": "explicit"}}, "required": ["scheme"]},
            "then": {"required": ["couplings", "transfer_time"]},
        },
        "errors": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "kind": {"enum": ["pauli_z", "phase", "hop", "xx", "pauli_x"]},
                    "site": {"type": "integer", "minimum": 1},
                    "sites": {**_SITES, "minItems": 2, "maxItems": 2},
                    "theta": {"type": "number"},
                    "time": {"type": "number", "minimum": 0},
                    "time_fraction": {"type": "number", "minimum": 0, "maximum": 1},
                    "label": {"type": "string"},
                    "strings": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["gamma"],
                            "additionalProperties": False,
                            "properties": {"gamma": _COMPLEX, "create": _SITES, "annihilate": _SITES},
                        },
                    },
                },
                "oneOf": [{"required": ["time"]}, {"required": ["time_fraction"]}],
                "anyOf": [{"required": ["kind"]}, {"required": ["strings"]}],
            },
        },
        "encoding": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "D": {"oneOf": [{"const": "auto"}, {"type": "integer", "minimum": 2}]},
                "eta_allowed": {"type": "boolean"},
            },
        },
        "pipeline": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "samples": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer"},
                "alpha_beta": {
                    "oneOf": [
                        {"const": "random"},
                        {"type": "array", "items": _COMPLEX, "minItems": 2, "maxItems": 2},
                    ]
                },
            },
        },
        "probe": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["exact", "sampled"]},
                "shots": {"type": "integer", "minimum": 1},
                "eig_tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                k: {"type": "number", "exclusiveMinimum": 0}
                for k in ("fidelity", "pst", "null_space", "gram_schmidt", "probe_eigen")
            },
        },
        "sweep": {
            "type": "object",
            "required": ["axis", "values"],
            "additionalProperties": False,
            "properties": {
                "axis": {"enum": ["time_fraction", "D"]},
                "values": {"type": "array", "items": {"type": "number"}},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
    },
}

DEFAULTS = {
    "errors": [],
    "encoding": {"D": "auto", "eta_allowed": False},
    "pipeline": {"samples": 20, "seed": 0, "alpha_beta": "random"},
    "probe": {"mode": "exact", "shots": 100000, "eig_tol": 1e-9},
    "tolerances": {"fidelity": 1e-8, "pst": 1e-10, "null_space": 1e-10,
                   "gram_schmidt": 1e-8, "probe_eigen": 1e-9},
    "output": {"dir": "mirrorchain-out"},
}


class ConfigError(Exception):
    """Schema violation; ``pointer`` is a JSON pointer to the offending key."""

    def __init__(self, message, pointer):
        super().__init__(message)
        self.pointer = pointer


def validate(raw: dict):
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise ConfigError(err.message, pointer)


def resolve(raw: dict) -> dict:
    """Validate, fill defaults and apply ``MIRRORCHAIN_SEED``."""
    validate(raw)
    cfg = copy.deepcopy(raw)
    for key, default in DEFAULTS.items():
        if isinstance(default, dict):
            cfg[key] = {**default, **cfg.get(key, {})}
        else:
            cfg.setdefault(key, copy.deepcopy(default))
    cfg["chain"].setdefault("scheme", "uniform_pst" if "couplings" not in cfg["chain"] else "explicit")
    env_seed = os.environ.get("MIRRORCHAIN_SEED")
    if env_seed not in (None, ""):
        cfg["pipeline"]["seed"] = int(env_seed)
    return cfg


def load(path) -> dict:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", "") from exc
    return resolve(raw)
