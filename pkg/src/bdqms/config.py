"""Experiment configuration: JSON schema, defaults, and the frozen dataclass."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema

from .ou_core import KantorovichParams, NetParams, _check_metric
from .periodic import GridParams

__all__ = ["CONFIG_SCHEMA", "ConfigError", "ExperimentConfig", "load_config"]


class ConfigError(ValueError):
    pass


_INT_SEQ = {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ExperimentConfig",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "sigma": _INT_SEQ,
        "max_stage": {"type": "integer", "minimum": 0},
        "cutoff": {"type": "integer", "minimum": 0, "maximum": 32},
        "oversample": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer", "minimum": 0},
        "samples": {"type": "integer", "minimum": 1},
        "norm_coefficient": {"enum": ["corrected", "literal"]},
        "uncorrected_unitary_bound": {"type": "boolean"},
        "unitary_orders": {"type": "array", "items": {"type": "integer", "minimum": 2}},
        "kantorovich": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "restarts": {"type": "integer", "minimum": 1},
                "iterations": {"type": "integer", "minimum": 1},
                "step": {"type": "number", "exclusiveMinimum": 0},
                "decay": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "polish_iterations": {"type": "integer", "minimum": 0},
            },
        },
        "net": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "grid_points": {"type": "integer", "minimum": 1},
                "random_states": {"type": "integer", "minimum": 0},
            },
        },
        "baire_pairs": {
            "type": "array",
            "items": {"type": "array", "items": _INT_SEQ, "minItems": 2, "maxItems": 2},
        },
        "toy": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["finite", "stage"]},
                "points": {"type": "array", "items": {"type": "array", "items": {"type": "number"}},
                           "minItems": 1},
                "distances": {"type": "array", "items": {"type": "array", "items": {"type": "number"}},
                              "minItems": 1},
                "stage": {"type": "integer", "minimum": 0},
            },
        },
        "output": {"type": "string"},
        "format": {"enum": ["csv", "json", None]},
    },
}

DEFAULTS = {
    "sigma": [2, 3],
    "max_stage": 2,
    "cutoff": 2,
    "oversample": 8,
    "seed": 0,
    "samples": 12,
    "norm_coefficient": "corrected",
    "uncorrected_unitary_bound": False,
    "unitary_orders": [2, 3, 4, 5, 6, 7, 8],
    "kantorovich": {"restarts": 16, "iterations": 400, "step": 0.3, "decay": 0.98, "polish_iterations": 100},
    "net": {"grid_points": 1, "random_states": 1},
    "baire_pairs": [[[2, 2, 2], [2, 2, 3]], [[2, 3], [3, 2]], [[2, 3, 2], [2, 3, 2]]],
    "toy": {"kind": "finite", "points": [[0.0], [1.0], [2.5], [4.0]]},
    "output": "",
    "format": None,
}


@dataclass(frozen=True)
class ExperimentConfig:
    sigma: tuple[int, ...]
    max_stage: int
    cutoff: int
    oversample: int
    seed: int
    samples: int
    norm_coefficient: str
    uncorrected_unitary_bound: bool
    unitary_orders: tuple[int, ...]
    kantorovich: dict = field(default_factory=dict)
    net: dict = field(default_factory=dict)
    baire_pairs: tuple = ()
    toy: dict = field(default_factory=dict)
    output: str = ""
    format: str | None = None

    @classmethod
    def from_dict(cls, raw: dict | None = None, **overrides) -> "ExperimentConfig":
        raw = {} if raw is None else raw
        try:
            jsonschema.validate(raw, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid config at {list(exc.absolute_path)}: {exc.message}") from None
        merged = copy.deepcopy(DEFAULTS)
        for key, value in raw.items():
            if isinstance(value, dict) and key in ("kantorovich", "net"):
                merged[key].update(value)
            else:
                merged[key] = value
        merged.update({k: v for k, v in overrides.items() if v is not None})
        try:
            jsonschema.validate(merged, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid override {list(exc.absolute_path)}: {exc.message}") from None
        if merged["max_stage"] > len(merged["sigma"]):
            raise ConfigError(f"max_stage {merged['max_stage']} exceeds len(sigma) = {len(merged['sigma'])}")
        toy = merged["toy"]
        if toy["kind"] == "finite" and ("points" in toy) == ("distances" in toy):
            raise ConfigError("finite toy needs exactly one of points or distances")
        if "distances" in toy:
            try:
                _check_metric(toy["distances"])
            except ValueError as exc:
                raise ConfigError(f"toy distances: {exc}") from None
        if toy["kind"] == "stage" and toy.get("stage", 1) > len(merged["sigma"]):
            raise ConfigError("toy stage exceeds len(sigma)")
        return cls(
            sigma=tuple(merged["sigma"]),
            max_stage=merged["max_stage"],
            cutoff=merged["cutoff"],
            oversample=merged["oversample"],
            seed=merged["seed"],
            samples=merged["samples"],
            norm_coefficient=merged["norm_coefficient"],
            uncorrected_unitary_bound=merged["uncorrected_unitary_bound"],
            unitary_orders=tuple(merged["unitary_orders"]),
            kantorovich=dict(merged["kantorovich"]),
            net=dict(merged["net"]),
            baire_pairs=tuple((tuple(x), tuple(y)) for x, y in merged["baire_pairs"]),
            toy=dict(toy),
            output=merged["output"],
            format=merged["format"],
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sigma"] = list(self.sigma)
        d["unitary_orders"] = list(self.unitary_orders)
        d["baire_pairs"] = [[list(x), list(y)] for x, y in self.baire_pairs]
        return d

    @property
    def grid(self) -> GridParams:
        return GridParams(oversample=self.oversample)

    @property
    def kantorovich_params(self) -> KantorovichParams:
        return KantorovichParams(seed=self.seed, **self.kantorovich)

    @property
    def net_params(self) -> NetParams:
        return NetParams(seed=self.seed, **self.net)


def load_config(path: str | Path | None = None, **overrides) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig.from_dict({}, **overrides)
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.from_dict(raw, **overrides)
