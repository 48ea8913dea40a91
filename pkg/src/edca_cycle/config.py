"""TOML run configuration: schema, presets and parsing.

A document holds the scenario (``access_mode``, optional ``[phy]`` overrides,
``[[classes]]``), optional ``[run]`` controls and optional ``[[sweep]]``
axes.  Unknown keys anywhere are errors.  See README for the full schema.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources

import jsonschema
import tomli

from .model import (AccessCategoryClass, AccessMode, PhyProfile, Scenario, ScenarioError,
                    validate_scenario)

MODES = ("analyze", "simulate", "compare", "sweep")
SWEEP_FIELDS = ("population", "aifsn", "cw_min", "max_stage", "retry_limit", "payload_bytes")


class ConfigError(ValueError):
    pass


_int = {"type": "integer"}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["classes"],
    "properties": {
        "scenario_id": {"type": "string"},
        "access_mode": {"enum": [m.value for m in AccessMode]},
        "phy": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                **{k: {"type": "number", "minimum": 0}
                   for k in ("t_slot", "sifs", "preamble_overhead", "delta")},
                **{k: {"type": "number", "exclusiveMinimum": 0}
                   for k in ("data_rate", "basic_rate", "symbol_time")},
                **{k: {"type": "integer", "minimum": 0}
                   for k in ("service_bits", "tail_bits", "mac_header_bytes", "ack_bytes",
                             "rts_bytes", "cts_bytes")},
            },
        },
        "classes": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["index", "aifsn", "cw_min", "max_stage", "retry_limit",
                             "population"],
                "properties": {
                    "index": _int,
                    "aifsn": {"type": "integer", "minimum": 2},
                    "cw_min": {"type": "integer", "minimum": 1},
                    "max_stage": {"type": "integer", "minimum": 0},
                    "retry_limit": {"type": "integer", "minimum": 1},
                    "population": {"type": "integer", "minimum": 0},
                    "payload_bytes": {"type": "integer", "minimum": 0},
                },
            },
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": list(MODES)},
                "sweep_evaluate": {"enum": ["analyze", "simulate", "compare"]},
                "seeds": {"oneOf": [{"type": "integer", "minimum": 1},
                                    {"type": "array", "minItems": 1, "items": _int}]},
                "duration_s": {"type": "number", "exclusiveMinimum": 0},
                "warmup_s": {"type": "number", "minimum": 0},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
                "max_iterations": {"type": "integer", "minimum": 1},
                "damping": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "precision": {"type": "integer", "minimum": 1, "maximum": 17},
                "workers": {"type": "integer", "minimum": 1},
            },
        },
        "sweep": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["field", "classes", "values"],
                "properties": {
                    "field": {"enum": list(SWEEP_FIELDS)},
                    "classes": {"type": "array", "minItems": 1, "items": _int},
                    "values": {"type": "array", "minItems": 1, "items": _int},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class SweepAxis:
    field: str
    classes: tuple[int, ...]   # AC indices that all take each value
    values: tuple[int, ...]

    def label(self, value: int) -> str:
        return f"{self.field}[{','.join(map(str, self.classes))}]={value}"


@dataclass(frozen=True)
class RunSpec:
    mode: str = "analyze"
    source: str = "<config>"
    scenario_id: str = "scenario"
    axes: tuple[SweepAxis, ...] = ()
    sweep_evaluate: str = "analyze"
    seeds: tuple[int, ...] = (1,)
    duration_s: float = 100.0
    warmup_s: float | None = None   # default: 5% of duration
    tolerance: float = 1e-10
    max_iterations: int = 10000
    damping: float = 0.5
    precision: int = 9
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "sweep" and not self.axes:
            raise ConfigError("sweep mode needs at least one [[sweep]] axis")
        if self.mode in ("simulate", "compare") or (
                self.mode == "sweep" and self.sweep_evaluate != "analyze"):
            if len(self.seeds) < 1:
                raise ConfigError("at least one seed is required")
            warm = self.warmup_s if self.warmup_s is not None else 0.05 * self.duration_s
            if not self.duration_s > warm >= 0:
                raise ConfigError("need duration_s > warmup_s >= 0")

    def replace(self, **changes) -> "RunSpec":
        return dataclasses.replace(self, **changes)


def _path(err: jsonschema.ValidationError) -> str:
    out = ""
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def _schema_error(err: jsonschema.ValidationError) -> ConfigError:
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        where = _path(err)
        return ConfigError(f"unknown key {extra[0]!r} in {where}" if extra else err.message)
    return ConfigError(f"{_path(err)}: {err.message}")


def parse_seeds(value) -> tuple[int, ...]:
    """``10`` means seeds 1..10; a list is taken as is."""
    if isinstance(value, int):
        return tuple(range(1, value + 1))
    return tuple(int(v) for v in value)


def parse_config(text: str, source: str = "<config>") -> tuple[Scenario, RunSpec]:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: syntax error: {exc}") from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        raise _schema_error(err)

    try:
        scenario = validate_scenario({
            "classes": [AccessCategoryClass(**c) for c in doc["classes"]],
            "phy": PhyProfile(**doc.get("phy", {})),
            "access_mode": doc.get("access_mode", "rts_cts"),
        })
    except ScenarioError as exc:
        raise ConfigError(f"{source}: invalid scenario: {exc}") from None

    known = {c.index for c in scenario.classes}
    axes = []
    for ax in doc.get("sweep", []):
        missing = set(ax["classes"]) - known
        if missing:
            raise ConfigError(f"sweep over {ax['field']}: unknown class index {sorted(missing)}")
        axes.append(SweepAxis(ax["field"], tuple(ax["classes"]), tuple(ax["values"])))

    run = dict(doc.get("run", {}))
    if "seeds" in run:
        run["seeds"] = parse_seeds(run["seeds"])
    spec = RunSpec(source=source, scenario_id=doc.get("scenario_id", "scenario"),
                   axes=tuple(axes), **run)
    return scenario, spec


PRESETS = ("paper-fig3", "paper-fig5", "paper-fig6")


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("edca_cycle").joinpath(f"presets/{name}.toml").read_text()


def load_preset(name: str) -> tuple[Scenario, RunSpec]:
    return parse_config(preset_text(name), source=f"preset:{name}")


def sweep_points(scenario: Scenario, axes) -> list[tuple[str, Scenario]]:
    """Cross product of the axes, first axis varying slowest."""
    combos: list[tuple[str, dict]] = [("", {})]
    for ax in axes:
        combos = [(f"{label},{ax.label(v)}" if label else ax.label(v),
                   {**changes, **{(idx, ax.field): v for idx in ax.classes}})
                  for label, changes in combos for v in ax.values]
    points = []
    for label, changes in combos:
        classes = [dataclasses.replace(c, **{f: v for (idx, f), v in changes.items()
                                             if idx == c.index})
                   for c in scenario.classes]
        try:
            points.append((label, Scenario(tuple(classes), scenario.phy, scenario.access_mode)))
        except ScenarioError as exc:
            raise ConfigError(f"sweep point {label} is invalid: {exc}") from None
    return points
