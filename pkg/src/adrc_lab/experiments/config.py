"""Scenario and sweep files: a small YAML schema (schema: 1).

A scenario file holds one `scenario:` mapping and optionally a `sweep:`
with a dotted parameter path and a value list; suite files add a job
list on top. See README for the documented schema.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, is_dataclass, replace

import yaml

from ..controllers import PidGains
from ..lti import InvalidInput
from ..simulate import ControllerConfig, PlantSpec, Scenario

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter: dotted path into the scenario plus values."""

    parameter: str
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise InvalidInput("sweep needs at least one value")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


def _pick(mapping: dict, cls, context: str) -> dict:
    allowed = {f.name for f in fields(cls)}
    unknown = set(mapping) - allowed
    if unknown:
        raise InvalidInput(f"unknown {context} keys: {sorted(unknown)}")
    return mapping


def scenario_from_dict(data: dict) -> Scenario:
    data = dict(data)
    plant = PlantSpec(**_pick(dict(data.pop("plant")), PlantSpec, "plant"))
    ctrl_map = dict(data.pop("controller"))
    gains_map = ctrl_map.pop("gains", None)
    gains = PidGains(**_pick(dict(gains_map), PidGains, "gains")) if gains_map else None
    controller = ControllerConfig(gains=gains,
                                  **_pick(ctrl_map, ControllerConfig, "controller"))
    for key in ("reference", "input_disturbance"):
        if key in data:
            data[key] = tuple((float(t), float(v)) for t, v in data[key])
    _pick(data, Scenario, "scenario")
    return Scenario(plant=plant, controller=controller, **data)


def scenario_to_dict(scenario: Scenario) -> dict:
    def plain(obj):
        out = {}
        for f in fields(obj):
            value = getattr(obj, f.name)
            if value == f.default:
                continue
            if is_dataclass(value):
                value = plain(value)
            elif isinstance(value, tuple):
                value = [list(item) if isinstance(item, tuple) else item
                         for item in value]
            out[f.name] = value
        return out

    data = plain(scenario)
    data["plant"] = plain(scenario.plant)
    data["controller"] = plain(scenario.controller)
    if scenario.controller.gains is not None:
        data["controller"]["gains"] = plain(scenario.controller.gains)
    return data


def _check_schema(data: dict, path) -> None:
    if not isinstance(data, dict):
        raise InvalidInput(f"{path}: expected a mapping at top level")
    if data.get("schema") != SCHEMA_VERSION:
        raise InvalidInput(f"{path}: missing or unsupported schema version "
                           f"(expected schema: {SCHEMA_VERSION})")


def load_scenario_file(path) -> tuple[Scenario, SweepSpec | None]:
    """Read a scenario file; returns the scenario and an optional sweep."""
    with open(path) as fh:
        data = yaml.safe_load(fh)
    _check_schema(data, path)
    if "scenario" not in data:
        raise InvalidInput(f"{path}: no scenario section")
    scenario = scenario_from_dict(data["scenario"])
    sweep = None
    if "sweep" in data:
        s = data["sweep"]
        sweep = SweepSpec(parameter=s["parameter"], values=tuple(s["values"]))
        set_by_path(scenario, sweep.parameter, sweep.values[0])  # path must resolve
    return scenario, sweep


def set_by_path(obj, path: str, value):
    """Return a copy of a (nested, frozen) scenario with one field replaced,
    addressed by a dotted path such as plant.K or controller.k_eso."""
    head, _, rest = path.partition(".")
    if not is_dataclass(obj) or not any(f.name == head for f in fields(obj)):
        raise InvalidInput(f"path element {head!r} does not resolve")
    if rest:
        return replace(obj, **{head: set_by_path(getattr(obj, head), rest, value)})
    return replace(obj, **{head: value})
