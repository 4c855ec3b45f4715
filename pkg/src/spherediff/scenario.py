"""Scenario files: JSON schema, validation, and construction of runnable objects."""

import json
from dataclasses import dataclass

import numpy as np
import jsonschema

from .boundary import (
    FULL_SPHERE,
    BoundaryRegion,
    build_connection_matrix,
    build_feedback_matrix,
)
from .engine import (
    GammaSchedule,
    NetworkScenario,
    ObservationPoint,
    Scenario,
    SphereModel,
)
from .modes import enumerate_modes
from .particlesim import OracleConfig
from .sources import ReleaseEvent, SourceSchedule

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["sphere", "releases", "observe", "horizon"],
    "properties": {
        "sphere": {
            "type": "object",
            "additionalProperties": False,
            "required": ["R0", "D", "Q", "T"],
            "properties": {
                "R0": {"type": "number", "exclusiveMinimum": 0},
                "D": {"type": "number", "exclusiveMinimum": 0},
                "Q": {"type": "integer", "minimum": 1},
                "T": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "releases": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["t_start", "t0", "r0"],
                "properties": {
                    "t_start": {"type": "number", "minimum": 0},
                    "t0": {"type": "number", "exclusiveMinimum": 0},
                    "r0": {"type": "number", "exclusiveMinimum": 0},
                    "amount_scale": {"type": "number", "minimum": 0},
                },
            },
        },
        "permeability": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode"],
            "properties": {
                "mode": {"enum": ["constant", "schedule"]},
                "gamma": {"type": "number", "minimum": 0},
                "schedule": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["t_from", "gamma"],
                        "properties": {
                            "t_from": {"type": "number", "minimum": 0},
                            "gamma": {"type": "number", "minimum": 0},
                        },
                    },
                },
            },
        },
        "region": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["full", "cap"]},
                "theta0": {"type": "number", "exclusiveMinimum": 0,
                           "maximum": np.pi},
            },
        },
        "network": {
            "type": "object",
            "additionalProperties": False,
            "required": ["enabled"],
            "properties": {
                "enabled": {"type": "boolean"},
                "gamma_s1": {"type": "number", "minimum": 0},
                "gamma_s2": {"type": "number", "minimum": 0},
                "theta0": {"type": "number", "exclusiveMinimum": 0,
                           "maximum": np.pi},
            },
        },
        "observe": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["r", "phi", "theta"],
                "properties": {
                    "r": {"type": "number", "minimum": 0},
                    "phi": {"type": "number"},
                    "theta": {"type": "number", "minimum": 0, "maximum": np.pi},
                },
            },
        },
        "horizon": {"type": "number", "exclusiveMinimum": 0},
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "n_particles": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "kernel_radius": {"type": "number", "exclusiveMinimum": 0},
                "record_interval": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "normalized": {"type": "boolean"},
                "path": {"type": "string"},
            },
        },
    },
}


class ScenarioError(ValueError):
    """Schema violation or inconsistent scenario configuration."""


def validate(doc):
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as e:
        raise ScenarioError(f"{e.json_path}: {e.message}") from e


@dataclass
class LoadedScenario:
    """A validated scenario plus the run options that ride along with it."""

    scenario: object  # Scenario | NetworkScenario
    oracle: OracleConfig
    normalized: bool
    out_path: str | None
    doc: dict


def load_scenario(source) -> LoadedScenario:
    """Build a runnable Scenario/NetworkScenario from a JSON path or dict."""
    if isinstance(source, dict):
        doc = source
    else:
        with open(source) as fh:
            doc = json.load(fh)
    validate(doc)

    sp = doc["sphere"]
    # Sources are purely radial and a full-sphere membrane does not couple
    # harmonic orders, so n > 0 states are exactly zero in single-sphere
    # full-boundary scenarios: restrict to n = 0 there and spend the whole
    # Q budget on radial resolution. Cap regions and networks mix orders.
    region_doc = doc.get("region", {"kind": "full"})
    needs_higher_orders = (doc.get("network", {}).get("enabled")
                           or region_doc["kind"] == "cap")
    ms = enumerate_modes(sp["R0"], sp["D"], sp["Q"],
                         n_max=None if needs_higher_orders else 0)
    schedule = SourceSchedule([
        ReleaseEvent(t_start=rl["t_start"], t0=rl["t0"], r0=rl["r0"],
                     amount_scale=rl.get("amount_scale", 1.0))
        for rl in doc["releases"]
    ])
    observe = tuple(
        ObservationPoint(r=o["r"], phi=o["phi"], theta=o["theta"])
        for o in doc["observe"]
    )
    for o in observe:
        if o.r > sp["R0"]:
            raise ScenarioError(f"observation point r={o.r} outside the sphere")

    net = doc.get("network", {})
    if net.get("enabled"):
        theta0 = net.get("theta0")
        if theta0 is None:
            raise ScenarioError("network.theta0 is required when enabled")
        g1 = net.get("gamma_s1", 0.0)
        g2 = net.get("gamma_s2", 1.0)
        fb1 = build_feedback_matrix(ms, BoundaryRegion("cap", theta0))
        conn = build_connection_matrix(ms, ms, theta0, g1, g2)
        s1 = SphereModel(mode_set=ms, T=sp["T"], feedback=fb1,
                         gamma=GammaSchedule.constant(g1))
        s2 = SphereModel(mode_set=ms, T=sp["T"], feedback=None,
                         gamma=GammaSchedule.constant(0.0))
        scenario = NetworkScenario(sphere_s1=s1, sphere_s2=s2, connection=conn,
                                   schedule=schedule, observe=observe,
                                   horizon=doc["horizon"])
    else:
        if region_doc["kind"] == "cap":
            if "theta0" not in region_doc:
                raise ScenarioError("region.theta0 is required for a cap")
            region = BoundaryRegion("cap", region_doc["theta0"])
        else:
            region = FULL_SPHERE
        gamma = _gamma_schedule(doc.get("permeability"))
        fb = build_feedback_matrix(ms, region) if gamma.levels != [0.0] else None
        sphere = SphereModel(mode_set=ms, T=sp["T"], feedback=fb, gamma=gamma)
        scenario = Scenario(sphere=sphere, schedule=schedule, observe=observe,
                            horizon=doc["horizon"])

    odoc = doc.get("oracle", {})
    oracle = OracleConfig(
        dt=odoc.get("dt", 1e-4),
        n_particles=odoc.get("n_particles", 200_000),
        seed=odoc.get("seed", 20260827),
        kernel_radius=odoc.get("kernel_radius"),
        record_interval=odoc.get("record_interval", 0.05),
    )
    out = doc.get("output", {})
    return LoadedScenario(scenario=scenario, oracle=oracle,
                          normalized=out.get("normalized", False),
                          out_path=out.get("path"), doc=doc)


def _gamma_schedule(pdoc):
    if pdoc is None:
        return GammaSchedule.constant(0.0)
    if pdoc["mode"] == "constant":
        if "gamma" not in pdoc:
            raise ScenarioError("permeability.gamma required in constant mode")
        return GammaSchedule.constant(pdoc["gamma"])
    if "schedule" not in pdoc:
        raise ScenarioError("permeability.schedule required in schedule mode")
    pieces = tuple(sorted(((p["t_from"], p["gamma"]) for p in pdoc["schedule"])))
    return GammaSchedule(pieces=pieces)
