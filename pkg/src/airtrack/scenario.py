"""Scenario documents: JSON schema, semantic validation, object construction."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import jsonschema

from .asrt import DEFAULT_ACTIVATION_BITS, DEFAULT_K_MAX, CameraGraph
from .cacat import EdgeNodeProfile
from .mra import Component, ServerProfile, StreamDag
from .netlinks import LinkKind, LinkParams, RadioEnergyParams
from .qoe import EdgeServerProfile, QoeWeights, TerminalProfile, VideoTask
from .world import MAX_ENDURANCE_S, CameraState, Obstacle, RoadGraph


class ScenarioError(ValueError):
    """Schema or semantic violation; ``path`` is the dotted field path."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


_num = {"type": "number"}
_pos_num = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_point = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_prob = {"type": "number", "minimum": 0, "maximum": 1}

_link = {
    "type": "object",
    "required": ["rate"],
    "properties": {"rate": _pos_num, "propagation": _nonneg, "overhead": _nonneg},
    "additionalProperties": False,
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["world", "links", "cluster", "cameras", "strategies", "episode"],
    "properties": {
        "name": {"type": "string"},
        "world": {
            "type": "object",
            "required": ["road", "target", "uav"],
            "properties": {
                "road": {
                    "type": "object",
                    "required": ["nodes", "edges"],
                    "properties": {
                        "nodes": {"type": "array", "items": _point, "minItems": 2},
                        "edges": {"type": "array", "minItems": 1,
                                  "items": {"type": "array", "items": {"type": "integer", "minimum": 0},
                                            "minItems": 2, "maxItems": 2}},
                    },
                },
                "obstacles": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["x_min", "y_min", "x_max", "y_max"],
                        "properties": {"x_min": _num, "y_min": _num, "x_max": _num, "y_max": _num,
                                       "blocks_aerial": {"type": "boolean"}},
                    },
                },
                "target": {
                    "type": "object",
                    "required": ["edge", "speed"],
                    "properties": {
                        "edge": {"type": "array", "items": {"type": "integer", "minimum": 0},
                                 "minItems": 2, "maxItems": 2},
                        "progress": _nonneg,
                        "speed": _pos_num,
                        "speed_min": _nonneg,
                        "speed_max": _pos_num,
                    },
                },
                "uav": {
                    "type": "object",
                    "required": ["max_speed"],
                    "properties": {
                        "position": _point,
                        "max_speed": _pos_num,
                        "endurance": {"type": "number", "exclusiveMinimum": 0, "maximum": MAX_ENDURANCE_S},
                        "sensor_range": _pos_num,
                    },
                },
            },
        },
        "links": {
            "type": "object",
            "required": ["uav_lte", "camera_lan", "camera_wifi"],
            "properties": {
                "uav_lte": _link,
                "camera_lan": _link,
                "camera_wifi": _link,
                "radio": {"type": "object", "properties": {"uav_lte": _nonneg, "camera_wifi": _nonneg,
                                                          "camera_lan": _nonneg}},
            },
        },
        "cluster": {
            "type": "object",
            "required": ["mode", "servers", "stream"],
            "properties": {
                "mode": {"enum": ["servers", "terminals"]},
                "servers": {
                    "type": "array", "minItems": 1,
                    "items": {"type": "object", "required": ["id", "position", "frequency", "memory"],
                              "properties": {"id": {"type": "integer"}, "position": _point,
                                             "frequency": _pos_num, "memory": _nonneg}},
                },
                "stream": {
                    "type": "object",
                    "required": ["uplink_bits", "components"],
                    "properties": {
                        "uplink_bits": _nonneg,
                        "components": {"type": "array", "minItems": 1,
                                       "items": {"type": "object", "required": ["cycles", "memory"],
                                                 "properties": {"cycles": _nonneg, "memory": _nonneg}}},
                        "edges": {"type": "array", "items": {"type": "array", "minItems": 3, "maxItems": 3}},
                    },
                },
                "terminal": {"type": "object",
                             "properties": {"frequency": _pos_num, "kappa": _nonneg, "tx_power": _nonneg}},
                "bandwidth": _pos_num,
                "weights": {"type": "object", "properties": {"latency": _nonneg, "energy": _nonneg}},
                "nodes": {
                    "type": "array",
                    "items": {"type": "object", "required": ["id", "capacity", "cost", "persistence"],
                              "properties": {"id": {"type": "integer"}, "capacity": {"type": "integer", "minimum": 1},
                                             "cost": _nonneg, "persistence": _prob,
                                             "available": {"type": "boolean"}, "arrival": _prob}},
                },
                "frames": {"type": "integer", "minimum": 1},
                "round_duration": _pos_num,
                "max_rounds": {"type": "integer", "minimum": 1},
                "penalty": {"type": ["number", "null"], "minimum": 0},
            },
        },
        "cameras": {
            "type": "object",
            "required": ["list"],
            "properties": {
                "list": {"type": "array",
                         "items": {"type": "object", "required": ["id", "position", "radius"],
                                   "properties": {"id": {"type": "integer"}, "position": _point,
                                                  "radius": _pos_num}}},
                "lan": {"type": "array", "items": {"type": "array", "minItems": 3, "maxItems": 3}},
            },
        },
        "strategies": {
            "type": "object",
            "required": ["configs"],
            "properties": {
                "configs": {
                    "type": "object", "minProperties": 1,
                    "additionalProperties": {
                        "type": "object",
                        "properties": {"placement": {"enum": ["mra", "ras", "default"]},
                                       "relay": {"type": "boolean"}, "offload": {"type": "boolean"}},
                        "additionalProperties": False,
                    },
                },
                "k_max": {"type": "integer", "minimum": 1},
                "chunk": {"type": "integer", "minimum": 1},
                "activation_bits": _nonneg,
                "tau_occ": _pos_num,
                "tau_lost": _pos_num,
                "replan_interval": _pos_num,
                "relay_interval": _pos_num,
            },
        },
        "episode": {
            "type": "object",
            "required": ["duration"],
            "properties": {
                "duration": _nonneg,
                "dt": _pos_num,
                "seeds": {"type": "array", "minItems": 1,
                          "items": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}},
                "recognition_interval": _pos_num,
                "camera_interval": _pos_num,
                "p_detect": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "task": {"type": "object", "required": ["data", "cycles"],
                         "properties": {"data": _nonneg, "cycles": _nonneg}},
            },
        },
    },
}


def _dotted(parts) -> str:
    return ".".join(str(p) for p in parts)


def validate_document(doc: Any) -> None:
    """Raise ScenarioError naming the first offending field path."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), _dotted(e.absolute_path)))
    if errors:
        err = errors[0]
        path = list(err.absolute_path)
        if err.validator == "required":
            missing = [p for p in err.validator_value if isinstance(err.instance, dict) and p not in err.instance]
            if missing:
                path.append(missing[0])
        raise ScenarioError(_dotted(path), err.message)


@dataclass(frozen=True)
class StrategyConfig:
    name: str
    placement: str = "mra"
    relay: bool = True
    offload: bool = True

    def summary(self) -> dict:
        return {"name": self.name, "placement": self.placement, "relay": self.relay, "offload": self.offload}


@dataclass
class Scenario:
    name: str
    road: RoadGraph
    obstacles: list[Obstacle]
    target_edge: tuple[int, int]
    target_progress: float
    target_speed: float
    target_speed_min: float
    target_speed_max: float
    uav_position: Optional[tuple[float, float]]
    uav_max_speed: float
    uav_endurance: float
    uav_sensor_range: float
    links: dict[LinkKind, LinkParams]
    radio: RadioEnergyParams
    cameras: list[CameraState]
    lan: list[tuple[int, int, float]]
    cluster_mode: str
    servers: list[ServerProfile]
    dag: StreamDag
    terminal: TerminalProfile
    bandwidth: float
    weights: QoeWeights
    nodes: list[EdgeNodeProfile]
    frames: int
    round_duration: float
    max_rounds: int
    penalty: Optional[float]
    configs: dict[str, StrategyConfig]
    k_max: int
    chunk: int
    activation_bits: float
    tau_occ: float
    tau_lost: float
    replan_interval: float
    relay_interval: float
    duration: float
    dt: float
    seeds: list[int]
    recognition_interval: float
    camera_interval: float
    p_detect: float
    task: VideoTask
    document: dict = field(default_factory=dict, repr=False)

    def camera_graph(self) -> CameraGraph:
        return CameraGraph.build([CameraState(c.id, c.position, c.radius) for c in self.cameras], self.lan)

    def edge_server_for(self, point) -> EdgeServerProfile:
        from .world import distance
        best = min(self.servers, key=lambda s: (distance(s.position, point), s.id))
        return EdgeServerProfile(best.frequency)

    @property
    def aerial_obstacles(self) -> list[Obstacle]:
        return [o for o in self.obstacles if o.blocks_aerial]


def _wrap(path: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ScenarioError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ScenarioError(path, str(exc)) from exc


def build(doc: dict) -> Scenario:
    """Validate a scenario document and construct model objects from it."""
    validate_document(doc)
    w, ln, cl, cams, st, ep = (doc[k] for k in ("world", "links", "cluster", "cameras", "strategies", "episode"))

    road = _wrap("world.road", RoadGraph, w["road"]["nodes"], w["road"]["edges"])
    obstacles = [_wrap(f"world.obstacles.{i}", Obstacle, o["x_min"], o["y_min"], o["x_max"], o["y_max"],
                       bool(o.get("blocks_aerial", False)))
                 for i, o in enumerate(w.get("obstacles", []))]
    tgt = w["target"]
    u, v = tgt["edge"]
    if (u, v) not in road.lengths:
        raise ScenarioError("world.target.edge", f"({u}, {v}) is not a road edge")
    progress = float(tgt.get("progress", 0.0))
    if progress >= road.length(u, v):
        raise ScenarioError("world.target.progress", "beyond the end of the start edge")
    speed = float(tgt["speed"])
    vmin = float(tgt.get("speed_min", speed))
    vmax = float(tgt.get("speed_max", speed))
    if not vmin <= speed <= vmax:
        raise ScenarioError("world.target.speed", "speed must lie in [speed_min, speed_max]")

    uav = w["uav"]
    links = {k: _wrap(f"links.{k.value}", LinkParams, **ln[k.value]) for k in LinkKind}
    radio_doc = ln.get("radio", {})
    radio = RadioEnergyParams({LinkKind.UAV_LTE: float(radio_doc.get("uav_lte", 1.0)),
                               LinkKind.CAMERA_WIFI: float(radio_doc.get("camera_wifi", 0.0)),
                               LinkKind.CAMERA_LAN: float(radio_doc.get("camera_lan", 0.0))})

    cameras = [CameraState(int(c["id"]), (float(c["position"][0]), float(c["position"][1])), float(c["radius"]))
               for c in cams["list"]]
    ids = [c.id for c in cameras]
    if len(set(ids)) != len(ids):
        raise ScenarioError("cameras.list", "duplicate camera id")
    lan = [(int(a), int(b), float(d)) for a, b, d in cams.get("lan", [])]
    _wrap("cameras.lan", CameraGraph.build, [CameraState(c.id, c.position, c.radius) for c in cameras], lan)

    servers = [_wrap(f"cluster.servers.{i}", ServerProfile, int(s["id"]),
                     (float(s["position"][0]), float(s["position"][1])), float(s["frequency"]), float(s["memory"]))
               for i, s in enumerate(cl["servers"])]
    if len({s.id for s in servers}) != len(servers):
        raise ScenarioError("cluster.servers", "duplicate server id")
    sd = cl["stream"]
    dag = _wrap("cluster.stream", StreamDag,
                tuple(Component(float(c["cycles"]), float(c["memory"])) for c in sd["components"]),
                tuple((int(a), int(b), float(bits)) for a, b, bits in sd.get("edges", [])),
                float(sd["uplink_bits"]))
    terminal = _wrap("cluster.terminal", TerminalProfile, **{"frequency": 1e9, **cl.get("terminal", {})})
    weights = _wrap("cluster.weights", QoeWeights, **cl.get("weights", {}))
    nodes = [_wrap(f"cluster.nodes.{i}", EdgeNodeProfile, int(n["id"]), int(n["capacity"]), float(n["cost"]),
                   float(n["persistence"]), bool(n.get("available", True)), float(n.get("arrival", 0.0)))
             for i, n in enumerate(cl.get("nodes", []))]
    mode = cl["mode"]
    if mode == "terminals" and not any(n.available for n in nodes):
        raise ScenarioError("cluster.nodes", "terminal mode needs at least one initially available node")

    configs = {name: StrategyConfig(name, c.get("placement", "mra"), bool(c.get("relay", True)),
                                    bool(c.get("offload", True)))
               for name, c in sorted(st["configs"].items())}
    tau_occ = float(st.get("tau_occ", 2.0))
    tau_lost = float(st.get("tau_lost", 15.0))
    if not tau_occ < tau_lost:
        raise ScenarioError("strategies.tau_occ", "tau_occ must be below tau_lost")
    task_doc = ep.get("task", {"data": 4e6, "cycles": 2e9})

    return Scenario(
        name=doc.get("name", "scenario"),
        road=road, obstacles=obstacles,
        target_edge=(u, v), target_progress=progress, target_speed=speed,
        target_speed_min=vmin, target_speed_max=vmax,
        uav_position=tuple(map(float, uav["position"])) if "position" in uav else None,
        uav_max_speed=float(uav["max_speed"]),
        uav_endurance=float(uav.get("endurance", MAX_ENDURANCE_S)),
        uav_sensor_range=float(uav.get("sensor_range", 100.0)),
        links=links, radio=radio, cameras=cameras, lan=lan,
        cluster_mode=mode, servers=servers, dag=dag, terminal=terminal,
        bandwidth=float(cl.get("bandwidth", 5e7)), weights=weights, nodes=nodes,
        frames=int(cl.get("frames", 100)), round_duration=float(cl.get("round_duration", 0.5)),
        max_rounds=int(cl.get("max_rounds", 4)), penalty=cl.get("penalty"),
        configs=configs, k_max=int(st.get("k_max", DEFAULT_K_MAX)), chunk=int(st.get("chunk", 25)),
        activation_bits=float(st.get("activation_bits", DEFAULT_ACTIVATION_BITS)),
        tau_occ=tau_occ, tau_lost=tau_lost,
        replan_interval=float(st.get("replan_interval", 10.0)),
        relay_interval=float(st.get("relay_interval", 5.0)),
        duration=float(ep["duration"]), dt=float(ep.get("dt", 0.5)),
        seeds=[int(s) for s in ep.get("seeds", range(50))],
        recognition_interval=float(ep.get("recognition_interval", 1.0)),
        camera_interval=float(ep.get("camera_interval", 1.0)),
        p_detect=float(ep.get("p_detect", 0.9)),
        task=VideoTask(float(task_doc["data"]), float(task_doc["cycles"])),
        document=copy.deepcopy(doc),
    )


def load(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def canonical_bytes(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def digest(doc: dict) -> str:
    return hashlib.sha256(canonical_bytes(doc)).hexdigest()


def parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def get_path(doc: dict, dotted: str) -> Any:
    cur: Any = doc
    for part in dotted.split("."):
        if isinstance(cur, list):
            cur = cur[int(part)]
        else:
            cur = cur[part]
    return cur


def set_path(doc: dict, dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    cur: Any = doc
    for part in parts[:-1]:
        if isinstance(cur, list):
            cur = cur[int(part)]
        else:
            cur = cur.setdefault(part, {})
    last = parts[-1]
    if isinstance(cur, list):
        cur[int(last)] = value
    else:
        cur[last] = value


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Return a copy with PATH=VALUE assignments applied (VALUE parsed as JSON when possible)."""
    out = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ScenarioError(item, "override must look like PATH=VALUE")
        path, text = item.split("=", 1)
        try:
            set_path(out, path.strip(), parse_value(text))
        except (KeyError, IndexError, ValueError, TypeError) as exc:
            raise ScenarioError(path.strip(), f"cannot set: {exc}") from exc
    return out
