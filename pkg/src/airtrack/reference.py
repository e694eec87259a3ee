"""Builders for the bundled scenario documents."""
from __future__ import annotations

import copy
import json
from pathlib import Path

import numpy as np

SCENARIO_DIR = Path(__file__).parent / "scenarios"

_LINKS = {
    "uav_lte": {"rate": 2e7, "propagation": 1e-5, "overhead": 1e-2},
    "camera_lan": {"rate": 1e9, "propagation": 5e-9, "overhead": 2e-4},
    "camera_wifi": {"rate": 5e7, "propagation": 5e-9, "overhead": 2e-3},
    "radio": {"uav_lte": 1.0, "camera_wifi": 0.0, "camera_lan": 0.0},
}

_STREAM = {
    "uplink_bits": 4e6,
    "components": [
        {"cycles": 5e7, "memory": 2.5e8},
        {"cycles": 4e8, "memory": 1.0e9},
        {"cycles": 1e8, "memory": 2.5e8},
    ],
    "edges": [[0, 1, 2e6], [1, 2, 1e5]],
}

_SERVERS = [
    {"id": 0, "position": [100.0, 100.0], "frequency": 2e9, "memory": 2e9},
    {"id": 1, "position": [700.0, 100.0], "frequency": 4e9, "memory": 1.5e9},
    {"id": 2, "position": [100.0, 700.0], "frequency": 3e9, "memory": 4e9},
    {"id": 3, "position": [700.0, 700.0], "frequency": 6e9, "memory": 1.2e9},
]

_NODES = [
    {"id": 0, "capacity": 2, "cost": 1.0, "persistence": 0.6},
    {"id": 1, "capacity": 1, "cost": 1.5, "persistence": 0.95},
    {"id": 2, "capacity": 2, "cost": 2.0, "persistence": 0.9},
    {"id": 3, "capacity": 1, "cost": 3.0, "persistence": 1.0, "available": False, "arrival": 0.5},
]


def grid(n: int, spacing: float) -> tuple[list[list[float]], list[list[int]]]:
    nodes = [[i * spacing, j * spacing] for j in range(n) for i in range(n)]
    edges = []
    for j in range(n):
        for i in range(n):
            k = j * n + i
            if i + 1 < n:
                edges.append([k, k + 1])
            if j + 1 < n:
                edges.append([k, k + n])
    return nodes, edges


def _inside(p, box) -> bool:
    return box[0] < p[0] < box[2] and box[1] < p[1] < box[3]


def _cameras(nodes, edges, radius, skip_box=None, delay=1e-3):
    cams, ids = [], {}
    for k, p in enumerate(nodes):
        if skip_box and _inside(p, skip_box):
            continue
        ids[k] = len(cams)
        cams.append({"id": len(cams), "position": list(p), "radius": radius})
    lan = [[ids[a], ids[b], delay] for a, b in edges if a in ids and b in ids]
    return {"list": cams, "lan": lan}


def reference_occlusion() -> dict:
    """5x5 street grid; the target starts heading into a central garage the UAV cannot see into."""
    spacing = 200.0
    nodes, edges = grid(5, spacing)
    garage = (250.0, 250.0, 550.0, 550.0)
    obstacles = [{"x_min": garage[0], "y_min": garage[1], "x_max": garage[2], "y_max": garage[3],
                  "blocks_aerial": True}]
    for j in range(4):
        for i in range(4):
            x0, y0 = i * spacing, j * spacing
            box = (x0 + 40, y0 + 40, x0 + 160, y0 + 160)
            if box[2] > garage[0] and box[0] < garage[2] and box[3] > garage[1] and box[1] < garage[3]:
                continue
            obstacles.append({"x_min": box[0], "y_min": box[1], "x_max": box[2], "y_max": box[3],
                              "blocks_aerial": False})
    # node 11 = (200, 400), node 12 = (400, 400) is the garage centre
    return {
        "name": "reference-occlusion",
        "world": {
            "road": {"nodes": nodes, "edges": edges},
            "obstacles": obstacles,
            "target": {"edge": [11, 12], "progress": 0.0, "speed": 10.0, "speed_min": 0.0, "speed_max": 12.0},
            "uav": {"position": [180.0, 400.0], "max_speed": 25.0, "endurance": 1800.0, "sensor_range": 120.0},
        },
        "links": copy.deepcopy(_LINKS),
        "cameras": _cameras(nodes, edges, 100.0, skip_box=garage),
        "cluster": {
            "mode": "servers",
            "servers": copy.deepcopy(_SERVERS),
            "stream": copy.deepcopy(_STREAM),
            "terminal": {"frequency": 1e9, "kappa": 1e-27, "tx_power": 0.5},
            "bandwidth": 5e7,
            "weights": {"latency": 1.0, "energy": 1.0},
            "nodes": copy.deepcopy(_NODES),
            "frames": 100,
            "round_duration": 0.5,
            "max_rounds": 4,
            "penalty": None,
        },
        "strategies": {
            "configs": {
                "full": {"placement": "mra", "relay": True, "offload": True},
                "uav_only": {"placement": "default", "relay": False, "offload": False},
            },
            "k_max": 3,
            "chunk": 25,
            "activation_bits": 1e6,
            "tau_occ": 2.0,
            "tau_lost": 15.0,
            "replan_interval": 10.0,
            "relay_interval": 5.0,
        },
        "episode": {
            "duration": 600.0,
            "dt": 0.5,
            "seeds": list(range(50)),
            "recognition_interval": 1.0,
            "camera_interval": 1.0,
            "p_detect": 0.9,
            "task": {"data": 4e6, "cycles": 2e9},
        },
    }


def trivial_pursuit() -> dict:
    """No obstacles, UAV faster than the target, full battery."""
    doc = reference_occlusion()
    doc["name"] = "trivial-pursuit"
    doc["world"]["obstacles"] = []
    doc["world"]["target"]["edge"] = [0, 1]
    doc["world"]["uav"]["position"] = [0.0, 0.0]
    doc["cameras"] = _cameras(*grid(5, 200.0), 100.0)
    doc["strategies"]["configs"] = {
        "mra": {"placement": "mra", "relay": True, "offload": True},
        "ras": {"placement": "ras", "relay": True, "offload": True},
        "default": {"placement": "default", "relay": True, "offload": True},
    }
    doc["episode"]["duration"] = 300.0
    doc["episode"]["seeds"] = list(range(5))
    return doc


def case1_scenario(seed: int) -> dict:
    """Random case-1 world: moving UAV, 3-5 heterogeneous servers, random chain/fork pipeline."""
    rng = np.random.default_rng([seed, 1])
    spacing = 500.0
    nodes, edges = grid(5, spacing)
    n_servers = int(rng.integers(3, 6))
    servers = [{"id": i, "position": [float(x), float(y)],
                "frequency": float(rng.choice([1.5e9, 2e9, 3e9, 4e9])),
                "memory": float(rng.choice([2e9, 4e9]))}
               for i, (x, y) in enumerate(rng.uniform(-500, 2500, size=(n_servers, 2)))]
    n_comp = int(rng.integers(2, 5))
    comps = [{"cycles": float(rng.uniform(2e7, 3e8)), "memory": float(rng.choice([2.5e8, 5e8, 1e9]))}
             for _ in range(n_comp)]
    dag_edges = []
    for b in range(1, n_comp):
        a = int(rng.integers(0, b))
        dag_edges.append([a, b, float(rng.uniform(1e5, 4e6))])
    doc = trivial_pursuit()
    doc["name"] = f"case1-{seed}"
    doc["world"]["road"] = {"nodes": nodes, "edges": edges}
    doc["world"]["target"] = {"edge": [12, 13], "progress": 0.0, "speed": 20.0,
                              "speed_min": 0.0, "speed_max": 20.0}
    doc["world"]["uav"] = {"position": [1000.0, 1000.0], "max_speed": 30.0, "endurance": 1800.0,
                           "sensor_range": 150.0}
    doc["cameras"] = {"list": [], "lan": []}
    doc["cluster"]["servers"] = servers
    doc["cluster"]["stream"] = {"uplink_bits": float(rng.uniform(1e6, 8e6)), "components": comps,
                                "edges": dag_edges}
    doc["episode"]["duration"] = 200.0
    doc["episode"]["seeds"] = [seed]
    return doc


BUNDLED = {
    "reference.json": reference_occlusion,
    "pursuit.json": trivial_pursuit,
}


def write_bundled(directory: Path = SCENARIO_DIR) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, fn in BUNDLED.items():
        path = directory / name
        path.write_text(json.dumps(fn(), indent=1) + "\n", encoding="utf-8")
        out.append(path)
    return out
