"""Brute-force oracles for the four planning strategies.

Every check draws small seeded instances, solves them by plain enumeration
with an evaluator written independently of the strategy code, and compares.
A failing trial is kept with its full instance so it can be replayed.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import asrt, cacat, mra, qoe
from .netlinks import DEFAULT_LINKS, LinkKind, link_latency
from .world import CameraState, distance

CACAT_TOLERANCE = 1e-9


@dataclass
class OracleReport:
    check: str
    trials: int
    seed: int
    passed: int = 0
    max_deviation: float = 0.0
    failures: list[dict] = field(default_factory=list)
    stats: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures and self.passed == self.trials

    def to_dict(self) -> dict:
        return {"check": self.check, "trials": self.trials, "seed": self.seed, "passed": self.passed,
                "ok": self.ok, "max_deviation": self.max_deviation, "stats": self.stats,
                "failures": self.failures}


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _record(report: OracleReport, deviation: float, problems: list[str], instance: dict) -> None:
    report.max_deviation = max(report.max_deviation, deviation)
    if problems:
        report.failures.append({"problems": problems, "instance": instance})
    else:
        report.passed += 1


# -- mra -----------------------------------------------------------------

def mra_instance(rng: np.random.Generator) -> dict:
    while True:
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 4))
        comps = [{"cycles": float(rng.uniform(0, 5e8)), "memory": float(rng.choice([0.5, 1.0, 2.0]))}
                 for _ in range(n)]
        edges = []
        for b in range(1, n):
            preds = rng.choice(b, size=int(rng.integers(1, min(b, 2) + 1)), replace=False)
            edges += [[int(a), b, float(rng.uniform(0, 2e7))] for a in sorted(preds)]
        servers = [{"id": i, "position": [float(v) for v in rng.uniform(0, 2000, 2)],
                    "frequency": float(rng.uniform(1e9, 5e9)), "memory": float(rng.choice([1.0, 2.0, 4.0]))}
                   for i in range(m)]
        inst = {"components": comps, "edges": edges, "uplink_bits": float(rng.uniform(1e5, 8e6)),
                "servers": servers, "uav": [float(v) for v in rng.uniform(0, 2000, 2)],
                "velocity": [float(v) for v in rng.uniform(-30, 30, 2)]}
        if _mra_brute(inst)[0] is not None:
            return inst


def _mra_objects(inst: dict):
    dag = mra.StreamDag(tuple(mra.Component(**c) for c in inst["components"]),
                        tuple(tuple(e) for e in inst["edges"]), inst["uplink_bits"])
    servers = [mra.ServerProfile(s["id"], tuple(s["position"]), s["frequency"], s["memory"])
               for s in inst["servers"]]
    forecast = mra.linear_forecast(inst["uav"], inst["velocity"])
    return dag, servers, forecast


def _mra_paths(n: int, edges) -> list[list[tuple[int, float]]]:
    # every path from component 0, as (component, bits-into-it) hops
    out_edges: dict[int, list[tuple[int, float]]] = {}
    for a, b, bits in edges:
        out_edges.setdefault(a, []).append((b, bits))
    paths = []

    def walk(path):
        paths.append(list(path))
        for b, bits in out_edges.get(path[-1][0], []):
            walk(path + [(b, bits)])
    walk([(0, 0.0)])
    return paths


def _mra_oracle_cost(inst: dict, placement, forecast) -> float:
    servers = {s["id"]: s for s in inst["servers"]}
    comps = inst["components"]
    paths = _mra_paths(len(comps), inst["edges"])
    lte, wifi = DEFAULT_LINKS[LinkKind.UAV_LTE], DEFAULT_LINKS[LinkKind.CAMERA_WIFI]
    vals = []
    for pos in forecast.positions:
        src = servers[placement[0]]
        d = math.hypot(pos[0] - src["position"][0], pos[1] - src["position"][1])
        uplink = lte.overhead + d * lte.propagation + inst["uplink_bits"] / lte.rate
        worst = -math.inf
        for path in paths:
            t = uplink
            prev = None
            for v, bits in path:
                s = servers[placement[v]]
                if prev is not None and prev["id"] != s["id"]:
                    gap = math.hypot(prev["position"][0] - s["position"][0], prev["position"][1] - s["position"][1])
                    t = t + (wifi.overhead + gap * wifi.propagation + bits / wifi.rate)
                t = t + comps[v]["cycles"] / s["frequency"]
                prev = s
            worst = max(worst, t)
        vals.append(worst)
    return sum(vals) / len(vals)


def _mra_brute(inst: dict):
    servers = {s["id"]: s for s in inst["servers"]}
    n = len(inst["components"])
    forecast = mra.linear_forecast(inst["uav"], inst["velocity"])
    best, best_cost = None, math.inf
    for placement in itertools.product(sorted(servers), repeat=n):
        load: dict[int, float] = {}
        for c, sid in zip(inst["components"], placement):
            load[sid] = load.get(sid, 0.0) + c["memory"]
        if any(load[sid] > servers[sid]["memory"] for sid in load):
            continue
        cost = _mra_oracle_cost(inst, placement, forecast)
        if cost < best_cost:
            best, best_cost = placement, cost
    return best, best_cost


def check_mra(inst: dict) -> tuple[float, list[str]]:
    dag, servers, forecast = _mra_objects(inst)
    placement = mra.mra_place(dag, servers, forecast, DEFAULT_LINKS)
    problems = []
    if not mra.is_feasible(dag, placement, servers):
        problems.append(f"placement {placement} infeasible")
    _, opt = _mra_brute(inst)
    got = _mra_oracle_cost(inst, placement, forecast)
    own = mra.mean_forecast_cost(dag, placement, servers, forecast, DEFAULT_LINKS)
    if got != opt:
        problems.append(f"cost {got!r} != optimum {opt!r}")
    if own != got:
        problems.append(f"estimator {own!r} disagrees with path enumeration {got!r}")
    return abs(got - opt), problems


# -- asrt ----------------------------------------------------------------

def asrt_instance(rng: np.random.Generator) -> dict:
    n = int(rng.integers(1, 7))
    extra = int(rng.integers(0, 3))
    total = n + extra
    cams = [{"id": i, "position": [float(v) for v in rng.uniform(0, 1500, 2)], "radius": 80.0}
            for i in range(total)]
    edges = [[int(rng.integers(0, b)), b, float(rng.uniform(1e-4, 2e-2))] for b in range(1, total)]
    for _ in range(int(rng.integers(0, total + 1))):
        a, b = (int(x) for x in rng.choice(total, size=2, replace=False)) if total > 1 else (0, 0)
        if a != b:
            edges.append([a, b, float(rng.uniform(1e-4, 2e-2))])
    candidates = sorted(int(c) for c in rng.choice(total, size=n, replace=False))
    return {"cameras": cams, "edges": edges, "candidates": candidates,
            "uav": [float(v) for v in rng.uniform(0, 1500, 2)],
            "k_max": int(rng.integers(1, min(3, n) + 1)), "payload": float(rng.uniform(1e5, 4e6))}


def _asrt_graph(inst: dict) -> asrt.CameraGraph:
    cams = [CameraState(c["id"], tuple(c["position"]), c["radius"]) for c in inst["cameras"]]
    return asrt.CameraGraph.build(cams, inst["edges"])


def _bellman_ford(n: int, edges, src: int, start: float = 0.0) -> list[float]:
    d = [math.inf] * n
    d[src] = start
    for _ in range(n):
        for a, b, w in edges:
            if d[a] + w < d[b]:
                d[b] = d[a] + w
            if d[b] + w < d[a]:
                d[a] = d[b] + w
    return d


def asrt_brute(inst: dict, k_max: int) -> tuple[tuple[int, ...], float]:
    """Least total over every key set of size <= k_max; first minimum in (size, lexicographic) order."""
    n = len(inst["cameras"])
    pos = {c["id"]: c["position"] for c in inst["cameras"]}
    cand = inst["candidates"]
    offset = {k: link_latency(LinkKind.UAV_LTE, inst["payload"], distance(inst["uav"], pos[k]), DEFAULT_LINKS)
              for k in cand}
    reach = {k: _bellman_ford(n, inst["edges"], k, offset[k]) for k in cand}
    best, best_total = (), math.inf
    for size in range(1, min(k_max, len(cand)) + 1):
        for keys in itertools.combinations(cand, size):
            total = max(min(reach[k][c] for k in keys) for c in cand)
            if total < best_total:
                best, best_total = keys, total
    return best, best_total


def check_asrt(inst: dict) -> tuple[float, list[str]]:
    graph = _asrt_graph(inst)
    cand = inst["candidates"]
    problems = []
    plan = asrt.plan_activation(graph, cand, inst["uav"], inst["k_max"], DEFAULT_LINKS, inst["payload"])
    keys, opt = asrt_brute(inst, inst["k_max"])
    if plan.total != opt:
        problems.append(f"total {plan.total!r} != optimum {opt!r}")
    if tuple(plan.keys) != keys:
        problems.append(f"keys {plan.keys} != tie-broken optimum {keys}")
    if len(plan.keys) > min(inst["k_max"], len(cand)):
        problems.append("too many keys")
    flooded = asrt.propagate_activation(plan, graph)
    if flooded != dict(plan.times):
        problems.append("flooded times disagree with planned times")
    # uncapped planner against the all-direct plan (every candidate a key)
    free = asrt.plan_activation(graph, cand, inst["uav"], len(cand), DEFAULT_LINKS, inst["payload"])
    direct = _all_direct(inst)
    if not free.total <= direct:
        problems.append(f"uncapped total {free.total!r} exceeds all-direct {direct!r}")
    if len(free.keys) > len(cand):
        problems.append("more keys than candidates")
    return abs(plan.total - opt), problems


def _all_direct(inst: dict) -> float:
    n = len(inst["cameras"])
    pos = {c["id"]: c["position"] for c in inst["cameras"]}
    cand = inst["candidates"]
    offset = {k: link_latency(LinkKind.UAV_LTE, inst["payload"], distance(inst["uav"], pos[k]), DEFAULT_LINKS)
              for k in cand}
    reach = {k: _bellman_ford(n, inst["edges"], k, offset[k]) for k in cand}
    return max(min(reach[k][c] for k in cand) for c in cand)


# -- qoe -----------------------------------------------------------------

def qoe_instance(rng: np.random.Generator) -> dict:
    n = int(rng.integers(1, 11))
    tasks = [{"data": float(rng.choice([0.0, rng.uniform(1e5, 2e7)], p=[0.1, 0.9])),
              "cycles": float(rng.choice([0.0, rng.uniform(1e7, 5e9)], p=[0.1, 0.9]))} for _ in range(n)]
    terminals = [{"frequency": float(rng.uniform(5e8, 2e9)), "kappa": float(rng.uniform(1e-28, 5e-27)),
                  "tx_power": float(rng.uniform(0.1, 2.0))} for _ in range(n)]
    return {"tasks": tasks, "terminals": terminals, "server": float(rng.uniform(2e9, 2e10)),
            "bandwidth": float(10 ** rng.uniform(5, 8)),
            "weights": [float(rng.uniform(0, 2)), float(rng.uniform(0.01, 2))]}


def _qoe_subset_cost(inst: dict, subset: frozenset) -> float:
    wl, we = inst["weights"]
    f_e = inst["server"]
    volume = sum(inst["tasks"][i]["data"] for i in sorted(subset))
    total = 0.0
    for i, (t, term) in enumerate(zip(inst["tasks"], inst["terminals"])):
        if i in subset:
            if t["data"] == 0:
                tx = 0.0
            else:
                rate = inst["bandwidth"] * t["data"] / volume
                tx = t["data"] / rate
            total += wl * (tx + t["cycles"] / f_e) + we * (term["tx_power"] * tx)
        else:
            f = term["frequency"]
            total += wl * (0.0 + t["cycles"] / f) + we * (term["kappa"] * f ** 2 * t["cycles"])
    return total


def qoe_brute(inst: dict) -> float:
    n = len(inst["tasks"])
    return min(_qoe_subset_cost(inst, frozenset(s)) for r in range(n + 1)
               for s in itertools.combinations(range(n), r))


def _qoe_objects(inst: dict):
    tasks = [qoe.VideoTask(t["data"], t["cycles"]) for t in inst["tasks"]]
    terms = [qoe.TerminalProfile(**t) for t in inst["terminals"]]
    return tasks, terms, qoe.EdgeServerProfile(inst["server"]), qoe.QoeWeights(*inst["weights"])


def check_qoe(inst: dict) -> tuple[float, list[str]]:
    tasks, terms, server, w = _qoe_objects(inst)
    dec = qoe.joint_allocate(tasks, terms, server, inst["bandwidth"], w)
    n = len(tasks)
    opt = qoe_brute(inst)
    local = _qoe_subset_cost(inst, frozenset())
    edge = _qoe_subset_cost(inst, frozenset(range(n)))
    problems = []
    if dec.total_cost != opt:
        problems.append(f"cost {dec.total_cost!r} != optimum {opt!r}")
    if not dec.total_cost <= local:
        problems.append("worse than all-LOCAL")
    if not dec.total_cost <= edge:
        problems.append("worse than all-EDGE")
    if dec.rates and not sum(dec.rates.values()) <= inst["bandwidth"] * (1 + 1e-12):
        problems.append("bandwidth over-allocated")
    if n == 1:
        side = qoe.decide(tasks[0], terms[0], server, inst["bandwidth"], w)
        if side is not dec.choices[0]:
            problems.append(f"single task: decide says {side.value}, allocation says {dec.choices[0].value}")
    return abs(dec.total_cost - opt), problems


# -- cacat ---------------------------------------------------------------

def cacat_instance(rng: np.random.Generator) -> dict:
    m = int(rng.integers(1, 5))
    nodes = [{"id": j, "capacity": int(rng.integers(1, 4)), "cost": float(rng.uniform(0.5, 5.0)),
              "persistence": float(rng.uniform(0.2, 1.0)), "available": bool(rng.random() < 0.8),
              "arrival": float(rng.uniform(0.0, 0.6))} for j in range(m)]
    nodes[int(rng.integers(m))]["available"] = True
    return {"nodes": nodes, "subtasks": int(rng.integers(1, 9)), "rounds": int(rng.integers(1, 5)),
            "draw_seed": int(rng.integers(2 ** 32))}


def _cacat_objects(inst: dict):
    nodes = [cacat.EdgeNodeProfile(**n) for n in inst["nodes"]]
    batch = cacat.SubtaskBatch(0, tuple((i, i + 1) for i in range(inst["subtasks"])))
    avail = cacat.realize_availability(nodes, inst["rounds"], np.random.default_rng(inst["draw_seed"]))
    return nodes, batch, avail


def cacat_brute(inst: dict, avail: cacat.Availability) -> float:
    """Enumerate per-round load vectors on the nodes that finish that round."""
    nodes = inst["nodes"]
    penalty = cacat.PENALTY_FACTOR * max(n["cost"] for n in nodes)
    best = math.inf

    def rounds(r: int, left: int, spent: float) -> None:
        nonlocal best
        if left == 0 or r == inst["rounds"]:
            best = min(best, spent + left * penalty)
            return
        usable = [j for j in range(len(nodes)) if avail.presence[r][j] and avail.presence[r + 1][j]]
        for loads in itertools.product(*(range(nodes[j]["capacity"] + 1) for j in usable)):
            if sum(loads) <= left:
                rounds(r + 1, left - sum(loads), spent + sum(x * nodes[j]["cost"] for x, j in zip(loads, usable)))
    rounds(0, inst["subtasks"], 0.0)
    return best


def check_cacat(inst: dict) -> tuple[float, list[str], dict]:
    nodes, batch, avail = _cacat_objects(inst)
    problems = []
    offline = cacat.offline_opt(batch, nodes, avail)
    brute = cacat_brute(inst, avail)
    dev = abs(offline - brute)
    if dev > CACAT_TOLERANCE * max(1.0, brute):
        problems.append(f"offline {offline!r} != enumeration {brute!r}")
    pa = cacat.pa_opt_assign(batch, nodes, inst["rounds"], availability=avail)
    rnd = cacat.baseline_assign("random", batch, nodes, inst["rounds"], np.random.default_rng(inst["draw_seed"] + 1),
                                availability=avail)
    greedy = cacat.baseline_assign("greedy_nopredict", batch, nodes, inst["rounds"], availability=avail)
    ratios = {}
    for name, sched in (("pa_opt", pa), ("random", rnd), ("greedy_nopredict", greedy)):
        ratio = cacat.competition_ratio(sched.total_cost, offline)
        ratios[name] = ratio
        if ratio < 1 - CACAT_TOLERANCE:
            problems.append(f"{name} ratio {ratio!r} below 1")
        for r, mapping in enumerate(sched.rounds):
            load: dict[int, int] = {}
            for nid in mapping.values():
                load[nid] = load.get(nid, 0) + 1
            if any(load[nid] > inst["nodes"][nid]["capacity"] for nid in load):
                problems.append(f"{name} over capacity in round {r + 1}")
    return dev, problems, ratios


# -- driver ----------------------------------------------------------------

CHECKS: dict[str, tuple[Callable, Callable]] = {
    "mra": (mra_instance, check_mra),
    "asrt": (asrt_instance, check_asrt),
    "qoe": (qoe_instance, check_qoe),
    "cacat": (cacat_instance, check_cacat),
}


def run_oracle(check: str, trials: int, seed: int = 0) -> OracleReport:
    if check not in CHECKS:
        raise ValueError(f"unknown oracle {check!r}; choose from {sorted(CHECKS)}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    make, verify = CHECKS[check]
    report = OracleReport(check, trials, seed)
    ratios: dict[str, list[float]] = {}
    for k in range(trials):
        inst = make(_trial_rng(seed, k))
        out = verify(inst)
        if check == "cacat":
            dev, problems, trial_ratios = out
            for name, r in trial_ratios.items():
                ratios.setdefault(name, []).append(r)
        else:
            dev, problems = out
        _record(report, dev, problems, {"trial": k, **inst})
    if ratios:
        means = {name: math.fsum(v) / len(v) for name, v in ratios.items()}
        report.stats = {"mean_ratio": means, "min_ratio": {name: min(v) for name, v in ratios.items()}}
        if not means["pa_opt"] <= means["random"]:
            report.failures.append({"problems": [f"mean PA-opt ratio {means['pa_opt']!r} exceeds RANDOM "
                                                 f"{means['random']!r}"], "instance": None})
    return report


def replay(check: str, instance: dict):
    """Re-run one serialized instance (as found in a failure record)."""
    inst = {k: v for k, v in instance.items() if k != "trial"}
    return CHECKS[check][1](inst)
