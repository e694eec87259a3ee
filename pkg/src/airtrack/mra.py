"""Mobility-aware placement of the UAV video pipeline onto edge servers.

Memory is a hard per-server constraint; CPU speed enters through compute time.
The objective is the mean critical-path tuple time over forecast UAV positions.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .netlinks import LinkKind, LinkParams, link_latency
from .world import Position, distance

EXHAUSTIVE_LIMIT = 10_000
FORECAST_HORIZON = 10.0
FORECAST_SAMPLES = 5


class PlacementError(ValueError):
    """No feasible placement, or an infeasible one was supplied."""


@dataclass(frozen=True)
class Component:
    cycles: float  # per tuple
    memory: float  # bytes


@dataclass(frozen=True)
class StreamDag:
    components: tuple[Component, ...]
    edges: tuple[tuple[int, int, float], ...]  # (src, dst, bits per tuple)
    uplink_bits: float

    def __post_init__(self) -> None:
        n = len(self.components)
        if n == 0:
            raise ValueError("dag needs at least one component")
        indeg = [0] * n
        for a, b, bits in self.edges:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise ValueError(f"bad dag edge ({a}, {b})")
            if bits < 0:
                raise ValueError("edge payload must be nonnegative")
            indeg[b] += 1
        if [i for i in range(n) if indeg[i] == 0] != [0]:
            raise ValueError("component 0 must be the single source")
        order = self.topological_order()
        if len(order) != n:
            raise ValueError("dag has a cycle or unreachable components")

    @property
    def source(self) -> int:
        return 0

    def successors(self, i: int) -> list[tuple[int, float]]:
        return [(b, bits) for a, b, bits in self.edges if a == i]

    def predecessors(self, i: int) -> list[tuple[int, float]]:
        return [(a, bits) for a, b, bits in self.edges if b == i]

    def topological_order(self) -> list[int]:
        n = len(self.components)
        indeg = [0] * n
        for _, b, _ in self.edges:
            indeg[b] += 1
        ready = [i for i in range(n) if indeg[i] == 0]
        order: list[int] = []
        while ready:
            ready.sort()
            i = ready.pop(0)
            order.append(i)
            for b, _ in self.successors(i):
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
        return order


@dataclass(frozen=True)
class ServerProfile:
    id: int
    position: Position
    frequency: float  # cycles/s
    memory: float  # bytes free

    def __post_init__(self) -> None:
        if self.frequency <= 0 or self.memory < 0:
            raise ValueError(f"server {self.id}: frequency must be > 0 and memory >= 0")


Placement = tuple[int, ...]  # component index -> server id


@dataclass(frozen=True)
class UavForecast:
    times: tuple[float, ...]
    positions: tuple[Position, ...]

    def __post_init__(self) -> None:
        if len(self.times) != len(self.positions) or not self.times:
            raise ValueError("forecast needs matching nonempty times and positions")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("forecast times must be strictly increasing")


def linear_forecast(pos: Sequence[float], velocity: Sequence[float], now: float = 0.0,
                    horizon: float = FORECAST_HORIZON, samples: int = FORECAST_SAMPLES) -> UavForecast:
    """Straight-line extrapolation sampled evenly over [now, now + horizon]."""
    if samples == 1:
        offsets = [0.0]
    else:
        offsets = [horizon * k / (samples - 1) for k in range(samples)]
    return UavForecast(
        tuple(now + o for o in offsets),
        tuple((pos[0] + velocity[0] * o, pos[1] + velocity[1] * o) for o in offsets),
    )


def static_forecast(pos: Sequence[float]) -> UavForecast:
    return UavForecast((0.0,), ((float(pos[0]), float(pos[1])),))


def _by_id(servers) -> dict[int, ServerProfile]:
    if isinstance(servers, Mapping):
        return dict(servers)
    return {s.id: s for s in servers}


def is_feasible(dag: StreamDag, placement: Placement, servers) -> bool:
    table = _by_id(servers)
    if len(placement) != len(dag.components) or any(sid not in table for sid in placement):
        return False
    used: dict[int, float] = {}
    for comp, sid in zip(dag.components, placement):
        used[sid] = used.get(sid, 0.0) + comp.memory
    return all(used[sid] <= table[sid].memory for sid in used)


def _critical_path(dag, placement, table, uplink, links, order) -> float:
    # dist[v] = max over preds (dist[u] + transfer) + compute(v)
    dist: dict[int, float] = {}
    for v in order:
        if v not in placement:
            continue
        sv = table[placement[v]]
        compute = dag.components[v].cycles / sv.frequency
        if v == dag.source:
            dist[v] = uplink + compute
            continue
        best = None
        for u, bits in dag.predecessors(v):
            if u not in dist:
                continue
            su = table[placement[u]]
            hop = 0.0 if su.id == sv.id else link_latency(
                LinkKind.CAMERA_WIFI, bits, distance(su.position, sv.position), links)
            cand = dist[u] + hop
            if best is None or cand > best:
                best = cand
        if best is not None:
            dist[v] = best + compute
    return max(dist.values())


def estimate_tuple_time(dag: StreamDag, placement: Placement, servers, uav_pos: Sequence[float],
                        links: Mapping[LinkKind, LinkParams]) -> float:
    """UAV uplink latency to the source's server plus the dag's critical path."""
    table = _by_id(servers)
    if not is_feasible(dag, placement, table):
        raise PlacementError(f"placement {placement} violates server memory")
    src = table[placement[dag.source]]
    uplink = link_latency(LinkKind.UAV_LTE, dag.uplink_bits, distance(uav_pos, src.position), links)
    return _critical_path(dag, dict(enumerate(placement)), table, uplink, links, dag.topological_order())


def mean_forecast_cost(dag: StreamDag, placement: Placement, servers, forecast: UavForecast,
                       links: Mapping[LinkKind, LinkParams]) -> float:
    vals = [estimate_tuple_time(dag, placement, servers, p, links) for p in forecast.positions]
    return sum(vals) / len(vals)


def _partial_mean_cost(dag, partial: dict[int, int], table, forecast, links, order) -> float:
    src = table[partial[dag.source]]
    vals = []
    for p in forecast.positions:
        uplink = link_latency(LinkKind.UAV_LTE, dag.uplink_bits, distance(p, src.position), links)
        vals.append(_critical_path(dag, partial, table, uplink, links, order))
    return sum(vals) / len(vals)


def mra_place(dag: StreamDag, servers, forecast: UavForecast,
              links: Mapping[LinkKind, LinkParams]) -> Placement:
    """Feasible placement minimizing mean tuple time over the forecast positions."""
    table = _by_id(servers)
    ids = sorted(table)
    n = len(dag.components)
    if not ids:
        raise PlacementError("no servers")
    if len(ids) ** n <= EXHAUSTIVE_LIMIT:
        best, best_cost = None, None
        for placement in itertools.product(ids, repeat=n):
            if not is_feasible(dag, placement, table):
                continue
            cost = mean_forecast_cost(dag, placement, table, forecast, links)
            if best_cost is None or cost < best_cost:
                best, best_cost = placement, cost
        if best is None:
            raise PlacementError("no feasible placement")
        return best
    return _greedy_place(dag, table, ids, forecast, links)


def _greedy_place(dag, table, ids, forecast, links) -> Placement:
    order = dag.topological_order()
    partial: dict[int, int] = {}
    free = {sid: table[sid].memory for sid in ids}
    for v in order:
        need = dag.components[v].memory
        best, best_cost = None, None
        for sid in ids:
            if need > free[sid]:
                continue
            partial[v] = sid
            cost = _partial_mean_cost(dag, partial, table, forecast, links, order)
            del partial[v]
            if best_cost is None or cost < best_cost:
                best, best_cost = sid, cost
        if best is None:
            raise PlacementError(f"greedy placement found no server for component {v}")
        partial[v] = best
        free[best] -= need
    return tuple(partial[i] for i in range(len(dag.components)))


class Baseline(str, enum.Enum):
    DEFAULT = "default"
    RAS = "ras"


def baseline_place(kind: Baseline | str, dag: StreamDag, servers, uav_pos: Sequence[float],
                   links: Mapping[LinkKind, LinkParams]) -> Placement:
    kind = Baseline(kind)
    table = _by_id(servers)
    if kind is Baseline.RAS:
        return mra_place(dag, table, static_forecast(uav_pos), links)
    # round-robin in id order, skipping servers without room
    ids = sorted(table)
    free = {sid: table[sid].memory for sid in ids}
    out: list[int] = []
    cursor = 0
    for comp in dag.components:
        for k in range(len(ids)):
            sid = ids[(cursor + k) % len(ids)]
            if comp.memory <= free[sid]:
                out.append(sid)
                free[sid] -= comp.memory
                cursor = (cursor + k + 1) % len(ids)
                break
        else:
            raise PlacementError("round-robin placement ran out of memory")
    return tuple(out)


def plan_placement(policy: str, dag: StreamDag, servers, uav_pos: Sequence[float], velocity: Sequence[float],
                   links: Mapping[LinkKind, LinkParams], now: float = 0.0) -> Placement:
    """Dispatch on a policy name: 'mra', 'ras' or 'default'."""
    if policy == "mra":
        return mra_place(dag, servers, linear_forecast(uav_pos, velocity, now), links)
    return baseline_place(policy, dag, servers, uav_pos, links)
