"""Relay-tracking activation: ring region, key-camera choice, LAN flooding.

The UAV contacts a small key set over LTE; keys flood the activation over the
wired camera LAN. A plan is scored by its total activation time, the moment
the last candidate camera is switched on.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .simcore import EventKind
from .netlinks import LinkKind, LinkParams, link_latency
from .world import CameraState, Position, distance

EXHAUSTIVE_LIMIT = 12
DEFAULT_K_MAX = 3
DEFAULT_ACTIVATION_BITS = 1e6


class CoverageError(ValueError):
    """Some candidate camera cannot be reached from any admissible key set."""


@dataclass
class CameraGraph:
    cameras: dict[int, CameraState]
    lan: dict[int, dict[int, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for cid in self.cameras:
            self.lan.setdefault(cid, {})

    @classmethod
    def build(cls, cameras: Iterable[CameraState], edges: Iterable[Sequence]) -> CameraGraph:
        graph = cls({c.id: c for c in cameras})
        for a, b, delay in edges:
            graph.add_edge(int(a), int(b), float(delay))
        return graph

    def add_edge(self, a: int, b: int, delay: float) -> None:
        if a not in self.cameras or b not in self.cameras:
            raise ValueError(f"LAN edge ({a}, {b}) references unknown camera")
        if delay <= 0:
            raise ValueError("LAN edge delay must be positive")
        # keep the faster of parallel links
        cur = self.lan[a].get(b)
        if cur is None or delay < cur:
            self.lan[a][b] = delay
            self.lan[b][a] = delay

    def shortest_delays(self, sources: Mapping[int, float]) -> dict[int, float]:
        """Multi-source Dijkstra; each source starts at its own offset."""
        dist: dict[int, float] = {}
        heap = [(off, cid) for cid, off in sorted(sources.items())]
        heapq.heapify(heap)
        while heap:
            d, u = heapq.heappop(heap)
            if u in dist:
                continue
            dist[u] = d
            for v, w in sorted(self.lan[u].items()):
                if v not in dist:
                    heapq.heappush(heap, (d + w, v))
        return dist


@dataclass(frozen=True)
class RingRegion:
    center: Position
    r_inner: float
    r_outer: float

    def __post_init__(self) -> None:
        if not 0 <= self.r_inner <= self.r_outer:
            raise ValueError("need 0 <= r_inner <= r_outer")


def ring_region(last_seen: Sequence[float], v_target_max: float, v_target_min: float, elapsed: float,
                d_request: float, d_response: float) -> RingRegion:
    """Annulus the target can occupy once activation and recognition complete."""
    if min(v_target_max, v_target_min, elapsed, d_request, d_response) < 0:
        raise ValueError("speeds and delays must be nonnegative")
    if v_target_min > v_target_max:
        raise ValueError("v_target_min exceeds v_target_max")
    center = (float(last_seen[0]), float(last_seen[1]))
    return RingRegion(center, v_target_min * elapsed, v_target_max * (elapsed + d_request + d_response))


def candidate_cameras(graph: CameraGraph, region: RingRegion) -> set[int]:
    """Cameras whose coverage disk meets the closed annulus."""
    out = set()
    for cid, cam in graph.cameras.items():
        d = distance(cam.position, region.center)
        if max(0.0, d - cam.radius) <= region.r_outer and d + cam.radius >= region.r_inner:
            out.add(cid)
    return out


@dataclass(frozen=True)
class ActivationPlan:
    keys: tuple[int, ...]
    key_offsets: Mapping[int, float]  # UAV->key LTE latency
    times: Mapping[int, float]  # per-candidate activation time
    total: float

    def summary(self) -> dict:
        return {"keys": list(self.keys), "total": self.total,
                "times": {str(k): v for k, v in sorted(self.times.items())}}


def uav_offsets(graph: CameraGraph, candidates: Iterable[int], uav_pos: Sequence[float],
                links: Mapping[LinkKind, LinkParams], payload: float = DEFAULT_ACTIVATION_BITS) -> dict[int, float]:
    return {c: link_latency(LinkKind.UAV_LTE, payload, distance(uav_pos, graph.cameras[c].position), links)
            for c in sorted(candidates)}


def _plan_total(keys, cand, reach) -> tuple[float, dict[int, float]]:
    times = {}
    for c in cand:
        best = math.inf
        for k in keys:
            t = reach[k].get(c, math.inf)
            if t < best:
                best = t
        times[c] = best
    return (max(times.values()) if times else 0.0), times


def plan_activation(graph: CameraGraph, candidates: Iterable[int], uav_pos: Sequence[float], k_max: int,
                    links: Mapping[LinkKind, LinkParams], payload: float = DEFAULT_ACTIVATION_BITS) -> ActivationPlan:
    """Pick at most k_max key cameras minimizing total activation time.

    Ties go to the smaller key set, then the lexicographically smallest ids.
    """
    cand = sorted(set(candidates))
    if not cand:
        raise ValueError("no candidate cameras")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    offsets = uav_offsets(graph, cand, uav_pos, links, payload)
    # each search starts at the key's LTE offset so sums accumulate exactly as the flood does
    reach = {k: graph.shortest_delays({k: offsets[k]}) for k in cand}
    k_cap = min(k_max, len(cand))

    best_keys: Optional[tuple[int, ...]] = None
    best_total = math.inf
    best_times: dict[int, float] = {}
    if len(cand) <= EXHAUSTIVE_LIMIT:
        # sizes ascending, combinations lexicographic: first strict minimum wins the tie-break
        for size in range(1, k_cap + 1):
            for keys in itertools.combinations(cand, size):
                total, times = _plan_total(keys, cand, reach)
                if total < best_total:
                    best_keys, best_total, best_times = keys, total, times
    else:
        chosen: list[int] = []
        while len(chosen) < k_cap:
            step_best = None
            for k in cand:
                if k in chosen:
                    continue
                keys = tuple(sorted(chosen + [k]))
                total, times = _plan_total(keys, cand, reach)
                if step_best is None or total < step_best[0] or (total == step_best[0] and keys < step_best[1]):
                    step_best = (total, keys, times)
            if step_best is None or (chosen and not step_best[0] < best_total):
                break
            chosen = list(step_best[1])
            best_total, best_keys, best_times = step_best
    if best_keys is None or math.isinf(best_total):
        raise CoverageError(f"candidates not reachable with at most {k_max} keys")
    return ActivationPlan(best_keys, {k: offsets[k] for k in best_keys}, best_times, best_total)


def propagate_activation(plan: ActivationPlan, graph: CameraGraph, engine=None) -> dict[int, float]:
    """Activation time of each planned candidate when keys flood from their offsets.

    The flood may relay through non-candidate cameras without switching them
    on. Times are relative to the plan's issue instant. With an engine, one
    message-arrival event per camera is scheduled at ``engine.now + time``;
    `activation_handler` turns those into activated flags.
    """
    reach = graph.shortest_delays(dict(plan.key_offsets))
    times = {cid: reach[cid] for cid in plan.times if cid in reach}
    if engine is not None:
        for cid, t in sorted(times.items(), key=lambda kv: (kv[1], kv[0])):
            engine.after(t, EventKind.MESSAGE_ARRIVAL, {"what": "activate", "camera": cid})
    return times


def activation_handler(graph: CameraGraph):
    def handle(engine, event) -> None:
        payload = event.payload
        if isinstance(payload, dict) and payload.get("what") == "activate":
            graph.cameras[payload["camera"]].activate(engine.now)
    return handle


def lan_components(graph: CameraGraph, subset: Iterable[int]) -> int:
    """Number of LAN-connected components spanned by subset (paths may leave the subset)."""
    remaining = set(subset)
    count = 0
    while remaining:
        seed = min(remaining)
        reach = graph.shortest_delays({seed: 0.0})
        remaining -= set(reach)
        count += 1
    return count
