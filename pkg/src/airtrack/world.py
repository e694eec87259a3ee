"""City geometry, entity state, mobility and line-of-sight."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

Position = tuple[float, float]

# Paper-stated upper bound on UAV endurance (half an hour).
MAX_ENDURANCE_S = 1800.0


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


class RoadGraph:
    """Undirected planar road network; edge lengths are Euclidean."""

    def __init__(self, nodes: Sequence[Sequence[float]], edges: Sequence[Sequence[int]]) -> None:
        self.nodes: list[Position] = [(float(x), float(y)) for x, y in nodes]
        self.adj: dict[int, list[int]] = {i: [] for i in range(len(self.nodes))}
        self.lengths: dict[tuple[int, int], float] = {}
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < len(self.nodes) and 0 <= v < len(self.nodes)):
                raise ValueError(f"edge ({u}, {v}) references unknown node")
            if (u, v) in self.lengths:
                continue
            length = distance(self.nodes[u], self.nodes[v])
            if length <= 0:
                raise ValueError(f"edge ({u}, {v}) has zero length")
            self.lengths[(u, v)] = self.lengths[(v, u)] = length
            self.adj[u].append(v)
            self.adj[v].append(u)
        for nbrs in self.adj.values():
            nbrs.sort()
        if not self.nodes:
            raise ValueError("road graph has no nodes")
        if not self.is_connected():
            raise ValueError("road graph must be connected")

    def is_connected(self) -> bool:
        seen = {0}
        todo = deque([0])
        while todo:
            for v in self.adj[todo.popleft()]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return len(seen) == len(self.nodes)

    def length(self, u: int, v: int) -> float:
        return self.lengths[(u, v)]

    def point_on_edge(self, u: int, v: int, progress: float) -> Position:
        (x0, y0), (x1, y1) = self.nodes[u], self.nodes[v]
        f = progress / self.length(u, v)
        return (x0 + (x1 - x0) * f, y0 + (y1 - y0) * f)

    def on_graph(self, p: Position, tol: float = 1e-6) -> bool:
        for (u, v) in self.lengths:
            if u < v and _point_segment_distance(p, self.nodes[u], self.nodes[v]) <= tol:
                return True
        return False


def _point_segment_distance(p, a, b) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / (dx * dx + dy * dy)
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


@dataclass(frozen=True)
class Obstacle:
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    blocks_aerial: bool = False

    def __post_init__(self) -> None:
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("obstacle must have positive width and height")

    def contains_strictly(self, p: Position) -> bool:
        return self.x_min < p[0] < self.x_max and self.y_min < p[1] < self.y_max


@dataclass(frozen=True)
class TargetState:
    edge: tuple[int, int]
    progress: float
    speed: float
    position: Position
    stream: str = "target"


def place_target(graph: RoadGraph, u: int, v: int, progress: float, speed: float) -> TargetState:
    return TargetState((u, v), progress, speed, graph.point_on_edge(u, v, progress))


def step_target(graph: RoadGraph, state: TargetState, dt: float, rng: np.random.Generator) -> TargetState:
    """Advance the target speed*dt along the road, choosing branches uniformly at nodes."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    u, v = state.edge
    progress = state.progress + state.speed * dt
    length = graph.length(u, v)
    while progress >= length:
        progress -= length
        options = [w for w in graph.adj[v] if w != u] or [u]
        nxt = options[int(rng.integers(len(options)))] if len(options) > 1 else options[0]
        u, v = v, nxt
        length = graph.length(u, v)
    return TargetState((u, v), progress, state.speed, graph.point_on_edge(u, v, progress), state.stream)


@dataclass(frozen=True)
class UavState:
    position: Position
    max_speed: float
    battery: float
    battery_initial: float
    grounded: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.battery <= self.battery_initial:
            raise ValueError("battery must lie in [0, battery_initial]")
        if self.battery_initial > MAX_ENDURANCE_S:
            raise ValueError(f"endurance above {MAX_ENDURANCE_S} s")

    @property
    def flight_time(self) -> float:
        return self.battery_initial - self.battery


def new_uav(position: Sequence[float], max_speed: float, endurance: float = MAX_ENDURANCE_S) -> UavState:
    return UavState((float(position[0]), float(position[1])), float(max_speed), float(endurance), float(endurance))


def step_uav(state: UavState, goal: Optional[Sequence[float]], dt: float) -> UavState:
    """Fly straight toward goal for dt seconds of battery; grounds at zero battery."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if state.grounded:
        return state
    flown = min(dt, state.battery)
    pos = state.position
    if goal is not None:
        d = distance(pos, goal)
        reach = state.max_speed * flown
        if d <= reach:
            pos = (float(goal[0]), float(goal[1]))
        elif d > 0:
            f = reach / d
            pos = (pos[0] + (goal[0] - pos[0]) * f, pos[1] + (goal[1] - pos[1]) * f)
    battery = state.battery - flown
    if battery <= 0:
        battery = 0.0
    return replace(state, position=pos, battery=battery, grounded=battery == 0.0)


def _segment_hits_interior(a: Position, b: Position, ob: Obstacle) -> bool:
    # Liang-Barsky clip against the closed rectangle; blocked iff the clipped
    # piece has an interior point (its midpoint is then interior by convexity).
    t0, t1 = 0.0, 1.0
    dx, dy = b[0] - a[0], b[1] - a[1]
    for p, q in ((-dx, a[0] - ob.x_min), (dx, ob.x_max - a[0]), (-dy, a[1] - ob.y_min), (dy, ob.y_max - a[1])):
        if p == 0:
            if q < 0:
                return False
        else:
            r = q / p
            if p < 0:
                t0 = max(t0, r)
            else:
                t1 = min(t1, r)
            if t0 > t1:
                return False
    tm = 0.5 * (t0 + t1)
    return ob.contains_strictly((a[0] + tm * dx, a[1] + tm * dy))


def line_of_sight(a: Sequence[float], b: Sequence[float], obstacles: Sequence[Obstacle]) -> bool:
    """True iff segment a-b touches no obstacle interior (tangency is allowed)."""
    a = (float(a[0]), float(a[1]))
    b = (float(b[0]), float(b[1]))
    return not any(_segment_hits_interior(a, b, ob) for ob in obstacles)


@dataclass
class CameraState:
    id: int
    position: Position
    radius: float
    activated: bool = False
    activation_time: Optional[float] = None

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("coverage radius must be positive")

    def activate(self, t: float) -> None:
        if not self.activated:
            self.activated = True
            self.activation_time = t

    def deactivate(self) -> None:
        self.activated = False
        self.activation_time = None


def camera_covers(cam: CameraState, p: Sequence[float], obstacles: Sequence[Obstacle]) -> bool:
    return distance(cam.position, p) <= cam.radius and line_of_sight(cam.position, p, obstacles)
