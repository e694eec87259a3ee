"""Cloudlet-coordinated multi-round assignment of video subtasks to volunteer nodes.

Node availability follows a per-round on/off process: an available node stays
with probability ``persistence``; an absent one joins with probability
``arrival``. A node that leaves during a round loses the work it was given
that round, which is still paid for. Online assigners and the offline
optimum share the same realization, so their costs are paired.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .qoe import VideoTask

PENALTY_FACTOR = 10.0


class UndefinedRatioError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class EdgeNodeProfile:
    id: int
    capacity: int  # subtasks per round
    cost: float  # per subtask attempt
    persistence: float
    available: bool = True  # at round 1
    arrival: float = 0.0

    def __post_init__(self) -> None:
        if self.capacity < 1 or self.cost < 0:
            raise ValueError(f"node {self.id}: capacity >= 1 and cost >= 0 required")
        if not (0 <= self.persistence <= 1 and 0 <= self.arrival <= 1):
            raise ValueError(f"node {self.id}: probabilities must lie in [0, 1]")

    @property
    def expected_unit_cost(self) -> float:
        return math.inf if self.persistence == 0 else self.cost / self.persistence


@dataclass(frozen=True)
class SubtaskBatch:
    parent: int
    ranges: tuple[tuple[int, int], ...]  # [start, end) frames

    @property
    def count(self) -> int:
        return len(self.ranges)


def split_task(task: VideoTask, frames: int, chunk: int) -> SubtaskBatch:
    if frames < 1 or chunk < 1:
        raise ValueError("frames and chunk must be at least 1")
    ranges = tuple((s, min(s + chunk, frames)) for s in range(0, frames, chunk))
    return SubtaskBatch(task.origin, ranges)


@dataclass(frozen=True)
class Availability:
    """presence[r][j]: node j is present at the start of round r (0-based, rounds+1 rows)."""

    node_ids: tuple[int, ...]
    presence: tuple[tuple[bool, ...], ...]

    @property
    def rounds(self) -> int:
        return len(self.presence) - 1

    def present(self, r: int, j: int) -> bool:
        return self.presence[r][j]

    def completes(self, r: int, j: int) -> bool:
        return self.presence[r][j] and self.presence[r + 1][j]

    def completion_table(self) -> list[list[bool]]:
        return [[self.completes(r, j) for j in range(len(self.node_ids))] for r in range(self.rounds)]

    def summary(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self.presence]


def realize_availability(nodes: Sequence[EdgeNodeProfile], max_rounds: int, rng: np.random.Generator) -> Availability:
    """Draw the whole on/off realization up front (one uniform per node per round)."""
    state = [n.available for n in nodes]
    rows = [tuple(state)]
    for _ in range(max_rounds):
        u = rng.random(len(nodes))
        state = [bool(u[j] < (n.persistence if state[j] else n.arrival)) for j, n in enumerate(nodes)]
        rows.append(tuple(state))
    return Availability(tuple(n.id for n in nodes), tuple(rows))


@dataclass
class AssignmentSchedule:
    rounds: list[dict[int, int]] = field(default_factory=list)  # subtask -> node id, per round
    completion: dict[int, int] = field(default_factory=dict)  # subtask -> 1-based round
    attempt_cost: float = 0.0
    penalty_cost: float = 0.0
    incomplete: int = 0

    @property
    def total_cost(self) -> float:
        return self.attempt_cost + self.penalty_cost

    @property
    def complete(self) -> bool:
        return self.incomplete == 0

    @property
    def last_round(self) -> int:
        return max(self.completion.values(), default=0)

    def summary(self) -> dict:
        return {"rounds": [{str(k): v for k, v in sorted(r.items())} for r in self.rounds],
                "total_cost": self.total_cost, "incomplete": self.incomplete}


def default_penalty(nodes: Sequence[EdgeNodeProfile]) -> float:
    return PENALTY_FACTOR * max((n.cost for n in nodes), default=0.0)


def _run_rounds(batch, nodes, max_rounds, avail, fill, penalty) -> AssignmentSchedule:
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    if not any(n.available for n in nodes):
        raise ValueError("no node is available in round 1")
    if avail.rounds < max_rounds:
        raise ValueError("availability realization shorter than max_rounds")
    sched = AssignmentSchedule()
    pending = list(range(batch.count))
    for r in range(max_rounds):
        if not pending:
            break
        present = [j for j in range(len(nodes)) if avail.present(r, j)]
        mapping = fill(pending, present)
        sched.rounds.append({s: nodes[j].id for s, j in mapping.items()})
        done = []
        for s, j in mapping.items():
            sched.attempt_cost += nodes[j].cost
            if avail.completes(r, j):
                sched.completion[s] = r + 1
                done.append(s)
        pending = [s for s in pending if s not in set(done)]
    sched.incomplete = len(pending)
    sched.penalty_cost = penalty * len(pending)
    return sched


def _ranked_fill(order_key, nodes):
    def fill(pending, present):
        mapping: dict[int, int] = {}
        queue = list(pending)
        for j in sorted(present, key=lambda j: order_key(nodes[j])):
            for _ in range(nodes[j].capacity):
                if not queue:
                    return mapping
                mapping[queue.pop(0)] = j
        return mapping
    return fill


def pa_opt_assign(batch: SubtaskBatch, nodes: Sequence[EdgeNodeProfile], max_rounds: int,
                  rng: Optional[np.random.Generator] = None, *, availability: Optional[Availability] = None,
                  penalty: Optional[float] = None) -> AssignmentSchedule:
    """Each round, fill present nodes cheapest expected unit cost (cost / persistence) first."""
    if availability is None:
        availability = realize_availability(nodes, max_rounds, rng)
    if penalty is None:
        penalty = default_penalty(nodes)
    fill = _ranked_fill(lambda n: (n.expected_unit_cost, n.cost, n.id), nodes)
    return _run_rounds(batch, nodes, max_rounds, availability, fill, penalty)


class BaselineKind(str, enum.Enum):
    RANDOM = "random"
    GREEDY_NOPREDICT = "greedy_nopredict"


def baseline_assign(kind: BaselineKind | str, batch: SubtaskBatch, nodes: Sequence[EdgeNodeProfile], max_rounds: int,
                    rng: Optional[np.random.Generator] = None, *, availability: Optional[Availability] = None,
                    penalty: Optional[float] = None) -> AssignmentSchedule:
    kind = BaselineKind(kind)
    if availability is None:
        availability = realize_availability(nodes, max_rounds, rng)
    if penalty is None:
        penalty = default_penalty(nodes)
    if kind is BaselineKind.GREEDY_NOPREDICT:
        fill = _ranked_fill(lambda n: (n.cost, n.id), nodes)
    else:
        if rng is None:
            raise ValueError("RANDOM baseline needs an rng")

        def fill(pending, present):
            load = {j: 0 for j in present}
            mapping = {}
            for s in pending:
                open_nodes = [j for j in sorted(present) if load[j] < nodes[j].capacity]
                if not open_nodes:
                    break
                j = open_nodes[int(rng.integers(len(open_nodes)))]
                load[j] += 1
                mapping[s] = j
            return mapping
    return _run_rounds(batch, nodes, max_rounds, availability, fill, penalty)


def offline_opt(batch: SubtaskBatch, nodes: Sequence[EdgeNodeProfile], availability: Availability,
                max_rounds: Optional[int] = None, penalty: Optional[float] = None) -> float:
    """Least total cost with the whole realization known in advance.

    Recursive search over rounds; in each round every split of the remaining
    subtasks among completing nodes (within capacity) is tried.
    """
    rounds = availability.rounds if max_rounds is None else max_rounds
    if penalty is None:
        penalty = default_penalty(nodes)
    slots = [[j for j in range(len(nodes)) if availability.completes(r, j)] for r in range(rounds)]

    @lru_cache(maxsize=None)
    def best(r: int, remaining: int) -> float:
        if remaining == 0:
            return 0.0
        if r == rounds:
            return remaining * penalty
        return _distribute(r, 0, remaining)

    @lru_cache(maxsize=None)
    def _distribute(r: int, k: int, remaining: int) -> float:
        if k == len(slots[r]):
            return best(r + 1, remaining)
        node = nodes[slots[r][k]]
        out = math.inf
        for x in range(min(node.capacity, remaining) + 1):
            out = min(out, x * node.cost + _distribute(r, k + 1, remaining - x))
        return out

    return best(0, batch.count)


def competition_ratio(online_cost: float, offline_cost: float) -> float:
    if offline_cost <= 0:
        raise UndefinedRatioError("offline cost must be positive")
    return online_cost / offline_cost
