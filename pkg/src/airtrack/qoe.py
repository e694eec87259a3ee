"""Latency/energy-weighted offloading of camera video tasks to one edge server."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

EXHAUSTIVE_LIMIT = 10


class Side(str, enum.Enum):
    LOCAL = "local"
    EDGE = "edge"


class InvalidRateError(ValueError):
    pass


@dataclass(frozen=True)
class VideoTask:
    data: float  # bits
    cycles: float
    origin: int = -1  # camera id
    release: float = 0.0

    def __post_init__(self) -> None:
        if self.data < 0 or self.cycles < 0:
            raise ValueError("task data and cycles must be nonnegative")


@dataclass(frozen=True)
class TerminalProfile:
    frequency: float  # cycles/s
    kappa: float = 1e-27  # J / (cycle * (cycles/s)^2)
    tx_power: float = 0.5  # W

    def __post_init__(self) -> None:
        if self.frequency <= 0 or self.kappa < 0 or self.tx_power < 0:
            raise ValueError("invalid terminal profile")


@dataclass(frozen=True)
class EdgeServerProfile:
    frequency: float

    def __post_init__(self) -> None:
        if self.frequency <= 0:
            raise ValueError("edge frequency must be positive")


@dataclass(frozen=True)
class QoeWeights:
    latency: float = 1.0  # per second
    energy: float = 1.0  # per joule

    def __post_init__(self) -> None:
        if self.latency < 0 or self.energy < 0 or (self.latency == 0 and self.energy == 0):
            raise ValueError("weights must be nonnegative and not both zero")


def latency_energy(task: VideoTask, side: Side, terminal: TerminalProfile, server: EdgeServerProfile,
                   rate: Optional[float] = None) -> tuple[float, float, float]:
    """(transfer seconds, compute seconds, joules) of running task on side."""
    if Side(side) is Side.LOCAL:
        return 0.0, task.cycles / terminal.frequency, terminal.kappa * terminal.frequency ** 2 * task.cycles
    if task.data == 0:
        return 0.0, task.cycles / server.frequency, 0.0
    if rate is None or rate <= 0:
        raise InvalidRateError("offloading needs a positive uplink rate")
    tx = task.data / rate
    return tx, task.cycles / server.frequency, terminal.tx_power * tx


def task_cost(task: VideoTask, side: Side, terminal: TerminalProfile, server: EdgeServerProfile,
              rate: Optional[float], w: QoeWeights) -> float:
    if Side(side) is Side.EDGE and (rate is None or rate <= 0):
        raise InvalidRateError("offloading needs a positive uplink rate")
    tx, comp, energy = latency_energy(task, side, terminal, server, rate)
    return w.latency * (tx + comp) + w.energy * energy


def decide(task: VideoTask, terminal: TerminalProfile, server: EdgeServerProfile, rate: float,
           w: QoeWeights) -> Side:
    """Cheaper side; a tie stays LOCAL."""
    local = task_cost(task, Side.LOCAL, terminal, server, None, w)
    edge = task_cost(task, Side.EDGE, terminal, server, rate, w)
    return Side.EDGE if edge < local else Side.LOCAL


@dataclass(frozen=True)
class OffloadDecision:
    choices: tuple[Side, ...]
    rates: dict[int, float]  # offloaded task index -> bits/s
    total_cost: float
    latencies: tuple[float, ...] = ()
    transfer: tuple[float, ...] = ()
    compute: tuple[float, ...] = ()

    def summary(self) -> dict:
        return {"choices": [c.value for c in self.choices], "total_cost": self.total_cost,
                "rates": {str(i): r for i, r in sorted(self.rates.items())}}


def split_bandwidth(tasks: Sequence[VideoTask], offloaded: Sequence[int], total_bandwidth: float) -> dict[int, float]:
    """Proportional-to-data split; equal split if every offloaded task is empty."""
    if not offloaded:
        return {}
    volume = sum(tasks[i].data for i in offloaded)
    if volume == 0:
        return {i: total_bandwidth / len(offloaded) for i in offloaded}
    return {i: total_bandwidth * tasks[i].data / volume for i in offloaded}


def _terminal_for(terminals, i: int) -> TerminalProfile:
    return terminals if isinstance(terminals, TerminalProfile) else terminals[i]


def evaluate(tasks: Sequence[VideoTask], offloaded: Sequence[int], terminals, server: EdgeServerProfile,
             total_bandwidth: float, w: QoeWeights) -> OffloadDecision:
    """Cost of a fixed offload subset under the proportional split."""
    off = sorted(offloaded)
    rates = split_bandwidth(tasks, off, total_bandwidth)
    choices, lat, trans, comp = [], [], [], []
    total = 0.0
    for i, task in enumerate(tasks):
        side = Side.EDGE if i in rates else Side.LOCAL
        term = _terminal_for(terminals, i)
        tx, cp, energy = latency_energy(task, side, term, server, rates.get(i))
        total += w.latency * (tx + cp) + w.energy * energy
        choices.append(side)
        lat.append(tx + cp)
        trans.append(tx)
        comp.append(cp)
    return OffloadDecision(tuple(choices), rates, total, tuple(lat), tuple(trans), tuple(comp))


def _local_search(tasks, start: set[int], terminals, server, bandwidth, w) -> OffloadDecision:
    current = set(start)
    cur = evaluate(tasks, current, terminals, server, bandwidth, w)
    while True:
        best = None
        for i in range(len(tasks)):
            trial = current ^ {i}
            dec = evaluate(tasks, trial, terminals, server, bandwidth, w)
            if best is None or dec.total_cost < best[1].total_cost:
                best = (trial, dec)
        if best is None or not best[1].total_cost < cur.total_cost:
            return cur
        current, cur = best


def joint_allocate(tasks: Sequence[VideoTask], terminals, server: EdgeServerProfile, total_bandwidth: float,
                   w: QoeWeights) -> OffloadDecision:
    """Choose the offload subset (and hence the bandwidth split) of least total cost.

    Exhaustive over all subsets for up to ten tasks; otherwise single-flip best
    response from all-local, re-run from all-edge when that baseline is cheaper.
    """
    if total_bandwidth <= 0:
        raise InvalidRateError("total bandwidth must be positive")
    n = len(tasks)
    if n <= EXHAUSTIVE_LIMIT:
        best = None
        for mask in range(1 << n):
            dec = evaluate(tasks, [i for i in range(n) if mask >> i & 1], terminals, server, total_bandwidth, w)
            if best is None or dec.total_cost < best.total_cost:
                best = dec
        return best
    result = _local_search(tasks, set(), terminals, server, total_bandwidth, w)
    all_edge = evaluate(tasks, range(n), terminals, server, total_bandwidth, w)
    if all_edge.total_cost < result.total_cost:
        alt = _local_search(tasks, set(range(n)), terminals, server, total_bandwidth, w)
        if alt.total_cost < result.total_cost:
            result = alt
    return result
