"""Discrete-event engine: event queue, clock, seeded substreams, traces."""
from __future__ import annotations

import enum
import hashlib
import heapq
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

import numpy as np

# Positive scheduling intervals below this are rejected to avoid zero-progress loops.
MIN_INTERVAL = 1e-9


class EventKind(str, enum.Enum):
    ENTITY_STEP = "entity-step"
    MESSAGE_ARRIVAL = "message-arrival"
    TASK_COMPLETE = "task-complete"
    TIMER = "timer"


class SchedulingError(ValueError):
    """Raised when an event is scheduled in the past (or too close to now)."""


@dataclass(order=False)
class Event:
    time: float
    seq: int
    kind: EventKind
    payload: Any = None

    def sort_key(self) -> tuple[float, int]:
        return (self.time, self.seq)

    def __lt__(self, other: Event) -> bool:
        return self.sort_key() < other.sort_key()


def payload_summary(payload: Any) -> Any:
    """JSON-friendly summary of an event payload."""
    if payload is None:
        return None
    if hasattr(payload, "summary"):
        return payload.summary()
    if isinstance(payload, dict):
        return {str(k): payload_summary(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [payload_summary(v) for v in payload]
    if isinstance(payload, (np.floating, np.integer)):
        return payload.item()
    if isinstance(payload, (str, int, float, bool)):
        return payload
    return repr(payload)


@dataclass
class TraceRecord:
    time: float
    seq: int
    kind: str
    payload: Any

    def to_json(self) -> str:
        return json.dumps(
            {"time": self.time, "seq": self.seq, "kind": self.kind, "payload": self.payload},
            sort_keys=True,
            separators=(",", ":"),
        )


class EventTrace(list):
    """Ordered list of TraceRecord with NDJSON serialization."""

    def dumps(self) -> str:
        return "".join(rec.to_json() + "\n" for rec in self)

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())


class SimClock:
    def __init__(self, now: float = 0.0) -> None:
        self._now = float(now)

    @property
    def now(self) -> float:
        return self._now

    def advance(self, t: float) -> None:
        if t < self._now:
            raise SchedulingError(f"clock cannot move backwards ({t} < {self._now})")
        self._now = float(t)


def _stream_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "little")


@dataclass(frozen=True)
class RunSeed:
    """Root seed; each named entity gets its own independent generator."""

    seed: int

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def substream(self, name: str) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(_stream_key(name),))
        return np.random.Generator(np.random.PCG64(ss))


Handler = Callable[["Engine", Event], None]


@dataclass
class Engine:
    """Single-threaded event loop ordered by (time, seq)."""

    clock: SimClock = field(default_factory=SimClock)
    keep_trace: bool = True
    _queue: list[Event] = field(default_factory=list)
    _seq: int = 0
    _handlers: dict[EventKind, list[Handler]] = field(default_factory=dict)
    trace: EventTrace = field(default_factory=EventTrace)
    dispatched: int = 0

    @property
    def now(self) -> float:
        return self.clock.now

    @property
    def pending(self) -> int:
        return len(self._queue)

    def subscribe(self, kind: EventKind, handler: Handler) -> None:
        self._handlers.setdefault(EventKind(kind), []).append(handler)

    def schedule(self, event: Event) -> Event:
        if event.time < self.now:
            raise SchedulingError(f"event at t={event.time} is before now={self.now}")
        if 0.0 < event.time - self.now < MIN_INTERVAL:
            raise SchedulingError(f"interval {event.time - self.now} s below {MIN_INTERVAL} s")
        event.seq = self._seq
        self._seq += 1
        heapq.heappush(self._queue, event)
        return event

    def at(self, time: float, kind: EventKind, payload: Any = None) -> Event:
        return self.schedule(Event(float(time), -1, EventKind(kind), payload))

    def after(self, delay: float, kind: EventKind, payload: Any = None) -> Event:
        return self.at(self.now + delay, kind, payload)

    def run_until(self, t_end: float) -> EventTrace:
        if t_end < self.now:
            raise SchedulingError(f"run_until({t_end}) is before now={self.now}")
        out = EventTrace()
        while self._queue and self._queue[0].time <= t_end:
            ev = heapq.heappop(self._queue)
            self.clock.advance(ev.time)
            rec = TraceRecord(ev.time, ev.seq, ev.kind.value, payload_summary(ev.payload))
            out.append(rec)
            if self.keep_trace:
                self.trace.append(rec)
            self.dispatched += 1
            for handler in self._handlers.get(ev.kind, ()):
                handler(self, ev)
        self.clock.advance(t_end)
        return out

    def pending_events(self) -> Iterable[Event]:
        return sorted(self._queue)
