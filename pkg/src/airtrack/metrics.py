"""Episode metrics and order-independent cross-seed aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Iterable, Optional, Sequence


@dataclass
class EpisodeMetrics:
    duration: float = 0.0
    tracked_fraction: float = 1.0
    loss_events: int = 0
    reacquired: int = 0
    mean_reacquisition_time: Optional[float] = None
    case2_seconds: float = 0.0
    case3_seconds: float = 0.0
    uav_flight_seconds: float = 0.0
    uav_radio_joules: float = 0.0
    mean_tuple_latency: Optional[float] = None
    total_qoe_cost: float = 0.0
    activated_cameras: int = 0
    competition_ratios: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.reacquired > self.loss_events:
            raise ValueError("reacquired exceeds loss events")
        if not 0.0 <= self.tracked_fraction <= 1.0:
            raise ValueError("tracked_fraction outside [0, 1]")

    @property
    def mean_competition_ratio(self) -> Optional[float]:
        return math.fsum(self.competition_ratios) / len(self.competition_ratios) if self.competition_ratios else None

    def scalars(self) -> dict[str, Optional[float]]:
        """Flat numeric view (competition ratios reduced to mean and count)."""
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "competition_ratios"}
        out["mean_competition_ratio"] = self.mean_competition_ratio
        out["competition_ratio_count"] = len(self.competition_ratios)
        return out


METRIC_COLUMNS: tuple[str, ...] = tuple(EpisodeMetrics().scalars())


@dataclass(frozen=True)
class Stat:
    mean: Optional[float]
    sd: Optional[float]
    min: Optional[float]
    max: Optional[float]
    count: int


@dataclass(frozen=True)
class Summary:
    """Per-metric statistics over seeds; sd is the population standard deviation."""

    stats: dict[str, Stat]
    seeds: int
    sd_kind: str = "population"

    def __getitem__(self, name: str) -> Stat:
        return self.stats[name]


def _stat(values: Sequence[float]) -> Stat:
    if not values:
        return Stat(None, None, None, None, 0)
    # fsum is exactly rounded, so the result does not depend on input order
    mean = math.fsum(values) / len(values)
    lo, hi = min(values), max(values)
    mean = min(max(mean, lo), hi)
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))
    return Stat(mean, sd, lo, hi, len(values))


def aggregate(episodes: Iterable[EpisodeMetrics]) -> Summary:
    episodes = list(episodes)
    if not episodes:
        raise ValueError("cannot aggregate an empty episode list")
    stats = {}
    for name in METRIC_COLUMNS:
        vals = [float(v) for v in (ep.scalars()[name] for ep in episodes) if v is not None]
        stats[name] = _stat(vals)
    return Summary(stats, len(episodes))
