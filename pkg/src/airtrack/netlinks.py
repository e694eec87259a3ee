"""Latency and transmit-energy models for the three link layers.

UAV_LTE covers UAV to camera / cluster traffic, CAMERA_LAN the wired camera
network, CAMERA_WIFI camera to cluster (and cluster-internal) traffic.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping


class LinkKind(str, enum.Enum):
    UAV_LTE = "uav_lte"
    CAMERA_LAN = "camera_lan"
    CAMERA_WIFI = "camera_wifi"


@dataclass(frozen=True)
class LinkParams:
    rate: float  # bits/s
    propagation: float = 0.0  # s/m
    overhead: float = 0.0  # s per message

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if self.propagation < 0 or self.overhead < 0:
            raise ValueError("propagation and overhead must be nonnegative")


@dataclass(frozen=True)
class RadioEnergyParams:
    power: Mapping[LinkKind, float] = field(
        default_factory=lambda: {LinkKind.UAV_LTE: 1.0, LinkKind.CAMERA_WIFI: 0.0, LinkKind.CAMERA_LAN: 0.0}
    )

    def __post_init__(self) -> None:
        if any(p < 0 for p in self.power.values()):
            raise ValueError("transmit power must be nonnegative")


# LTE propagation is an effective per-meter figure (access + backhaul), so that
# distance to the serving node matters for UAV uplinks.
DEFAULT_LINKS: dict[LinkKind, LinkParams] = {
    LinkKind.CAMERA_LAN: LinkParams(rate=1e9, propagation=5e-9, overhead=2e-4),
    LinkKind.CAMERA_WIFI: LinkParams(rate=5e7, propagation=5e-9, overhead=2e-3),
    LinkKind.UAV_LTE: LinkParams(rate=2e7, propagation=1e-5, overhead=1e-2),
}


def default_links() -> dict[LinkKind, LinkParams]:
    return dict(DEFAULT_LINKS)


def link_latency(kind: LinkKind, payload: float, distance: float, params: LinkParams | Mapping[LinkKind, LinkParams]) -> float:
    """overhead + distance * propagation + payload / rate."""
    if payload < 0 or distance < 0:
        raise ValueError("payload and distance must be nonnegative")
    if not isinstance(params, LinkParams):
        params = params[LinkKind(kind)]
    return params.overhead + distance * params.propagation + payload / params.rate


def tx_energy(kind: LinkKind, duration: float, radio: RadioEnergyParams) -> float:
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    kind = LinkKind(kind)
    if kind is LinkKind.CAMERA_LAN:
        # wired senders draw no modeled radio energy
        return 0.0
    return radio.power.get(kind, 0.0) * duration
