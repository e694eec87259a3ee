import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from airtrack.netlinks import DEFAULT_LINKS, LinkKind, LinkParams, RadioEnergyParams, link_latency, tx_energy


def test_lan_formula():
    # 2e-4 + 100 * 5e-9 + 0 / 1e9
    p = LinkParams(rate=1e9, propagation=5e-9, overhead=2e-4)
    assert math.isclose(link_latency(LinkKind.CAMERA_LAN, 0, 100, p), 2.005e-4, rel_tol=1e-12)


def test_lte_formula():
    p = LinkParams(rate=2e7, propagation=0.0, overhead=0.01)
    assert math.isclose(link_latency(LinkKind.UAV_LTE, 8e6, 0, p), 0.41, rel_tol=1e-12)


def test_mapping_params_select_by_kind():
    assert link_latency(LinkKind.UAV_LTE, 8e6, 0, DEFAULT_LINKS) == 0.01 + 8e6 / 2e7


@given(st.sampled_from(list(LinkKind)), st.floats(0, 1e9), st.floats(0, 1e5))
def test_monotone_in_payload_and_distance(kind, payload, dist):
    base = link_latency(kind, payload, dist, DEFAULT_LINKS)
    assert link_latency(kind, payload * 2 + 1, dist, DEFAULT_LINKS) > base
    assert link_latency(kind, payload, dist + 10, DEFAULT_LINKS) >= base


@given(st.floats(0, 1e9), st.floats(0, 1e5))
def test_default_ordering_lan_wifi_lte(payload, dist):
    lan = link_latency(LinkKind.CAMERA_LAN, payload, dist, DEFAULT_LINKS)
    wifi = link_latency(LinkKind.CAMERA_WIFI, payload, dist, DEFAULT_LINKS)
    lte = link_latency(LinkKind.UAV_LTE, payload, dist, DEFAULT_LINKS)
    assert lan < wifi < lte


def test_tx_energy_examples():
    radio = RadioEnergyParams()
    assert tx_energy(LinkKind.UAV_LTE, 0, radio) == 0
    assert math.isclose(tx_energy(LinkKind.UAV_LTE, 0.41, radio), 0.41)
    loud = RadioEnergyParams({LinkKind.UAV_LTE: 1.0, LinkKind.CAMERA_WIFI: 2.0, LinkKind.CAMERA_LAN: 5.0})
    assert tx_energy(LinkKind.CAMERA_LAN, 3.0, loud) == 0.0


@given(st.floats(0, 1e4), st.floats(0, 1e4))
def test_tx_energy_linear(a, b):
    radio = RadioEnergyParams()
    assert math.isclose(tx_energy(LinkKind.UAV_LTE, a + b, radio),
                        tx_energy(LinkKind.UAV_LTE, a, radio) + tx_energy(LinkKind.UAV_LTE, b, radio),
                        rel_tol=1e-12, abs_tol=1e-12)


def test_parameter_validation():
    with pytest.raises(ValueError):
        LinkParams(rate=0)
    with pytest.raises(ValueError):
        LinkParams(rate=1, overhead=-1)
    with pytest.raises(ValueError):
        RadioEnergyParams({LinkKind.UAV_LTE: -1})
    with pytest.raises(ValueError):
        link_latency(LinkKind.UAV_LTE, -1, 0, DEFAULT_LINKS)
    assert len(LinkKind) == 3
