import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airtrack import mra, oracles
from airtrack.netlinks import DEFAULT_LINKS, LinkKind, LinkParams, link_latency

LINKS = {
    LinkKind.UAV_LTE: LinkParams(rate=2e7, propagation=0.0, overhead=0.01),
    LinkKind.CAMERA_WIFI: LinkParams(rate=5e7, propagation=5e-9, overhead=2e-3),
    LinkKind.CAMERA_LAN: LinkParams(rate=1e9, propagation=5e-9, overhead=2e-4),
}


def chain(n=2, cycles=1e8, bits=1e6, memory=1.0, uplink=8e6):
    comps = tuple(mra.Component(cycles, memory) for _ in range(n))
    return mra.StreamDag(comps, tuple((i, i + 1, bits) for i in range(n - 1)), uplink)


def server(i, x=0.0, f=1e9, mem=10.0):
    return mra.ServerProfile(i, (x, 0.0), f, mem)


def test_colocated_chain():
    t = mra.estimate_tuple_time(chain(), (0, 0), [server(0)], (0, 0), LINKS)
    assert math.isclose(t, 0.61, rel_tol=1e-12)


def test_split_chain_adds_one_hop():
    servers = [server(0), server(1, x=300.0)]
    t = mra.estimate_tuple_time(chain(), (0, 1), servers, (0, 0), LINKS)
    hop = link_latency(LinkKind.CAMERA_WIFI, 1e6, 300.0, LINKS)
    assert math.isclose(t, 0.61 + hop, rel_tol=1e-12)


def test_zero_compute_single_component():
    dag = mra.StreamDag((mra.Component(0.0, 1.0),), (), 8e6)
    assert math.isclose(mra.estimate_tuple_time(dag, (0,), [server(0)], (0, 0), LINKS), 0.41)


def test_infeasible_placement_rejected():
    with pytest.raises(mra.PlacementError):
        mra.estimate_tuple_time(chain(memory=6.0), (0, 0), [server(0)], (0, 0), LINKS)


def test_dag_validation():
    with pytest.raises(ValueError):
        mra.StreamDag((mra.Component(1, 1), mra.Component(1, 1)), (), 1.0)  # two sources
    with pytest.raises(ValueError):
        mra.StreamDag((mra.Component(1, 1),) * 3, ((0, 1, 1.0), (1, 2, 1.0), (2, 1, 1.0)), 1.0)


def test_single_server_forced():
    p = mra.mra_place(chain(3), [server(0)], mra.static_forecast((0, 0)), LINKS)
    assert p == (0, 0, 0)


def test_heavy_payload_colocates():
    dag = chain(2, bits=5e9, memory=1.0)
    servers = [server(0, x=0.0), server(1, x=0.0)]
    p = mra.mra_place(dag, servers, mra.static_forecast((0, 0)), LINKS)
    assert p[0] == p[1]


def test_no_feasible_placement():
    with pytest.raises(mra.PlacementError):
        mra.mra_place(chain(2, memory=8.0), [server(0, mem=4.0), server(1, mem=4.0)][:1],
                      mra.static_forecast((0, 0)), LINKS)


def test_frozen_brute_force_instance():
    # optimum found by path enumeration over all 27 placements
    inst = {"components": [{"cycles": 1e8, "memory": 1.0}, {"cycles": 4e8, "memory": 2.0},
                           {"cycles": 2e8, "memory": 1.0}],
            "edges": [[0, 1, 4e6], [0, 2, 1e6]], "uplink_bits": 4e6,
            "servers": [{"id": 0, "position": [0.0, 0.0], "frequency": 2e9, "memory": 2.0},
                        {"id": 1, "position": [1000.0, 0.0], "frequency": 4e9, "memory": 4.0},
                        {"id": 2, "position": [2000.0, 0.0], "frequency": 3e9, "memory": 2.0}],
            "uav": [100.0, 0.0], "velocity": [150.0, 0.0]}
    dag, servers, forecast = oracles._mra_objects(inst)
    p = mra.mra_place(dag, servers, forecast, DEFAULT_LINKS)
    assert p == (1, 1, 1)
    assert math.isclose(mra.mean_forecast_cost(dag, p, servers, forecast, DEFAULT_LINKS), 0.3398, rel_tol=1e-12)


def test_default_round_robin():
    servers = [server(0), server(1)]
    assert mra.baseline_place("default", chain(3), servers, (0, 0), LINKS) == (0, 1, 0)


def test_default_skips_full_server():
    servers = [server(0, mem=1.0), server(1)]
    assert mra.baseline_place("default", chain(3), servers, (0, 0), LINKS) == (0, 1, 1)


def test_ras_equals_mra_with_static_forecast():
    rng = np.random.default_rng(4)
    for _ in range(20):
        inst = oracles.mra_instance(rng)
        dag, servers, _ = oracles._mra_objects(inst)
        ras = mra.baseline_place("ras", dag, servers, inst["uav"], DEFAULT_LINKS)
        static = mra.mra_place(dag, servers, mra.static_forecast(inst["uav"]), DEFAULT_LINKS)
        assert ras == static


def test_mra_beats_ras_when_uav_crosses_servers():
    # UAV is nearer server 0 now but spends the horizon near server 1
    dag = chain(2, cycles=1e8, bits=1e5, uplink=4e6)
    servers = [mra.ServerProfile(0, (0.0, 0.0), 2e9, 4.0), mra.ServerProfile(1, (3000.0, 0.0), 2e9, 4.0)]
    forecast = mra.linear_forecast((900.0, 0.0), (300.0, 0.0))
    p_mra = mra.mra_place(dag, servers, forecast, DEFAULT_LINKS)
    p_ras = mra.baseline_place("ras", dag, servers, (900.0, 0.0), DEFAULT_LINKS)
    c_mra = mra.mean_forecast_cost(dag, p_mra, servers, forecast, DEFAULT_LINKS)
    c_ras = mra.mean_forecast_cost(dag, p_ras, servers, forecast, DEFAULT_LINKS)
    assert c_mra < c_ras
    assert p_ras == (0, 0) and p_mra[0] == 1


def test_forecast_shape():
    f = mra.linear_forecast((0, 0), (1, 2), now=5.0)
    assert f.times == (5.0, 7.5, 10.0, 12.5, 15.0)
    assert f.positions[-1] == (10.0, 20.0)
    with pytest.raises(ValueError):
        mra.UavForecast((1.0, 1.0), ((0, 0), (0, 0)))


def test_greedy_branch_for_large_instances():
    n = 8  # 3**8 > 1e4 placements
    dag = chain(n, memory=1.0)
    servers = [server(0, f=1e9, mem=3.0), server(1, x=100.0, f=2e9, mem=3.0), server(2, x=200.0, f=3e9, mem=3.0)]
    p = mra.mra_place(dag, servers, mra.static_forecast((0, 0)), LINKS)
    assert mra.is_feasible(dag, p, servers)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_exhaustive_regime_optimality(seed):
    inst = oracles.mra_instance(np.random.default_rng(seed))
    dev, problems = oracles.check_mra(inst)
    assert problems == []
    assert dev == 0.0
