"""Relay activation: ring geometry, key-set planning, LAN flooding."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airtrack import asrt, oracles
from airtrack.netlinks import DEFAULT_LINKS, LinkKind, LinkParams
from airtrack.simcore import Engine, EventKind
from airtrack.world import CameraState

# 50 ms to any camera: 10 ms overhead + 0.8 Mb at 20 Mb/s, no distance term
FLAT = {
    LinkKind.UAV_LTE: LinkParams(rate=2e7, propagation=0.0, overhead=0.01),
    LinkKind.CAMERA_WIFI: LinkParams(rate=5e7, propagation=0.0, overhead=2e-3),
    LinkKind.CAMERA_LAN: LinkParams(rate=1e9, propagation=0.0, overhead=2e-4),
}
PAYLOAD = 8e5


def cams(*positions, radius=40.0):
    return [CameraState(i, (float(x), float(y)), radius) for i, (x, y) in enumerate(positions)]


def test_ring_region_examples():
    assert asrt.ring_region((0, 0), 20, 0, 5, 1, 1).r_inner == 0
    assert asrt.ring_region((0, 0), 20, 5, 2, 0.4, 0.6).r_outer == 60
    r = asrt.ring_region((0, 0), 20, 5, 0, 0, 0)
    assert r.r_inner == r.r_outer == 0


@given(st.floats(0, 50), st.floats(0, 50), st.floats(0, 100), st.floats(0, 5), st.floats(0, 5), st.floats(0, 10))
def test_ring_ordered_and_growing(a, b, elapsed, dq, dr, extra):
    vmin, vmax = min(a, b), max(a, b)
    r1 = asrt.ring_region((0, 0), vmax, vmin, elapsed, dq, dr)
    r2 = asrt.ring_region((0, 0), vmax, vmin, elapsed + extra, dq, dr)
    assert 0 <= r1.r_inner <= r1.r_outer
    assert r2.r_inner >= r1.r_inner and r2.r_outer >= r1.r_outer


def test_candidate_geometry():
    g = asrt.CameraGraph.build(cams((30, 0)) + [CameraState(1, (200.0, 0.0), 10.0)], [])
    region = asrt.RingRegion((0.0, 0.0), 0.0, 60.0)
    assert asrt.candidate_cameras(g, region) == {0}
    assert asrt.candidate_cameras(asrt.CameraGraph.build([], []), region) == set()


def test_candidate_disk_inside_ring_hole_excluded():
    g = asrt.CameraGraph.build([CameraState(0, (0.0, 0.0), 10.0), CameraState(1, (95.0, 0.0), 10.0)], [])
    assert asrt.candidate_cameras(g, asrt.RingRegion((0.0, 0.0), 50.0, 100.0)) == {1}


def test_single_candidate():
    g = asrt.CameraGraph.build(cams((0, 0)), [])
    plan = asrt.plan_activation(g, {0}, (0, 0), 3, FLAT, PAYLOAD)
    assert plan.keys == (0,)
    assert math.isclose(plan.total, 0.05)


def test_two_candidates_time_first():
    g = asrt.CameraGraph.build(cams((0, 0), (10, 0)), [(0, 1, 1e-3)])
    plan = asrt.plan_activation(g, {0, 1}, (0, 0), 2, FLAT, PAYLOAD)
    assert plan.keys == (0, 1)
    assert math.isclose(plan.total, 0.05)
    one = asrt.plan_activation(g, {0, 1}, (0, 0), 1, FLAT, PAYLOAD)
    assert one.keys == (0,) and math.isclose(one.total, 0.051)


def test_tie_prefers_smaller_key_set():
    # camera 1 is 5 ms farther by LTE; {0} and {0, 1} both finish at 51 ms
    slow = {**FLAT, LinkKind.UAV_LTE: LinkParams(rate=2e7, propagation=1e-5, overhead=0.01)}
    g = asrt.CameraGraph.build(cams((0, 0), (500, 0)), [(0, 1, 1e-3)])
    plan = asrt.plan_activation(g, {0, 1}, (0, 0), 2, slow, PAYLOAD)
    assert plan.keys == (0,)
    assert math.isclose(plan.total, 0.051)


def test_tie_prefers_lexicographically_smaller():
    g = asrt.CameraGraph.build(cams((0, 0), (0, 0)), [(0, 1, 1e-3)])
    assert asrt.plan_activation(g, {0, 1}, (0, 0), 1, FLAT, PAYLOAD).keys == (0,)


def test_frozen_five_camera_line():
    # optima below come from the brute-force oracle over all key sets
    inst = {"cameras": [{"id": i, "position": [200.0 * i, 0.0], "radius": 80.0} for i in range(5)],
            "edges": [[0, 1, 0.004], [1, 2, 0.004], [2, 3, 0.004], [3, 4, 0.004], [0, 4, 0.03]],
            "candidates": [0, 1, 2, 3, 4], "uav": [0.0, 500.0], "k_max": 2, "payload": 1e6}
    g = oracles._asrt_graph(inst)
    expected = {1: ((2,), 0.07440312423743287), 2: ((0, 3), 0.07181024967590666),
                3: ((1, 3, 4), 0.06943398113205661), 5: ((1, 3, 4), 0.06943398113205661)}
    for k, (keys, total) in expected.items():
        plan = asrt.plan_activation(g, inst["candidates"], inst["uav"], k, DEFAULT_LINKS, inst["payload"])
        assert plan.keys == keys
        assert plan.total == total


def test_unreachable_candidate_raises():
    g = asrt.CameraGraph.build(cams((0, 0), (500, 0)), [])
    with pytest.raises(asrt.CoverageError):
        asrt.plan_activation(g, {0, 1}, (0, 0), 1, FLAT, PAYLOAD)
    plan = asrt.plan_activation(g, {0, 1}, (0, 0), 2, FLAT, PAYLOAD)
    assert plan.keys == (0, 1)
    assert asrt.lan_components(g, {0, 1}) == 2


def test_star_flood():
    g = asrt.CameraGraph.build(cams((0, 0), (10, 0), (0, 10), (-10, 0)), [(0, 1, 1e-3), (0, 2, 1e-3), (0, 3, 1e-3)])
    plan = asrt.plan_activation(g, {0, 1, 2, 3}, (0, 0), 1, FLAT, PAYLOAD)
    assert plan.keys == (0,)
    times = asrt.propagate_activation(plan, g)
    assert math.isclose(times[0], 0.05)
    for spoke in (1, 2, 3):
        assert math.isclose(times[spoke], 0.051)


def test_triangle_min_delay_paths():
    # A-B 1 ms, B-C 1 ms, A-C 5 ms: C is reached through B at 2 ms
    g = asrt.CameraGraph.build(cams((0, 0), (1, 0), (2, 0)), [(0, 1, 1e-3), (1, 2, 1e-3), (0, 2, 5e-3)])
    plan = asrt.ActivationPlan((0,), {0: 0.0}, {0: 0.0, 1: 1e-3, 2: 2e-3}, 2e-3)
    assert asrt.propagate_activation(plan, g) == {0: 0.0, 1: 1e-3, 2: 2e-3}


def test_flood_schedules_activation_events():
    g = asrt.CameraGraph.build(cams((0, 0), (10, 0)), [(0, 1, 1e-3)])
    plan = asrt.plan_activation(g, {0, 1}, (0, 0), 1, FLAT, PAYLOAD)
    e = Engine()
    e.subscribe(EventKind.MESSAGE_ARRIVAL, asrt.activation_handler(g))
    e.run_until(1.0)
    asrt.propagate_activation(plan, g, e)
    e.run_until(1.04)
    assert not g.cameras[0].activated
    e.run_until(2.0)
    assert g.cameras[0].activation_time == pytest.approx(1.05)
    assert g.cameras[1].activation_time == pytest.approx(1.051)


def test_lan_edges_must_be_positive():
    with pytest.raises(ValueError):
        asrt.CameraGraph.build(cams((0, 0), (1, 0)), [(0, 1, 0.0)])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_plan_matches_oracle_and_dominates_all_direct(seed):
    inst = oracles.asrt_instance(np.random.default_rng(seed))
    dev, problems = oracles.check_asrt(inst)
    assert problems == []
    assert dev == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_total_nonincreasing_in_k_max(seed):
    inst = oracles.asrt_instance(np.random.default_rng(seed))
    g = oracles._asrt_graph(inst)
    totals = [asrt.plan_activation(g, inst["candidates"], inst["uav"], k, DEFAULT_LINKS, inst["payload"]).total
              for k in range(1, len(inst["candidates"]) + 1)]
    assert all(b <= a for a, b in zip(totals, totals[1:]))


def test_greedy_regime_covers_all_candidates():
    rng = np.random.default_rng(0)
    positions = [tuple(rng.uniform(0, 2000, 2)) for _ in range(20)]
    g = asrt.CameraGraph.build(cams(*positions), [(i, i + 1, 2e-3) for i in range(19)])
    plan = asrt.plan_activation(g, set(range(20)), (1000, 1000), 3, DEFAULT_LINKS)
    assert 1 <= len(plan.keys) <= 3
    assert set(plan.times) == set(range(20))
    assert plan.total == max(plan.times.values())
