import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airtrack.reference import grid
from airtrack.world import (MAX_ENDURANCE_S, CameraState, Obstacle, RoadGraph, camera_covers, distance,
                            line_of_sight, new_uav, place_target, step_target, step_uav)


def line_graph():
    return RoadGraph([[0, 0], [100, 0], [200, 0]], [[0, 1], [1, 2]])


def star_graph():
    # node 0 is the hub with three spokes
    return RoadGraph([[0, 0], [100, 0], [0, 100], [-100, 0]], [[0, 1], [0, 2], [0, 3]])


def test_road_graph_rejects_disconnected():
    with pytest.raises(ValueError):
        RoadGraph([[0, 0], [1, 0], [5, 5]], [[0, 1]])


def test_edge_length_is_euclidean():
    g = RoadGraph([[0, 0], [3, 4]], [[0, 1]])
    assert g.length(0, 1) == 5.0


def test_target_mid_edge_kinematics():
    g = line_graph()
    s = place_target(g, 0, 1, 20.0, 10.0)
    s2 = step_target(g, s, 1.0, np.random.default_rng(0))
    assert s2.position == (30.0, 0.0)


def test_target_turns_back_at_dead_end():
    g = line_graph()
    s = place_target(g, 1, 2, 95.0, 10.0)
    s2 = step_target(g, s, 1.0, np.random.default_rng(0))
    assert s2.edge == (2, 1)
    assert s2.position == (195.0, 0.0)


def test_branch_frequencies_at_degree_three_node():
    # arrive at the hub from spoke 1 a thousand times; the other two spokes should split evenly
    g = star_graph()
    rng = np.random.default_rng(12345)
    counts = {2: 0, 3: 0}
    for _ in range(1000):
        s = place_target(g, 1, 0, 99.0, 2.0)
        s2 = step_target(g, s, 1.0, rng)
        counts[s2.edge[1]] += 1
    assert sum(counts.values()) == 1000
    for c in counts.values():
        assert abs(c / 1000 - 0.5) <= 0.05


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.5, 30), st.integers(1, 200))
def test_target_stays_on_graph(seed, speed, steps):
    nodes, edges = grid(3, 100.0)
    g = RoadGraph(nodes, edges)
    rng = np.random.default_rng(seed)
    s = place_target(g, 0, 1, 0.0, speed)
    for _ in range(steps):
        s = step_target(g, s, 0.5, rng)
    assert g.on_graph(s.position)


def test_uav_battery_boundary():
    u = new_uav((0, 0), 10, endurance=10)
    u = step_uav(u, (1000, 0), 10)
    assert u.battery == 0 and u.grounded


def test_uav_clamped_step_reaches_goal():
    u = step_uav(new_uav((0, 0), 20), (5, 0), 1)
    assert u.position == (5.0, 0.0)


def test_uav_grounded_at_endurance():
    u = new_uav((0, 0), 10, endurance=1800)
    t = 0.0
    while not u.grounded:
        u = step_uav(u, (1e6, 0), 0.5)
        t += 0.5
    assert t == 1800.0
    assert u.flight_time == 1800.0
    frozen = step_uav(u, (0, 0), 1.0)
    assert frozen.position == u.position


def test_endurance_cap():
    assert MAX_ENDURANCE_S == 1800
    with pytest.raises(ValueError):
        new_uav((0, 0), 10, endurance=1801)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-500, 500), st.floats(-500, 500), st.floats(0.01, 5)), min_size=1, max_size=30),
       st.floats(1, 40), st.floats(1, 100))
def test_uav_speed_limit_and_battery_monotone(moves, vmax, endurance):
    u = new_uav((0, 0), vmax, endurance)
    for gx, gy, dt in moves:
        nxt = step_uav(u, (gx, gy), dt)
        assert distance(u.position, nxt.position) <= vmax * dt * (1 + 1e-9) + 1e-9
        assert nxt.battery <= u.battery
        assert nxt.grounded == (nxt.battery == 0)
        u = nxt
    assert u.flight_time <= endurance


def test_line_of_sight_examples():
    box = Obstacle(40, -10, 60, 10)
    assert line_of_sight((0, 0), (100, 0), [])
    assert not line_of_sight((0, 0), (100, 0), [box])
    # running along the top edge only touches the boundary
    assert line_of_sight((0, 10), (100, 10), [box])
    assert line_of_sight((40, 20), (60, 20), [box])


def test_corner_touch_does_not_block():
    assert line_of_sight((0, 2), (2, 0), [Obstacle(1, 1, 3, 3)])
    assert not line_of_sight((0, 2.5), (2.5, 0), [Obstacle(1, 1, 3, 3)])


@settings(max_examples=100, deadline=None)
@given(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), st.tuples(st.floats(-100, 100), st.floats(-100, 100)),
       st.tuples(st.floats(-80, 80), st.floats(-80, 80), st.floats(1, 40), st.floats(1, 40)))
def test_line_of_sight_symmetric(a, b, box):
    ob = Obstacle(box[0], box[1], box[0] + box[2], box[1] + box[3])
    assert line_of_sight(a, b, [ob]) == line_of_sight(b, a, [ob])


@settings(max_examples=100, deadline=None)
@given(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), st.tuples(st.floats(-100, 100), st.floats(-100, 100)))
def test_line_of_sight_matches_dense_sampling(a, b):
    ob = Obstacle(-20, -15, 25, 30)
    samples = [(a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t) for t in np.linspace(0, 1, 4001)]
    hit = any(ob.contains_strictly(p) for p in samples)
    if hit:
        assert not line_of_sight(a, b, [ob])


def test_camera_covers_examples():
    cam = CameraState(0, (0.0, 0.0), 40.0)
    assert camera_covers(cam, (0, 0), [])
    assert not camera_covers(cam, (50, 0), [])
    assert not camera_covers(cam, (30, 0), [Obstacle(10, -5, 20, 5)])
    assert camera_covers(cam, (30, 0), [])


def test_camera_activation_time_set_iff_activated():
    cam = CameraState(1, (0.0, 0.0), 10.0)
    assert cam.activation_time is None
    cam.activate(3.0)
    cam.activate(5.0)
    assert cam.activated and cam.activation_time == 3.0
    cam.deactivate()
    assert not cam.activated and cam.activation_time is None
    with pytest.raises(ValueError):
        CameraState(2, (0.0, 0.0), 0.0)


def test_obstacle_needs_positive_extent():
    with pytest.raises(ValueError):
        Obstacle(0, 0, 0, 5)
    assert math.isclose(distance((0, 0), (3, 4)), 5.0)
