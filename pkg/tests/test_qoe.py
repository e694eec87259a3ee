import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airtrack import oracles, qoe
from airtrack.qoe import Side

TERM = qoe.TerminalProfile(frequency=1e9, kappa=1e-27, tx_power=0.5)
SERVER = qoe.EdgeServerProfile(frequency=1e10)
W = qoe.QoeWeights(1.0, 1.0)


def test_zero_workload_local_is_free():
    assert qoe.task_cost(qoe.VideoTask(1e6, 0.0), Side.LOCAL, TERM, SERVER, None, W) == 0.0


def test_zero_payload_edge_pays_compute_only():
    c = qoe.task_cost(qoe.VideoTask(0.0, 2e9), Side.EDGE, TERM, SERVER, 1e6, W)
    assert c == 2e9 / 1e10


def test_local_formula():
    c = qoe.task_cost(qoe.VideoTask(0.0, 1e9), Side.LOCAL, TERM, SERVER, None, qoe.QoeWeights(1.0, 0.0))
    assert c == 1.0
    joules = qoe.latency_energy(qoe.VideoTask(0.0, 1e9), Side.LOCAL, TERM, SERVER)[2]
    assert math.isclose(joules, 1e-27 * 1e18 * 1e9)


def test_edge_needs_positive_rate():
    with pytest.raises(qoe.InvalidRateError):
        qoe.task_cost(qoe.VideoTask(1e6, 1e9), Side.EDGE, TERM, SERVER, 0.0, W)


def test_decide_examples():
    assert qoe.decide(qoe.VideoTask(1e6, 0.0), TERM, SERVER, 1e7, W) is Side.LOCAL
    assert qoe.decide(qoe.VideoTask(0.0, 1e9), TERM, SERVER, 1e7, qoe.QoeWeights(1.0, 0.0)) is Side.EDGE


def test_decide_tie_stays_local():
    # both sides cost exactly 1.0
    task = qoe.VideoTask(1e6, 1e9)
    term = qoe.TerminalProfile(1e9, 0.0, 0.0)
    server = qoe.EdgeServerProfile(2e9)
    assert qoe.task_cost(task, Side.EDGE, term, server, 2e6, qoe.QoeWeights(1, 0)) == 1.0
    assert qoe.decide(task, term, server, 2e6, qoe.QoeWeights(1, 0)) is Side.LOCAL


def test_weights_validation():
    with pytest.raises(ValueError):
        qoe.QoeWeights(0.0, 0.0)
    with pytest.raises(ValueError):
        qoe.QoeWeights(-1.0, 1.0)


task_st = st.builds(qoe.VideoTask, st.floats(0, 5e7), st.floats(0, 1e10))
term_st = st.builds(qoe.TerminalProfile, st.floats(1e8, 3e9), st.floats(0, 1e-26), st.floats(0, 3))
w_st = st.builds(qoe.QoeWeights, st.floats(0.01, 5), st.floats(0.01, 5))


@given(task_st, term_st, st.floats(1e9, 3e10), st.floats(1e4, 1e9), w_st)
def test_decide_is_argmin(task, term, fe, rate, w):
    server = qoe.EdgeServerProfile(fe)
    local = qoe.task_cost(task, Side.LOCAL, term, server, None, w)
    edge = qoe.task_cost(task, Side.EDGE, term, server, rate, w)
    assert qoe.decide(task, term, server, rate, w) is (Side.EDGE if edge < local else Side.LOCAL)


@given(task_st, term_st, st.floats(1e4, 1e9), st.floats(1.0, 100.0), w_st)
def test_edge_cost_nonincreasing_in_rate(task, term, rate, factor, w):
    lo = qoe.task_cost(task, Side.EDGE, term, SERVER, rate, w)
    hi = qoe.task_cost(task, Side.EDGE, term, SERVER, rate * factor, w)
    assert hi <= lo
    assert qoe.task_cost(task, Side.LOCAL, term, SERVER, rate, w) == qoe.task_cost(task, Side.LOCAL, term, SERVER,
                                                                                  None, w)


@given(task_st, term_st, st.floats(1e4, 1e9), w_st, st.sampled_from([0.5, 2.0, 8.0, 1024.0]))
def test_decide_scale_invariant(task, term, rate, w, k):
    scaled = qoe.QoeWeights(w.latency * k, w.energy * k)
    assert qoe.decide(task, term, SERVER, rate, w) is qoe.decide(task, term, SERVER, rate, scaled)


def test_single_task_reduces_to_decide():
    task = qoe.VideoTask(4e6, 2e9)
    dec = qoe.joint_allocate([task], TERM, SERVER, 2e7, W)
    assert dec.choices == (qoe.decide(task, TERM, SERVER, 2e7, W),)


def test_tiny_bandwidth_goes_local():
    tasks = [qoe.VideoTask(4e6, 2e9), qoe.VideoTask(1e6, 5e8)]
    dec = qoe.joint_allocate(tasks, TERM, SERVER, 1e-3, W)
    assert dec.choices == (Side.LOCAL, Side.LOCAL)
    assert dec.rates == {}


def test_frozen_four_task_instance():
    # subset optimum {0, 2}: 0.5 + 1.0 + 0.1 + 0.0, found by enumerating all 16 subsets
    tasks = [qoe.VideoTask(4e6, 2e9), qoe.VideoTask(1e7, 5e8), qoe.VideoTask(0.0, 1e9), qoe.VideoTask(2e6, 0.0)]
    dec = qoe.joint_allocate(tasks, TERM, SERVER, 2e7, W)
    assert dec.choices == (Side.EDGE, Side.LOCAL, Side.EDGE, Side.LOCAL)
    assert dec.total_cost == 1.6
    assert qoe.evaluate(tasks, [], TERM, SERVER, 2e7, W).total_cost == 7.0
    assert qoe.evaluate(tasks, range(4), TERM, SERVER, 2e7, W).total_cost == 3.95


def test_proportional_split_sums_to_bandwidth():
    tasks = [qoe.VideoTask(d, 1e9) for d in (1e6, 3e6, 6e6)]
    rates = qoe.split_bandwidth(tasks, [0, 1, 2], 1e7)
    assert math.isclose(sum(rates.values()), 1e7)
    assert math.isclose(rates[2], 6e6)
    # uploads finish together
    assert len({round(tasks[i].data / r, 12) for i, r in rates.items()}) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_matches_subset_oracle(seed):
    inst = oracles.qoe_instance(np.random.default_rng(seed))
    dev, problems = oracles.check_qoe(inst)
    assert problems == [] and dev == 0.0


def test_large_instance_best_response_beats_baselines():
    rng = np.random.default_rng(5)
    tasks = [qoe.VideoTask(float(rng.uniform(1e5, 2e7)), float(rng.uniform(1e7, 5e9))) for _ in range(16)]
    dec = qoe.joint_allocate(tasks, TERM, SERVER, 5e7, W)
    assert dec.total_cost <= qoe.evaluate(tasks, [], TERM, SERVER, 5e7, W).total_cost
    assert dec.total_cost <= qoe.evaluate(tasks, range(16), TERM, SERVER, 5e7, W).total_cost
    if dec.rates:
        assert math.isclose(sum(dec.rates.values()), 5e7)
