"""Episode orchestration: the normal / about-to-lose / lost state machine.

Case 1 offloads the UAV's video to edge servers and steers the UAV with the
(stale) recognition result. Case 2 activates ground cameras around the last
sighting. Case 3 widens activation to every camera near the vanishing point.
Camera recognition work goes to the edge server (QoE offloading) or to
volunteer terminals (multi-round assignment), by cluster mode.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import asrt, cacat, mra, qoe
from .metrics import EpisodeMetrics
from .netlinks import LinkKind, link_latency, tx_energy
from .scenario import Scenario, StrategyConfig
from .simcore import Engine, EventKind, EventTrace, RunSeed
from .world import (CameraState, Position, camera_covers, distance, line_of_sight, new_uav, place_target,
                    step_target, step_uav)


VELOCITY_WINDOW = 5.0


class TrackingCase(str, enum.Enum):
    CASE1_TRACKING = "case1"
    CASE2_ABOUT_TO_LOSE = "case2"
    CASE3_LOST = "case3"


ALLOWED_TRANSITIONS = {
    (TrackingCase.CASE1_TRACKING, TrackingCase.CASE2_ABOUT_TO_LOSE),
    (TrackingCase.CASE2_ABOUT_TO_LOSE, TrackingCase.CASE1_TRACKING),
    (TrackingCase.CASE2_ABOUT_TO_LOSE, TrackingCase.CASE3_LOST),
    (TrackingCase.CASE3_LOST, TrackingCase.CASE1_TRACKING),
}


@dataclass(frozen=True)
class EpisodeConfig:
    duration: float
    tau_occ: float = 2.0
    tau_lost: float = 15.0
    p_detect: float = 0.9
    task: qoe.VideoTask = qoe.VideoTask(4e6, 2e9)

    def __post_init__(self) -> None:
        if not self.tau_occ < self.tau_lost:
            raise ValueError("tau_occ must be below tau_lost")
        if not 0 < self.p_detect <= 1:
            raise ValueError("p_detect must lie in (0, 1]")


@dataclass
class VisibilityHistory:
    """Last instant (and place) the UAV saw the target; episodes start with a hand-off sighting."""

    last_seen: float = 0.0
    last_seen_pos: Optional[Position] = None

    def record(self, t: float, seen: bool, pos: Optional[Position] = None) -> None:
        if seen:
            self.last_seen = t
            self.last_seen_pos = pos


def classify_state(history: VisibilityHistory, now: float, cfg: EpisodeConfig) -> TrackingCase:
    gap = now - history.last_seen
    if gap <= cfg.tau_occ:
        return TrackingCase.CASE1_TRACKING
    if gap <= cfg.tau_lost:
        return TrackingCase.CASE2_ABOUT_TO_LOSE
    return TrackingCase.CASE3_LOST


@dataclass(frozen=True)
class Detection:
    camera: int
    position: Position
    detect_time: float
    capture_time: float


@dataclass
class GoalState:
    goal: Optional[Position] = None
    info_time: float = -math.inf


def select_detection(detections: Sequence[Detection]) -> Optional[Detection]:
    """Earliest detection wins; ties go to the lower camera id."""
    if not detections:
        return None
    return min(detections, key=lambda d: (d.detect_time, d.camera))


def on_camera_detection(goal: GoalState, cam: CameraState, detect_time: float,
                        capture_time: Optional[float] = None) -> GoalState:
    """Send the UAV toward the detecting camera unless it already holds newer information."""
    info = detect_time if capture_time is None else capture_time
    if info >= goal.info_time:
        return GoalState(cam.position, info)
    return goal


@dataclass
class _Loss:
    start: float
    epoch: int


class Episode:
    """One seeded run of a scenario under one strategy configuration."""

    def __init__(self, scenario: Scenario, config: StrategyConfig, seed: int, keep_trace: bool = False) -> None:
        self.sc = scenario
        self.config = config
        self.seed = RunSeed(seed)
        self.cfg = EpisodeConfig(scenario.duration, scenario.tau_occ, scenario.tau_lost, scenario.p_detect,
                                 scenario.task)
        self.engine = Engine(keep_trace=keep_trace)
        self.rng_target = self.seed.substream("target")
        self.rng_cluster = self.seed.substream("cluster")
        self.rng_cam = {c.id: self.seed.substream(f"camera:{c.id}") for c in scenario.cameras}

        u, v = scenario.target_edge
        self.target = place_target(scenario.road, u, v, scenario.target_progress, scenario.target_speed)
        start = scenario.uav_position or self.target.position
        self.uav = new_uav(start, scenario.uav_max_speed, scenario.uav_endurance)
        self.velocity: Position = (0.0, 0.0)
        self.path: deque[tuple[float, Position]] = deque([(0.0, self.uav.position)])
        self.graph = scenario.camera_graph()
        self.history = VisibilityHistory(0.0, self.target.position)
        self.goal = GoalState(self.target.position, 0.0)
        self.case = TrackingCase.CASE1_TRACKING
        self.placement: Optional[mra.Placement] = None
        self.epoch = 0
        self.loss: Optional[_Loss] = None
        self.pending_activation: set[int] = set()
        self.detections: list[Detection] = []
        self.aerial = scenario.aerial_obstacles

        self.m = EpisodeMetrics(duration=scenario.duration)
        self.case1_seconds = 0.0
        self.tuple_latencies: list[float] = []
        self.reacq_times: list[float] = []
        self.activated_ever: set[int] = set()
        self.transitions: list[tuple[float, TrackingCase, TrackingCase]] = []

        e = self.engine
        e.subscribe(EventKind.ENTITY_STEP, self._on_tick)
        e.subscribe(EventKind.TIMER, self._on_timer)
        e.subscribe(EventKind.TASK_COMPLETE, self._on_task_complete)
        e.subscribe(EventKind.MESSAGE_ARRIVAL, self._on_message)

    # -- helpers ---------------------------------------------------------
    def _log(self, what: str, **info) -> None:
        self.engine.after(0.0, EventKind.TIMER, {"what": what, **info})

    def _uav_sees_target(self) -> bool:
        if self.uav.grounded:
            return False
        return (distance(self.uav.position, self.target.position) <= self.sc.uav_sensor_range
                and line_of_sight(self.uav.position, self.target.position, self.aerial))

    def _set_goal(self, pos: Position, info_time: float) -> None:
        if info_time >= self.goal.info_time:
            self.goal = GoalState(pos, info_time)

    # -- event handlers ----------------------------------------------------
    def start(self) -> None:
        e = self.engine
        self._log("start", config=self.config.summary(), seed=self.seed.seed)
        if self.sc.duration <= 0:
            return
        e.at(0.0, EventKind.TIMER, {"what": "replan"})
        e.at(0.0, EventKind.TIMER, {"what": "recognize", "k": 0})
        e.at(0.0, EventKind.TIMER, {"what": "observe", "k": 0})
        e.at(min(self.sc.dt, self.sc.duration), EventKind.ENTITY_STEP, {"k": 1})

    def _on_timer(self, engine: Engine, ev) -> None:
        p = ev.payload
        what = p.get("what")
        if what == "replan":
            self._replan_placement()
            self._repeat(p, self.sc.replan_interval)
        elif what == "recognize":
            self._issue_uav_task()
            self._repeat_indexed(p, self.sc.recognition_interval)
        elif what == "observe":
            self._camera_observation()
            self._repeat_indexed(p, self.sc.camera_interval)
        elif what == "relay":
            if self.loss is not None and p.get("epoch") == self.epoch:
                self._activate_around_loss()
                self._repeat(p, self.sc.relay_interval)

    def _repeat(self, payload: dict, interval: float) -> None:
        t = self.engine.now + interval
        if t <= self.sc.duration:
            self.engine.at(t, EventKind.TIMER, dict(payload))

    def _repeat_indexed(self, payload: dict, interval: float) -> None:
        k = payload["k"] + 1
        t = k * interval
        if t <= self.sc.duration:
            self.engine.at(t, EventKind.TIMER, {**payload, "k": k})

    def _on_tick(self, engine: Engine, ev) -> None:
        k = ev.payload["k"]
        t = engine.now
        dt = t - (k - 1) * self.sc.dt
        if dt <= 0:
            return
        self._apply_detections()
        self.target = step_target(self.sc.road, self.target, dt, self.rng_target)
        self.uav = step_uav(self.uav, self.goal.goal, dt)
        self._track_velocity(t)

        seen = self._uav_sees_target()
        self.history.record(t, seen, self.target.position)
        new = classify_state(self.history, t, self.cfg)
        if new is TrackingCase.CASE1_TRACKING:
            self.case1_seconds += dt
        elif new is TrackingCase.CASE2_ABOUT_TO_LOSE:
            self.m.case2_seconds += dt
        else:
            self.m.case3_seconds += dt
        if new is not self.case:
            self._transition(self.case, new)
        nxt = min((k + 1) * self.sc.dt, self.sc.duration)
        if nxt > t:
            engine.at(nxt, EventKind.ENTITY_STEP, {"k": k + 1})

    def _track_velocity(self, t: float) -> None:
        # mean velocity over the last VELOCITY_WINDOW seconds; one tick is too jittery
        self.path.append((t, self.uav.position))
        while len(self.path) > 2 and t - self.path[1][0] >= VELOCITY_WINDOW:
            self.path.popleft()
        t0, p0 = self.path[0]
        if t > t0:
            self.velocity = ((self.uav.position[0] - p0[0]) / (t - t0), (self.uav.position[1] - p0[1]) / (t - t0))

    def _transition(self, old: TrackingCase, new: TrackingCase) -> None:
        t = self.engine.now
        if (old, new) not in ALLOWED_TRANSITIONS:
            raise RuntimeError(f"illegal transition {old.value} -> {new.value} at t={t}")
        self.case = new
        self.transitions.append((t, old, new))
        self._log("transition", frm=old.value, to=new.value)
        if new is TrackingCase.CASE2_ABOUT_TO_LOSE:
            self.m.loss_events += 1
            self.epoch += 1
            self.loss = _Loss(t, self.epoch)
            self._set_goal(self.history.last_seen_pos, self.history.last_seen)
            if self.config.relay:
                self._activate_around_loss()
                self._repeat({"what": "relay", "epoch": self.epoch}, self.sc.relay_interval)
        elif new is TrackingCase.CASE3_LOST:
            if self.config.relay:
                self._activate_around_loss()
        else:
            self.m.reacquired += 1
            self.reacq_times.append(t - self.loss.start)
            self.loss = None
            self.epoch += 1
            self.detections.clear()
            self.pending_activation.clear()
            for cam in self.graph.cameras.values():
                cam.deactivate()

    # -- case 1: UAV video offloading ---------------------------------------
    def _replan_placement(self) -> None:
        sc = self.sc
        self.placement = mra.plan_placement(self.config.placement, sc.dag, sc.servers, self.uav.position,
                                            self.velocity, sc.links, self.engine.now)
        self._log("placement", policy=self.config.placement, servers=list(self.placement))

    def _issue_uav_task(self) -> None:
        if self.uav.grounded or self.case is not TrackingCase.CASE1_TRACKING:
            return
        sc = self.sc
        servers = {s.id: s for s in sc.servers}
        src = servers[self.placement[sc.dag.source]]
        uplink = link_latency(LinkKind.UAV_LTE, sc.dag.uplink_bits, distance(self.uav.position, src.position),
                              sc.links)
        total = mra.estimate_tuple_time(sc.dag, self.placement, servers, self.uav.position, sc.links)
        self.tuple_latencies.append(total)
        self.m.uav_radio_joules += tx_energy(LinkKind.UAV_LTE, uplink, sc.radio)
        capture = self.target.position if self._uav_sees_target() else None
        self.engine.after(total, EventKind.TASK_COMPLETE, {
            "what": "uav-task", "latency": total, "uplink": uplink, "pipeline": total - uplink,
            "capture": list(capture) if capture else None, "capture_time": self.engine.now,
        })

    # -- cases 2 and 3: camera relay ------------------------------------------
    def _activate_around_loss(self) -> None:
        sc = self.sc
        now = self.engine.now
        center = self.history.last_seen_pos
        elapsed = now - self.history.last_seen
        d_request = link_latency(LinkKind.UAV_LTE, sc.activation_bits, distance(self.uav.position, center), sc.links)
        d_response = (link_latency(LinkKind.CAMERA_WIFI, sc.task.data, 0.0, sc.links)
                      + sc.task.cycles / max(s.frequency for s in sc.servers))
        v_min = 0.0 if self.case is TrackingCase.CASE3_LOST else sc.target_speed_min
        region = asrt.ring_region(center, sc.target_speed_max, v_min, elapsed, d_request, d_response)
        cands = {c for c in asrt.candidate_cameras(self.graph, region)
                 if not self.graph.cameras[c].activated and c not in self.pending_activation}
        if not cands:
            return
        k_max = sc.k_max
        try:
            plan = asrt.plan_activation(self.graph, cands, self.uav.position, k_max, sc.links, sc.activation_bits)
        except asrt.CoverageError:
            k_max = max(k_max, asrt.lan_components(self.graph, cands))
            plan = asrt.plan_activation(self.graph, cands, self.uav.position, k_max, sc.links, sc.activation_bits)
        self._log("activation-plan", case=self.case.value, ring=[region.r_inner, region.r_outer], plan=plan.summary())
        for k in plan.keys:
            self.m.uav_radio_joules += tx_energy(LinkKind.UAV_LTE, plan.key_offsets[k], sc.radio)
        times = asrt.propagate_activation(plan, self.graph)
        for cid, dt in sorted(times.items(), key=lambda kv: (kv[1], kv[0])):
            self.pending_activation.add(cid)
            self.engine.after(dt, EventKind.MESSAGE_ARRIVAL, {"what": "activate", "camera": cid, "epoch": self.epoch})

    def _on_message(self, engine: Engine, ev) -> None:
        p = ev.payload
        if p.get("what") == "activate" and p.get("epoch") == self.epoch:
            cam = self.graph.cameras[p["camera"]]
            cam.activate(engine.now)
            self.pending_activation.discard(cam.id)
            self.activated_ever.add(cam.id)

    def _camera_observation(self) -> None:
        active = [c for _, c in sorted(self.graph.cameras.items()) if c.activated]
        if not active:
            return
        sc = self.sc
        now = self.engine.now
        covering = [c for c in active if camera_covers(c, self.target.position, sc.obstacles)]
        if not covering:
            return
        tasks = [qoe.VideoTask(sc.task.data, sc.task.cycles, c.id, now) for c in covering]
        outcomes = [bool(self.rng_cam[c.id].random() < sc.p_detect) for c in covering]
        results = self._route(tasks)
        for cam, outcome, res in zip(covering, outcomes, results):
            if res is None:
                continue
            latency, parts = res
            self.engine.after(latency, EventKind.TASK_COMPLETE, {
                "what": "camera-task", "camera": cam.id, "positive": outcome, "latency": latency,
                "components": parts, "capture_time": now, "epoch": self.epoch,
            })

    def _route(self, tasks: list[qoe.VideoTask]) -> list[Optional[tuple[float, dict]]]:
        sc = self.sc
        if not self.config.offload:
            out = []
            for t in tasks:
                _, comp, _ = qoe.latency_energy(t, qoe.Side.LOCAL, sc.terminal, None)
                out.append((comp, {"route": "local", "compute": comp}))
            return out
        if sc.cluster_mode == "servers":
            server = sc.edge_server_for(self.history.last_seen_pos)
            dec = qoe.joint_allocate(tasks, sc.terminal, server, sc.bandwidth, sc.weights)
            self.m.total_qoe_cost += dec.total_cost
            self._log("offload", decision=dec.summary())
            return [(dec.latencies[i], {"route": dec.choices[i].value, "transfer": dec.transfer[i],
                                        "compute": dec.compute[i]})
                    for i in range(len(tasks))]
        out = []
        for t in tasks:
            batch = cacat.split_task(t, sc.frames, sc.chunk)
            avail = cacat.realize_availability(sc.nodes, sc.max_rounds, self.rng_cluster)
            sched = cacat.pa_opt_assign(batch, sc.nodes, sc.max_rounds, availability=avail, penalty=sc.penalty)
            offline = cacat.offline_opt(batch, sc.nodes, avail, sc.max_rounds, sc.penalty)
            if offline > 0:
                self.m.competition_ratios.append(cacat.competition_ratio(sched.total_cost, offline))
            self._log("assignment", camera=t.origin, schedule=sched.summary())
            if not sched.complete:
                out.append(None)
                continue
            latency = sched.last_round * sc.round_duration
            out.append((latency, {"route": "terminals", "rounds": sched.last_round,
                                  "round_duration": sc.round_duration}))
        return out

    def _on_task_complete(self, engine: Engine, ev) -> None:
        p = ev.payload
        if p.get("what") == "uav-task":
            if p["capture"] is not None:
                self._set_goal(tuple(p["capture"]), p["capture_time"])
        elif p.get("what") == "camera-task":
            if p["positive"] and p["epoch"] == self.epoch and self.loss is not None:
                cam = self.graph.cameras[p["camera"]]
                self.detections.append(Detection(cam.id, cam.position, engine.now, p["capture_time"]))

    def _apply_detections(self) -> None:
        det = select_detection(self.detections)
        self.detections.clear()
        if det is not None:
            self.goal = on_camera_detection(self.goal, self.graph.cameras[det.camera], det.detect_time,
                                            det.capture_time)

    # -- driver ------------------------------------------------------------
    def run(self) -> EpisodeMetrics:
        self.start()
        self.engine.run_until(self.sc.duration)
        m = self.m
        m.tracked_fraction = 1.0 if self.sc.duration <= 0 else min(1.0, self.case1_seconds / self.sc.duration)
        m.mean_reacquisition_time = (sum(self.reacq_times) / len(self.reacq_times)) if self.reacq_times else None
        m.mean_tuple_latency = (sum(self.tuple_latencies) / len(self.tuple_latencies)) if self.tuple_latencies else None
        m.uav_flight_seconds = self.uav.flight_time
        m.activated_cameras = len(self.activated_ever)
        return m

    @property
    def trace(self) -> EventTrace:
        return self.engine.trace


def run_episode(scenario: Scenario, config: StrategyConfig | str, seed: int,
                keep_trace: bool = False) -> tuple[EpisodeMetrics, EventTrace]:
    if isinstance(config, str):
        config = scenario.configs[config]
    ep = Episode(scenario, config, seed, keep_trace)
    metrics = ep.run()
    return metrics, ep.trace
