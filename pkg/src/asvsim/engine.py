"""Multi-agent simulation loop.

Per step, in order for every agent: waypoint-switch check, guidance-mode
arbitration (reactive supersedes path following inside the detection
radius), desired heading from the active guidance law, PD rudder command,
actuator integration, and RK4 integration of the vessel dynamics.  All
agents advance simultaneously from a snapshot of the previous step, so the
result is independent of agent ordering.  A run ends when every agent has
captured its final waypoint, any pair breaches the collision threshold, or
the time budget is exhausted.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from . import apf, vo
from .apf import ChannelBoundary, HarmonicParams, InverseSquareParams, ObstacleView, StaticObstacle
from .frames import BodyVelocity, Pose, Vec2, wrap_angle
from .guidance import (
    ILOSParams,
    PDGains,
    WaypointPath,
    ilos_desired_heading,
    ilos_integrator_derivative,
    pd_rudder_command,
    path_tangential_angle,
    should_switch_waypoint,
    track_errors,
)
from .mmg import DynamicState, ShipModel, rudder_rate
from .vo import VOParams

METHODS = ("apf_mvortex", "apf_sinkvortex", "apf_inverse", "velocity_obstacle")

MODE_ILOS = 0
MODE_REACTIVE = 1

OUTCOME_SUCCESS = "success"
OUTCOME_COLLISION = "collision"
OUTCOME_TIMEOUT = "timeout"


class SimulationError(RuntimeError):
    """Raised when the integration produces a non-finite or runaway state."""


@dataclass(frozen=True)
class SimConfig:
    """Simulation loop configuration.

    ``termination`` selects the stopping rule: "all" ends the run when
    every agent has captured its final waypoint, any pair breaches the
    collision threshold, or time runs out; "own" (the statistical-study
    protocol) ends it when the own ship (lowest id) succeeds or collides,
    with third-party collisions recorded but non-terminal.
    """

    dt: float = 0.1
    max_time: float = 400.0
    collision_threshold: float = 2.0
    R_safe: float = 15.0
    seed: int = 0
    termination: str = "all"

    def __post_init__(self):
        if self.dt <= 0.0 or self.max_time <= self.dt:
            raise ValueError("need dt > 0 and max_time > dt")
        if self.termination not in ("all", "own"):
            raise ValueError("termination must be 'all' or 'own'")


@dataclass(frozen=True)
class AgentSpec:
    """Initial condition and mission of one vessel.

    ``waypoints`` are the targets to track, in order; the start position is
    prepended as the origin of the first path segment.
    """

    id: int
    start: Vec2
    heading: float
    speed: float
    waypoints: Tuple[Vec2, ...]
    method: str = "apf_mvortex"

    def __post_init__(self):
        if not 0.0 < self.speed <= 1.2:
            raise ValueError(f"assigned speed must be in (0, 1.2], got {self.speed}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.waypoints:
            raise ValueError("agent needs at least one waypoint")


@dataclass
class Scenario:
    """Everything needed to reproduce one simulation run."""

    agents: List[AgentSpec]
    static_obstacles: List[StaticObstacle] = field(default_factory=list)
    channel: Optional[ChannelBoundary] = None
    ilos: ILOSParams = field(default_factory=ILOSParams)
    gains: PDGains = field(default_factory=PDGains)
    inverse_params: InverseSquareParams = field(default_factory=InverseSquareParams)
    harmonic_params: HarmonicParams = field(default_factory=HarmonicParams)
    vo_params: VOParams = field(default_factory=VOParams)
    config: SimConfig = field(default_factory=SimConfig)
    name: str = ""

    def __post_init__(self):
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ValueError("agent ids must be unique")

    def with_method(self, method: str) -> "Scenario":
        agents = [replace(a, method=method) for a in self.agents]
        return replace(self, agents=agents)


@dataclass
class AgentResult:
    agent_id: int
    outcome: str
    ce: float
    mcte: float
    time_to_goal: Optional[float]
    min_ship_distance: float
    min_static_clearance: float
    waypoints_reached: int


@dataclass
class SimResult:
    t_end: float
    end_reason: str
    collision_pair: Optional[Tuple[str, str]]
    agents: List[AgentResult]
    n_steps: int
    guidance_calls: int
    guidance_time_us_mean: float
    # populated only when the run records full time series
    trajectories: Optional[List[List[tuple]]] = None
    pair_distances: Optional[Dict[str, List[Tuple[float, float]]]] = None

    @property
    def outcomes(self) -> List[str]:
        return [a.outcome for a in self.agents]


# Trajectory row layout (matches the trajectory CSV column order).
ROW_FIELDS = ("t_prime", "x_L", "y_L", "psi_rad", "u_nd", "v_nd", "r_nd",
              "delta_rad", "delta_c_rad", "psi_d_rad", "mode", "y_e_L")


class _AgentRuntime:
    """Mutable per-agent simulation state (engine internal)."""

    __slots__ = (
        "spec", "deriv", "n_prop", "x", "y", "psi", "u", "v", "r", "delta",
        "path", "y_int", "done", "time_to_goal", "frozen_psi_d", "prev_psi_d",
        "collided", "min_ship_distance", "min_static_clearance",
        "ce_int", "ye_int", "prev_abs_delta", "prev_abs_ye", "have_prev",
        "rows", "last_delta_c", "last_psi_d", "last_mode", "waypoints_reached",
        "encounters", "vo_heading",
    )

    def __init__(self, spec: AgentSpec, model: ShipModel):
        self.spec = spec
        self.n_prop = model.self_propulsion_rpm(spec.speed)
        self.deriv = model.make_derivative(self.n_prop)
        self.x, self.y = spec.start
        self.psi = wrap_angle(spec.heading)
        self.u = spec.speed
        self.v = 0.0
        self.r = 0.0
        self.delta = 0.0
        self.path = WaypointPath([spec.start, *spec.waypoints])
        self.y_int = 0.0
        self.done = False
        self.time_to_goal: Optional[float] = None
        self.frozen_psi_d: Optional[float] = None
        self.prev_psi_d: Optional[float] = None
        self.collided = False
        self.min_ship_distance = math.inf
        self.min_static_clearance = math.inf
        self.ce_int = 0.0
        self.ye_int = 0.0
        self.prev_abs_delta = 0.0
        self.prev_abs_ye = 0.0
        self.have_prev = False
        self.rows: List[tuple] = []
        self.last_delta_c = 0.0
        self.last_psi_d = wrap_angle(spec.heading)
        self.last_mode = MODE_ILOS
        self.waypoints_reached = 0
        # per-target COLREGS encounter class, kept while the pair stays
        # inside the detection radius (Rule 13(d): the class persists
        # until the vessels are past and clear)
        self.encounters: Dict[int, str] = {}
        # velocity-obstacle evasive course, held until it becomes forbidden
        # or the vessel steers clear of all traffic
        self.vo_heading: Optional[float] = None

    def dynamic_state(self) -> DynamicState:
        return DynamicState(
            pose=Pose(self.x, self.y, self.psi),
            nu=BodyVelocity(self.u, self.v, self.r),
            delta=self.delta,
            n_prop=self.n_prop,
        )


class World:
    """One simulation in progress; create via ``World(scenario)`` and call
    :meth:`step` (or use :func:`run`)."""

    def __init__(self, scenario: Scenario, model: Optional[ShipModel] = None,
                 record: bool = True):
        self.scenario = scenario
        self.model = model if model is not None else ShipModel.default_kcs()
        self.record = record
        self.cfg = scenario.config
        # id order fixes the field-summation order, so trajectories are
        # invariant under permutations of the input agent list
        self.agents = [_AgentRuntime(spec, self.model)
                       for spec in sorted(scenario.agents, key=lambda s: s.id)]
        self._finalized = False
        self.t = 0.0
        self.step_index = 0
        self.end_reason: Optional[str] = None
        self.collision_pair: Optional[Tuple[str, str]] = None
        self.pair_distances: Dict[str, List[Tuple[float, float]]] = {}
        self.guidance_ns = 0
        self.guidance_calls = 0
        self._static_views = [
            ObstacleView(position=o.center, velocity_global=(0.0, 0.0),
                         is_dynamic=False, radius=o.R_obs)
            for o in scenario.static_obstacles
        ]
        self._limits = self.model.limits

    # ------------------------------------------------------------------
    def _observe_distances(self) -> None:
        """Pairwise distance bookkeeping on the current state.

        Every sub-threshold pair marks both members as collided; the first
        such pair (lowest ids) is reported.  Under "all" termination any
        collision ends the run; under "own" only a collision involving the
        own ship does.
        """
        ags = self.agents
        cfg = self.cfg
        n = len(ags)
        for i in range(n):
            ai = ags[i]
            for j in range(i + 1, n):
                aj = ags[j]
                dist = math.hypot(aj.x - ai.x, aj.y - ai.y)
                if dist < ai.min_ship_distance:
                    ai.min_ship_distance = dist
                if dist < aj.min_ship_distance:
                    aj.min_ship_distance = dist
                if self.record and dist <= cfg.R_safe:
                    key = f"{ai.spec.id}-{aj.spec.id}"
                    self.pair_distances.setdefault(key, []).append((self.t, dist))
                if dist < cfg.collision_threshold:
                    if self.collision_pair is None:
                        self.collision_pair = (str(ai.spec.id), str(aj.spec.id))
                    ai.collided = True
                    aj.collided = True
            for k, obs in enumerate(self.scenario.static_obstacles):
                dist = math.hypot(obs.center[0] - ai.x, obs.center[1] - ai.y)
                clearance = dist - obs.R_obs
                if clearance < ai.min_static_clearance:
                    ai.min_static_clearance = clearance
                if self.record and dist <= cfg.R_safe:
                    key = f"{ai.spec.id}-s{k}"
                    self.pair_distances.setdefault(key, []).append((self.t, dist))
                if clearance < cfg.collision_threshold:
                    if self.collision_pair is None:
                        self.collision_pair = (str(ai.spec.id), f"static:{k}")
                    ai.collided = True
        if self.cfg.termination == "own":
            if self.agents[0].collided:
                self.end_reason = "collision"
        elif self.collision_pair is not None:
            self.end_reason = "collision"

    # ------------------------------------------------------------------
    def _guidance_and_control(self, snapshot) -> None:
        """Compute commands for every agent from the snapshot, record rows,
        accumulate metric integrals."""
        cfg = self.cfg
        scn = self.scenario
        dt = cfg.dt
        for idx, ag in enumerate(self.agents):
            sx, sy = snapshot[idx][0], snapshot[idx][1]
            pos = (sx, sy)

            if not ag.done:
                if should_switch_waypoint(pos, ag.path.active_target, scn.ilos.R_tol):
                    ag.waypoints_reached += 1
                    ag.y_int = 0.0
                    if ag.path.on_final_segment:
                        ag.done = True
                        ag.time_to_goal = self.t
                        ag.frozen_psi_d = ag.last_psi_d
                    else:
                        ag.path.k += 1

            wp_k, wp_k1 = ag.path.active_segment
            x_e, y_e = track_errors(pos, wp_k, wp_k1)

            if ag.done:
                # after goal capture the vessel holds its course (constant
                # RPM, no stopping) but keeps avoiding traffic; the sink is
                # projected well ahead along the held course
                hold = ag.frozen_psi_d if ag.frozen_psi_d is not None else ag.psi
                views = self._views_in_range(idx, snapshot)
                if views:
                    mode = MODE_REACTIVE
                    virtual_goal = (ag.x + 50.0 * math.cos(hold),
                                    ag.y + 50.0 * math.sin(hold))
                    psi_d = self._reactive_heading(ag, views, virtual_goal)
                    ag.prev_psi_d = psi_d
                else:
                    mode = MODE_ILOS
                    psi_d = hold
                    ag.vo_heading = None
            else:
                views = self._views_in_range(idx, snapshot)
                if views:
                    mode = MODE_REACTIVE
                    psi_d = self._reactive_heading(ag, views, ag.path.active_target)
                    ag.prev_psi_d = psi_d
                else:
                    mode = MODE_ILOS
                    pi_p = path_tangential_angle(wp_k, wp_k1)
                    psi_d = ilos_desired_heading(pi_p, y_e, ag.y_int, scn.ilos)
                    ag.y_int += dt * ilos_integrator_derivative(y_e, ag.y_int, scn.ilos)
                    ag.prev_psi_d = psi_d
                    ag.vo_heading = None

            delta_c = pd_rudder_command(ag.psi, psi_d, ag.r, scn.gains, self._limits)
            ag.last_delta_c = delta_c
            ag.last_psi_d = psi_d
            ag.last_mode = mode

            abs_delta = abs(ag.delta)
            abs_ye = abs(y_e)
            if ag.have_prev:
                ag.ce_int += 0.5 * (ag.prev_abs_delta + abs_delta) * dt
                ag.ye_int += 0.5 * (ag.prev_abs_ye + abs_ye) * dt
            ag.prev_abs_delta = abs_delta
            ag.prev_abs_ye = abs_ye
            ag.have_prev = True

            if self.record:
                ag.rows.append((self.t, ag.x, ag.y, ag.psi, ag.u, ag.v, ag.r,
                                ag.delta, delta_c, psi_d, mode, y_e))

    def _views_in_range(self, idx: int, snapshot) -> List[ObstacleView]:
        """Obstacle views (other vessels + statics) within the detection
        radius; dynamic targets carry their persistent encounter class."""
        cfg = self.cfg
        ag = self.agents[idx]
        views: List[ObstacleView] = []
        for jdx in range(len(self.agents)):
            if jdx == idx:
                continue
            ox, oy, opsi, ou, ov, ovx, ovy = snapshot[jdx]
            if math.hypot(ox - ag.x, oy - ag.y) <= cfg.R_safe:
                view = ObstacleView(position=(ox, oy), velocity_global=(ovx, ovy),
                                    is_dynamic=True, radius=0.0)
                cls = ag.encounters.get(jdx)
                if cls is None:
                    cls = apf.classify_encounter(ag.dynamic_state(), view)
                    ag.encounters[jdx] = cls
                if cls != apf.ENCOUNTER_ACTIVE:
                    view = replace(view, encounter_class=cls)
                views.append(view)
            else:
                ag.encounters.pop(jdx, None)
        for sv in self._static_views:
            if math.hypot(sv.position[0] - ag.x, sv.position[1] - ag.y) <= cfg.R_safe:
                views.append(sv)
        return views

    def _reactive_heading(self, ag: _AgentRuntime, views: List[ObstacleView],
                          goal: Vec2) -> float:
        """Dispatch to the agent's reactive guidance law, timing the call."""
        scn = self.scenario
        method = ag.spec.method
        t0 = time.perf_counter_ns()
        if method == "apf_inverse":
            psi_d = apf.desired_heading_inverse_square(
                ag.dynamic_state(), goal, views, scn.inverse_params, ag.prev_psi_d)
        elif method == "apf_mvortex" or method == "apf_sinkvortex":
            psi_d = apf.desired_heading_harmonic(
                ag.dynamic_state(), goal, views, scn.channel, scn.harmonic_params,
                modified=(method == "apf_mvortex"), prev_psi_d=ag.prev_psi_d)
        else:  # velocity_obstacle
            # the chosen evasive course is maintained until it stops being
            # admissible; it is dropped when the vessel steers clear of all
            # traffic (reactive mode ends)
            targets = [(v.position, v.velocity_global, v.radius) for v in views]
            speed = math.hypot(ag.u, ag.v)
            pos = (ag.x, ag.y)
            if ag.vo_heading is not None and vo.heading_admissible(
                    pos, speed, ag.vo_heading, targets, scn.vo_params):
                psi_d = ag.vo_heading
            else:
                psi_d = vo.vo_desired_heading(pos, speed, goal, targets, scn.vo_params)
                ag.vo_heading = psi_d
        self.guidance_ns += time.perf_counter_ns() - t0
        self.guidance_calls += 1
        return wrap_angle(psi_d)

    # ------------------------------------------------------------------
    def _integrate(self) -> None:
        dt = self.cfg.dt
        half = 0.5 * dt
        sixth = dt / 6.0
        for ag in self.agents:
            raw = rudder_rate(ag.delta, ag.last_delta_c, self._limits)
            delta = ag.delta + dt * raw
            cap = self._limits.delta_max
            if delta > cap:
                delta = cap
            elif delta < -cap:
                delta = -cap
            ag.delta = delta

            d = ag.deriv
            x, y, psi, u, v, r = ag.x, ag.y, ag.psi, ag.u, ag.v, ag.r
            k1 = d(x, y, psi, u, v, r, delta)
            k2 = d(x + half * k1[0], y + half * k1[1], psi + half * k1[2],
                   u + half * k1[3], v + half * k1[4], r + half * k1[5], delta)
            k3 = d(x + half * k2[0], y + half * k2[1], psi + half * k2[2],
                   u + half * k2[3], v + half * k2[4], r + half * k2[5], delta)
            k4 = d(x + dt * k3[0], y + dt * k3[1], psi + dt * k3[2],
                   u + dt * k3[3], v + dt * k3[4], r + dt * k3[5], delta)
            ag.x = x + sixth * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
            ag.y = y + sixth * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
            ag.psi = wrap_angle(psi + sixth * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2]))
            ag.u = u + sixth * (k1[3] + 2.0 * (k2[3] + k3[3]) + k4[3])
            ag.v = v + sixth * (k1[4] + 2.0 * (k2[4] + k3[4]) + k4[4])
            ag.r = r + sixth * (k1[5] + 2.0 * (k2[5] + k3[5]) + k4[5])
            if not (math.isfinite(ag.x) and math.isfinite(ag.y) and math.isfinite(ag.u)
                    and math.isfinite(ag.v) and math.isfinite(ag.r)):
                raise SimulationError(
                    f"non-finite state for agent {ag.spec.id} at t'={self.t:.1f}")
            if abs(ag.u) > BodyVelocity.U_CAP:
                raise SimulationError(
                    f"surge runaway (|u|={abs(ag.u):.2f}) for agent {ag.spec.id} "
                    f"at t'={self.t:.1f}")

    # ------------------------------------------------------------------
    def step(self) -> bool:
        """Advance one step.  Returns False once the run has ended."""
        if self.end_reason is not None:
            return False
        self._observe_distances()
        if self.end_reason is not None:
            return False
        if self.cfg.termination == "own":
            if self.agents[0].done:
                self.end_reason = "own_done"
                return False
        elif all(ag.done for ag in self.agents):
            self.end_reason = "all_done"
            return False
        if self.t >= self.cfg.max_time - 1e-9:
            self.end_reason = "timeout"
            return False
        snapshot = [
            (ag.x, ag.y, ag.psi, ag.u, ag.v,
             math.cos(ag.psi) * ag.u - math.sin(ag.psi) * ag.v,
             math.sin(ag.psi) * ag.u + math.cos(ag.psi) * ag.v)
            for ag in self.agents
        ]
        self._guidance_and_control(snapshot)
        self._integrate()
        self.step_index += 1
        self.t = self.step_index * self.cfg.dt
        return True

    def _final_observation(self) -> None:
        """Close metric integrals and record the final state row."""
        dt = self.cfg.dt
        for ag in self.agents:
            wp_k, wp_k1 = ag.path.active_segment
            _, y_e = track_errors((ag.x, ag.y), wp_k, wp_k1)
            abs_delta = abs(ag.delta)
            abs_ye = abs(y_e)
            if ag.have_prev and self.step_index > 0:
                ag.ce_int += 0.5 * (ag.prev_abs_delta + abs_delta) * dt
                ag.ye_int += 0.5 * (ag.prev_abs_ye + abs_ye) * dt
            if self.record:
                ag.rows.append((self.t, ag.x, ag.y, ag.psi, ag.u, ag.v, ag.r,
                                ag.delta, ag.last_delta_c, ag.last_psi_d,
                                ag.last_mode, y_e))

    def result(self) -> SimResult:
        if not self._finalized:
            self._final_observation()
            self._finalized = True
        T = self.t if self.t > 0.0 else self.cfg.dt
        agents = []
        for ag in self.agents:
            if ag.collided:
                outcome = OUTCOME_COLLISION
            elif ag.done:
                outcome = OUTCOME_SUCCESS
            else:
                outcome = OUTCOME_TIMEOUT
            agents.append(AgentResult(
                agent_id=ag.spec.id,
                outcome=outcome,
                ce=ag.ce_int / (self._limits.delta_max * T),
                mcte=ag.ye_int / T,
                time_to_goal=ag.time_to_goal,
                min_ship_distance=ag.min_ship_distance,
                min_static_clearance=ag.min_static_clearance,
                waypoints_reached=ag.waypoints_reached,
            ))
        mean_us = (self.guidance_ns / self.guidance_calls / 1000.0
                   if self.guidance_calls else 0.0)
        return SimResult(
            t_end=self.t,
            end_reason=self.end_reason or "running",
            collision_pair=self.collision_pair,
            agents=agents,
            n_steps=self.step_index,
            guidance_calls=self.guidance_calls,
            guidance_time_us_mean=mean_us,
            trajectories=[ag.rows for ag in self.agents] if self.record else None,
            pair_distances=self.pair_distances if self.record else None,
        )


def run(scenario: Scenario, model: Optional[ShipModel] = None,
        record: bool = True) -> SimResult:
    """Simulate a scenario to completion and return its result."""
    world = World(scenario, model=model, record=record)
    while world.step():
        pass
    return world.result()


def detect_collision(world: World, threshold: float) -> Optional[Tuple[str, str]]:
    """First pair (lowest ids) closer than the threshold in the current state.

    Ship-ship pairs use center distance; ship-static pairs use center
    distance minus the obstacle radius.
    """
    ags = world.agents
    for i in range(len(ags)):
        for j in range(i + 1, len(ags)):
            if math.hypot(ags[j].x - ags[i].x, ags[j].y - ags[i].y) < threshold:
                return (str(ags[i].spec.id), str(ags[j].spec.id))
        for k, obs in enumerate(world.scenario.static_obstacles):
            dist = math.hypot(obs.center[0] - ags[i].x, obs.center[1] - ags[i].y)
            if dist - obs.R_obs < threshold:
                return (str(ags[i].spec.id), f"static:{k}")
    return None


def controller_effort(rows: Sequence[tuple], delta_max: float | None = None) -> float:
    """CE = integral of |delta| over the run, normalized by delta_max * T."""
    if not rows:
        raise ValueError("empty trajectory")
    from .mmg import DELTA_MAX

    dmax = delta_max if delta_max is not None else DELTA_MAX
    if len(rows) == 1:
        return abs(rows[0][7]) / dmax
    acc = 0.0
    for a, b in zip(rows, rows[1:]):
        acc += 0.5 * (abs(a[7]) + abs(b[7])) * (b[0] - a[0])
    T = rows[-1][0] - rows[0][0]
    return acc / (dmax * T)


def mean_cross_track_error(rows: Sequence[tuple]) -> float:
    """MCTE = integral of |y_e| over the run divided by T, in ship lengths."""
    if not rows:
        raise ValueError("empty trajectory")
    if len(rows) == 1:
        return abs(rows[0][11])
    acc = 0.0
    for a, b in zip(rows, rows[1:]):
        acc += 0.5 * (abs(a[11]) + abs(b[11])) * (b[0] - a[0])
    T = rows[-1][0] - rows[0][0]
    return acc / T
