"""Per-robot, per-tick velocity planning.

One plan_step call runs the full pipeline for a robot against an
immutable perception snapshot: time-to-collision, attention update,
adaptive perception noise, escape geometry, cooperation estimation,
opinion update, one admissible half-plane per neighbor, and the
minimal-deviation velocity program.  Fixed-cooperation (reciprocal) and
non-cooperative planner modes reuse the same pipeline with the adaptive
stages disabled.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Union

from .geometry import (
    AlreadyCollidingError,
    TimeToCollision,
    Vec2,
    VOCone,
    closest_escape,
    time_to_collision,
)
from .opinion import (
    DEFAULT_PARAMS,
    OpinionParams,
    OpinionState,
    estimate_e,
    opinion_store_prune,
    perturb_velocity,
    update_attention,
    update_opinion,
)
from .velocity_program import HalfPlane, VelocityProgram, build_oca_line, solve

SPEED_TOL = 1e-9
# Per-neighbor adaptive state is dropped after this long out of range.
STATE_RETENTION_S = 1.0


class InternalInvariantError(RuntimeError):
    """A planner postcondition failed; indicates a bug, not bad input."""


class AgentKind(Enum):
    ROBOT = "robot"
    AGENT = "agent"
    STATIC = "static"


@dataclass(frozen=True)
class AvocadoMode:
    params: OpinionParams = DEFAULT_PARAMS


@dataclass(frozen=True)
class OrcaFixedMode:
    """Fixed reciprocity (alpha = 0.5), optionally with constant perception noise."""

    noise_enabled: bool = False
    params: OpinionParams = DEFAULT_PARAMS


@dataclass(frozen=True)
class NonCooperativeMode:
    """Blind to robots: plans reciprocally among the remaining agents only."""

    params: OpinionParams = DEFAULT_PARAMS


PlannerMode = Union[AvocadoMode, OrcaFixedMode, NonCooperativeMode]


class SelfView(NamedTuple):
    id: int
    position: Vec2
    velocity: Vec2
    radius: float
    max_speed: float
    goal: Vec2


class NeighborView(NamedTuple):
    id: int
    position: Vec2
    velocity: Vec2
    radius: float
    kind: AgentKind


@dataclass
class PerceptionSnapshot:
    self_view: SelfView
    neighbors: list[NeighborView]


class NeighborDiagnostics(NamedTuple):
    neighbor_id: int
    o: float
    attention: float
    e: float
    tau: TimeToCollision
    alpha: float


@dataclass
class PlanOutput:
    v_star: Vec2
    feasible: bool
    per_neighbor: list[NeighborDiagnostics] = field(default_factory=list)


@dataclass
class OpinionStore:
    """Adaptive state for one robot, keyed by neighbor id."""

    states: dict[int, OpinionState] = field(default_factory=dict)

    def get_or_create(self, neighbor: NeighborView, params: OpinionParams,
                      tick: int) -> OpinionState:
        state = self.states.get(neighbor.id)
        if state is None:
            state = OpinionState.initial(params, tick)
            if neighbor.kind is AgentKind.STATIC:
                # A wall never cooperates: pin the opinion at -1 (alpha = 0).
                state.o = -1.0
                state.pinned = True
            self.states[neighbor.id] = state
        return state

    def prune(self, tick: int, max_age_ticks: int) -> None:
        opinion_store_prune(self.states, tick, max_age_ticks)


def preferred_velocity(position: Vec2, goal: Vec2, max_speed: float,
                       goal_tolerance: float = 0.1) -> Vec2:
    """Full speed straight at the goal; zero once within the tolerance."""
    if max_speed <= 0.0:
        raise ValueError(f"max_speed must be > 0, got {max_speed}")
    to_goal = goal - position
    dist = to_goal.norm()
    if dist < goal_tolerance:
        return Vec2(0.0, 0.0)
    return to_goal * (max_speed / dist)


def plan_step(snapshot: PerceptionSnapshot, opinions: OpinionStore,
              mode: PlannerMode, rng: random.Random, *,
              vo_horizon: float, goal_tolerance: float = 0.1, tick: int = 0,
              trace: list | None = None) -> PlanOutput:
    """One planning tick for the agent owning `opinions` and `rng`.

    Per neighbor, in order: time-to-collision, attention update (adaptive
    mode only), perception noise, escape vector, cooperation estimate,
    opinion update, admissible half-plane.  Then the velocity program is
    solved and the sensed neighbor velocities are stored for the next
    estimator step.
    """
    if vo_horizon <= 0.0:
        raise ValueError(f"vo_horizon must be > 0, got {vo_horizon}")
    me = snapshot.self_view
    params = mode.params
    adaptive = isinstance(mode, AvocadoMode)

    neighbors = snapshot.neighbors
    if isinstance(mode, NonCooperativeMode):
        neighbors = [nb for nb in neighbors if nb.kind is not AgentKind.ROBOT]
    neighbors = sorted(neighbors, key=lambda nb: nb.id)

    v_pre = preferred_velocity(me.position, me.goal, me.max_speed, goal_tolerance)

    if adaptive:
        opinions.prune(tick, max(1, round(STATE_RETENTION_S / params.T)))

    constraints: list[HalfPlane] = []
    diagnostics: list[NeighborDiagnostics] = []
    for nb in neighbors:
        combined_radius = me.radius + nb.radius
        # Expected collision time from the currently executed velocities;
        # the preferred velocity would be blind to lateral conflicts the
        # robot is already maneuvering through.
        tau = time_to_collision(me.position, nb.position,
                                me.velocity - nb.velocity, combined_radius)

        state = opinions.get_or_create(nb, params, tick) if adaptive else None
        noise_on = isinstance(mode, OrcaFixedMode) and mode.noise_enabled

        if adaptive:
            if trace is not None:
                trace.append(("attention", nb.id))
            state.attention = update_attention(state.attention, tau, params)
            attention = state.attention
        else:
            attention = 0.0

        if adaptive:
            # The perturbation is drawn once per encounter and held while
            # the neighbor stays tracked: a per-tick redraw would flip the
            # avoidance side every step and average the symmetry-breaking
            # away instead of committing to one side.
            if trace is not None:
                trace.append(("noise", nb.id))
            if state.noise_mu is None:
                if params.sigma > 0.0:
                    state.noise_mu = Vec2(rng.uniform(-params.sigma, params.sigma),
                                          rng.uniform(-params.sigma, params.sigma))
                else:
                    state.noise_mu = Vec2(0.0, 0.0)
            gain = 1.0 - attention
            v_nb = Vec2(nb.velocity.x + gain * state.noise_mu.x,
                        nb.velocity.y + gain * state.noise_mu.y)
        elif noise_on:
            if trace is not None:
                trace.append(("noise", nb.id))
            v_nb = perturb_velocity(nb.velocity, attention, params, rng)
        else:
            v_nb = nb.velocity

        overlap = False
        try:
            if trace is not None:
                trace.append(("escape", nb.id))
            # The escape geometry works on the currently executed relative
            # velocity (the reciprocal-avoidance convention); the
            # goal-directed preferred velocity only enters the program
            # objective and the time-to-collision used by attention.
            escape = closest_escape(
                me.velocity - v_nb,
                VOCone(nb.position - me.position, combined_radius, vo_horizon),
            )
        except AlreadyCollidingError:
            # Physically overlapping neighbor: no cone to build a constraint
            # from.  The episode-level collision is the simulator's call;
            # the planner keeps going with the remaining constraints.
            overlap = True

        if overlap:
            if adaptive:
                state.prev_neighbor_vel = nb.velocity
                state.last_seen_tick = tick
                o_val = state.o
            else:
                o_val = 0.0 if nb.kind is not AgentKind.STATIC else -1.0
            diagnostics.append(NeighborDiagnostics(
                nb.id, o_val, attention, 0.0, tau, (o_val + 1.0) / 2.0))
            continue

        if nb.kind is AgentKind.STATIC:
            e = 0.0
            o_val = -1.0
            if adaptive:
                state.prev_neighbor_vel = nb.velocity
                state.last_seen_tick = tick
        elif adaptive:
            # The neighbor's exerted share of u is its contribution to the
            # change of the relative velocity v_r - v_i, which is the
            # NEGATED change of its own velocity: a cooperating neighbor
            # moves v_i anti-parallel to u.
            delta_v = (state.prev_neighbor_vel - nb.velocity
                       if state.prev_neighbor_vel is not None else None)
            if trace is not None:
                trace.append(("estimate", nb.id))
            e = estimate_e(delta_v, escape.u, params)
            if trace is not None:
                trace.append(("opinion", nb.id))
            state.o = update_opinion(state.o, e, state.attention, params)
            state.prev_neighbor_vel = nb.velocity
            state.last_seen_tick = tick
            o_val = state.o
        else:
            e = 0.0
            o_val = 0.0    # fixed reciprocity

        alpha = (o_val + 1.0) / 2.0
        if trace is not None:
            trace.append(("constraint", nb.id))
        constraints.append(build_oca_line(escape.u, escape.n, alpha, me.velocity))
        diagnostics.append(NeighborDiagnostics(nb.id, o_val, attention, e, tau, alpha))

    if trace is not None:
        trace.append(("solve", -1))
    program = VelocityProgram(preferred=v_pre, max_speed=me.max_speed,
                              constraints=constraints)
    v_star, feasible = solve(program, rng)

    if v_star.norm_sq() > (me.max_speed + SPEED_TOL) ** 2:
        raise InternalInvariantError(
            f"planned speed {v_star.norm()} exceeds max {me.max_speed}")
    return PlanOutput(v_star=v_star, feasible=feasible, per_neighbor=diagnostics)


__all__ = [
    "AgentKind",
    "AvocadoMode",
    "OrcaFixedMode",
    "NonCooperativeMode",
    "PlannerMode",
    "SelfView",
    "NeighborView",
    "PerceptionSnapshot",
    "NeighborDiagnostics",
    "PlanOutput",
    "OpinionStore",
    "InternalInvariantError",
    "preferred_velocity",
    "plan_step",
    "SPEED_TOL",
    "STATE_RETENTION_S",
]
