"""Deterministic discrete-time multi-agent world and benchmark metrics.

Scenario generators place cooperative robots, non-cooperative agents and
static disc obstacles; the world advances synchronously (every planner
sees the same immutable snapshot, positions commit afterwards) with
collision and arrival detection each tick.  Episodes and seeded batches
aggregate the success-rate and time-to-goal metrics.  All randomness
flows from per-purpose streams derived from the scenario seed, so a
(spec, seed) pair fully determines every trajectory.
"""

from __future__ import annotations

import hashlib
import math
import random
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

from .geometry import Vec2
from .opinion import DEFAULT_PARAMS, OpinionParams
from .planner import (
    AgentKind,
    AvocadoMode,
    NeighborView,
    NonCooperativeMode,
    OpinionStore,
    OrcaFixedMode,
    PerceptionSnapshot,
    PlannerMode,
    SelfView,
    plan_step,
)

FAMILIES = ("headon", "circle", "crossing", "custom")
AVOCADO_VARIANTS = ("AVOCADO_1", "AVOCADO_2", "AVOCADO_3", "AVOCADO_4")
VARIANTS = AVOCADO_VARIANTS + ("ORCA",)

# Parameter overrides per named planner variant, applied on top of defaults.
VARIANT_OVERRIDES: dict[str, dict[str, float]] = {
    "AVOCADO_1": {},
    "AVOCADO_2": {"d": 5.0},
    "AVOCADO_3": {"b": 1.0},
    "AVOCADO_4": {"b": -1.0},
    "ORCA": {},
}


class Status(Enum):
    ACTIVE = "active"
    ARRIVED = "arrived"
    COLLIDED = "collided"


@dataclass
class AgentState:
    id: int
    kind: AgentKind
    position: Vec2
    velocity: Vec2
    radius: float
    max_speed: float
    goal: Vec2
    status: Status = Status.ACTIVE
    home: Vec2 | None = None          # original start, for goal bouncing
    goal_bounce: bool = False
    arrival_time: float | None = None


@dataclass(frozen=True)
class StaticDisc:
    x: float
    y: float
    radius: float


@dataclass(frozen=True)
class CustomAgent:
    kind: str                  # "robot" | "agent"
    x: float
    y: float
    goal_x: float
    goal_y: float


@dataclass(frozen=True)
class ScenarioSpec:
    """Declarative benchmark input; see the config module for file loading."""

    family: str = "headon"
    n: int = 2
    p: float = 1.0
    variant: str = "AVOCADO_1"
    seed: int = 0
    T: float = 0.05
    timeout: float = 100.0
    goal_tolerance: float = 0.1
    vo_horizon: float = 5.0
    perception_radius: float = 2.5
    radius: float = 0.2
    robot_max_speed: float = 1.0
    agent_max_speed: float = 0.75
    opinion: OpinionParams = DEFAULT_PARAMS
    obstacles: tuple[StaticDisc, ...] = ()
    counterpart: str = "agent"    # head-on opponent: "agent" | "robot"
    orca_noise: bool = False
    headon_half_gap: float = 2.5
    custom_agents: tuple[CustomAgent, ...] = ()


@dataclass
class RunMetrics:
    success_rate: float | None
    mean_time_to_goal: float | None
    collisions: int
    per_robot: list[tuple[int, float | None]]
    tick_plan_ms: list[float] = field(default_factory=list)
    plan_calls: int = 0

    @property
    def timing_ms(self) -> dict[str, float]:
        if not self.tick_plan_ms:
            return {"mean": 0.0, "stddev": 0.0, "max": 0.0}
        n = len(self.tick_plan_ms)
        mean = sum(self.tick_plan_ms) / n
        var = sum((t - mean) ** 2 for t in self.tick_plan_ms) / n
        return {"mean": mean, "stddev": math.sqrt(var), "max": max(self.tick_plan_ms)}

    @property
    def mean_plan_ms(self) -> float:
        if self.plan_calls == 0:
            return 0.0
        return sum(self.tick_plan_ms) / self.plan_calls


def derive_seed(*parts) -> int:
    """Stable 64-bit child seed from heterogeneous labels."""
    text = ":".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def _planner_mode_for(kind: AgentKind, spec: ScenarioSpec) -> PlannerMode | None:
    if kind is AgentKind.STATIC:
        return None
    if kind is AgentKind.AGENT:
        return NonCooperativeMode(params=spec.opinion)
    if spec.variant == "ORCA":
        return OrcaFixedMode(noise_enabled=spec.orca_noise, params=spec.opinion)
    return AvocadoMode(params=spec.opinion)


@dataclass
class World:
    spec: ScenarioSpec
    agents: list[AgentState]
    tick: int = 0
    modes: dict[int, PlannerMode] = field(default_factory=dict)
    stores: dict[int, OpinionStore] = field(default_factory=dict)
    rngs: dict[int, random.Random] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for agent in self.agents:
            mode = _planner_mode_for(agent.kind, self.spec)
            if mode is not None:
                self.modes[agent.id] = mode
                self.stores[agent.id] = OpinionStore()
                self.rngs[agent.id] = random.Random(
                    derive_seed(self.spec.seed, "agent", agent.id))

    @property
    def time(self) -> float:
        return self.tick * self.spec.T

    def robots(self) -> list[AgentState]:
        return [a for a in self.agents if a.kind is AgentKind.ROBOT]


def _append_obstacles(agents: list[AgentState], spec: ScenarioSpec) -> None:
    next_id = len(agents)
    for disc in spec.obstacles:
        pos = Vec2(disc.x, disc.y)
        agents.append(AgentState(
            id=next_id, kind=AgentKind.STATIC, position=pos, velocity=Vec2(0.0, 0.0),
            radius=disc.radius, max_speed=0.0, goal=pos))
        next_id += 1


def _make_agent(agent_id: int, kind: AgentKind, position: Vec2, goal: Vec2,
                spec: ScenarioSpec, goal_bounce: bool = False) -> AgentState:
    max_speed = spec.robot_max_speed if kind is AgentKind.ROBOT else spec.agent_max_speed
    return AgentState(
        id=agent_id, kind=kind, position=position, velocity=Vec2(0.0, 0.0),
        radius=spec.radius, max_speed=max_speed, goal=goal,
        home=position, goal_bounce=goal_bounce)


def gen_headon(spec: ScenarioSpec) -> World:
    """Robot on the left, counterpart on the right, goals swapped."""
    if spec.n != 2:
        raise ValueError("head-on scenarios require n = 2")
    half = spec.headon_half_gap
    left = Vec2(-half, 0.0)
    right = Vec2(half, 0.0)
    counterpart = AgentKind.ROBOT if spec.counterpart == "robot" else AgentKind.AGENT
    agents = [
        _make_agent(0, AgentKind.ROBOT, left, right, spec),
        _make_agent(1, counterpart, right, left, spec),
    ]
    _append_obstacles(agents, spec)
    return World(spec=spec, agents=agents)


def circle_radius(n: int, agent_radius: float) -> float:
    return max(2.5, 2.3 * n * agent_radius / math.pi)


def gen_circle(spec: ScenarioSpec) -> World:
    """Evenly spaced entities on a circle, goals at the antipodal points.

    Identities (robot vs non-cooperative agent) are assigned by a seeded
    shuffle with ceil(p * n) robots.
    """
    if spec.n < 2:
        raise ValueError("circle scenarios require n >= 2")
    rng = random.Random(derive_seed(spec.seed, "circle-identities"))
    n_robots = math.ceil(spec.p * spec.n)
    kinds = [AgentKind.ROBOT] * n_robots + [AgentKind.AGENT] * (spec.n - n_robots)
    rng.shuffle(kinds)

    r = circle_radius(spec.n, spec.radius)
    agents = []
    for i in range(spec.n):
        theta = 2.0 * math.pi * i / spec.n
        pos = Vec2(r * math.cos(theta), r * math.sin(theta))
        agents.append(_make_agent(i, kinds[i], pos, Vec2(-pos.x, -pos.y), spec))
    _append_obstacles(agents, spec)
    return World(spec=spec, agents=agents)


def crossing_side(n: int, agent_radius: float) -> float:
    return 1.5 * n * agent_radius


def _sample_separated(rng: random.Random, sampler: Callable[[], Vec2],
                      placed: list[Vec2], min_separation: float,
                      attempts: int = 5000) -> Vec2:
    for _ in range(attempts):
        candidate = sampler()
        if all((candidate - p).norm() >= min_separation for p in placed):
            placed.append(candidate)
            return candidate
    raise RuntimeError("could not place agents without overlap; scenario too crowded")


def gen_crossing(spec: ScenarioSpec) -> World:
    """Robots cross a square while agents flow along the perpendicular axis.

    Robots spawn on the two x-facing sides with goals on the opposite side;
    agents spawn on the y-facing sides and bounce between goal and start so
    the traffic never drains.  Starts and goals are rejection-sampled to
    keep a small clearance between entities of each group.
    """
    if spec.n < 2:
        raise ValueError("crossing scenarios require n >= 2")
    half = crossing_side(spec.n, spec.radius) / 2.0
    rng = random.Random(derive_seed(spec.seed, "crossing-placement"))
    n_robots = math.ceil(spec.p * spec.n)
    n_agents = spec.n - n_robots
    clearance = 2.2 * spec.radius

    def edge_point(axis: str, sign: float) -> Vec2:
        offset = rng.uniform(-half, half)
        return Vec2(sign * half, offset) if axis == "x" else Vec2(offset, sign * half)

    agents: list[AgentState] = []
    starts_placed: list[Vec2] = []
    goals_placed: list[Vec2] = []
    agent_id = 0
    for count, kind, axis in ((n_robots, AgentKind.ROBOT, "x"),
                              (n_agents, AgentKind.AGENT, "y")):
        for _ in range(count):
            sign = rng.choice((-1.0, 1.0))
            start = _sample_separated(rng, lambda: edge_point(axis, sign),
                                      starts_placed, clearance)
            goal = _sample_separated(rng, lambda: edge_point(axis, -sign),
                                     goals_placed, clearance)
            agents.append(_make_agent(agent_id, kind, start, goal, spec,
                                      goal_bounce=(kind is AgentKind.AGENT)))
            agent_id += 1
    _append_obstacles(agents, spec)
    return World(spec=spec, agents=agents)


def gen_custom(spec: ScenarioSpec) -> World:
    if not spec.custom_agents:
        raise ValueError("custom scenarios require an agents list")
    agents = []
    for i, ca in enumerate(spec.custom_agents):
        kind = AgentKind.ROBOT if ca.kind == "robot" else AgentKind.AGENT
        agents.append(_make_agent(i, kind, Vec2(ca.x, ca.y),
                                  Vec2(ca.goal_x, ca.goal_y), spec))
    _append_obstacles(agents, spec)
    return World(spec=spec, agents=agents)


_GENERATORS = {
    "headon": gen_headon,
    "circle": gen_circle,
    "crossing": gen_crossing,
    "custom": gen_custom,
}


def make_world(spec: ScenarioSpec) -> World:
    try:
        gen = _GENERATORS[spec.family]
    except KeyError:
        raise ValueError(f"unknown scenario family: {spec.family}") from None
    return gen(spec)


PlanHook = Callable[[int, int, list], None]    # (tick, agent_id, diagnostics)


def step_world(world: World, plan_hook: PlanHook | None = None) -> tuple[float, int]:
    """Advance one tick: plan everything from a frozen snapshot, then move.

    Returns (wall-clock milliseconds spent planning, number of plan calls).
    Arrived and collided entities hold position with zero velocity.
    """
    spec = world.spec
    views = [NeighborView(a.id, a.position, a.velocity, a.radius, a.kind)
             for a in world.agents]
    r_p = spec.perception_radius

    planned: list[tuple[AgentState, Vec2]] = []
    t0 = time.perf_counter()
    calls = 0
    for agent in world.agents:
        if agent.status is not Status.ACTIVE or agent.kind is AgentKind.STATIC:
            continue
        neighbors = [v for v in views
                     if v.id != agent.id
                     and (v.position - agent.position).norm() < r_p]
        snapshot = PerceptionSnapshot(
            self_view=SelfView(agent.id, agent.position, agent.velocity,
                               agent.radius, agent.max_speed, agent.goal),
            neighbors=neighbors)
        output = plan_step(snapshot, world.stores[agent.id], world.modes[agent.id],
                           world.rngs[agent.id], vo_horizon=spec.vo_horizon,
                           goal_tolerance=spec.goal_tolerance, tick=world.tick)
        calls += 1
        if plan_hook is not None:
            plan_hook(world.tick, agent.id, output.per_neighbor)
        planned.append((agent, output.v_star))
    plan_ms = (time.perf_counter() - t0) * 1000.0

    dt = spec.T
    for agent in world.agents:
        agent.velocity = Vec2(0.0, 0.0)
    for agent, v_star in planned:
        agent.velocity = v_star
        agent.position = Vec2(agent.position.x + dt * v_star.x,
                              agent.position.y + dt * v_star.y)
    world.tick += 1
    detect_events(world)
    return plan_ms, calls


def detect_events(world: World) -> None:
    """Mark collisions (strict overlap) and arrivals after a move."""
    agents = world.agents
    now = world.time
    newly_collided: set[int] = set()
    for i, a in enumerate(agents):
        for b in agents[i + 1:]:
            if a.kind is AgentKind.STATIC and b.kind is AgentKind.STATIC:
                continue
            gap = a.radius + b.radius
            d = a.position - b.position
            if d.norm_sq() < gap * gap:
                for member in (a, b):
                    if member.kind is not AgentKind.STATIC and member.status is Status.ACTIVE:
                        newly_collided.add(member.id)
    for agent in agents:
        if agent.id in newly_collided:
            agent.status = Status.COLLIDED
            agent.velocity = Vec2(0.0, 0.0)

    for agent in agents:
        if agent.status is not Status.ACTIVE or agent.kind is AgentKind.STATIC:
            continue
        if (agent.position - agent.goal).norm() < world.spec.goal_tolerance:
            if agent.goal_bounce and agent.kind is AgentKind.AGENT:
                # Retarget to the start so the flow never drains.
                agent.goal, agent.home = agent.home, agent.goal
            else:
                agent.status = Status.ARRIVED
                agent.arrival_time = now
                agent.velocity = Vec2(0.0, 0.0)


@dataclass
class TrajectoryRow:
    tick: int
    time: float
    agent_id: int
    kind: AgentKind
    x: float
    y: float
    vx: float
    vy: float
    status: Status


@dataclass
class OpinionRow:
    tick: int
    robot_id: int
    neighbor_id: int
    o: float
    attention: float
    e: float
    tau: float    # seconds; +inf when no collision is predicted
    alpha: float


@dataclass
class EpisodeResult:
    metrics: RunMetrics
    trajectory: list[TrajectoryRow]
    opinions: list[OpinionRow]
    world: World


def _snapshot_rows(world: World, rows: list[TrajectoryRow]) -> None:
    t = world.time
    for a in world.agents:
        rows.append(TrajectoryRow(world.tick, t, a.id, a.kind,
                                  a.position.x, a.position.y,
                                  a.velocity.x, a.velocity.y, a.status))


def run_episode(spec: ScenarioSpec, *, record_trajectory: bool = True,
                record_opinions: bool = True) -> EpisodeResult:
    """Step until every robot arrived or collided, or the timeout elapses."""
    world = make_world(spec)
    trajectory: list[TrajectoryRow] = []
    opinions: list[OpinionRow] = []

    def hook(tick: int, agent_id: int, diags) -> None:
        if not record_opinions:
            return
        if not isinstance(world.modes.get(agent_id), AvocadoMode):
            return
        for d in diags:
            opinions.append(OpinionRow(tick, agent_id, d.neighbor_id, d.o,
                                       d.attention, d.e, d.tau.value, d.alpha))

    if record_trajectory:
        _snapshot_rows(world, trajectory)

    max_ticks = math.ceil(spec.timeout / spec.T)
    tick_ms: list[float] = []
    calls_total = 0
    robots = world.robots()
    while world.tick < max_ticks:
        if robots and all(r.status is not Status.ACTIVE for r in robots):
            break
        if not robots and all(a.status is not Status.ACTIVE or a.goal_bounce
                              for a in world.agents):
            break
        ms, calls = step_world(world, hook)
        tick_ms.append(ms)
        calls_total += calls
        if record_trajectory:
            _snapshot_rows(world, trajectory)

    per_robot: list[tuple[int, float | None]] = []
    for r in robots:
        succ = 1 if r.status is Status.ARRIVED else 0
        per_robot.append((succ, r.arrival_time if succ else None))
    times = [t for s, t in per_robot if s == 1]
    collided = sum(1 for a in world.agents
                   if a.kind is not AgentKind.STATIC and a.status is Status.COLLIDED)
    metrics = RunMetrics(
        success_rate=(sum(s for s, _ in per_robot) / len(per_robot)) if per_robot else None,
        mean_time_to_goal=(sum(times) / len(times)) if times else None,
        collisions=collided,
        per_robot=per_robot,
        tick_plan_ms=tick_ms,
        plan_calls=calls_total,
    )
    return EpisodeResult(metrics=metrics, trajectory=trajectory,
                         opinions=opinions, world=world)


@dataclass(frozen=True)
class BatchRow:
    family: str
    variant: str
    n: int
    p: float
    runs: int
    success_rate: float
    mean_time_to_goal: float | None
    mean_plan_ms: float
    collisions: int


def run_batch(spec: ScenarioSpec, runs: int) -> BatchRow:
    """Aggregate `runs` seeded episodes of one scenario cell.

    Per-run seeds derive from the cell's seed and the run index, so the
    aggregate is reproducible and independent of execution order.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    succ_total = 0
    robot_total = 0
    times: list[float] = []
    plan_ms_sum = 0.0
    plan_calls = 0
    collisions = 0
    for k in range(runs):
        run_seed = derive_seed(spec.seed, spec.family, spec.variant,
                               spec.n, spec.p, "run", k)
        result = run_episode(replace(spec, seed=run_seed),
                             record_trajectory=False, record_opinions=False)
        m = result.metrics
        robot_total += len(m.per_robot)
        succ_total += sum(s for s, _ in m.per_robot)
        times.extend(t for s, t in m.per_robot if s == 1)
        plan_ms_sum += sum(m.tick_plan_ms)
        plan_calls += m.plan_calls
        collisions += m.collisions
    return BatchRow(
        family=spec.family, variant=spec.variant, n=spec.n, p=spec.p, runs=runs,
        success_rate=succ_total / robot_total if robot_total else 0.0,
        mean_time_to_goal=(sum(times) / len(times)) if times else None,
        mean_plan_ms=plan_ms_sum / plan_calls if plan_calls else 0.0,
        collisions=collisions,
    )


__all__ = [
    "FAMILIES",
    "VARIANTS",
    "AVOCADO_VARIANTS",
    "VARIANT_OVERRIDES",
    "Status",
    "AgentState",
    "StaticDisc",
    "CustomAgent",
    "ScenarioSpec",
    "RunMetrics",
    "World",
    "derive_seed",
    "circle_radius",
    "crossing_side",
    "gen_headon",
    "gen_circle",
    "gen_crossing",
    "gen_custom",
    "make_world",
    "step_world",
    "detect_events",
    "run_episode",
    "run_batch",
    "TrajectoryRow",
    "OpinionRow",
    "EpisodeResult",
    "BatchRow",
]
