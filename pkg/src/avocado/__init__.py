"""Adaptive optimal collision avoidance driven by opinion dynamics.

A velocity-obstacle planner that estimates each neighbor's unknown degree
of cooperation online through a nonlinear opinion-dynamics adaptive law,
plus a deterministic multi-agent benchmark simulator and batch tooling.
"""

from .geometry import (
    AlreadyCollidingError,
    CollisionKind,
    DegenerateDirectionError,
    EscapeResult,
    TimeToCollision,
    Vec2,
    VOCone,
    closest_escape,
    scalar_projection,
    time_to_collision,
)
from .opinion import (
    DEFAULT_PARAMS,
    OpinionParams,
    OpinionState,
    cooperation_from_opinion,
    equilibrium_solve,
    estimate_e,
    linearization_eigenvalue,
    opinion_from_cooperation,
    perturb_velocity,
    update_attention,
    update_opinion,
)
from .planner import (
    AgentKind,
    AvocadoMode,
    NonCooperativeMode,
    OpinionStore,
    OrcaFixedMode,
    PerceptionSnapshot,
    PlanOutput,
    plan_step,
    preferred_velocity,
)
from .simulator import (
    AgentState,
    RunMetrics,
    ScenarioSpec,
    Status,
    World,
    make_world,
    run_batch,
    run_episode,
    step_world,
)
from .velocity_program import HalfPlane, VelocityProgram, build_oca_line, solve

__version__ = "0.1.0"
