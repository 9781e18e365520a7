"""Adaptive estimation of a neighbor's degree of cooperation.

A robot keeps, per neighbor, a shifted degree of cooperation o in
[-(|b|/d + 1), |b|/d + 1] (alpha = (o + 1)/2) and an attention level A in
[0, 1].  Attention is driven by inverse time-to-collision; the opinion is
driven by a saturating consensus term fed by a projection estimate of how
much of the required escape effort the neighbor actually exerted.  All
updates are forward-Euler discretizations with sample time T.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .geometry import (
    EPS_DIRECTION,
    CollisionKind,
    TimeToCollision,
    Vec2,
    scalar_projection,
)

ATTENTION_MODES = ("smoothing", "ode")
PROJECTION_MODES = ("signed", "unsigned")


@dataclass(frozen=True)
class OpinionParams:
    """Gains of the adaptive law.

    a, c: consensus weights (dimensionless, >= 0)
    b: bias (dimensionless, in [-1, 1])
    d: forgetting rate (1/s, > 0); T*d < 1 keeps the Euler step stable
    delta: attention smoothing factor (dimensionless, in [0, 1))
    kappa: attention sensitivity to inverse time-to-collision (s, > 0)
    epsilon: estimator sharpness (dimensionless, > 0)
    sigma: perception noise bound (m/s, >= 0)
    T: sample time (s, > 0)
    """

    a: float = 0.3
    b: float = 0.0
    c: float = 0.7
    d: float = 2.0
    delta: float = 0.57
    kappa: float = 14.15
    epsilon: float = 3.22
    sigma: float = 0.0001
    T: float = 0.05
    attention_mode: str = "smoothing"
    projection_mode: str = "signed"

    def __post_init__(self) -> None:
        checks = [
            ("a", self.a >= 0.0),
            ("b", -1.0 <= self.b <= 1.0),
            ("c", self.c >= 0.0),
            ("d", self.d > 0.0),
            ("delta", 0.0 <= self.delta < 1.0),
            ("kappa", self.kappa > 0.0),
            ("epsilon", self.epsilon > 0.0),
            ("sigma", self.sigma >= 0.0),
            ("T", self.T > 0.0),
        ]
        for name, ok in checks:
            value = getattr(self, name)
            if not (ok and math.isfinite(value)):
                raise ValueError(f"parameter {name} out of range: {value}")
        if self.T * self.d >= 1.0:
            raise ValueError(f"T*d must be < 1 for a stable update, got {self.T * self.d}")
        if self.attention_mode not in ATTENTION_MODES:
            raise ValueError(f"attention_mode must be one of {ATTENTION_MODES}")
        if self.projection_mode not in PROJECTION_MODES:
            raise ValueError(f"projection_mode must be one of {PROJECTION_MODES}")

    @property
    def opinion_bound(self) -> float:
        return abs(self.b) / self.d + 1.0

    @property
    def neutral_opinion(self) -> float:
        return self.b / self.d


DEFAULT_PARAMS = OpinionParams()


@dataclass
class OpinionState:
    """Per-(robot, neighbor) adaptive state."""

    o: float = 0.0
    attention: float = 0.0
    prev_neighbor_vel: Vec2 | None = None
    last_seen_tick: int = 0
    pinned: bool = False    # static obstacles keep o = -1 forever
    noise_mu: Vec2 | None = None    # per-encounter perception perturbation

    @staticmethod
    def initial(params: OpinionParams, tick: int = 0) -> "OpinionState":
        return OpinionState(o=params.neutral_opinion, attention=0.0,
                            prev_neighbor_vel=None, last_seen_tick=tick)


def opinion_from_cooperation(alpha: float) -> float:
    """Shift a degree of cooperation in [0, 1] to an opinion in [-1, 1]."""
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"degree of cooperation out of [0, 1]: {alpha}")
    return 2.0 * alpha - 1.0


def cooperation_from_opinion(o: float) -> float:
    """Inverse of opinion_from_cooperation."""
    if not (-1.0 <= o <= 1.0):
        raise ValueError(f"opinion out of [-1, 1]: {o}")
    return (o + 1.0) / 2.0


def attention_input(tau: TimeToCollision, params: OpinionParams) -> float:
    """tanh(kappa / tau); 0 for no collision, 1 when already colliding."""
    if tau.kind is CollisionKind.NO_COLLISION:
        return 0.0
    if tau.kind is CollisionKind.ALREADY_COLLIDING:
        return 1.0
    return math.tanh(params.kappa / tau.value)


def update_attention(attention: float, tau: TimeToCollision, params: OpinionParams) -> float:
    """One attention step toward tanh(kappa/tau), clamped to [0, 1].

    The default "smoothing" mode A <- delta*A + (1-delta)*tanh(kappa/tau)
    has fixed point tanh(kappa/tau); the "ode" mode is the literal Euler
    step A <- A + T*(-delta*A + (1-delta)*tanh(kappa/tau)).
    """
    x = attention_input(tau, params)
    if params.attention_mode == "smoothing":
        new = params.delta * attention + (1.0 - params.delta) * x
    else:
        new = attention + params.T * (-params.delta * attention + (1.0 - params.delta) * x)
    return min(1.0, max(0.0, new))


def estimate_e(delta_v: Vec2 | None, u: Vec2, params: OpinionParams) -> float:
    """Estimate of the neighbor's own opinion from its observed reaction.

    delta_v is the change in the neighbor's sensed velocity; u the escape
    vector the pair must jointly exert.  Returns tanh(epsilon*(s - 1/2))
    where s is the (signed) scalar projection of delta_v onto u.  Neutral
    (0) when there is no previous velocity or u is degenerate.
    """
    if delta_v is None:
        return 0.0
    if u.norm_sq() <= EPS_DIRECTION * EPS_DIRECTION:
        return 0.0
    s = scalar_projection(delta_v, u)
    if params.projection_mode == "unsigned":
        s = abs(s)
    return math.tanh(params.epsilon * (s - 0.5))


def update_opinion(o: float, e: float, attention: float, params: OpinionParams) -> float:
    """One Euler step of the adaptive law, clamped to +-(|b|/d + 1).

    o <- o + T*(-d*o + d*A*tanh(a*o + c*e) + b).  The clamp only absorbs
    floating-point drift when T*d < 1 and the bound held before the step.
    """
    new = o + params.T * (
        -params.d * o
        + params.d * attention * math.tanh(params.a * o + params.c * e)
        + params.b
    )
    bound = params.opinion_bound
    return min(bound, max(-bound, new))


def perturb_velocity(v: Vec2, attention: float, params: OpinionParams,
                     rng: random.Random) -> Vec2:
    """Attention-gated uniform perception noise: v + (1 - A) * mu(sigma).

    Each component of mu is an independent draw from U(-sigma, sigma).
    With sigma = 0 the velocity is returned untouched and the stream is
    not advanced.
    """
    if params.sigma == 0.0:
        return v
    gain = 1.0 - attention
    mu_x = rng.uniform(-params.sigma, params.sigma)
    mu_y = rng.uniform(-params.sigma, params.sigma)
    return Vec2(v.x + gain * mu_x, v.y + gain * mu_y)


def equilibrium_solve(e: float, attention: float, params: OpinionParams,
                      samples: int = 4096, tol: float = 1e-10) -> list[float]:
    """All fixed points of o = A*tanh(a*o + c*e) + b/d.

    Found by sign-change bracketing on a grid spanning the opinion bound
    plus margin, refined by bisection.  Every returned root satisfies the
    fixed-point residual to ~1e-10 and lies within |b|/d + 1 in magnitude.
    """

    def g(o: float) -> float:
        return attention * math.tanh(params.a * o + params.c * e) + params.neutral_opinion - o

    lo = -params.opinion_bound - 0.5
    hi = params.opinion_bound + 0.5
    roots: list[float] = []
    prev_x = lo
    prev_g = g(lo)
    for i in range(1, samples + 1):
        x = lo + (hi - lo) * i / samples
        gx = g(x)
        if prev_g == 0.0:
            roots.append(prev_x)
        elif (prev_g < 0.0) != (gx < 0.0):
            a_, b_ = prev_x, x
            ga = prev_g
            for _ in range(200):
                mid = 0.5 * (a_ + b_)
                gm = g(mid)
                if (ga < 0.0) != (gm < 0.0):
                    b_ = mid
                else:
                    a_, ga = mid, gm
                if b_ - a_ <= tol:
                    break
            roots.append(0.5 * (a_ + b_))
        prev_x, prev_g = x, gx
    if prev_g == 0.0:
        roots.append(prev_x)

    deduped: list[float] = []
    for r in sorted(roots):
        if not deduped or r - deduped[-1] > 10.0 * tol:
            deduped.append(r)
    return deduped


def linearization_eigenvalue(attention: float, params: OpinionParams) -> float:
    """Eigenvalue of the adaptive law linearized at the neutral opinion b/d.

    lambda = -d + d*A*a*sech^2(a*b/d); positive exactly when the neutral
    equilibrium has destabilized (A above 1/(a*sech^2(a*b/d)), which
    reduces to A > 1/a for b = 0).
    """
    sech = 1.0 / math.cosh(params.a * params.b / params.d)
    return -params.d + params.d * attention * params.a * sech * sech


def opinion_store_prune(store: dict[int, OpinionState], tick: int,
                        max_age_ticks: int) -> None:
    """Drop per-neighbor state not refreshed within max_age_ticks."""
    stale = [k for k, st in store.items() if tick - st.last_seen_tick > max_age_ticks]
    for k in stale:
        del store[k]


__all__ = [
    "ATTENTION_MODES",
    "PROJECTION_MODES",
    "OpinionParams",
    "DEFAULT_PARAMS",
    "OpinionState",
    "opinion_from_cooperation",
    "cooperation_from_opinion",
    "attention_input",
    "update_attention",
    "estimate_e",
    "update_opinion",
    "perturb_velocity",
    "equilibrium_solve",
    "linearization_eigenvalue",
    "opinion_store_prune",
]
