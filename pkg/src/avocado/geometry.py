"""Planar vector algebra and truncated velocity-obstacle geometry.

Everything here is a pure function of its arguments: 2D vectors, the
truncated cone of relative velocities that lead to collision within a
time horizon, the minimal escape vector onto that cone's boundary, the
analytic time-to-collision quadratic, and the signed scalar projection
used by the cooperation estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

# Directions and escape vectors shorter than this are treated as degenerate.
EPS_DIRECTION = 1e-9


class AlreadyCollidingError(ValueError):
    """Raised when the caller asks for escape geometry of overlapping discs."""


class DegenerateDirectionError(ValueError):
    """Raised when a projection direction is too short to normalize."""


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        return self.x * other.y - self.y * other.x

    def norm_sq(self) -> float:
        return self.x * self.x + self.y * self.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def normalized(self) -> "Vec2":
        n = self.norm()
        if n <= EPS_DIRECTION:
            raise DegenerateDirectionError(f"cannot normalize near-zero vector {self}")
        return Vec2(self.x / n, self.y / n)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


ZERO = Vec2(0.0, 0.0)


def require_finite(v: Vec2, name: str = "vector") -> None:
    if not (math.isfinite(v.x) and math.isfinite(v.y)):
        raise ValueError(f"{name} has non-finite components: {v}")


@dataclass(frozen=True)
class VOCone:
    """Truncated velocity-obstacle cone in relative-velocity space.

    apex_offset is the relative position of the neighbor (p_i - p_r) in m,
    combined_radius the sum of both collision radii in m, horizon the
    look-ahead in s.  The truncating disc has center apex_offset/horizon
    and radius combined_radius/horizon.
    """

    apex_offset: Vec2
    combined_radius: float
    horizon: float

    def __post_init__(self) -> None:
        require_finite(self.apex_offset, "apex_offset")
        if not (math.isfinite(self.combined_radius) and self.combined_radius > 0.0):
            raise ValueError(f"combined_radius must be > 0, got {self.combined_radius}")
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise ValueError(f"horizon must be > 0, got {self.horizon}")


class EscapeResult(NamedTuple):
    u: Vec2            # minimal velocity change onto the cone boundary, m/s
    n: Vec2            # outward unit normal at the target boundary point
    inside_vo: bool    # whether rel_vel was in the cone (boundary counts)


class CollisionKind(Enum):
    FINITE = "finite"
    NO_COLLISION = "no_collision"
    ALREADY_COLLIDING = "already_colliding"


class TimeToCollision(NamedTuple):
    kind: CollisionKind
    value: float    # seconds; inf when NO_COLLISION, 0.0 when ALREADY_COLLIDING

    @staticmethod
    def finite(t: float) -> "TimeToCollision":
        return TimeToCollision(CollisionKind.FINITE, t)

    @staticmethod
    def no_collision() -> "TimeToCollision":
        return TimeToCollision(CollisionKind.NO_COLLISION, math.inf)

    @staticmethod
    def already_colliding() -> "TimeToCollision":
        return TimeToCollision(CollisionKind.ALREADY_COLLIDING, 0.0)

    @property
    def is_finite(self) -> bool:
        return self.kind is CollisionKind.FINITE


def _segment_distance_to_point(seg_end: Vec2, point: Vec2) -> float:
    # Distance from `point` to the segment [origin, seg_end].
    ee = seg_end.norm_sq()
    if ee == 0.0:
        return point.norm()
    t = point.dot(seg_end) / ee
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return (point - seg_end * t).norm()


def closest_escape(rel_vel: Vec2, cone: VOCone) -> EscapeResult:
    """Minimal change moving rel_vel onto the boundary of the cone.

    Returns u = (closest point of the boundary to rel_vel) - rel_vel and
    the outward unit normal at that point.  Uses the standard
    decomposition: project onto the truncating disc when rel_vel lies in
    the disc's normal sector, otherwise onto the nearer cone leg.
    Boundary membership is conservative: points exactly on the boundary
    count as inside.
    """
    require_finite(rel_vel, "rel_vel")
    apex = cone.apex_offset
    r = cone.combined_radius
    tau = cone.horizon

    dist_sq = apex.norm_sq()
    r_sq = r * r
    if dist_sq <= r_sq:
        raise AlreadyCollidingError(
            f"discs already overlap: separation {math.sqrt(dist_sq):.6g} <= radius {r:.6g}"
        )

    inv_tau = 1.0 / tau
    cutoff_center = apex * inv_tau
    cutoff_radius = r * inv_tau

    # w points from the truncating disc center to the relative velocity.
    w = rel_vel - cutoff_center
    w_len_sq = w.norm_sq()
    dot_w_apex = w.dot(apex)

    if dot_w_apex < 0.0 and dot_w_apex * dot_w_apex > r_sq * w_len_sq:
        # rel_vel lies in the disc sector: project onto the truncating disc.
        w_len = math.sqrt(w_len_sq)
        if w_len <= EPS_DIRECTION:
            # rel_vel at the disc center; push toward the origin side.
            unit = (-apex).normalized()
        else:
            unit = Vec2(w.x / w_len, w.y / w_len)
        u = unit * (cutoff_radius - w_len)
        normal = unit
    else:
        side = apex.cross(w)
        if side == 0.0:
            # rel_vel exactly on the cone axis: both legs are equidistant and
            # any chiral pick would break mirror symmetry, so return the
            # axial boundary point on the near side of the truncating disc
            # (a pure braking escape).  Exactly symmetric encounters then
            # stay symmetric; the attention-gated perception noise is the
            # intended mechanism for leaving this configuration.
            apex_hat = apex.normalized()
            target = cutoff_center - apex_hat * cutoff_radius
            u = target - rel_vel
            normal = -apex_hat
        else:
            # Project onto the nearer cone leg (tangent line through origin).
            leg_len = math.sqrt(dist_sq - r_sq)
            inv_dist_sq = 1.0 / dist_sq
            if side > 0.0:
                leg_dir = Vec2(
                    (apex.x * leg_len - apex.y * r) * inv_dist_sq,
                    (apex.x * r + apex.y * leg_len) * inv_dist_sq,
                )
                normal = Vec2(-leg_dir.y, leg_dir.x)
            else:
                leg_dir = Vec2(
                    (apex.x * leg_len + apex.y * r) * inv_dist_sq,
                    (-apex.x * r + apex.y * leg_len) * inv_dist_sq,
                )
                normal = Vec2(leg_dir.y, -leg_dir.x)
            t = rel_vel.dot(leg_dir)
            u = leg_dir * t - rel_vel

    inside = _segment_distance_to_point(rel_vel * tau, apex) <= r
    return EscapeResult(u=u, n=normal, inside_vo=inside)


def time_to_collision(p_r: Vec2, p_i: Vec2, rel_vel: Vec2, combined_radius: float) -> TimeToCollision:
    """Solve for the first instant the relative position enters the combined disc.

    The relative position p_r - p_i advances along rel_vel; entry happens
    at roots of b1*t^2 + b2*t + b3 = 0 with b1 = |rel_vel|^2,
    b2 = 2 rel_vel . (p_r - p_i), b3 = |p_r - p_i|^2 - R^2.  Two positive
    roots: the smaller one.  No real or no positive roots: no collision.
    Roots of opposite sign: the discs already overlap.
    """
    require_finite(p_r, "p_r")
    require_finite(p_i, "p_i")
    require_finite(rel_vel, "rel_vel")
    if not (math.isfinite(combined_radius) and combined_radius > 0.0):
        raise ValueError(f"combined_radius must be > 0, got {combined_radius}")

    rel = p_r - p_i
    b1 = rel_vel.norm_sq()
    b3 = rel.norm_sq() - combined_radius * combined_radius

    if b3 < 0.0:
        return TimeToCollision.already_colliding()
    if b1 == 0.0:
        return TimeToCollision.no_collision()

    b2 = 2.0 * rel_vel.dot(rel)
    disc = b2 * b2 - 4.0 * b1 * b3
    if disc < 0.0:
        return TimeToCollision.no_collision()

    sqrt_disc = math.sqrt(disc)
    t_lo = (-b2 - sqrt_disc) / (2.0 * b1)
    t_hi = (-b2 + sqrt_disc) / (2.0 * b1)
    if t_lo > 0.0:
        return TimeToCollision.finite(t_lo)
    if t_hi <= 0.0:
        return TimeToCollision.no_collision()
    # t_lo <= 0 < t_hi with b3 >= 0 only at exact tangency while entering;
    # treat like an immediate collision.
    return TimeToCollision.already_colliding()


def scalar_projection(a: Vec2, b: Vec2) -> float:
    """Signed component of a along b, normalized by |b|: (a . b) / |b|^2."""
    require_finite(a, "a")
    require_finite(b, "b")
    bb = b.norm_sq()
    if bb <= EPS_DIRECTION * EPS_DIRECTION:
        raise DegenerateDirectionError(f"projection direction too short: {b}")
    return a.dot(b) / bb
