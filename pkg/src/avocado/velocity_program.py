"""Minimal-deviation velocity selection under half-plane constraints.

Each neighbor contributes one admissible half-plane; the program picks
the velocity closest to the preferred one inside the intersection of all
half-planes and the max-speed disc.  When that intersection is empty it
falls back to the velocity minimizing the maximum signed constraint
violation over the disc.  Solved by randomized-order incremental 2-D
linear programming; the insertion order comes from a caller-provided
seeded stream so results are reproducible.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import NamedTuple

from .geometry import Vec2, require_finite

# Slack allowed when testing half-plane membership, in m/s.
CONSTRAINT_TOL = 1e-9
_PARALLEL_EPS = 1e-12


class HalfPlane(NamedTuple):
    """Admissible velocities: all v with (v - point) . normal >= 0."""

    point: Vec2
    normal: Vec2    # unit, oriented toward the admissible side

    def slack(self, v: Vec2) -> float:
        return (v.x - self.point.x) * self.normal.x + (v.y - self.point.y) * self.normal.y

    def contains(self, v: Vec2, tol: float = CONSTRAINT_TOL) -> bool:
        return self.slack(v) >= -tol


def build_oca_line(u: Vec2, n: Vec2, alpha: float, v_pre: Vec2) -> HalfPlane:
    """Admissible half-plane when the robot exerts the (1 - alpha) share of u.

    alpha = 0.5 reproduces the reciprocal (ORCA) line; alpha = 1 leaves the
    boundary through the preferred velocity itself.
    """
    require_finite(u, "u")
    require_finite(n, "n")
    require_finite(v_pre, "v_pre")
    if abs(n.norm() - 1.0) > 1e-9:
        raise ValueError(f"normal must be unit length, got |n| = {n.norm()}")
    share = 1.0 - alpha
    return HalfPlane(point=Vec2(v_pre.x + share * u.x, v_pre.y + share * u.y), normal=n)


@dataclass
class VelocityProgram:
    preferred: Vec2
    max_speed: float
    constraints: list[HalfPlane] = field(default_factory=list)

    def validate(self) -> None:
        require_finite(self.preferred, "preferred")
        if not (math.isfinite(self.max_speed) and self.max_speed > 0.0):
            raise ValueError(f"max_speed must be > 0, got {self.max_speed}")
        for i, hp in enumerate(self.constraints):
            require_finite(hp.point, f"constraints[{i}].point")
            require_finite(hp.normal, f"constraints[{i}].normal")
            if abs(hp.normal.norm() - 1.0) > 1e-9:
                raise ValueError(f"constraints[{i}].normal is not unit length")


# Internal line representation: feasible side is to the left of (dx, dy).
class _Line(NamedTuple):
    px: float
    py: float
    dx: float
    dy: float


def _to_line(hp: HalfPlane) -> _Line:
    n = hp.normal
    return _Line(hp.point.x, hp.point.y, n.y, -n.x)


def _lp1(lines: list[_Line], index: int, radius: float,
         opt: Vec2, direction_opt: bool) -> tuple[bool, Vec2]:
    """Optimize along the boundary of lines[index], subject to lines[:index]
    and the disc of the given radius."""
    ln = lines[index]
    dot = ln.px * ln.dx + ln.py * ln.dy
    disc = dot * dot + radius * radius - (ln.px * ln.px + ln.py * ln.py)
    if disc < 0.0:
        # The line does not intersect the disc.
        return False, opt
    sqrt_disc = math.sqrt(disc)
    t_left = -dot - sqrt_disc
    t_right = -dot + sqrt_disc

    for i in range(index):
        other = lines[i]
        denom = ln.dx * other.dy - ln.dy * other.dx
        numer = other.dx * (ln.py - other.py) - other.dy * (ln.px - other.px)
        if abs(denom) <= _PARALLEL_EPS:
            if numer < 0.0:
                return False, opt
            continue
        t = numer / denom
        if denom >= 0.0:
            t_right = min(t_right, t)
        else:
            t_left = max(t_left, t)
        if t_left > t_right:
            return False, opt

    if direction_opt:
        t = t_right if opt.x * ln.dx + opt.y * ln.dy > 0.0 else t_left
    else:
        t = ln.dx * (opt.x - ln.px) + ln.dy * (opt.y - ln.py)
        t = min(t_right, max(t_left, t))
    return True, Vec2(ln.px + t * ln.dx, ln.py + t * ln.dy)


def _lp2(lines: list[_Line], radius: float, opt: Vec2,
         direction_opt: bool) -> tuple[Vec2, int]:
    """Incremental LP over the disc; returns (result, index of first failing
    line or len(lines) on success)."""
    if direction_opt:
        # opt is a unit direction: start at the disc boundary.
        result = Vec2(opt.x * radius, opt.y * radius)
    elif opt.norm_sq() > radius * radius:
        result = opt.normalized() * radius
    else:
        result = opt

    for i, ln in enumerate(lines):
        if ln.dx * (ln.py - result.y) - ln.dy * (ln.px - result.x) > 0.0:
            ok, new_result = _lp1(lines, i, radius, opt, direction_opt)
            if not ok:
                return result, i
            result = new_result
    return result, len(lines)


def _lp3(lines: list[_Line], begin: int, radius: float, result: Vec2) -> Vec2:
    """Minimize the maximum violation once some line proved infeasible."""
    distance = 0.0
    for i in range(begin, len(lines)):
        ln = lines[i]
        if ln.dx * (ln.py - result.y) - ln.dy * (ln.px - result.x) > distance:
            proj_lines: list[_Line] = []
            for j in range(i):
                other = lines[j]
                denom = ln.dx * other.dy - ln.dy * other.dx
                if abs(denom) <= _PARALLEL_EPS:
                    if ln.dx * other.dx + ln.dy * other.dy > 0.0:
                        # Same direction: line j dominates or is dominated.
                        continue
                    px = 0.5 * (ln.px + other.px)
                    py = 0.5 * (ln.py + other.py)
                else:
                    t = (other.dx * (ln.py - other.py) - other.dy * (ln.px - other.px)) / denom
                    px = ln.px + t * ln.dx
                    py = ln.py + t * ln.dy
                ddx = other.dx - ln.dx
                ddy = other.dy - ln.dy
                norm = math.hypot(ddx, ddy)
                if norm <= _PARALLEL_EPS:
                    continue
                proj_lines.append(_Line(px, py, ddx / norm, ddy / norm))

            opt_dir = Vec2(-ln.dy, ln.dx)
            new_result, fail = _lp2(proj_lines, radius, opt_dir, True)
            if fail == len(proj_lines):
                result = new_result
            distance = ln.dx * (ln.py - result.y) - ln.dy * (ln.px - result.x)
    return result


def max_violation(program: VelocityProgram, v: Vec2) -> float:
    """Largest signed violation of v over all constraints (<= 0 if feasible)."""
    worst = -math.inf
    for hp in program.constraints:
        worst = max(worst, -hp.slack(v))
    return worst


def solve(program: VelocityProgram, rng: random.Random | None = None) -> tuple[Vec2, bool]:
    """Closest feasible velocity to the preferred one, or the least unsafe one.

    Returns (velocity, feasible).  When feasible the result satisfies every
    half-plane within CONSTRAINT_TOL and lies in the max-speed disc; when
    not, it minimizes the maximum signed violation over the disc.  The
    constraint insertion order is a deterministic pseudo-random permutation
    drawn from rng, so identical (program, stream state) pairs give
    bit-identical answers.
    """
    program.validate()
    lines = [_to_line(hp) for hp in program.constraints]
    if rng is not None and len(lines) > 1:
        rng.shuffle(lines)

    result, fail = _lp2(lines, program.max_speed, program.preferred, False)
    if fail < len(lines):
        result = _lp3(lines, fail, program.max_speed, result)
        return result, False
    return result, True


__all__ = [
    "CONSTRAINT_TOL",
    "HalfPlane",
    "VelocityProgram",
    "build_oca_line",
    "max_violation",
    "solve",
]
