"""Independent brute-force oracles used to validate the analytic geometry.

Everything here recomputes answers from first principles (dense sampling,
ray marching, candidate enumeration) without reusing the library's
decomposition logic.
"""

from __future__ import annotations

import math

import numpy as np

from avocado.geometry import Vec2, VOCone
from avocado.velocity_program import VelocityProgram


# -- velocity obstacle boundary ------------------------------------------------

def vo_boundary_points(cone: VOCone, samples: int, leg_length: float) -> np.ndarray:
    """Dense sample of the truncated cone boundary: cutoff arc + two legs."""
    d = math.hypot(cone.apex_offset.x, cone.apex_offset.y)
    r = cone.combined_radius
    tau = cone.horizon
    psi = math.atan2(cone.apex_offset.y, cone.apex_offset.x)
    phi = math.asin(min(1.0, r / d))

    center = np.array([cone.apex_offset.x / tau, cone.apex_offset.y / tau])
    cutoff_radius = r / tau
    leg_t0 = math.sqrt(max(d * d - r * r, 0.0)) / tau

    n_arc = samples // 3
    n_leg = (samples - n_arc) // 2

    # Cutoff arc: the part of the circle facing the origin, between tangency
    # points at angles +-(pi/2 + phi) from the apex direction.
    start = psi + math.pi / 2.0 + phi
    end = psi + 3.0 * math.pi / 2.0 - phi
    gamma = np.linspace(start, end, n_arc)
    arc = center + cutoff_radius * np.stack([np.cos(gamma), np.sin(gamma)], axis=1)

    legs = []
    for sign in (+1.0, -1.0):
        ang = psi + sign * phi
        direction = np.array([math.cos(ang), math.sin(ang)])
        t = np.linspace(leg_t0, leg_t0 + leg_length, n_leg)
        legs.append(t[:, None] * direction[None, :])
    return np.vstack([arc] + legs)


def _nearest_on_arc(cone: VOCone, point: np.ndarray) -> np.ndarray:
    d = math.hypot(cone.apex_offset.x, cone.apex_offset.y)
    r = cone.combined_radius
    tau = cone.horizon
    psi = math.atan2(cone.apex_offset.y, cone.apex_offset.x)
    phi = math.asin(min(1.0, r / d))
    center = np.array([cone.apex_offset.x / tau, cone.apex_offset.y / tau])
    v = point - center
    ang = math.atan2(v[1], v[0])
    lo = psi + math.pi / 2.0 + phi
    hi = psi + 3.0 * math.pi / 2.0 - phi
    span = hi - lo
    rel = (ang - lo) % (2.0 * math.pi)
    if rel <= span:
        ang = lo + rel
    else:
        # Outside the arc: snap to the angularly closer endpoint.
        ang = hi if (rel - span) < (2.0 * math.pi - rel) else lo
    return center + (r / tau) * np.array([math.cos(ang), math.sin(ang)])


def _nearest_on_leg(cone: VOCone, point: np.ndarray, sign: float) -> np.ndarray:
    d = math.hypot(cone.apex_offset.x, cone.apex_offset.y)
    r = cone.combined_radius
    tau = cone.horizon
    psi = math.atan2(cone.apex_offset.y, cone.apex_offset.x)
    phi = math.asin(min(1.0, r / d))
    ang = psi + sign * phi
    direction = np.array([math.cos(ang), math.sin(ang)])
    t0 = math.sqrt(max(d * d - r * r, 0.0)) / tau
    t = float(np.dot(point, direction))
    return max(t, t0) * direction


def vo_nearest_boundary(rel_vel: Vec2, cone: VOCone,
                        samples: int = 100_000) -> tuple[np.ndarray, float]:
    """True nearest boundary point: dense sampling localizes the feature,
    then the exact per-feature projection refines it."""
    point = np.array([rel_vel.x, rel_vel.y])
    extent = 2.0 * (abs(rel_vel.x) + abs(rel_vel.y)
                    + math.hypot(cone.apex_offset.x, cone.apex_offset.y) / cone.horizon
                    + cone.combined_radius / cone.horizon) + 10.0
    candidates = [
        _nearest_on_arc(cone, point),
        _nearest_on_leg(cone, point, +1.0),
        _nearest_on_leg(cone, point, -1.0),
    ]
    boundary = vo_boundary_points(cone, samples, extent)
    dists = np.linalg.norm(boundary - point[None, :], axis=1)
    candidates.append(boundary[int(np.argmin(dists))])
    best = min(candidates, key=lambda q: float(np.linalg.norm(q - point)))
    return best, float(np.linalg.norm(best - point))


def vo_contains(rel_vel: Vec2, cone: VOCone) -> bool:
    """Membership via segment-to-point distance (boundary counts inside)."""
    seg_end = np.array([rel_vel.x * cone.horizon, rel_vel.y * cone.horizon])
    apex = np.array([cone.apex_offset.x, cone.apex_offset.y])
    ee = float(np.dot(seg_end, seg_end))
    if ee == 0.0:
        return float(np.linalg.norm(apex)) <= cone.combined_radius
    t = min(1.0, max(0.0, float(np.dot(apex, seg_end)) / ee))
    return float(np.linalg.norm(apex - t * seg_end)) <= cone.combined_radius


# -- time to collision ----------------------------------------------------------

def ttc_ray_march(p_r: Vec2, p_i: Vec2, rel_vel: Vec2, radius: float,
                  dt: float = 1e-3) -> float | None:
    """March the relative position until disc entry.

    Returns the entry time, math.inf when the march never enters, or None
    when already overlapping at t = 0.
    """
    rel = np.array([p_r.x - p_i.x, p_r.y - p_i.y])
    vel = np.array([rel_vel.x, rel_vel.y])
    if float(np.linalg.norm(rel)) < radius:
        return None
    speed = float(np.linalg.norm(vel))
    if speed == 0.0:
        return math.inf
    t_max = (float(np.linalg.norm(rel)) + radius) / speed + 1.0
    steps = int(t_max / dt) + 1
    t = np.arange(steps, dtype=float) * dt
    pos = rel[None, :] + t[:, None] * vel[None, :]
    inside = np.linalg.norm(pos, axis=1) < radius
    hits = np.nonzero(inside)[0]
    if hits.size == 0:
        return math.inf
    return float(t[hits[0]])


# -- velocity program -----------------------------------------------------------

def _lp_candidates(program: VelocityProgram) -> list[np.ndarray]:
    """Candidate optima for projecting the preferred velocity onto the
    intersection of half-planes and the speed disc (KKT active sets)."""
    pref = np.array([program.preferred.x, program.preferred.y])
    r = program.max_speed
    planes = [(np.array([hp.point.x, hp.point.y]),
               np.array([hp.normal.x, hp.normal.y])) for hp in program.constraints]
    cands = [pref]
    norm = float(np.linalg.norm(pref))
    if norm > 0.0:
        cands.append(pref * (r / norm))
    for p_i, n_i in planes:
        # Projection of pref onto the boundary line of constraint i.
        cands.append(pref + float(np.dot(p_i - pref, n_i)) * n_i)
        # Intersections of line i with the speed circle.
        d_i = np.array([n_i[1], -n_i[0]])
        dot = float(np.dot(p_i, d_i))
        disc = dot * dot + r * r - float(np.dot(p_i, p_i))
        if disc >= 0.0:
            s = math.sqrt(disc)
            cands.append(p_i + (-dot - s) * d_i)
            cands.append(p_i + (-dot + s) * d_i)
    for i in range(len(planes)):
        for j in range(i + 1, len(planes)):
            p_i, n_i = planes[i]
            p_j, n_j = planes[j]
            a = np.array([n_i, n_j])
            b = np.array([float(np.dot(p_i, n_i)), float(np.dot(p_j, n_j))])
            det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
            if abs(det) > 1e-12:
                cands.append(np.linalg.solve(a, b))
    return cands


def lp_solve_exact(program: VelocityProgram,
                   tol: float = 1e-9) -> tuple[np.ndarray | None, float | None]:
    """Exact reference optimum of the feasible program via enumeration.

    Returns (argmin, objective) or (None, None) when infeasible.
    """
    pref = np.array([program.preferred.x, program.preferred.y])
    r = program.max_speed
    planes = [(np.array([hp.point.x, hp.point.y]),
               np.array([hp.normal.x, hp.normal.y])) for hp in program.constraints]

    def feasible(v: np.ndarray) -> bool:
        if float(np.linalg.norm(v)) > r + tol:
            return False
        return all(float(np.dot(v - p_i, n_i)) >= -tol for p_i, n_i in planes)

    best, best_obj = None, None
    for cand in _lp_candidates(program):
        if not feasible(cand):
            continue
        obj = float(np.linalg.norm(pref - cand))
        if best_obj is None or obj < best_obj:
            best, best_obj = cand, obj
    return best, best_obj


def lp_max_violation(program: VelocityProgram, v: np.ndarray) -> float:
    worst = -math.inf
    for hp in program.constraints:
        p_i = np.array([hp.point.x, hp.point.y])
        n_i = np.array([hp.normal.x, hp.normal.y])
        worst = max(worst, -float(np.dot(v - p_i, n_i)))
    return worst


def lp_minimax_exact(program: VelocityProgram) -> tuple[np.ndarray, float]:
    """Velocity in the speed disc minimizing the maximum signed violation.

    Candidate enumeration over KKT active sets: triples of equal violation,
    pairs of equal violation on the circle, and the per-constraint circle
    optimum.
    """
    r = program.max_speed
    planes = [(np.array([hp.point.x, hp.point.y]),
               np.array([hp.normal.x, hp.normal.y])) for hp in program.constraints]
    if not planes:
        return np.zeros(2), 0.0

    def viol(i: int, v: np.ndarray) -> float:
        p_i, n_i = planes[i]
        return -float(np.dot(v - p_i, n_i))

    cands: list[np.ndarray] = [np.zeros(2)]
    m = len(planes)
    for i in range(m):
        _, n_i = planes[i]
        cands.append(r * n_i)

    def equal_line(i: int, j: int):
        # Locus of equal violation of i and j: (n_j - n_i) . v = c.
        p_i, n_i = planes[i]
        p_j, n_j = planes[j]
        a = n_j - n_i
        c = float(np.dot(p_j, n_j) - np.dot(p_i, n_i))
        return a, c

    for i in range(m):
        for j in range(i + 1, m):
            a_ij, c_ij = equal_line(i, j)
            norm = float(np.linalg.norm(a_ij))
            if norm < 1e-12:
                continue
            # Intersections with the speed circle.
            p0 = a_ij * (c_ij / (norm * norm))
            d = np.array([-a_ij[1], a_ij[0]]) / norm
            h_sq = r * r - float(np.dot(p0, p0))
            if h_sq >= 0.0:
                h = math.sqrt(h_sq)
                cands.append(p0 + h * d)
                cands.append(p0 - h * d)
            for k in range(j + 1, m):
                a_ik, c_ik = equal_line(i, k)
                det = a_ij[0] * a_ik[1] - a_ij[1] * a_ik[0]
                if abs(det) > 1e-12:
                    v = np.linalg.solve(np.array([a_ij, a_ik]),
                                        np.array([c_ij, c_ik]))
                    cands.append(v)

    best, best_obj = None, math.inf
    for cand in cands:
        norm = float(np.linalg.norm(cand))
        if norm > r:
            cand = cand * (r / norm) if norm > 0 else cand
        obj = max(viol(i, cand) for i in range(m))
        if obj < best_obj:
            best, best_obj = cand, obj
    return best, best_obj


def lp_polar_grid(program: VelocityProgram, n_radial: int = 1000,
                  n_angular: int = 1000) -> tuple[np.ndarray, float, bool]:
    """Dense polar-grid sampling oracle over the speed disc.

    Returns (best velocity, objective, feasible).  The objective is the
    deviation from the preferred velocity when any grid point is feasible,
    otherwise the minimum over the grid of the maximum violation.
    """
    r = np.sqrt(np.linspace(0.0, 1.0, n_radial)) * program.max_speed
    theta = np.linspace(0.0, 2.0 * np.pi, n_angular, endpoint=False)
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    pts = np.stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()], axis=1)

    planes = [(np.array([hp.point.x, hp.point.y]),
               np.array([hp.normal.x, hp.normal.y])) for hp in program.constraints]
    if planes:
        slack = np.stack([(pts - p_i[None, :]) @ n_i for p_i, n_i in planes], axis=1)
        worst = (-slack).max(axis=1)
        feasible_mask = worst <= 1e-12
    else:
        worst = np.zeros(len(pts))
        feasible_mask = np.ones(len(pts), dtype=bool)

    pref = np.array([program.preferred.x, program.preferred.y])
    if feasible_mask.any():
        sub = pts[feasible_mask]
        obj = np.linalg.norm(sub - pref[None, :], axis=1)
        k = int(np.argmin(obj))
        return sub[k], float(obj[k]), True
    k = int(np.argmin(worst))
    return pts[k], float(worst[k]), False


# -- opinion fixed points ---------------------------------------------------------

def opinion_fixed_point(a: float, c: float, e: float, attention: float,
                        bias_over_d: float, start: float = 0.0,
                        iters: int = 10_000) -> float:
    """Fixed-point iteration of o = A*tanh(a*o + c*e) + b/d."""
    o = start
    for _ in range(iters):
        o = attention * math.tanh(a * o + c * e) + bias_over_d
    return o
