"""Trajectory/opinion CSV emission, metrics JSON, and SVG trajectory plots.

Numeric fields are serialized at 9 significant digits; an infinite
time-to-collision is written literally as "inf".  Given identical inputs
the emitted bytes are identical, so golden-file and hash comparisons are
meaningful.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

from .planner import AgentKind
from .simulator import OpinionRow, RunMetrics, Status, TrajectoryRow

TRAJECTORY_HEADER = "tick,time,agent_id,kind,x,y,vx,vy,status"
OPINIONS_HEADER = "tick,robot_id,neighbor_id,o,A,e,tau,alpha"
METRICS_KEYS = ("success_rate", "mean_time_to_goal_s", "collisions",
                "per_robot", "timing_ms")

_KIND_LABEL = {AgentKind.ROBOT: "robot", AgentKind.AGENT: "agent",
               AgentKind.STATIC: "static"}
_KIND_FROM_LABEL = {v: k for k, v in _KIND_LABEL.items()}
_STATUS_LABEL = {Status.ACTIVE: "active", Status.ARRIVED: "arrived",
                 Status.COLLIDED: "collided"}
_STATUS_FROM_LABEL = {v: k for k, v in _STATUS_LABEL.items()}


class OutputError(OSError):
    """Raised when an output file cannot be written."""


def fmt(value: float) -> str:
    """9-significant-digit decimal form; infinities print as inf/-inf."""
    return format(value, ".9g")


def _round9(value: float | None) -> float | None:
    if value is None:
        return None
    return float(format(value, ".9g"))


def trajectory_csv_lines(rows: list[TrajectoryRow]) -> list[str]:
    lines = [TRAJECTORY_HEADER]
    for r in rows:
        lines.append(
            f"{r.tick},{fmt(r.time)},{r.agent_id},{_KIND_LABEL[r.kind]},"
            f"{fmt(r.x)},{fmt(r.y)},{fmt(r.vx)},{fmt(r.vy)},{_STATUS_LABEL[r.status]}")
    return lines


def opinions_csv_lines(rows: list[OpinionRow]) -> list[str]:
    lines = [OPINIONS_HEADER]
    for r in rows:
        lines.append(
            f"{r.tick},{r.robot_id},{r.neighbor_id},{fmt(r.o)},{fmt(r.attention)},"
            f"{fmt(r.e)},{fmt(r.tau)},{fmt(r.alpha)}")
    return lines


def metrics_to_dict(metrics: RunMetrics) -> dict:
    timing = metrics.timing_ms
    return {
        "success_rate": _round9(metrics.success_rate),
        "mean_time_to_goal_s": _round9(metrics.mean_time_to_goal),
        "collisions": metrics.collisions,
        "per_robot": [{"succ": s, "t": _round9(t)} for s, t in metrics.per_robot],
        "timing_ms": {k: _round9(v) for k, v in timing.items()},
    }


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_outputs(trajectory: list[TrajectoryRow], opinions: list[OpinionRow],
                  metrics: RunMetrics, out_dir: str) -> dict[str, str]:
    """Write trajectories.csv, opinions.csv and metrics.json into out_dir."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out_dir}: {exc}") from exc
    paths = {
        "trajectories": os.path.join(out_dir, "trajectories.csv"),
        "opinions": os.path.join(out_dir, "opinions.csv"),
        "metrics": os.path.join(out_dir, "metrics.json"),
    }
    _write_text(paths["trajectories"], "\n".join(trajectory_csv_lines(trajectory)) + "\n")
    _write_text(paths["opinions"], "\n".join(opinions_csv_lines(opinions)) + "\n")
    _write_text(paths["metrics"], json.dumps(metrics_to_dict(metrics), indent=2) + "\n")
    return paths


def read_trajectories_csv(path: str) -> list[TrajectoryRow]:
    rows: list[TrajectoryRow] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TRAJECTORY_HEADER:
            raise ValueError(f"unexpected trajectories header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            tick, t, agent_id, kind, x, y, vx, vy, status = line.split(",")
            rows.append(TrajectoryRow(
                int(tick), float(t), int(agent_id), _KIND_FROM_LABEL[kind],
                float(x), float(y), float(vx), float(vy),
                _STATUS_FROM_LABEL[status]))
    return rows


@dataclass(frozen=True)
class SvgStyle:
    sample_every: int = 5
    agent_radius: float = 0.2
    pixels_per_meter: float = 80.0
    robot_palette: tuple[str, ...] = (
        "#3465a4", "#cc0000", "#73d216", "#f57900", "#75507b",
        "#c17d11", "#06989a", "#ce5c00", "#4e9a06", "#5c3566")
    agent_color: str = "#2e3436"
    static_color: str = "#888a85"
    goal_color: str = "#555753"


def _color_for(kind: AgentKind, agent_id: int, style: SvgStyle) -> str:
    if kind is AgentKind.ROBOT:
        return style.robot_palette[agent_id % len(style.robot_palette)]
    if kind is AgentKind.AGENT:
        return style.agent_color
    return style.static_color


def render_svg(trajectory: list[TrajectoryRow],
               goals: dict[int, tuple[float, float]] | None = None,
               style: SvgStyle = SvgStyle()) -> str:
    """Standalone SVG of the run: one disk per agent per sampled tick.

    Disk opacity increases with time, goals get crosshair markers, and the
    first collided sample of each agent is flagged with a cross inside a
    circle.  The viewBox fits the trajectory bounds plus one agent radius.
    """
    if not trajectory:
        raise ValueError("cannot render an empty trajectory")
    goals = goals or {}

    by_agent: dict[int, list[TrajectoryRow]] = {}
    for row in trajectory:
        by_agent.setdefault(row.agent_id, []).append(row)
    last_tick = max(r.tick for r in trajectory)

    xs = [r.x for r in trajectory] + [g[0] for g in goals.values()]
    ys = [r.y for r in trajectory] + [g[1] for g in goals.values()]
    margin = style.agent_radius + max(style.agent_radius, 0.05)
    min_x, max_x = min(xs) - margin, max(xs) + margin
    min_y, max_y = min(ys) - margin, max(ys) + margin
    width = max_x - min_x
    height = max_y - min_y
    px_w = max(1, round(width * style.pixels_per_meter))
    px_h = max(1, round(height * style.pixels_per_meter))

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{px_w}" height="{px_h}" '
        f'viewBox="{fmt(min_x)} {fmt(-max_y)} {fmt(width)} {fmt(height)}">')
    parts.append('<g transform="scale(1,-1)">')
    parts.append(f'<rect x="{fmt(min_x)}" y="{fmt(min_y)}" width="{fmt(width)}" '
                 f'height="{fmt(height)}" fill="#ffffff"/>')

    r = style.agent_radius
    for agent_id in sorted(by_agent):
        rows = sorted(by_agent[agent_id], key=lambda rr: rr.tick)
        color = _color_for(rows[0].kind, agent_id, style)
        sampled = [row for row in rows
                   if row.tick % style.sample_every == 0 or row.tick == rows[-1].tick]
        # Collapse stationary stretches, keeping the most recent sample.
        kept: list[TrajectoryRow] = []
        for row in sampled:
            if kept and kept[-1].x == row.x and kept[-1].y == row.y:
                kept[-1] = row
            else:
                kept.append(row)
        for row in kept:
            opacity = 1.0 if last_tick == 0 else 0.15 + 0.85 * (row.tick / last_tick)
            parts.append(
                f'<circle class="agent" cx="{fmt(row.x)}" cy="{fmt(row.y)}" r="{fmt(r)}" '
                f'fill="{color}" fill-opacity="{fmt(opacity)}"/>')

        collided = next((row for row in rows if row.status is Status.COLLIDED), None)
        if collided is not None:
            arm = r * 0.8
            parts.append(
                f'<g class="collision" stroke="#a40000" stroke-width="{fmt(r * 0.18)}" fill="none">'
                f'<circle cx="{fmt(collided.x)}" cy="{fmt(collided.y)}" r="{fmt(r * 1.25)}"/>'
                f'<line x1="{fmt(collided.x - arm)}" y1="{fmt(collided.y - arm)}" '
                f'x2="{fmt(collided.x + arm)}" y2="{fmt(collided.y + arm)}"/>'
                f'<line x1="{fmt(collided.x - arm)}" y1="{fmt(collided.y + arm)}" '
                f'x2="{fmt(collided.x + arm)}" y2="{fmt(collided.y - arm)}"/></g>')

    for agent_id in sorted(goals):
        gx, gy = goals[agent_id]
        arm = r * 0.6
        parts.append(
            f'<g class="goal" stroke="{style.goal_color}" stroke-width="{fmt(r * 0.12)}" fill="none">'
            f'<circle cx="{fmt(gx)}" cy="{fmt(gy)}" r="{fmt(arm)}"/>'
            f'<line x1="{fmt(gx - arm)}" y1="{fmt(gy)}" x2="{fmt(gx + arm)}" y2="{fmt(gy)}"/>'
            f'<line x1="{fmt(gx)}" y1="{fmt(gy - arm)}" x2="{fmt(gx)}" y2="{fmt(gy + arm)}"/></g>')

    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(svg_text: str, path: str) -> None:
    _write_text(path, svg_text)


SWEEP_HEADER = ("family,variant,n,p,parameter,value,runs,"
                "success_rate,mean_time_to_goal_s,mean_plan_ms,collisions,status")


def sweep_csv_lines(rows: list[dict]) -> list[str]:
    lines = [SWEEP_HEADER]
    for row in rows:
        def cell(key, numeric=False):
            value = row.get(key)
            if value is None or value == "":
                return ""
            return fmt(value) if numeric else str(value)
        lines.append(",".join([
            cell("family"), cell("variant"), cell("n"), cell("p", numeric=True),
            cell("parameter"), cell("value", numeric=True), cell("runs"),
            cell("success_rate", numeric=True),
            cell("mean_time_to_goal_s", numeric=True),
            cell("mean_plan_ms", numeric=True), cell("collisions"),
            cell("status"),
        ]))
    return lines


__all__ = [
    "TRAJECTORY_HEADER",
    "OPINIONS_HEADER",
    "METRICS_KEYS",
    "SWEEP_HEADER",
    "OutputError",
    "fmt",
    "trajectory_csv_lines",
    "opinions_csv_lines",
    "metrics_to_dict",
    "write_outputs",
    "read_trajectories_csv",
    "SvgStyle",
    "render_svg",
    "write_svg",
    "sweep_csv_lines",
]
