"""CSV and SVG writers. Every file is written to a temporary name and renamed into place."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from ..observer_sim import ComparisonReport, PredictionCurve
from ..asd_planner import PlanResult
from ..trajectory import Scene

PLAN_COLUMNS = ("t", "robot_x", "robot_y", "robot_h", "shadow_x", "shadow_y", "alpha_deg", "phi_deg", "violated")
REPORT_COLUMNS = ("method", "zeta_cm2", "path_length_cm", "commit_time_s", "correct")
WINDOW_COLUMNS = ("window_start_s", "window_end_s", "angular_change_deg", "violated")

PX_PER_CM = 4.0


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        # shortest repr round-trips exactly
        return repr(float(value))
    return str(value)


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def plan_rows(plan: PlanResult):
    violated = plan.violated_samples()
    for i, t in enumerate(plan.robot.times):
        rx, ry, rh = plan.robot.points[i]
        sx, sy = plan.shadow.points[i]
        light = plan.lights.lights[i]
        yield (t, rx, ry, rh, sx, sy, light.elevation_alpha, light.azimuth_phi, bool(violated[i]))


def write_plan_csv(path: Path, plan: PlanResult) -> None:
    write_atomic(path, csv_text(PLAN_COLUMNS, plan_rows(plan)))


def write_windows_csv(path: Path, plan: PlanResult) -> None:
    rows = ((w.start, w.end, w.angular_change, w.violated) for w in plan.constraint_report)
    write_atomic(path, csv_text(WINDOW_COLUMNS, rows))


def write_posterior_csv(path: Path, curve: PredictionCurve) -> None:
    rows = ((t, *row) for t, row in zip(curve.times, curve.posteriors))
    write_atomic(path, csv_text(("t", *curve.labels), rows))


def write_report_csv(path: Path, report: ComparisonReport) -> None:
    rows = ((r.method, r.zeta_cm2, r.path_length_cm, r.commit_time_s, r.correct) for r in report.rows)
    write_atomic(path, csv_text(REPORT_COLUMNS, rows))


def read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _polyline(points: np.ndarray, to_px, style: str) -> str:
    coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in (to_px(p) for p in points))
    return f'  <polyline points="{coords}" {style}/>'


def plan_svg(plan: PlanResult, scene: Scene | None = None, title: str = "plan") -> str:
    """Overhead view: robot ground track, shadow track and goals. 1 cm = 4 px."""
    robot = np.asarray(plan.robot.points[:, :2])
    shadow = np.asarray(plan.shadow.points)
    goals = {} if scene is None else {k: (g.x, g.y) for k, g in scene.goals.items()}
    allpts = np.vstack([robot, shadow, np.array(list(goals.values())).reshape(-1, 2)])
    lo = allpts.min(axis=0) - 5.0
    hi = allpts.max(axis=0) + 5.0
    width, height = (hi - lo) * PX_PER_CM

    def to_px(p):
        # y grows upward in the scene, downward in SVG
        return (p[0] - lo[0]) * PX_PER_CM, (hi[1] - p[1]) * PX_PER_CM

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1f}" height="{height:.1f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">',
        f"  <title>{escape(title)}</title>",
        f"  <metadata>scale: 1 cm = {PX_PER_CM:g} px; origin ({lo[0]:.3f}, {lo[1]:.3f}) cm at lower left</metadata>",
        _polyline(shadow, to_px, 'fill="none" stroke="#555555" stroke-width="2" stroke-dasharray="6 3"'),
        _polyline(robot, to_px, 'fill="none" stroke="#1f4e9c" stroke-width="2"'),
    ]
    x0, y0 = to_px(robot[0])
    parts.append(f'  <circle cx="{x0:.3f}" cy="{y0:.3f}" r="4" fill="#1f4e9c"/>')
    for label, g in goals.items():
        gx, gy = to_px(g)
        parts.append(f'  <circle cx="{gx:.3f}" cy="{gy:.3f}" r="8" fill="none" stroke="#b22222" stroke-width="2"/>')
        parts.append(f'  <text x="{gx + 10:.3f}" y="{gy + 4:.3f}" font-size="12">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_plan_svg(path: Path, plan: PlanResult, scene: Scene | None = None, title: str = "plan") -> None:
    write_atomic(path, plan_svg(plan, scene, title))
