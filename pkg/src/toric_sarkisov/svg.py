"""Pictures of sheds: SVG for surfaces and 3-folds, OFF meshes for 3-folds.

The shed of a fan is the union of the simplices spanned by the origin and
the rays of each top cone. Across a wall shared by two top cones the shed
bends outwards exactly when the support covector of one cone is below 1 on
the far ray of the other, and is flat when it equals 1 there. Inward bends are drawn in red.
"""

from __future__ import annotations

import math
from typing import Sequence

from .fan import Fan, FanError
from .lattice import det

CONVEX, FLAT, CONCAVE = "convex", "flat", "concave"
_EDGE_STYLE = {
    CONVEX: 'stroke="#333" stroke-width="1.2"',
    FLAT: 'stroke="#888" stroke-width="0.8" stroke-dasharray="4 3"',
    CONCAVE: 'stroke="#c0392b" stroke-width="2.4"',
}


def wall_bends(fan: Fan) -> dict[tuple[int, ...], str]:
    """Bend type of the shed along every wall (codimension-one cone)."""
    by_wall: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for c in fan.cones:
        for i in range(len(c)):
            by_wall.setdefault(c[:i] + c[i + 1 :], []).append(c)
    out = {}
    for wall, cones in by_wall.items():
        if len(cones) != 2:
            raise FanError(f"wall {wall} is not shared by two cones")
        a, b = cones
        far = next(i for i in b if i not in wall)
        value = fan.covector(a)(fan.rays[far])
        out[wall] = CONVEX if value < 1 else FLAT if value == 1 else CONCAVE
    return out


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _frame(points: Sequence[tuple[float, float]], size: int, margin: int):
    xs = [p[0] for p in points] + [0.0]
    ys = [p[1] for p in points] + [0.0]
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1e-9)
    scale = (size - 2 * margin) / span
    cx = (max(xs) + min(xs)) / 2
    cy = (max(ys) + min(ys)) / 2

    def to_px(p):
        return size / 2 + (p[0] - cx) * scale, size / 2 - (p[1] - cy) * scale

    return to_px


def _svg(size: int, body: list[str], title: str) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">'
    )
    return "\n".join([head, f"<title>{title}</title>", *body, "</svg>"]) + "\n"


def shed_svg_2d(fan: Fan, size: int = 400, title: str = "shed") -> str:
    if fan.dim != 2:
        raise FanError("shed_svg_2d needs a 2-dimensional fan")
    pts = [tuple(float(x) for x in r) for r in fan.rays]
    to_px = _frame(pts, size, 30)
    o = to_px((0.0, 0.0))
    body = []
    lo = [math.floor(min(p[k] for p in pts)) for k in (0, 1)]
    hi = [math.ceil(max(p[k] for p in pts)) for k in (0, 1)]
    for c in fan.cones:
        a, b = (to_px(pts[i]) for i in c)
        poly = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (o, a, b))
        body.append(f'<polygon points="{poly}" fill="#d6e4f0" stroke="none"/>')
    bends = wall_bends(fan)
    for c in fan.cones:
        a, b = (to_px(pts[i]) for i in c)
        body.append(f'<line x1="{_fmt(a[0])}" y1="{_fmt(a[1])}" x2="{_fmt(b[0])}" y2="{_fmt(b[1])}" {_EDGE_STYLE[CONVEX]}/>')
    for x in range(min(lo[0], 0), max(hi[0], 0) + 1):
        for y in range(min(lo[1], 0), max(hi[1], 0) + 1):
            px, py = to_px((x, y))
            body.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="1.5" fill="#999"/>')
    for i, p in enumerate(pts):
        px, py = to_px(p)
        colour = "#c0392b" if bends[(i,)] == CONCAVE else "#1f3b57"
        body.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="4" fill="{colour}"/>')
    body.append(f'<circle cx="{_fmt(o[0])}" cy="{_fmt(o[1])}" r="3" fill="black"/>')
    return _svg(size, body, title)


def _project(p: Sequence[float]) -> tuple[float, float, float]:
    """Oblique view: screen x, screen y and depth."""
    x, y, z = p
    ca, sa = math.cos(0.6), math.sin(0.6)
    cb, sb = math.cos(0.45), math.sin(0.45)
    x1, y1 = ca * x - sa * y, sa * x + ca * y
    y2, z2 = cb * y1 - sb * z, sb * y1 + cb * z
    return x1, z2, y2


def shed_svg_3d(fan: Fan, size: int = 480, title: str = "shed") -> str:
    """Roof triangles of the shed drawn back to front, walls styled by bend."""
    if fan.dim != 3:
        raise FanError("shed_svg_3d needs a 3-dimensional fan")
    proj = [_project([float(x) for x in r]) for r in fan.rays]
    to_px = _frame([(p[0], p[1]) for p in proj], size, 30)
    bends = wall_bends(fan)
    faces = sorted(fan.cones, key=lambda c: -sum(proj[i][2] for i in c) / 3)
    body = []
    for c in faces:
        poly = " ".join("{},{}".format(*map(_fmt, to_px(proj[i][:2]))) for i in c)
        body.append(f'<polygon points="{poly}" fill="#d6e4f0" fill-opacity="0.85" stroke="none"/>')
        for k in range(3):
            wall = tuple(sorted((c[k], c[(k + 1) % 3])))
            a, b = (to_px(proj[i][:2]) for i in wall)
            body.append(
                f'<line x1="{_fmt(a[0])}" y1="{_fmt(a[1])}" x2="{_fmt(b[0])}" y2="{_fmt(b[1])}" {_EDGE_STYLE[bends[wall]]}/>'
            )
    for p in proj:
        px, py = to_px(p[:2])
        body.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3" fill="#1f3b57"/>')
    ox, oy = to_px((0.0, 0.0))
    body.append(f'<circle cx="{_fmt(ox)}" cy="{_fmt(oy)}" r="3" fill="black"/>')
    return _svg(size, body, title)


def shed_off(fan: Fan) -> str:
    """OFF mesh of the shed boundary: one triangle per top cone, outward facing."""
    if fan.dim != 3:
        raise FanError("OFF meshes are only written for 3-dimensional fans")
    lines = ["OFF", f"{fan.n_rays} {len(fan.cones)} 0"]
    lines += [" ".join(map(str, r)) for r in fan.rays]
    for c in fan.cones:
        i, j, k = c
        if det([fan.rays[i], fan.rays[j], fan.rays[k]]) < 0:
            j, k = k, j
        lines.append(f"3 {i} {j} {k}")
    return "\n".join(lines) + "\n"


def shed_svg(fan: Fan, title: str = "shed") -> str:
    if fan.dim == 2:
        return shed_svg_2d(fan, title=title)
    if fan.dim == 3:
        return shed_svg_3d(fan, title=title)
    raise FanError(f"no shed picture for dimension {fan.dim}; only 2 and 3 are drawn")


def is_convex_shed(fan: Fan) -> bool:
    return all(b != CONCAVE for b in wall_bends(fan).values())


def bend_counts(fan: Fan) -> dict[str, int]:
    counts = {CONVEX: 0, FLAT: 0, CONCAVE: 0}
    for b in wall_bends(fan).values():
        counts[b] += 1
    return counts

