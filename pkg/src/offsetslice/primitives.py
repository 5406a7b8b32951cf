"""Analytic plane intersections of offset primitives.

Every dilated triangle decomposes into three vertex spheres, three edge
cylinders (conical capsules when the radius varies), and a center prism.
Each function returns the CCW convex cross-section of one primitive with a
horizontal plane, tessellated under a chord error, or None when the plane
misses the solid.
"""
from __future__ import annotations

import math

import numpy as np

from .contour import Contour, Segment2
from .mesh import IndexedMesh

R_MIN_CUT = 1e-6       # mm; cross-sections thinner than this emit nothing
THETA_MIN = 1e-4       # rad; below this inclination, cylinders use the strip form
MIN_CIRCLE_SEGMENTS = 8


def circle_segment_count(radius: float, eps: float) -> int:
    """Segments needed so an inscribed n-gon stays within eps of the circle."""
    if eps >= radius:
        return MIN_CIRCLE_SEGMENTS
    return max(MIN_CIRCLE_SEGMENTS, math.ceil(math.pi / math.acos(1.0 - eps / radius)))


_UNIT_NGON_CACHE: dict = {}


def _unit_ngon(n: int) -> np.ndarray:
    got = _UNIT_NGON_CACHE.get(n)
    if got is None:
        ang = 2.0 * math.pi * np.arange(n) / n
        got = _UNIT_NGON_CACHE[n] = np.column_stack([np.cos(ang), np.sin(ang)])
    return got


def tessellate_circle(cx: float, cy: float, radius: float, eps: float) -> np.ndarray:
    """Regular CCW n-gon inscribed in the circle, first vertex at angle 0."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    unit = _unit_ngon(circle_segment_count(radius, eps))
    out = unit * radius
    out[:, 0] += cx
    out[:, 1] += cy
    return out


def _emit(points, source, kind) -> Contour | None:
    c = Contour.make(points, source=source, kind=kind)
    if c is None:
        return None
    # incircle proxy: a convex polygon's inradius is at least area/perimeter
    pts = c.points
    seg = pts[1:] - pts[:-1]
    peri = float(np.sqrt((seg * seg).sum(axis=1)).sum()) + float(
        math.hypot(pts[0, 0] - pts[-1, 0], pts[0, 1] - pts[-1, 1])
    )
    if peri <= 0 or abs(c.area) / peri < R_MIN_CUT:
        return None
    return c


def slice_sphere(center, r: float, z: float, eps: float, source: int = -1):
    """Circle where plane z cuts the sphere, or None (tangency excluded)."""
    d = abs(z - center[2])
    if d >= r:
        return None
    rc = math.sqrt(r * r - d * d)
    if rc < R_MIN_CUT:
        return None
    return _emit(tessellate_circle(center[0], center[1], rc, eps), source, "sphere")


def slice_capped_cylinder(p0, p1, r: float, z: float, eps: float, source: int = -1):
    """Cross-section of the finite cylinder of radius r around segment p0-p1.

    Vertical axes yield circles; inclined axes yield ellipses clipped by the
    two cap half-planes (arcs tessellated in parameter space, closed with
    straight cap chords); near-horizontal axes use the stable strip form.
    """
    if p1[2] < p0[2]:
        p0, p1 = p1, p0
    ax, ay, az = p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]
    length = math.sqrt(ax * ax + ay * ay + az * az)
    if length < R_MIN_CUT:
        return None
    if z <= p0[2] - r or z >= p1[2] + r:
        return None
    axy = math.hypot(ax, ay)

    if axy / length < 1e-12:  # vertical axis
        if not (p0[2] <= z <= p1[2]):
            return None
        if r < R_MIN_CUT:
            return None
        return _emit(tessellate_circle(p0[0], p0[1], r, eps), source, "cylinder")

    sin_t = az / length
    ux, uy = ax / axy, ay / axy

    if sin_t < THETA_MIN:  # near-horizontal: strip clipped by caps
        d = abs(z - 0.5 * (p0[2] + p1[2]))
        if d >= r:
            return None
        h = math.sqrt(r * r - d * d)
        if h < R_MIN_CUT:
            return None
        nx, ny = -uy, ux
        rect = [
            (p0[0] - h * nx, p0[1] - h * ny),
            (p1[0] - h * nx, p1[1] - h * ny),
            (p1[0] + h * nx, p1[1] + h * ny),
            (p0[0] + h * nx, p0[1] + h * ny),
        ]
        return _emit(np.array(rect), source, "cylinder")

    # inclined: ellipse with semi-minor r and semi-major r / sin(theta)
    semi_a = r / sin_t
    t_axis = (z - p0[2]) / az
    ex = p0[0] + t_axis * ax
    ey = p0[1] + t_axis * ay
    s0 = t_axis * length           # axial coordinate of the ellipse center
    s1 = r * axy / az              # axial swing of the ellipse, >= 0
    c_lo = max(-1.0, -s0 / s1)
    c_hi = min(1.0, (length - s0) / s1)
    if c_lo > c_hi:
        return None
    phi_min = math.acos(c_hi)      # cos is decreasing: phi in [phi_min, phi_max]
    phi_max = math.acos(c_lo)

    if eps < semi_a:
        step = 2.0 * math.acos(1.0 - eps / semi_a)
    else:
        step = 2.0 * math.pi / MIN_CIRCLE_SEGMENTS

    def arc(a0, a1):
        n = max(2, math.ceil((a1 - a0) / step))
        return a0 + (a1 - a0) * np.arange(n + 1) / n

    vx, vy = -uy, ux
    if phi_min <= 0.0 and phi_max >= math.pi:
        n = max(MIN_CIRCLE_SEGMENTS, math.ceil(2.0 * math.pi / step))
        phi = 2.0 * math.pi * np.arange(n) / n
    else:
        upper = arc(phi_min, phi_max)
        lower = (2.0 * math.pi - upper)[::-1]
        phi = np.concatenate([upper, lower])  # cap chords close the gaps
    cosp, sinp = np.cos(phi), np.sin(phi)
    pts = np.column_stack([
        ex + semi_a * cosp * ux + r * sinp * vx,
        ey + semi_a * cosp * uy + r * sinp * vy,
    ])
    return _emit(pts, source, "cylinder")


_PRISM_EDGES = (
    (0, 1), (1, 2), (2, 0),      # top triangle
    (3, 4), (4, 5), (5, 3),      # bottom triangle
    (0, 3), (1, 4), (2, 5),      # lateral
)


def slice_convex_polytope(verts, z: float, source: int = -1, kind: str = "prism"):
    """Cross-section of a 6-vertex prism-topology polytope at height z.

    `verts` rows 0..2 are the top face, 3..5 the bottom face. A vertex lying
    exactly on the plane counts as above it.
    """
    verts = np.asarray(verts, dtype=np.float64)
    if not np.isfinite(verts).all():
        raise ValueError("non-finite polytope vertex")
    above = verts[:, 2] >= z
    pts = [tuple(v[:2]) for v in verts if v[2] == z]
    for i, j in _PRISM_EDGES:
        if above[i] == above[j]:
            continue
        vi, vj = verts[i], verts[j]
        t = (z - vi[2]) / (vj[2] - vi[2])
        pts.append((vi[0] + t * (vj[0] - vi[0]), vi[1] + t * (vj[1] - vi[1])))
    uniq = sorted(set(pts))
    if len(uniq) < 3:
        return None
    arr = np.array(uniq)
    cx, cy = arr.mean(axis=0)
    order = np.argsort(np.arctan2(arr[:, 1] - cy, arr[:, 0] - cx))
    return _emit(arr[order], source, kind)


def is_convex(points: np.ndarray, tol: float = 1e-9) -> bool:
    a = points
    b = np.roll(points, -1, axis=0)
    c = np.roll(points, -2, axis=0)
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (
        c[:, 0] - a[:, 0]
    )
    scale = max(1.0, float(np.abs(cross).max()))
    return bool((cross >= -tol * scale).all() or (cross <= tol * scale).all())


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew monotone chain, CCW without the closing point."""
    pts = np.unique(points, axis=0)
    if len(pts) <= 2:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax_, ay_ = out[-1]
                if (ax_ - ox) * (p[1] - oy) - (ay_ - oy) * (p[0] - ox) <= 0:
                    out.pop()
                else:
                    break
            out.append((p[0], p[1]))
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def slice_conical_capsule(
    p0, r0: float, p1, r1: float, z: float, eps: float, source: int = -1
):
    """Cross-section of the convex hull of balls B(p0, r0) and B(p1, r1).

    The radius varies linearly along the axis. Vertical axes reduce to a
    circle whose radius maximizes the interpolated ball family analytically;
    other axes take the convex hull of sampled ball cross-sections, sampled
    finely enough to keep the sampling deficit under eps/2.
    """
    if r0 < 0 or r1 < 0 or (r0 == 0 and r1 == 0):
        return None
    p0 = np.asarray(p0, dtype=np.float64)
    p1 = np.asarray(p1, dtype=np.float64)
    if z <= min(p0[2] - r0, p1[2] - r1) or z >= max(p0[2] + r0, p1[2] + r1):
        return None
    axis = p1 - p0
    axy = math.hypot(axis[0], axis[1])

    if axy < 1e-12:  # concentric circles: take the largest
        rr = _vertical_capsule_radius(p0[2], r0, p1[2], r1, z)
        if rr is None or rr < R_MIN_CUT:
            return None
        return _emit(tessellate_circle(p0[0], p0[1], rr, eps), source, "cone")

    samples = []
    _sample_capsule(p0, r0, p1, r1, 0.0, 1.0, z, eps, samples, depth=0)
    pts = []
    half_eps = 0.5 * eps
    for center, radius in samples:
        d = abs(z - center[2])
        if d >= radius:
            continue
        rc = math.sqrt(radius * radius - d * d)
        if rc < R_MIN_CUT:
            continue
        pts.append(tessellate_circle(center[0], center[1], rc, half_eps))
    if not pts:
        return None
    hull = _convex_hull(np.vstack(pts))
    if len(hull) < 3:
        return None
    return _emit(hull, source, "cone")


def _vertical_capsule_radius(z0, r0, z1, r1, z):
    """max over t in [0,1] of sqrt(r(t)^2 - (z - z(t))^2), None if negative."""
    dr, dz = r1 - r0, z1 - z0
    best = -math.inf
    # f(t) = (r0 + dr t)^2 - (z - z0 - dz t)^2, quadratic in t
    a = dr * dr - dz * dz
    b = 2.0 * (r0 * dr + (z - z0) * dz)
    cand = [0.0, 1.0]
    if a < 0 and abs(a) > 0:
        cand.append(min(1.0, max(0.0, -b / (2.0 * a))))
    for t in cand:
        f = (r0 + dr * t) ** 2 - (z - z0 - dz * t) ** 2
        best = max(best, f)
    if best <= 0:
        return None
    return math.sqrt(best)


def _sample_capsule(p0, r0, p1, r1, t0, t1, z, eps, out, depth):
    z_a = p0[2] + (p1[2] - p0[2]) * t0
    z_b = p0[2] + (p1[2] - p0[2]) * t1
    r_a = r0 + (r1 - r0) * t0
    r_b = r0 + (r1 - r0) * t1
    dz = abs(z_b - z_a)
    r_loc = max(min(r_a, r_b), eps)
    if depth >= 16 or dz * dz <= 4.0 * eps * r_loc:
        out.append((p0 + (p1 - p0) * t0, r_a))
        out.append((p0 + (p1 - p0) * t1, r_b))
        return
    tm = 0.5 * (t0 + t1)
    _sample_capsule(p0, r0, p1, r1, t0, tm, z, eps, out, depth + 1)
    _sample_capsule(p0, r0, p1, r1, tm, t1, z, eps, out, depth + 1)


def slice_triangle(mesh: IndexedMesh, tri_id: int, z: float) -> Segment2 | None:
    """Oriented segment where plane z crosses a triangle, solid to its left.

    A vertex exactly at z counts as above the plane; coplanar and non-crossing
    triangles yield nothing. Crossing points are evaluated on the welded edge
    with its canonical (low index -> high index) direction so that neighboring
    triangles reproduce bit-identical endpoints.
    """
    i0, i1, i2 = mesh.triangles[tri_id]
    v = mesh.vertices
    above = (v[i0, 2] >= z, v[i1, 2] >= z, v[i2, 2] >= z)
    if all(above) or not any(above):
        return None
    pts = []
    keys = []
    n_edges = mesh.n_edges
    for slot, (a, b) in enumerate(((0, 1), (1, 2), (2, 0))):
        if above[a] == above[b]:
            continue
        eid = int(mesh.tri_edges[tri_id, slot])
        lo, hi = mesh.edges[eid]
        pa, pb = v[lo], v[hi]
        # crossings landing exactly on a vertex are keyed by the vertex so
        # that loops passing through it chain across the whole triangle fan
        if z == pa[2]:
            pts.append((pa[0], pa[1]))
            keys.append(n_edges + int(lo))
        elif z == pb[2]:
            pts.append((pb[0], pb[1]))
            keys.append(n_edges + int(hi))
        else:
            t = (z - pa[2]) / (pb[2] - pa[2])
            pts.append((pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])))
            keys.append(eid)
    (ax_, ay_), (bx_, by_) = pts
    p0, p1, p2 = v[i0], v[i1], v[i2]
    e1x, e1y, e1z = p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]
    e2x, e2y, e2z = p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]
    nx = e1y * e2z - e1z * e2y
    ny = e1z * e2x - e1x * e2z
    # solid-left direction is z-hat x n projected to the plane
    d = (bx_ - ax_) * (-ny) + (by_ - ay_) * nx
    if d == 0.0:
        return None
    if d < 0:
        (ax_, ay_), (bx_, by_) = (bx_, by_), (ax_, ay_)
        keys.reverse()
    return Segment2(ax_, ay_, bx_, by_, keys[0], keys[1], int(tri_id))
