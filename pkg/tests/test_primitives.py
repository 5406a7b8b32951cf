import math

import numpy as np
import pytest
from shapely.geometry import Point, Polygon

from offsetslice.mesh import mesh_from_soup
from offsetslice.primitives import (
    circle_segment_count,
    is_convex,
    slice_capped_cylinder,
    slice_conical_capsule,
    slice_convex_polytope,
    slice_sphere,
    slice_triangle,
    tessellate_circle,
)

from . import oracles
from .meshes import tetra_soup


def brute_segment_count(radius, eps):
    n = 8
    while radius * (1.0 - math.cos(math.pi / n)) > eps:
        n += 1
    return n


def test_circle_segment_count_examples():
    # independently recomputed: smallest n >= 8 with sag r*(1-cos(pi/n)) <= eps
    assert brute_segment_count(1.0, 0.01) == 23
    assert circle_segment_count(1.0, 0.01) == 23
    assert circle_segment_count(1.0, 10.0) == 8
    for radius, eps in [(0.5, 0.02), (2.0, 0.001), (10.0, 0.05)]:
        assert circle_segment_count(radius, eps) == brute_segment_count(radius, eps)


def test_circle_sag_bound():
    rng = np.random.RandomState(7)
    for _ in range(50):
        radius = float(rng.uniform(0.01, 20.0))
        eps = float(rng.uniform(1e-4, 0.5))
        pts = tessellate_circle(0.0, 0.0, radius, eps)
        mids = 0.5 * (pts + np.roll(pts, -1, axis=0))
        sag = radius - np.linalg.norm(mids, axis=1)
        assert sag.max() <= eps + 1e-12
        # vertices lie exactly on the circle
        assert np.allclose(np.linalg.norm(pts, axis=1), radius)


def test_circle_orientation_and_start():
    pts = tessellate_circle(2.0, -1.0, 1.5, 0.01)
    assert pts[0] == pytest.approx((3.5, -1.0))
    nxt = np.roll(pts, -1, axis=0)
    area = 0.5 * (pts[:, 0] * nxt[:, 1] - pts[:, 1] * nxt[:, 0]).sum()
    assert area > 0


def test_slice_sphere_cases():
    c = slice_sphere((0.0, 0.0, 0.0), 1.0, 0.0, 0.005)
    assert np.allclose(np.linalg.norm(c.points, axis=1), 1.0)
    c = slice_sphere((0.0, 0.0, 0.0), 1.0, 0.6, 0.005)
    assert np.allclose(np.linalg.norm(c.points, axis=1), 0.8)
    assert slice_sphere((0.0, 0.0, 0.0), 1.0, 1.0, 0.005) is None
    assert slice_sphere((0.0, 0.0, 0.0), 1.0, -1.5, 0.005) is None
    # sub-cutoff circle suppressed
    z = 1.0 - 1e-14
    assert slice_sphere((0.0, 0.0, 0.0), 1.0, z, 0.005) is None


def test_cylinder_vertical():
    c = slice_capped_cylinder((0, 0, 0), (0, 0, 2), 0.5, 1.0, 0.005)
    assert np.allclose(np.linalg.norm(c.points, axis=1), 0.5)
    assert slice_capped_cylinder((0, 0, 0), (0, 0, 2), 0.5, 2.6, 0.005) is None
    assert slice_capped_cylinder((0, 0, 0), (0, 0, 2), 0.5, -0.1, 0.005) is None


def test_cylinder_horizontal_strip():
    c = slice_capped_cylinder((0, 0, 0), (3, 0, 0), 1.0, 0.0, 0.005)
    got = sorted(map(tuple, np.round(c.points, 9)))
    assert got == [(0.0, -1.0), (0.0, 1.0), (3.0, -1.0), (3.0, 1.0)]
    assert c.area > 0


def test_cylinder_45_degree_full_ellipse():
    c = slice_capped_cylinder((0, 0, 0), (2, 0, 2), 0.5, 1.0, 0.002)
    pts = c.points - np.array([1.0, 0.0])
    a = 0.5 * math.sqrt(2.0)
    # every vertex on the ellipse x^2/a^2 + y^2/r^2 = 1
    assert np.allclose((pts[:, 0] / a) ** 2 + (pts[:, 1] / 0.5) ** 2, 1.0, atol=1e-9)
    assert np.isclose(pts[:, 0].max(), a, atol=0.005)
    assert np.isclose(pts[:, 1].max(), 0.5, atol=0.005)


def test_cylinder_membership_oracle():
    rng = np.random.RandomState(11)
    eps = 0.01
    for _ in range(40):
        p0 = rng.uniform(-1, 1, 3)
        p1 = rng.uniform(-1, 1, 3)
        if np.linalg.norm(p1 - p0) < 0.2:
            continue
        r = float(rng.uniform(0.1, 0.8))
        z = float(rng.uniform(min(p0[2], p1[2]) - r, max(p0[2], p1[2]) + r))
        c = slice_capped_cylinder(p0, p1, r, z, eps)
        axis = p1 - p0
        length = np.linalg.norm(axis)
        ahat = axis / length

        def in_solid(q2, slack):
            q = np.array([q2[0], q2[1], z])
            s = float((q - p0) @ ahat)
            radial = np.linalg.norm((q - p0) - s * ahat)
            return radial <= r + slack and -slack <= s <= length + slack

        if c is None:
            continue
        poly = Polygon(c.points)
        assert poly.is_valid and is_convex(c.points)
        for q2 in rng.uniform(-2, 2, size=(60, 2)):
            if poly.contains(Point(q2)):
                assert in_solid(q2, 1e-7)
            else:
                # interior misses are confined to the chord-sag band
                q = np.array([q2[0], q2[1], z])
                s = float((q - p0) @ ahat)
                radial = np.linalg.norm((q - p0) - s * ahat)
                deep = radial <= r - eps and 1e-6 <= s <= length - 1e-6
                assert not deep


def test_polytope_horizontal_prism():
    tri = np.array([(0, 0, 0), (1, 0, 0), (0, 1, 0)], dtype=np.float64)
    verts = np.vstack([tri + [0, 0, 0.5], tri - [0, 0, 0.5]])
    c = slice_convex_polytope(verts, 0.0)
    got = sorted(map(tuple, np.round(c.points, 9)))
    assert got == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]
    assert slice_convex_polytope(verts, 0.6) is None


def test_polytope_vertical_triangle_quad():
    tri = np.array([(0, 0, 0), (1, 0, 0), (0, 0, 1)], dtype=np.float64)
    n = np.array([0.0, -1.0, 0.0])
    verts = np.vstack([tri + 0.5 * n, tri - 0.5 * n])
    c = slice_convex_polytope(verts, 0.5)
    got = sorted(map(tuple, np.round(c.points, 9)))
    assert got == [(0.0, -0.5), (0.0, 0.5), (0.5, -0.5), (0.5, 0.5)]


def test_polytope_vertex_on_plane_included():
    tri = np.array([(0, 0, 0), (1, 0, 0), (0, 1, 0)], dtype=np.float64)
    verts = np.vstack([tri + [0, 0, 0.5], tri - [0, 0, 0.5]])
    c = slice_convex_polytope(verts, 0.5)  # plane through the top face
    got = sorted(map(tuple, np.round(c.points, 9)))
    assert got == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]


def _clip_halfplane(poly, g, c):
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        dp = g @ p - c
        dq = g @ q - c
        if dp <= 1e-12:
            out.append(p)
        if (dp < -1e-12 and dq > 1e-12) or (dp > 1e-12 and dq < -1e-12):
            t = dp / (dp - dq)
            out.append(p + t * (q - p))
    return out


def _prism_halfspace_slice(tri, r, z):
    """Independent oracle: clip a big square by the prism's half-spaces."""
    n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    n = n / np.linalg.norm(n)
    centroid = tri.mean(axis=0)
    halfspaces = [(n, n @ (tri[0] + r * n)), (-n, -n @ (tri[0] - r * n))]
    for i in range(3):
        a, b = tri[i], tri[(i + 1) % 3]
        g = np.cross(b - a, n)
        g = g / np.linalg.norm(g)
        if g @ (centroid - a) > 0:
            g = -g
        halfspaces.append((g, g @ a))
    poly = [np.array(p, dtype=np.float64) for p in
            [(-99, -99), (99, -99), (99, 99), (-99, 99)]]
    for g, c in halfspaces:
        g2 = g[:2]
        cc = c - g[2] * z
        poly = _clip_halfplane([np.asarray(p)[:2] for p in poly], g2, cc)
        if len(poly) < 3:
            return []
    return [np.asarray(p) for p in poly]


def test_polytope_matches_halfspace_oracle():
    rng = np.random.RandomState(3)
    for _ in range(120):
        tri = rng.uniform(-1, 1, (3, 3))
        n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        if np.linalg.norm(n) < 0.1:
            continue
        nh = n / np.linalg.norm(n)
        r = float(rng.uniform(0.05, 0.6))
        verts = np.vstack([tri + r * nh, tri - r * nh])
        z = float(rng.uniform(verts[:, 2].min() - 0.05, verts[:, 2].max() + 0.05))
        got = slice_convex_polytope(verts, z)
        want = _prism_halfspace_slice(tri, r, z)
        if got is None:
            if want:
                area = abs(Polygon(want).area) if len(want) >= 3 else 0.0
                assert area < 1e-6  # sliver below the emit cutoff
            continue
        assert len(want) >= 3
        got_set = sorted(map(tuple, np.round(got.points, 8)))
        want_set = sorted(map(tuple, np.round(np.array(want), 8)))
        assert len(got_set) == len(want_set)
        for g, w in zip(got_set, want_set):
            assert g == pytest.approx(w, abs=1e-9)


def test_capsule_vertical_constant_radius():
    c = slice_conical_capsule((0, 0, 0), 1.0, (0, 0, 2), 1.0, 1.0, 0.005)
    assert np.allclose(np.linalg.norm(c.points, axis=1), 1.0)
    c = slice_conical_capsule((0, 0, 0), 1.0, (0, 0, 2), 1.0, 2.5, 0.005)
    assert np.allclose(np.linalg.norm(c.points, axis=1), math.sqrt(0.75))


def test_capsule_tangent_cone():
    # apex at origin, ball radius 1 at z=2: tangent cone half-angle asin(1/2)
    c = slice_conical_capsule((0, 0, 0), 0.0, (0, 0, 2), 1.0, 1.0, 0.005)
    want = math.tan(math.asin(0.5))
    radii = np.linalg.norm(c.points, axis=1)
    assert np.allclose(radii, want, atol=1e-9)
    # cross-check against the sampled-ball membership oracle
    p3 = np.column_stack([c.points, np.full(len(c.points), 1.0)])
    d = oracles.capsule_distance(p3, (0, 0, 0), 0.0, (0, 0, 2), 1.0)
    assert (d <= 1e-6).all() and (d >= -0.01).all()


def test_capsule_oblique_membership():
    rng = np.random.RandomState(23)
    eps = 0.01
    for _ in range(25):
        p0 = rng.uniform(-1, 1, 3)
        p1 = rng.uniform(-1, 1, 3)
        r0 = float(rng.uniform(0.0, 0.6))
        r1 = float(rng.uniform(0.1, 0.8))
        zmin = min(p0[2] - r0, p1[2] - r1)
        zmax = max(p0[2] + r0, p1[2] + r1)
        z = float(rng.uniform(zmin, zmax))
        c = slice_conical_capsule(p0, r0, p1, r1, z, eps)
        if c is None:
            continue
        poly = Polygon(c.points)
        assert poly.is_valid
        # vertices on or just inside the true capsule boundary
        p3 = np.column_stack([c.points, np.full(len(c.points), z)])
        d = oracles.capsule_distance(p3, p0, r0, p1, r1)
        assert (d <= 1e-6).all()
        assert (d >= -1.5 * eps - 1e-6).all()
        # deep interior points are covered
        for q2 in rng.uniform(-2, 2, size=(40, 2)):
            dq = oracles.capsule_distance(
                np.array([[q2[0], q2[1], z]]), p0, r0, p1, r1
            )[0]
            if dq <= -(1.5 * eps + 1e-4):
                assert poly.contains(Point(q2))


def test_slice_area_continuous_in_z():
    # away from caps and tangencies, slice area varies smoothly with z
    zs = np.linspace(-0.9, 0.9, 61)
    areas = []
    for z in zs:
        c = slice_sphere((0.0, 0.0, 0.0), 1.0, float(z), 0.002)
        areas.append(abs(c.area))
    jumps = np.abs(np.diff(areas))
    assert jumps.max() < 0.2  # d(area)/dz bounded off the poles

    zs = np.linspace(0.35, 1.65, 41)
    areas = []
    for z in zs:
        c = slice_capped_cylinder((0, 0, 0), (1, 0.2, 2), 0.3, float(z), 0.002)
        areas.append(abs(c.area))
    assert np.abs(np.diff(areas)).max() < 0.05


def test_slice_triangle_example():
    soup = np.array([[(0, 0, -1), (1, 0, -1), (0, 0, 1)]], dtype=np.float64)
    mesh = mesh_from_soup(soup)
    seg = slice_triangle(mesh, 0, 0.0)
    assert (seg.ax, seg.ay) == pytest.approx((0.0, 0.0))
    assert (seg.bx, seg.by) == pytest.approx((0.5, 0.0))


def test_slice_triangle_away_and_coplanar():
    soup = np.array(
        [
            [(0, 0, 2), (1, 0, 2), (0, 1, 2)],
            [(0, 0, 0), (1, 0, 0), (0, 1, 0)],
        ],
        dtype=np.float64,
    )
    mesh = mesh_from_soup(soup)
    assert slice_triangle(mesh, 0, 0.0) is None      # entirely above
    assert slice_triangle(mesh, 1, 0.0) is None      # coplanar: all at z counts above


def test_slice_triangle_orientation_via_solid_oracle():
    soup = tetra_soup()
    mesh = mesh_from_soup(soup)
    for z in (0.25, 0.5, 0.75):
        for t in range(mesh.n_triangles):
            seg = slice_triangle(mesh, t, z)
            if seg is None:
                continue
            mx, my = 0.5 * (seg.ax + seg.bx), 0.5 * (seg.ay + seg.by)
            dx, dy = seg.bx - seg.ax, seg.by - seg.ay
            ln = math.hypot(dx, dy)
            probe = np.array([mx - dy / ln * 1e-3, my + dx / ln * 1e-3, z])
            assert oracles.points_inside(probe, soup)[0]
