"""Oriented 2D contours, winding-number extraction, and rasterization.

Contours are closed polylines whose orientation encodes solidity: positive
signed area (CCW) adds solid, negative (CW) carves it away. The solid region
of a contour set is { q : winding(q) > 0 }. Extraction is backed by GEOS
polygon booleans behind that winding semantics; after any boolean pass all
coordinates are snapped to a fixed grid so results are reproducible across
worker counts, slab sizes, and accumulation strategies.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import shapely
from shapely.geometry import LineString, MultiPolygon, Point, Polygon
from shapely.geometry.polygon import orient
from shapely.ops import polygonize, unary_union

SNAP_GRID = 1e-7     # mm; boolean inputs/outputs are quantized to this grid
_SCALE = 1.0 / SNAP_GRID
MIN_RING_AREA = 1e-12  # mm^2; rings at or below this are dropped as noise

_KIND_RANK = {"base": 0, "final": 1, "sphere": 2, "cylinder": 3, "cone": 4, "prism": 5}


class ChainError(ValueError):
    """Base-contour chaining failed: the mesh is open at this height."""

    def __init__(self, dangling):
        self.dangling = list(dangling)
        preview = ", ".join(
            f"edge {eid} at ({x:.6f}, {y:.6f})" for x, y, eid in self.dangling[:4]
        )
        more = "" if len(self.dangling) <= 4 else f", +{len(self.dangling) - 4} more"
        super().__init__(f"{len(self.dangling)} dangling endpoints: {preview}{more}")


@dataclass(frozen=True)
class Segment2:
    """Oriented slice segment; solid lies to its left in the slice plane."""

    ax: float
    ay: float
    bx: float
    by: float
    key_a: int   # welded edge id carrying the start point
    key_b: int
    source: int  # triangle id


@dataclass
class Contour:
    """Closed oriented polyline. `points` stores each vertex once."""

    points: np.ndarray            # (n, 2) float64, first point not repeated
    source: int = -1              # triangle id, -1 for base/final contours
    kind: str = "final"
    area: float = field(default=None)  # signed; cached at construction

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.area is None:
            self.area = signed_area(self.points)

    @classmethod
    def make(cls, points, source=-1, kind="final"):
        """Build a contour, or None when the ring is degenerate."""
        pts = _dedupe_closed(np.asarray(points, dtype=np.float64))
        if len(pts) < 3:
            return None
        area = signed_area(pts)
        if abs(area) <= MIN_RING_AREA:
            return None
        return cls(pts, source=source, kind=kind, area=area)

    def reversed(self) -> "Contour":
        return Contour(self.points[::-1].copy(), self.source, self.kind, -self.area)

    def sort_key(self):
        first = self.points[0]
        return (
            self.source,
            _KIND_RANK.get(self.kind, 9),
            float(first[0]),
            float(first[1]),
            self.points.tobytes(),
        )


@dataclass
class ContourSet:
    """Contours of one slicing plane."""

    z: float
    contours: list = field(default_factory=list)

    def sorted(self) -> "ContourSet":
        return ContourSet(self.z, sorted(self.contours, key=Contour.sort_key))

    def net_area(self) -> float:
        return float(sum(c.area for c in self.contours))

    def __len__(self):
        return len(self.contours)


def signed_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    wrap = x[-1] * y[0] - y[-1] * x[0]
    return 0.5 * (float(np.dot(x[:-1], y[1:]) - np.dot(y[:-1], x[1:])) + float(wrap))


def snap_points(points: np.ndarray) -> np.ndarray:
    return np.round(np.asarray(points, dtype=np.float64) * _SCALE) / _SCALE


def _dedupe_closed(pts: np.ndarray) -> np.ndarray:
    if len(pts) and (pts[0] == pts[-1]).all():
        pts = pts[:-1]
    if len(pts) < 2:
        return pts
    keep = np.empty(len(pts), dtype=bool)
    keep[1:] = (pts[1:] != pts[:-1]).any(axis=1)
    keep[0] = bool((pts[0] != pts[-1]).any())
    return pts[keep]


# ---------------------------------------------------------------------------
# Base-contour chaining


def segments_to_contours(segments, z: float) -> ContourSet:
    """Chain oriented slice segments into closed base contours.

    Endpoints are matched by welded-edge identity, never by coordinate
    proximity, so watertight meshes chain exactly. Raises ChainError listing
    dangling endpoints when a chain stays open.
    """
    segs = sorted(segments, key=lambda s: (s.source, s.key_a, s.key_b))
    by_start: dict[int, list[int]] = {}
    for i, s in enumerate(segs):
        by_start.setdefault(s.key_a, []).append(i)
    used = [False] * len(segs)
    contours = []
    dangling = []

    def _next_from(key):
        for j in by_start.get(key, ()):  # FIFO over the sorted order
            if not used[j]:
                return j
        return None

    for i, seg in enumerate(segs):
        if used[i]:
            continue
        loop = [i]
        used[i] = True
        cur = seg
        while cur.key_b != seg.key_a:
            j = _next_from(cur.key_b)
            if j is None:
                dangling.append((cur.bx, cur.by, cur.key_b))
                loop = None
                break
            used[j] = True
            loop.append(j)
            cur = segs[j]
        if loop is None:
            continue
        pts = np.array([(segs[j].ax, segs[j].ay) for j in loop])
        c = Contour.make(pts, source=-1, kind="base")
        if c is not None:
            contours.append(c)
    if dangling:
        raise ChainError(dangling)
    return ContourSet(z, contours)


# ---------------------------------------------------------------------------
# Winding extraction (GEOS-backed)


def _degenerate_ring(pts: np.ndarray, area: float) -> bool:
    """True for rings that cannot enclose area: collinear or microscopic.

    Zero-signed-area rings that are NOT collinear (e.g. balanced bowties)
    still carry winding and are kept.
    """
    if abs(area) > MIN_RING_AREA:
        return False
    ints = np.round(pts * _SCALE).astype(np.int64)
    x0, y0 = int(ints[0, 0]), int(ints[0, 1])
    dx, dy = int(ints[1, 0]) - x0, int(ints[1, 1]) - y0
    collinear = all(
        dx * (int(y) - y0) == dy * (int(x) - x0) for x, y in ints[2:]
    )
    if collinear:
        return True
    span = pts.max(axis=0) - pts.min(axis=0)
    return bool(span.max() <= 1e-5)


def _prepare(contours) -> list:
    """Snap to grid, drop degenerate rings, and apply the canonical order."""
    out = []
    for c in contours:
        pts = _dedupe_closed(snap_points(c.points))
        if len(pts) < 3:
            continue
        area = signed_area(pts)
        if _degenerate_ring(pts, area):
            continue
        out.append(Contour(pts, source=c.source, kind=c.kind, area=area))
    out.sort(key=Contour.sort_key)
    return out


def _ring_polygon(c: Contour) -> Polygon:
    return Polygon(c.points)


def _assemble_family(finals) -> list:
    """Rebuild polygons-with-holes from a normalized (non-crossing) family.

    Returns None when a hole cannot be paired with a containing shell, i.e.
    the rings do not actually form a normalized family.
    """
    shells = [c for c in finals if c.area > 0]
    holes = [c for c in finals if c.area < 0]
    if not holes:
        return [_ring_polygon(c) for c in shells]
    shell_polys = [_ring_polygon(c) for c in shells]
    assigned: list[list] = [[] for _ in shells]
    for h in holes:
        probe = Point(h.points[0])
        best, best_area = None, None
        for i, sp in enumerate(shell_polys):
            if sp.contains(probe) and (best is None or shells[i].area < best_area):
                best, best_area = i, shells[i].area
        if best is None:
            return None
        assigned[best].append(h.points)
    return [
        Polygon(shells[i].points, holes=assigned[i]) for i in range(len(shells))
    ]


def _winding_numbers(points: np.ndarray, e0: np.ndarray, e1: np.ndarray) -> np.ndarray:
    """Winding number of each query point w.r.t. a directed edge soup."""
    qx = points[:, 0][:, None]
    qy = points[:, 1][:, None]
    y0, y1 = e0[None, :, 1], e1[None, :, 1]
    x0, x1 = e0[None, :, 0], e1[None, :, 0]
    up = (y0 <= qy) & (y1 > qy)
    dn = (y1 <= qy) & (y0 > qy)
    any_cross = up | dn
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(any_cross, (qy - y0) / (y1 - y0), 0.0)
    xc = x0 + t * (x1 - x0)
    right = xc > qx
    up_hits = (up & right).sum(axis=1)
    dn_hits = (dn & right).sum(axis=1)
    return up_hits - dn_hits


def _directed_edges(contours):
    p0 = np.vstack([c.points for c in contours])
    p1 = np.vstack([np.roll(c.points, -1, axis=0) for c in contours])
    return p0, p1


def _arrangement_region(contours):
    """Exact positive-winding region of arbitrarily oriented, possibly
    self-intersecting rings: node everything, classify each arrangement face
    by its winding number, keep faces with winding > 0."""
    lines = [LineString(np.vstack([c.points, c.points[:1]])) for c in contours]
    merged = unary_union(lines)
    faces = list(polygonize(merged))
    if not faces:
        return None
    reps = np.array([[p.x, p.y] for p in (f.representative_point() for f in faces)])
    e0, e1 = _directed_edges(contours)
    # classify in chunks to bound the faces x edges matrix
    keep = []
    chunk = max(1, int(4e6 / max(1, len(e0))))
    for lo in range(0, len(reps), chunk):
        keep.append(_winding_numbers(reps[lo:lo + chunk], e0, e1) > 0)
    mask = np.concatenate(keep)
    kept = [f for f, m in zip(faces, mask) if m]
    if not kept:
        return None
    return unary_union(kept)


def region_from_contours(contours, convex_fast: bool = False):
    """GEOS region equal to { winding > 0 } for a prepared contour list.

    Fast path: inputs that are positive rings plus already-normalized 'final'
    families reduce exactly to a polygon union. Anything else (negative
    non-final rings, invalid rings) goes through the general arrangement.
    """
    if not contours:
        return None
    finals = [c for c in contours if c.kind == "final"]
    others = [c for c in contours if c.kind != "final"]
    if all(c.area > 0 for c in others):
        polys = _bulk_polygons(others)
        if convex_fast or polys is None or bool(shapely.is_valid(polys).all()):
            family = _assemble_family(finals)
            if family is not None:
                geoms = list(polys) if polys is not None else []
                geoms.extend(family)
                if not geoms:
                    return None
                return unary_union(geoms)
    return _arrangement_region(contours)


def _bulk_polygons(contours):
    """Hole-free polygons from rings in one vectorized construction pass."""
    if not contours:
        return None
    coords = np.concatenate([c.points for c in contours])
    idx = np.repeat(
        np.arange(len(contours)), [len(c.points) for c in contours]
    )
    return shapely.polygons(shapely.linearrings(coords, indices=idx))


def _region_polygons(region) -> list:
    if region is None or region.is_empty:
        return []
    if isinstance(region, Polygon):
        return [region]
    if isinstance(region, MultiPolygon):
        return list(region.geoms)
    return [g for g in getattr(region, "geoms", []) if isinstance(g, Polygon)]


def _corner_mask(ints: np.ndarray) -> np.ndarray:
    """Exact nonzero test of the turn cross product at each ring vertex."""
    prev = np.roll(ints, 1, axis=0)
    nxt = np.roll(ints, -1, axis=0)
    a = ints - prev
    b = nxt - prev
    if max(np.abs(a).max(initial=0), np.abs(b).max(initial=0)) < 2**31:
        return (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]) != 0
    # edges longer than ~200 m of grid units: exact big-int fallback
    return np.array(
        [
            int(ax) * int(by) - int(ay) * int(bx) != 0
            for (ax, ay), (bx, by) in zip(a.tolist(), b.tolist())
        ],
        dtype=bool,
    )


def _canonical_ring(coords: np.ndarray):
    """Snap a ring to the grid, strip exactly-collinear vertices (integer
    arithmetic, hence path-independent), and rotate to the lexicographic
    minimum starting vertex."""
    ints = np.round(np.asarray(coords, dtype=np.float64)[:, :2] * _SCALE).astype(np.int64)
    if len(ints) and (ints[0] == ints[-1]).all():
        ints = ints[:-1]
    while True:
        if len(ints) < 3:
            return None
        keep = (ints != np.roll(ints, 1, axis=0)).any(axis=1)
        ints = ints[keep]
        if len(ints) < 3:
            return None
        corner = _corner_mask(ints)
        if corner.all():
            break
        ints = ints[corner]
    start = np.lexsort((ints[:, 1], ints[:, 0]))[0]
    ints = np.roll(ints, -start, axis=0)
    return ints.astype(np.float64) / _SCALE


def region_to_contours(region) -> list:
    """Canonical snapped contour list of a GEOS region: CCW outers, CW holes."""
    out = []
    for poly in _region_polygons(region):
        poly = orient(poly, 1.0)
        for ring, want_ccw in [(poly.exterior, True)] + [
            (r, False) for r in poly.interiors
        ]:
            pts = _canonical_ring(np.asarray(ring.coords))
            if pts is None:
                continue
            area = signed_area(pts)
            if abs(area) <= MIN_RING_AREA:
                continue
            if (area > 0) != want_ccw:
                pts = np.roll(pts[::-1], 1, axis=0)  # keep canonical start vertex
                area = -area
            out.append(Contour(pts, source=-1, kind="final", area=area))
    out.sort(key=Contour.sort_key)
    return out


def winding_extract(cs: ContourSet, convex_fast: bool = False) -> ContourSet:
    """Boundary of { q : winding(q) > 0 } as CCW outers plus CW holes."""
    items = _prepare(cs.contours)
    region = region_from_contours(items, convex_fast=convex_fast)
    return ContourSet(cs.z, region_to_contours(region))


def reverse_contours(cs: ContourSet) -> ContourSet:
    """Flip every contour's orientation (signed areas negate)."""
    return ContourSet(cs.z, [c.reversed() for c in cs.contours])


# ---------------------------------------------------------------------------
# Accumulation strategies

DEFAULT_PROGRESSIVE_K = 256
DEFAULT_DIVIDE_LEAF = 64


def _collapse(region, batch, convex_fast):
    if not batch:
        return region
    if all(c.area > 0 and c.kind != "final" for c in batch):
        polys = _bulk_polygons(batch)
        if convex_fast or bool(shapely.is_valid(polys).all()):
            geoms = list(polys)
            if region is not None:
                geoms.append(region)
            return unary_union(geoms)
    return _collapse_general(region, batch)


def _collapse_general(region, batch):
    partial = region_to_contours(region)
    return region_from_contours(_prepare(partial + list(batch)))


def progressive_region(contours, k: int, convex_fast: bool = False):
    if k < 2:
        raise ValueError("progressive batch size must be >= 2")
    region = None
    buf = []
    for c in contours:
        buf.append(c)
        if len(buf) >= k:
            region = _collapse(region, buf, convex_fast)
            buf = []
    return _collapse(region, buf, convex_fast)


def divide_conquer_region(contours, leaf: int, convex_fast: bool = False):
    if leaf < 2:
        raise ValueError("divide-and-conquer leaf size must be >= 2")
    items = list(contours)
    if not items:
        return None
    if len(items) <= leaf:
        return region_from_contours(items, convex_fast=convex_fast)
    mid = len(items) // 2
    left = divide_conquer_region(items[:mid], leaf, convex_fast)
    right = divide_conquer_region(items[mid:], leaf, convex_fast)
    if left is None:
        return right
    if right is None:
        return left
    return unary_union([left, right])


def accumulate_progressive(
    contours, k: int = DEFAULT_PROGRESSIVE_K, z: float = 0.0
) -> ContourSet:
    """Extraction equal to winding_extract over all inputs, collapsing the
    partial solid each time k contours accumulate. Partial solids re-enter as
    unit-winding regions, exact for non-negative-winding input streams."""
    items = _prepare(contours)
    region = progressive_region(items, k)
    return ContourSet(z, region_to_contours(region))


def accumulate_divide_conquer(
    contours, leaf: int = DEFAULT_DIVIDE_LEAF, z: float = 0.0
) -> ContourSet:
    """Same contract as accumulate_progressive via recursive half-splits."""
    items = _prepare(contours)
    region = divide_conquer_region(items, leaf)
    return ContourSet(z, region_to_contours(region))


# ---------------------------------------------------------------------------
# Software rasterizer (positive winding rule)


@dataclass(frozen=True)
class BitmapSpec:
    width: int
    height: int
    x0: float
    y0: float
    pitch: float


@dataclass
class Bitmap:
    spec: BitmapSpec
    pixels: np.ndarray  # (height, width) bool

    def count(self) -> int:
        return int(self.pixels.sum())


def rasterize_winding(cs: ContourSet, spec: BitmapSpec) -> Bitmap:
    """Scanline fill: a pixel is set iff winding(center) > 0. No antialiasing."""
    if spec.width <= 0 or spec.height <= 0:
        raise ValueError("bitmap must have positive size")
    if spec.pitch <= 0:
        raise ValueError("pixel pitch must be positive")
    pixels = np.zeros((spec.height, spec.width), dtype=bool)
    if not cs.contours:
        return Bitmap(spec, pixels)
    e0, e1 = _directed_edges(cs.contours)
    x0, y0 = e0[:, 0], e0[:, 1]
    x1, y1 = e1[:, 0], e1[:, 1]
    xc = spec.x0 + (np.arange(spec.width) + 0.5) * spec.pitch
    for row in range(spec.height):
        yc = spec.y0 + (row + 0.5) * spec.pitch
        up = (y0 <= yc) & (y1 > yc)
        dn = (y1 <= yc) & (y0 > yc)
        sel = up | dn
        if not sel.any():
            continue
        t = (yc - y0[sel]) / (y1[sel] - y0[sel])
        xs = x0[sel] + t * (x1[sel] - x0[sel])
        sg = np.where(up[sel], 1, -1)
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        suffix = np.concatenate([np.cumsum(sg[order][::-1])[::-1], [0]])
        winding = suffix[np.searchsorted(xs_sorted, xc, side="right")]
        pixels[row] = winding > 0
    return Bitmap(spec, pixels)
