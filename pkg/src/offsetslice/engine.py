"""Slicing engine for dilated, eroded, and variable-offset volumes.

Per slab of consecutive slices, workers visit candidate triangles and emit
base slice segments plus the cross-sections of each owned offset primitive
(one sphere per welded vertex, one cylinder or conical capsule per unique
edge, one prism per non-degenerate triangle). Each slice is then contoured
independently: base segments chain and normalize to a unit-winding region,
primitive contours accumulate into a solid, and the final region is their
union (dilation) or difference (erosion). Results are independent of worker
count, slab size, and work order: every contour list is canonically sorted
before any boolean runs.
"""
from __future__ import annotations

import math
import multiprocessing as mp
from dataclasses import dataclass, field

import numpy as np

from . import contour as ct
from . import primitives as pr
from .mesh import IndexedMesh, ZInterval


@dataclass(frozen=True, eq=False)
class SlicePlan:
    """Ordered slicing plane heights, uniform-thickness or explicit."""

    heights: np.ndarray
    z0: float | None = None
    tau: float | None = None

    @classmethod
    def uniform(cls, z0: float, tau: float, count: int) -> "SlicePlan":
        if tau <= 0:
            raise ValueError("slice thickness must be positive")
        if count < 1:
            raise ValueError("a plan needs at least one height")
        return cls(z0 + tau * np.arange(count, dtype=np.float64), z0=z0, tau=tau)

    @classmethod
    def explicit(cls, heights) -> "SlicePlan":
        h = np.asarray(heights, dtype=np.float64)
        if h.ndim != 1 or len(h) == 0:
            raise ValueError("height list must be non-empty")
        if len(h) > 1 and not (np.diff(h) > 0).all():
            raise ValueError("heights must be strictly increasing")
        return cls(h)

    def __len__(self):
        return len(self.heights)


@dataclass(frozen=True)
class OffsetSpec:
    """Offset mode and radius: uniform dilate/erode or per-vertex variable."""

    mode: str                      # dilate | erode | variable
    r: float = 0.0
    radii: np.ndarray | None = None

    @classmethod
    def dilate(cls, r: float) -> "OffsetSpec":
        return cls("dilate", r=float(r))

    @classmethod
    def erode(cls, r: float) -> "OffsetSpec":
        return cls("erode", r=float(r))

    @classmethod
    def variable(cls, radii) -> "OffsetSpec":
        return cls("variable", radii=np.asarray(radii, dtype=np.float64))

    def validate(self, mesh: IndexedMesh):
        if self.mode not in ("dilate", "erode", "variable"):
            raise ValueError(f"unknown offset mode {self.mode!r}")
        if self.mode == "variable":
            if self.radii is None or len(self.radii) != mesh.n_vertices:
                have = 0 if self.radii is None else len(self.radii)
                raise ValueError(
                    f"variable offset needs one radius per welded vertex "
                    f"({mesh.n_vertices}), got {have}"
                )
            if not np.isfinite(self.radii).all() or (self.radii < 0).any():
                raise ValueError("variable radii must be finite and >= 0")
        elif self.r < 0:
            raise ValueError("offset radius must be >= 0 (use mode='erode')")

    def max_reach(self) -> float:
        if self.mode == "variable":
            return float(self.radii.max()) if len(self.radii) else 0.0
        return self.r


@dataclass(frozen=True)
class SlabConfig:
    """Number of consecutive slices buffered per pass; None means all."""

    slices: int | None = None

    def __post_init__(self):
        if self.slices is not None and self.slices < 1:
            raise ValueError("slab size must be >= 1")


@dataclass(frozen=True)
class EngineConfig:
    workers: int = 1
    chord_eps: float = 0.01
    strategy: str = "direct"       # direct | progressive | divide
    batch_k: int = ct.DEFAULT_PROGRESSIVE_K
    leaf_size: int = ct.DEFAULT_DIVIDE_LEAF
    convex_fast: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("worker count must be >= 1")
        if self.chord_eps <= 0:
            raise ValueError("chord tolerance must be positive")
        if self.strategy not in ("direct", "progressive", "divide"):
            raise ValueError(f"unknown accumulation strategy {self.strategy!r}")


@dataclass
class SliceResult:
    z: float
    contours: list = field(default_factory=list)
    error: str | None = None
    warnings: list = field(default_factory=list)
    bitmap: ct.Bitmap | None = None  # filled only when rasterization is requested

    def contour_set(self) -> ct.ContourSet:
        return ct.ContourSet(self.z, list(self.contours))

    def net_area(self) -> float:
        return float(sum(c.area for c in self.contours))


def bisect_height(heights, z: float) -> int:
    """Smallest index i with heights[i] >= z; len(heights) when past the end."""
    return int(np.searchsorted(np.asarray(heights, dtype=np.float64), z, side="left"))


def affected_slices(
    interval: ZInterval, r_max: float, plan: SlicePlan
) -> tuple[int, int] | None:
    """Inclusive index range of plan heights inside [z_min - r, z_max + r].

    Uniform plans start from the rounding formula and correct against the
    actual stored heights; explicit plans bisect. Exact in either case.
    """
    if r_max < 0:
        raise ValueError("r_max must be >= 0")
    heights = plan.heights
    n = len(heights)
    lo = interval.z_min - r_max
    hi = interval.z_max + r_max
    if plan.tau is not None:
        j0 = math.floor((lo - plan.z0) / plan.tau)
        j0 = min(max(j0, 0), n)
        while j0 < n and heights[j0] < lo:
            j0 += 1
        while j0 > 0 and heights[j0 - 1] >= lo:
            j0 -= 1
        j1 = math.floor((hi - plan.z0) / plan.tau)
        j1 = min(max(j1, -1), n - 1)
        while j1 >= 0 and heights[j1] > hi:
            j1 -= 1
        while j1 < n - 1 and heights[j1 + 1] <= hi:
            j1 += 1
    else:
        j0 = int(np.searchsorted(heights, lo, side="left"))
        j1 = int(np.searchsorted(heights, hi, side="right")) - 1
    if j0 > j1:
        return None
    return j0, j1


# ---------------------------------------------------------------------------
# Pipeline


@dataclass
class _RunState:
    mesh: IndexedMesh
    spec: OffsetSpec
    cfg: EngineConfig
    heights: np.ndarray


_WORKER: dict = {}


def _triangle_reach(mesh: IndexedMesh, spec: OffsetSpec) -> np.ndarray:
    if spec.mode == "variable":
        return spec.radii[mesh.triangles].max(axis=1)
    return np.full(mesh.n_triangles, spec.r, dtype=np.float64)


def _height_range(heights, lo: float, hi: float, a: int, b: int):
    j0 = max(a, int(np.searchsorted(heights, lo, side="left")))
    j1 = min(b, int(np.searchsorted(heights, hi, side="right")) - 1)
    return j0, j1


def _bucket(buckets, j):
    got = buckets.get(j)
    if got is None:
        got = buckets[j] = ([], [], [])
    return got


def _visit_triangle(st: _RunState, t: int, a: int, b: int, buckets: dict):
    mesh, spec = st.mesh, st.spec
    heights = st.heights
    eps = st.cfg.chord_eps
    v = mesh.vertices
    tri = mesh.triangles[t]
    degenerate = bool(mesh.degenerate[t])

    if not degenerate:
        j0, j1 = _height_range(heights, mesh.tri_zmin[t], mesh.tri_zmax[t], a, b)
        for j in range(j0, j1 + 1):
            seg = pr.slice_triangle(mesh, t, float(heights[j]))
            if seg is not None:
                _bucket(buckets, j)[0].append(seg)

    variable = spec.mode == "variable"
    if not variable and spec.r <= 0.0:
        return

    for k in range(3):
        vid = int(tri[k])
        if mesh.vertex_owner[vid] != t:
            continue
        rv = float(spec.radii[vid]) if variable else spec.r
        if rv <= 0.0:
            continue
        center = v[vid]
        j0, j1 = _height_range(heights, center[2] - rv, center[2] + rv, a, b)
        for j in range(j0, j1 + 1):
            c = pr.slice_sphere(center, rv, float(heights[j]), eps, source=t)
            if c is not None:
                _bucket(buckets, j)[1].append(c)

    for k in range(3):
        eid = int(mesh.tri_edges[t, k])
        if mesh.edge_owner[eid] != t:
            continue
        lo_id, hi_id = mesh.edges[eid]
        pa, pb = v[lo_id], v[hi_id]
        if variable:
            ra, rb = float(spec.radii[lo_id]), float(spec.radii[hi_id])
            if ra <= 0.0 and rb <= 0.0:
                continue
            z_lo = min(pa[2] - ra, pb[2] - rb)
            z_hi = max(pa[2] + ra, pb[2] + rb)
            j0, j1 = _height_range(heights, z_lo, z_hi, a, b)
            for j in range(j0, j1 + 1):
                c = pr.slice_conical_capsule(
                    pa, ra, pb, rb, float(heights[j]), eps, source=t
                )
                if c is not None:
                    _bucket(buckets, j)[1].append(c)
        else:
            z_lo = min(pa[2], pb[2]) - spec.r
            z_hi = max(pa[2], pb[2]) + spec.r
            j0, j1 = _height_range(heights, z_lo, z_hi, a, b)
            for j in range(j0, j1 + 1):
                c = pr.slice_capped_cylinder(
                    pa, pb, spec.r, float(heights[j]), eps, source=t
                )
                if c is not None:
                    _bucket(buckets, j)[1].append(c)

    if degenerate:
        return
    p0, p1, p2 = v[tri[0]], v[tri[1]], v[tri[2]]
    e1x, e1y, e1z = p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]
    e2x, e2y, e2z = p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]
    nx = e1y * e2z - e1z * e2y
    ny = e1z * e2x - e1x * e2z
    nz = e1x * e2y - e1y * e2x
    norm = math.sqrt(nx * nx + ny * ny + nz * nz)
    if norm == 0.0:
        return
    normal = np.array([nx / norm, ny / norm, nz / norm])
    if variable:
        rs = spec.radii[tri][:, None]
    else:
        rs = spec.r
    corners = np.empty((3, 3))
    corners[0], corners[1], corners[2] = p0, p1, p2
    verts6 = np.empty((6, 3))
    verts6[:3] = corners + rs * normal
    verts6[3:] = corners - rs * normal
    j0, j1 = _height_range(
        heights, float(verts6[:, 2].min()), float(verts6[:, 2].max()), a, b
    )
    for j in range(j0, j1 + 1):
        c = pr.slice_convex_polytope(verts6, float(heights[j]), source=t)
        if c is None:
            continue
        if variable and not pr.is_convex(c.points):
            _bucket(buckets, j)[2].append(
                f"non-convex sloped prism slice (triangle {t}); "
                f"radius gradient too strong"
            )
        _bucket(buckets, j)[1].append(c)


def _merge_buckets(target: dict, part: dict):
    for j, (segs, prims, warns) in part.items():
        tgt = _bucket(target, j)
        tgt[0].extend(segs)
        tgt[1].extend(prims)
        tgt[2].extend(warns)


def _visit_task(args):
    chunk, a, b = args
    st: _RunState = _WORKER["state"]
    buckets: dict = {}
    for t in chunk:
        _visit_triangle(st, int(t), a, b, buckets)
    return buckets


def _slice_job(st: _RunState, j: int, j0_all, j1_all) -> SliceResult:
    cand = np.nonzero((j0_all <= j) & (j1_all >= j))[0]
    buckets: dict = {}
    for t in cand:
        _visit_triangle(st, int(t), j, j, buckets)
    return _contour_one(st, j, buckets.get(j, ((), (), ())))


def _slice_task(j: int) -> SliceResult:
    st: _RunState = _WORKER["state"]
    j0_all, j1_all = _WORKER["ranges"]
    return _slice_job(st, j, j0_all, j1_all)


def _primitive_region(prim_items, cfg: EngineConfig):
    if not prim_items:
        return None
    if cfg.strategy == "progressive":
        return ct.progressive_region(prim_items, cfg.batch_k, cfg.convex_fast)
    if cfg.strategy == "divide":
        return ct.divide_conquer_region(prim_items, cfg.leaf_size, cfg.convex_fast)
    return ct.region_from_contours(prim_items, convex_fast=cfg.convex_fast)


def _contour_one(st: _RunState, j: int, bucket) -> SliceResult:
    segs, prims, warns = bucket
    z = float(st.heights[j])
    try:
        base = ct.segments_to_contours(segs, z)
    except ct.ChainError as exc:
        return SliceResult(z, [], error=str(exc), warnings=sorted(warns))
    base_region = ct.region_from_contours(ct._prepare(base.contours))
    prim_region = _primitive_region(ct._prepare(prims), st.cfg)

    if st.spec.mode == "erode":
        if base_region is None or prim_region is None:
            region = base_region
        else:
            region = base_region.difference(prim_region)
    else:
        if base_region is None:
            region = prim_region
        elif prim_region is None:
            region = base_region
        else:
            region = base_region.union(prim_region)
    return SliceResult(z, ct.region_to_contours(region), warnings=sorted(warns))


def slice_offset(
    mesh: IndexedMesh,
    spec: OffsetSpec,
    plan: SlicePlan,
    cfg: EngineConfig = EngineConfig(),
    slab: SlabConfig = SlabConfig(),
) -> list:
    """Slice the offset volume at every plan height; one SliceResult each.

    Chaining failures on non-watertight meshes are reported per slice in
    SliceResult.error while the remaining slices complete normally.
    """
    spec.validate(mesh)
    heights = plan.heights
    n = len(heights)
    st = _RunState(mesh, spec, cfg, heights)

    reach = _triangle_reach(mesh, spec)
    j0_all = np.searchsorted(heights, mesh.tri_zmin - reach, side="left")
    j1_all = np.searchsorted(heights, mesh.tri_zmax + reach, side="right") - 1

    results: list = [None] * n
    pool = None
    global _WORKER
    _WORKER = {"state": st, "ranges": (j0_all, j1_all)}
    try:
        if cfg.workers > 1:
            pool = mp.get_context("fork").Pool(processes=cfg.workers)
        slab_n = slab.slices if slab.slices is not None else n
        for a in range(0, n, slab_n):
            b = min(n, a + slab_n) - 1
            if pool is not None and b > a:
                # one worker per slice end-to-end: the forked children share
                # the mesh read-only, so nothing heavy crosses processes
                results[a:b + 1] = pool.map(_slice_task, range(a, b + 1), chunksize=1)
                continue
            cand = np.nonzero((j0_all <= b) & (j1_all >= a))[0]
            buckets: dict = {}
            if pool is not None and len(cand) > 64:
                # single-slice slab: parallelize the triangle visitation
                chunk = max(32, -(-len(cand) // (cfg.workers * 8)))
                parts = [
                    (cand[i:i + chunk], a, b) for i in range(0, len(cand), chunk)
                ]
                for part in pool.imap_unordered(_visit_task, parts):
                    _merge_buckets(buckets, part)
            else:
                for t in cand:
                    _visit_triangle(st, int(t), a, b, buckets)
            for j in range(a, b + 1):
                results[j] = _contour_one(st, j, buckets.get(j, ((), (), ())))
    finally:
        if pool is not None:
            pool.terminate()
            pool.join()
        _WORKER = {}
    return results


def slice_single(
    mesh: IndexedMesh, spec: OffsetSpec, z: float, cfg: EngineConfig = EngineConfig()
) -> SliceResult:
    """Slice exactly one plane; computations touch only triangles reaching it."""
    plan = SlicePlan.explicit([z])
    return slice_offset(mesh, spec, plan, cfg=cfg, slab=SlabConfig())[0]
