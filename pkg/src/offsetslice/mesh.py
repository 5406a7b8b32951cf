"""STL loading and mesh indexing: welded vertices, unique edges, z-intervals."""
from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field

import numpy as np


class MeshError(ValueError):
    """Unreadable, truncated, or empty STL input."""


@dataclass(frozen=True)
class ZInterval:
    z_min: float
    z_max: float


@dataclass
class IndexedMesh:
    """Triangle soup welded into shared vertices with a unique edge table.

    Vertices are welded by exact coordinate equality (STL repeats shared
    vertices verbatim, so no tolerance is applied). Triangle ids are file
    ordinals and act as the global deterministic sort key. Immutable after
    load; safe for unsynchronized shared reads.
    """

    vertices: np.ndarray        # (V, 3) float64
    triangles: np.ndarray       # (T, 3) int64 indices into vertices, file order
    edges: np.ndarray           # (E, 2) int64, lo index < hi index
    tri_edges: np.ndarray       # (T, 3) int64 edge ids for (v0v1, v1v2, v2v0)
    degenerate: np.ndarray      # (T,) bool, zero-area triangles
    vertex_owner: np.ndarray    # (V,) int64 smallest incident triangle id
    edge_owner: np.ndarray      # (E,) int64 smallest incident triangle id
    tri_zmin: np.ndarray        # (T,) float64
    tri_zmax: np.ndarray        # (T,) float64
    # CSR adjacency: triangle ids incident to edge e are
    # edge_tri_adj[edge_tri_off[e]:edge_tri_off[e+1]]
    edge_tri_off: np.ndarray = field(repr=False, default=None)
    edge_tri_adj: np.ndarray = field(repr=False, default=None)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_triangles(self, edge_id: int) -> np.ndarray:
        """Ids of the triangles incident to an edge."""
        return self.edge_tri_adj[self.edge_tri_off[edge_id]:self.edge_tri_off[edge_id + 1]]


def triangle_z_interval(mesh: IndexedMesh, tri_id: int) -> ZInterval:
    """Min/max of the three vertex z coordinates of one triangle."""
    return ZInterval(float(mesh.tri_zmin[tri_id]), float(mesh.tri_zmax[tri_id]))


def mesh_bounds(mesh: IndexedMesh) -> tuple[np.ndarray, np.ndarray]:
    """Tight axis-aligned bounding box over all welded vertices."""
    if mesh.n_vertices == 0:
        raise MeshError("empty mesh has no bounds")
    return mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)


def load_stl(data: bytes) -> IndexedMesh:
    """Parse binary or ASCII STL bytes (auto-detected) into an IndexedMesh.

    File normals are ignored; triangle orientation comes from vertex order.
    Raises MeshError on truncated binary bodies, ASCII parse failures, zero
    triangles, or non-finite coordinates.
    """
    soup = _parse_ascii(data) if _looks_ascii(data) else _parse_binary(data)
    if len(soup) == 0:
        raise MeshError("STL contains zero triangles")
    if not np.isfinite(soup).all():
        raise MeshError("STL contains non-finite coordinates")
    return _index_soup(soup)


def mesh_from_soup(soup: np.ndarray) -> IndexedMesh:
    """Index an in-memory (T, 3, 3) float array of triangle vertices."""
    soup = np.asarray(soup, dtype=np.float64)
    if soup.ndim != 3 or soup.shape[1:] != (3, 3) or len(soup) == 0:
        raise MeshError("expected a non-empty (T, 3, 3) triangle array")
    if not np.isfinite(soup).all():
        raise MeshError("non-finite coordinates")
    return _index_soup(soup)


def mesh_to_soup(mesh: IndexedMesh) -> np.ndarray:
    """Expand back to a (T, 3, 3) triangle soup (inverse of welding)."""
    return mesh.vertices[mesh.triangles]


_ASCII_FLOAT = r"[-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?"
_VERTEX_RE = re.compile(
    rf"vertex\s+({_ASCII_FLOAT})\s+({_ASCII_FLOAT})\s+({_ASCII_FLOAT})", re.IGNORECASE
)


def _looks_ascii(data: bytes) -> bool:
    head = data.lstrip()[:6].lower()
    if not head.startswith(b"solid"):
        return False
    # Binary files occasionally carry a "solid" header; require an ASCII
    # facet/endsolid keyword somewhere in the body to accept as text.
    probe = data[:4096].lower()
    return b"facet" in probe or b"endsolid" in probe


def _parse_ascii(data: bytes) -> np.ndarray:
    try:
        text = data.decode("ascii", errors="strict")
    except UnicodeDecodeError as exc:
        raise MeshError(f"ASCII STL decode failure: {exc}") from None
    coords = _VERTEX_RE.findall(text)
    if len(coords) % 3 != 0:
        raise MeshError(f"ASCII STL vertex count {len(coords)} not a multiple of 3")
    n_loops = text.lower().count("outer loop")
    if n_loops * 3 != len(coords):
        raise MeshError("ASCII STL facet structure does not match vertex count")
    arr = np.array(coords, dtype=np.float64)
    return arr.reshape(-1, 3, 3)


_BINARY_RECORD = np.dtype(
    [("normal", "<f4", 3), ("verts", "<f4", (3, 3)), ("attr", "<u2")]
)


def _parse_binary(data: bytes) -> np.ndarray:
    if len(data) < 84:
        raise MeshError(f"binary STL too short ({len(data)} bytes)")
    (count,) = struct.unpack_from("<I", data, 80)
    body = 84 + 50 * count
    if len(data) < body:
        have = (len(data) - 84) // 50
        raise MeshError(f"truncated body: header declares {count} facets, found {have}")
    records = np.frombuffer(data, dtype=_BINARY_RECORD, count=count, offset=84)
    return records["verts"].astype(np.float64)


def _index_soup(soup: np.ndarray) -> IndexedMesh:
    n_tri = len(soup)
    flat = np.ascontiguousarray(soup.reshape(-1, 3))

    # Weld by exact bit pattern; keep first-occurrence order for the table.
    keyed = flat.view([("x", "f8"), ("y", "f8"), ("z", "f8")]).ravel()
    _, first, inverse = np.unique(keyed, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    vertices = flat[np.sort(first)]
    triangles = rank[inverse].reshape(n_tri, 3).astype(np.int64)

    # Degenerate if indices repeat or the cross product is exactly zero.
    a = vertices[triangles[:, 0]]
    cross = np.cross(vertices[triangles[:, 1]] - a, vertices[triangles[:, 2]] - a)
    repeated = (
        (triangles[:, 0] == triangles[:, 1])
        | (triangles[:, 1] == triangles[:, 2])
        | (triangles[:, 2] == triangles[:, 0])
    )
    degenerate = repeated | (cross == 0.0).all(axis=1)

    # Unique undirected edge table.
    raw = np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]], axis=0
    )
    raw_sorted = np.sort(raw, axis=1)
    ekey = raw_sorted[:, 0] * (len(vertices) + 1) + raw_sorted[:, 1]
    _, efirst, einv = np.unique(ekey, return_index=True, return_inverse=True)
    eorder = np.argsort(efirst)
    erank = np.empty_like(eorder)
    erank[eorder] = np.arange(len(eorder))
    edges = raw_sorted[np.sort(efirst)]
    edge_ids = erank[einv]
    tri_edges = edge_ids.reshape(3, n_tri).T.copy()

    tri_of_slot = np.tile(np.arange(n_tri, dtype=np.int64), 3)
    edge_owner = np.full(len(edges), n_tri, dtype=np.int64)
    np.minimum.at(edge_owner, edge_ids, tri_of_slot)
    vertex_owner = np.full(len(vertices), n_tri, dtype=np.int64)
    np.minimum.at(vertex_owner, triangles.T.ravel(), tri_of_slot)

    adj_order = np.lexsort((tri_of_slot, edge_ids))
    edge_tri_adj = tri_of_slot[adj_order]
    counts = np.bincount(edge_ids, minlength=len(edges))
    edge_tri_off = np.concatenate([[0], np.cumsum(counts)])

    z = soup[:, :, 2]
    return IndexedMesh(
        vertices=vertices,
        triangles=triangles,
        edges=edges,
        tri_edges=tri_edges,
        degenerate=degenerate,
        vertex_owner=vertex_owner,
        edge_owner=edge_owner,
        tri_zmin=z.min(axis=1),
        tri_zmax=z.max(axis=1),
        edge_tri_off=edge_tri_off,
        edge_tri_adj=edge_tri_adj,
    )
