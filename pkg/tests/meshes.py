"""Procedural test meshes and STL serializers."""
from __future__ import annotations

import struct

import numpy as np

from offsetslice import mesh_from_soup

# Unit cube faces, CCW seen from outside.
_CUBE_QUADS = [
    ((0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)),  # bottom (z=0), normal -z
    ((0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)),  # top
    ((0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)),  # front (y=0)
    ((1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)),  # right
    ((1, 1, 0), (0, 1, 0), (0, 1, 1), (1, 1, 1)),  # back
    ((0, 1, 0), (0, 0, 0), (0, 0, 1), (0, 1, 1)),  # left
]


def cube_soup(origin=(0.0, 0.0, 0.0), size=1.0) -> np.ndarray:
    tris = []
    o = np.asarray(origin, dtype=np.float64)
    for quad in _CUBE_QUADS:
        q = [o + size * np.asarray(p, dtype=np.float64) for p in quad]
        tris.append([q[0], q[1], q[2]])
        tris.append([q[0], q[2], q[3]])
    return np.array(tris)


def tetra_soup() -> np.ndarray:
    a, b, c, d = (
        np.array([0.0, 0.0, 0.0]),
        np.array([1.0, 0.0, 0.0]),
        np.array([0.0, 1.0, 0.0]),
        np.array([0.0, 0.0, 1.0]),
    )
    return np.array([[a, c, b], [a, b, d], [b, c, d], [a, d, c]])


def icosphere_soup(subdiv: int = 3, radius: float = 1.0) -> np.ndarray:
    """Icosahedron subdivided `subdiv` times, vertices projected to the sphere."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    tris = verts[np.array(faces)]
    for _ in range(subdiv):
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
        tris = np.concatenate(
            [
                np.stack([a, ab, ca], axis=1),
                np.stack([ab, b, bc], axis=1),
                np.stack([ca, bc, c], axis=1),
                np.stack([ab, bc, ca], axis=1),
            ]
        )
    flat = tris.reshape(-1, 3)
    flat /= np.linalg.norm(flat, axis=1, keepdims=True)
    return radius * flat.reshape(-1, 3, 3)


def torus_soup(
    major: float = 30.0, minor: float = 12.0, n_u: int = 500, n_v: int = 120
) -> np.ndarray:
    """Watertight torus around the z axis with 2 * n_u * n_v triangles."""
    u = 2.0 * np.pi * np.arange(n_u) / n_u
    vv = 2.0 * np.pi * np.arange(n_v) / n_v
    uu, vg = np.meshgrid(u, vv, indexing="ij")
    ring = major + minor * np.cos(vg)
    pts = np.stack([ring * np.cos(uu), ring * np.sin(uu), minor * np.sin(vg)], axis=-1)

    i = np.arange(n_u)[:, None]
    j = np.arange(n_v)[None, :]
    i1 = (i + 1) % n_u
    j1 = (j + 1) % n_v
    p00 = pts[i, j].reshape(-1, 3)
    p10 = pts[i1, j].reshape(-1, 3)
    p01 = pts[i, j1].reshape(-1, 3)
    p11 = pts[i1, j1].reshape(-1, 3)
    t1 = np.stack([p00, p10, p11], axis=1)
    t2 = np.stack([p00, p11, p01], axis=1)
    return np.concatenate([t1, t2])


def tube_soup() -> np.ndarray:
    """Square tube: outer [0,3]^2, square hole [1,2]^2, z in [0,1]. Watertight."""
    outer = [(0.0, 0.0), (3.0, 0.0), (3.0, 3.0), (0.0, 3.0)]
    inner = [(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)]
    quads = []
    for i in range(4):
        o0, o1 = outer[i], outer[(i + 1) % 4]
        n0, n1 = inner[i], inner[(i + 1) % 4]
        quads.append(((*o0, 0), (*o1, 0), (*o1, 1), (*o0, 1)))      # outer wall
        quads.append(((*n1, 0), (*n0, 0), (*n0, 1), (*n1, 1)))      # inner wall
        quads.append(((*o0, 1), (*o1, 1), (*n1, 1), (*n0, 1)))      # top ring
        quads.append(((*o0, 0), (*n0, 0), (*n1, 0), (*o1, 0)))      # bottom ring
    tris = []
    for a, b, c, d in quads:
        tris.append([a, b, c])
        tris.append([a, c, d])
    return np.array(tris, dtype=np.float64)


def soup_to_binary_stl(soup: np.ndarray, header: bytes = b"") -> bytes:
    soup = np.asarray(soup, dtype=np.float64)
    out = bytearray(header.ljust(80, b"\0")[:80])
    out += struct.pack("<I", len(soup))
    for tri in soup:
        n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        ln = np.linalg.norm(n)
        n = n / ln if ln > 0 else n
        out += struct.pack("<3f", *n)
        for vert in tri:
            out += struct.pack("<3f", *vert)
        out += struct.pack("<H", 0)
    return bytes(out)


def soup_to_ascii_stl(soup: np.ndarray, name: str = "part") -> bytes:
    lines = [f"solid {name}"]
    for tri in np.asarray(soup, dtype=np.float64):
        n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        ln = np.linalg.norm(n)
        n = n / ln if ln > 0 else n
        lines.append(f"  facet normal {n[0]:e} {n[1]:e} {n[2]:e}")
        lines.append("    outer loop")
        for vert in tri:
            lines.append(f"      vertex {vert[0]:e} {vert[1]:e} {vert[2]:e}")
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append(f"endsolid {name}")
    return ("\n".join(lines) + "\n").encode("ascii")


def cube_mesh(origin=(0.0, 0.0, 0.0), size=1.0):
    return mesh_from_soup(cube_soup(origin, size))


def icosphere_mesh(subdiv: int = 3, radius: float = 1.0):
    return mesh_from_soup(icosphere_soup(subdiv, radius))
