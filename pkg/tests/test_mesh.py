import numpy as np
import pytest

from offsetslice import (
    MeshError,
    load_stl,
    mesh_bounds,
    mesh_from_soup,
    mesh_to_soup,
    triangle_z_interval,
)

from .meshes import (
    cube_soup,
    icosphere_soup,
    soup_to_ascii_stl,
    soup_to_binary_stl,
)


def test_binary_cube_topology():
    mesh = load_stl(soup_to_binary_stl(cube_soup()))
    assert mesh.n_triangles == 12
    assert mesh.n_vertices == 8
    assert mesh.n_edges == 18


def test_ascii_single_facet():
    soup = np.array([[(0, 0, 0), (1, 0, 0), (0, 1, 0)]], dtype=np.float64)
    mesh = load_stl(soup_to_ascii_stl(soup))
    assert mesh.n_triangles == 1
    assert mesh.n_vertices == 3
    assert mesh.n_edges == 3


def test_truncated_binary_body():
    data = soup_to_binary_stl(cube_soup())
    truncated = data[: 84 + 50 * 9]  # header declares 12 facets
    with pytest.raises(MeshError, match="truncated body"):
        load_stl(truncated)


def test_zero_triangles_rejected():
    with pytest.raises(MeshError, match="zero triangles"):
        load_stl(soup_to_binary_stl(np.empty((0, 3, 3))))
    with pytest.raises(MeshError, match="zero triangles"):
        load_stl(b"solid empty\nendsolid empty\n")


def test_ascii_parse_failure():
    with pytest.raises(MeshError):
        load_stl(b"solid broken\nfacet normal 0 0 1\nouter loop\nvertex 0 0\n")


def test_binary_with_solid_header_detected():
    data = soup_to_binary_stl(cube_soup(), header=b"solid binary-exporter")
    mesh = load_stl(data)
    assert mesh.n_triangles == 12


def test_triangle_ids_are_file_order():
    soup = cube_soup()
    mesh = load_stl(soup_to_binary_stl(soup))
    back = mesh_to_soup(mesh)
    assert np.array_equal(back, soup)


def test_z_intervals():
    soup = np.array(
        [
            [(0, 0, 0), (1, 0, 1), (0, 1, 2)],
            [(0, 0, 1), (1, 0, 1), (0, 1, 1)],
            [(0, 0, -0.5), (1, 0, -0.5), (0, 1, 3)],
        ],
        dtype=np.float64,
    )
    mesh = mesh_from_soup(soup)
    zi = triangle_z_interval(mesh, 0)
    assert (zi.z_min, zi.z_max) == (0.0, 2.0)
    zi = triangle_z_interval(mesh, 1)
    assert zi.z_min == zi.z_max == 1.0
    zi = triangle_z_interval(mesh, 2)
    assert (zi.z_min, zi.z_max) == (-0.5, 3.0)


def test_bounds():
    assert np.allclose(mesh_bounds(mesh_from_soup(cube_soup())), [(0, 0, 0), (1, 1, 1)])
    tri = mesh_from_soup(np.array([[(0, 0, 0), (1, 0, 0), (0, 1, 0)]], dtype=np.float64))
    lo, hi = mesh_bounds(tri)
    assert np.allclose(lo, (0, 0, 0)) and np.allclose(hi, (1, 1, 0))
    moved = mesh_from_soup(cube_soup(origin=(5, 5, 5)))
    assert np.allclose(mesh_bounds(moved), [(5, 5, 5), (6, 6, 6)])


def test_welding_idempotent():
    mesh = mesh_from_soup(icosphere_soup(subdiv=2))
    again = mesh_from_soup(mesh_to_soup(mesh))
    assert again.n_vertices == mesh.n_vertices
    assert again.n_edges == mesh.n_edges
    assert again.n_triangles == mesh.n_triangles


def test_watertight_edge_count():
    for soup in (cube_soup(), icosphere_soup(subdiv=1)):
        mesh = mesh_from_soup(soup)
        assert mesh.n_edges * 2 == mesh.n_triangles * 3


def test_z_interval_within_bounds():
    mesh = mesh_from_soup(icosphere_soup(subdiv=1))
    lo, hi = mesh_bounds(mesh)
    assert (mesh.tri_zmin >= lo[2] - 1e-15).all()
    assert (mesh.tri_zmax <= hi[2] + 1e-15).all()


def test_degenerate_triangles_flagged():
    soup = np.array(
        [
            [(0, 0, 0), (1, 0, 0), (0, 1, 0)],
            [(0, 0, 0), (1, 0, 0), (2, 0, 0)],   # collinear
            [(0, 0, 0), (0, 0, 0), (0, 1, 0)],   # repeated vertex
        ],
        dtype=np.float64,
    )
    mesh = mesh_from_soup(soup)
    assert list(mesh.degenerate) == [False, True, True]


def test_ownership_tables():
    mesh = mesh_from_soup(cube_soup())
    # every owner is an incident triangle with the smallest id
    for eid in range(mesh.n_edges):
        incident = mesh.edge_triangles(eid)
        assert mesh.edge_owner[eid] == incident.min()
    for tid, tri in enumerate(mesh.triangles):
        for vid in tri:
            assert mesh.vertex_owner[vid] <= tid


def test_nonfinite_rejected():
    soup = cube_soup()
    soup[0, 0, 0] = np.nan
    with pytest.raises(MeshError, match="non-finite"):
        mesh_from_soup(soup)
