import numpy as np
import pytest

from floquet_qec.errors import ColoringError, OddPathError
from floquet_qec.lattice import LatticePath, build_planar, build_torus


def test_torus_counts():
    lat = build_torus(3, 3)
    assert lat.n_vertices == 18
    assert len(lat.edges) == 27
    assert len(lat.plaquettes) == 9
    assert lat.n_vertices - len(lat.edges) + len(lat.plaquettes) == 0


def test_torus_color_balance():
    lat = build_torus(3, 3)
    for r in range(3):
        assert len(lat.edges_of_color(r)) == 9
        assert len(lat.plaquettes_of_color(r)) == 3


def test_torus_bad_dimensions():
    with pytest.raises(ColoringError):
        build_torus(4, 3)
    with pytest.raises(ColoringError):
        build_torus(3, 5)


def test_vertex_labels_and_colors():
    lat = build_torus(6, 3)
    for v in range(lat.n_vertices):
        edges = lat.vertex_edges(v)
        assert set(edges) == set("xyz")
        assert {e.color for e in edges.values()} == {0, 1, 2}


def test_r_edges_form_perfect_matching():
    lat = build_torus(3, 6)
    for r in range(3):
        seen = set()
        for e in lat.edges_of_color(r):
            assert e.u not in seen and e.v not in seen
            seen.update(e.endpoints)
        assert len(seen) == lat.n_vertices


def test_edge_joins_same_color_plaquettes():
    # the edge of color r at vertex v is not on the boundary of v's r-plaquette;
    # each r-edge's two adjacent plaquettes have the other two colors
    lat = build_torus(3, 3)
    owners = {}
    for p in lat.plaquettes:
        for e in p.edges:
            owners.setdefault(e, []).append(p.color)
    for e in lat.edges:
        assert sorted(owners[e.id]) == sorted({0, 1, 2} - {e.color})


def test_plaquette_cycle_structure():
    lat = build_torus(3, 3)
    for p in lat.plaquettes:
        cyc = lat.plaquette_cycle(p.id)
        assert len(cyc) == 6
        for i in range(6):
            assert lat.edge_between(cyc[i], cyc[(i + 1) % 6]) is not None
        # outward labels run x,y,z,x,y,z
        outward = [lat.outward_label(p, v) for v in cyc]
        assert outward == ["x", "y", "z", "x", "y", "z"]


def test_determinism():
    a = build_torus(6, 3)
    b = build_torus(6, 3)
    assert a.to_json() == b.to_json()


def test_odd_path():
    lat = build_torus(3, 3)
    e = lat.edges[0]
    p = lat.odd_path(e.u, e.v)
    assert len(p) == 1 and p.edges[0] == e.id
    # same sublattice -> error
    a0 = next(v for v in range(lat.n_vertices) if lat.sublattice(v) == 0)
    a1 = next(v for v in range(lat.n_vertices) if lat.sublattice(v) == 0 and v != a0)
    with pytest.raises(OddPathError):
        lat.odd_path(a0, a1)
    # odd length always
    for v2 in range(lat.n_vertices):
        if lat.sublattice(v2) != lat.sublattice(0) and v2 != 0:
            assert len(lat.odd_path(0, v2)) % 2 == 1


def test_planar_patch_basic():
    lat = build_planar(4, 4)
    assert lat.n_vertices - len(lat.edges) + len(lat.plaquettes) == 1
    assert lat.boundary_vertices
    for v in lat.boundary_vertices:
        assert lat.missing_edge_label[v] in "xyz"
        # belongs to exactly one plaquette, colored 0
        faces = lat.vertex_plaquettes(v)
        assert len(faces) == 1 and lat.plaquettes[faces[0]].color == 0
    # interior vertices trivalent
    for v in range(lat.n_vertices):
        if v not in lat.boundary_vertices:
            assert len(lat.vertex_edges(v)) == 3
    # at least one interior plaquette of each color
    assert {p.color for p in lat.plaquettes} == {0, 1, 2}


def test_planar_missing_edges_are_0_edges():
    lat = build_planar(5, 5)
    for v in lat.boundary_vertices:
        kept_colors = {e.color for e in lat.vertex_edges(v).values()}
        assert kept_colors == {1, 2}


def test_path_from_vertices_and_validation():
    lat = build_torus(3, 3)
    e = lat.edges[0]
    path = LatticePath.from_vertices(lat, [e.u, e.v])
    assert path.endpoints == (e.u, e.v)
    with pytest.raises(Exception):
        LatticePath.from_vertices(lat, [0, 0])


def test_lift_path_consistency():
    lat = build_torus(3, 3)
    # closed hexagon walk lifts back to its start
    p = lat.plaquettes[0]
    cyc = list(p.vertices) + [p.vertices[0]]
    path = LatticePath.from_vertices(lat, cyc)
    pts = lat.lift_path(path)
    np.testing.assert_allclose(pts[0], pts[-1], atol=1e-9)


def test_json_round_trip():
    lat = build_torus(3, 3)
    lat2 = type(lat).from_json(lat.to_json())
    assert lat2.to_json() == lat.to_json()


def test_dot_export():
    lat = build_torus(3, 3)
    dot = lat.to_dot()
    assert dot.startswith("graph") and "v0" in dot
