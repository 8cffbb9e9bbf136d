"""Labeled hexagonal lattices: torus and planar patches.

Brick-wall/axial construction with a two-vertex unit cell.  Cells live at
integer axial coordinates c = (cx, cy); the two sublattice sites are A(c) and
B(c).  Bonds from B(c): to A(c) (bond 1), to A(c+x) (bond 2), to A(c+y)
(bond 3).  Bond types carry the x/y/z labels (bond 1 -> z, 2 -> x, 3 -> y).
Faces are hexagons in bijection with cells and are 3-colored by
col(c) = (cx + 2*cy) mod 3; an edge's color is the one color its two adjacent
faces do not use, so r-edges connect r-plaquettes and every vertex touches one
edge of each color and one of each label.

The planar patch keeps the 1- and 2-colored hexagons inside an axial
rectangle together with every 0-colored hexagon that shares an edge with
them.  All severed edges are then 0-edges, so the boundary consists of
bivalent vertices that lost exactly their 0-edge (these later host the
single-site 0-checks) and the outermost plaquettes are 0-plaquettes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ColoringError, FloquetError, OddPathError

__all__ = ["HexLattice", "Edge", "Plaquette", "LatticePath", "build_torus", "build_planar"]

_BOND_LABEL = {1: "z", 2: "x", 3: "y"}
# planar embedding: A(c) = cx*U + cy*V, B(c) = A(c) + DELTA
_U = np.array([np.sqrt(3) / 2, 1.5])
_V = np.array([-np.sqrt(3) / 2, 1.5])
_DELTA = np.array([0.0, 1.0])


@dataclass(frozen=True)
class Edge:
    id: int
    u: int  # B-sublattice endpoint
    v: int  # A-sublattice endpoint
    bond: int  # 1, 2, 3
    label: str  # 'x' | 'y' | 'z'
    color: int  # 0 | 1 | 2
    cell: tuple[int, int]  # cell carrying the bond

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)


@dataclass(frozen=True)
class Plaquette:
    id: int
    cell: tuple[int, int]
    color: int
    vertices: tuple[int, ...]  # positional cycle, outward labels run x,y,z,x,y,z
    edges: tuple[int, ...]  # boundary edges in cycle order (edge i joins vertex i, i+1)
    truncated: bool = False


@dataclass(frozen=True)
class LatticePath:
    """Connected, non-self-intersecting edge path."""

    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    closed: bool = False

    def __post_init__(self):
        interior = self.vertices if not self.closed else self.vertices[:-1]
        if len(set(interior)) != len(interior):
            raise FloquetError("path is self-intersecting")
        if self.closed and self.vertices[0] != self.vertices[-1]:
            raise FloquetError("closed path must return to its start")

    def __len__(self):
        return len(self.edges)

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.vertices[0], self.vertices[-1])

    @classmethod
    def from_vertices(cls, lattice: "HexLattice", vertices) -> "LatticePath":
        vertices = list(vertices)
        edges = []
        for a, b in zip(vertices, vertices[1:]):
            e = lattice.edge_between(a, b)
            if e is None:
                raise FloquetError(f"no edge between vertices {a} and {b}")
            edges.append(e.id)
        closed = len(vertices) > 1 and vertices[0] == vertices[-1]
        return cls(tuple(vertices), tuple(edges), closed)


class HexLattice:
    """Vertices, labeled edges, and colored plaquettes of a honeycomb patch."""

    def __init__(self):
        self.topology: tuple = ()
        self.n_vertices = 0
        self.vertex_cell: list[tuple[int, int, int]] = []  # (cx, cy, sub) with A=0, B=1
        self.vertex_pos: np.ndarray | None = None
        self.edges: list[Edge] = []
        self.plaquettes: list[Plaquette] = []
        self.boundary_vertices: list[int] = []
        self.missing_edge_label: dict[int, str] = {}
        self._edge_by_pair: dict[frozenset, Edge] = {}
        self._vertex_edges: list[dict[str, Edge]] = []
        self._vertex_plaquettes: list[list[int]] = []

    # -- derived lookups -----------------------------------------------------

    def _index(self):
        self._edge_by_pair = {frozenset(e.endpoints): e for e in self.edges}
        self._vertex_edges = [dict() for _ in range(self.n_vertices)]
        for e in self.edges:
            self._vertex_edges[e.u][e.label] = e
            self._vertex_edges[e.v][e.label] = e
        self._vertex_plaquettes = [[] for _ in range(self.n_vertices)]
        for p in self.plaquettes:
            for v in p.vertices:
                self._vertex_plaquettes[v].append(p.id)

    def edge_between(self, a: int, b: int) -> Edge | None:
        return self._edge_by_pair.get(frozenset((a, b)))

    def vertex_edges(self, v: int) -> dict[str, Edge]:
        return self._vertex_edges[v]

    def vertex_plaquettes(self, v: int) -> list[int]:
        return self._vertex_plaquettes[v]

    def edges_of_color(self, r: int) -> list[Edge]:
        return [e for e in self.edges if e.color == r]

    def plaquettes_of_color(self, r: int) -> list[Plaquette]:
        return [p for p in self.plaquettes if p.color == r]

    def sublattice(self, v: int) -> int:
        return self.vertex_cell[v][2]

    @property
    def is_torus(self) -> bool:
        return self.topology[0] == "torus"

    def plaquette_cycle(self, p: int) -> tuple[int, ...]:
        """Six (or fewer, truncated) vertices in the positional stabilizer order."""
        if p < 0 or p >= len(self.plaquettes):
            raise FloquetError(f"unknown plaquette {p}")
        return self.plaquettes[p].vertices

    def outward_label(self, p: Plaquette, v: int) -> str:
        """Label of the edge at v that does not lie on plaquette p's boundary."""
        on_boundary = {self.edges[e].label for e in p.edges if v in self.edges[e].endpoints}
        rest = set("xyz") - on_boundary
        if len(rest) != 1:
            raise FloquetError(f"vertex {v} not a proper boundary vertex of plaquette {p.id}")
        return rest.pop()

    # -- paths ------------------------------------------------------------------

    def neighbors(self, v: int) -> list[int]:
        out = []
        for e in self._vertex_edges[v].values():
            out.append(e.u if e.v == v else e.v)
        return out

    def shortest_path(self, v1: int, v2: int, avoid: set[int] | None = None) -> LatticePath | None:
        """BFS path; interior vertices avoid the given set."""
        avoid = avoid or set()
        if v1 == v2:
            return LatticePath((v1,), ())
        prev = {v1: None}
        queue = [v1]
        while queue:
            nxt = []
            for u in queue:
                for w in sorted(self.neighbors(u)):
                    if w in prev or (w in avoid and w != v2):
                        continue
                    prev[w] = u
                    if w == v2:
                        seq = [w]
                        while prev[seq[-1]] is not None:
                            seq.append(prev[seq[-1]])
                        seq.reverse()
                        return LatticePath.from_vertices(self, seq)
                    nxt.append(w)
            queue = nxt
        return None

    def odd_path(self, v1: int, v2: int) -> LatticePath:
        """Shortest odd-length path; exists iff endpoints are in different sublattices."""
        if v1 == v2:
            raise OddPathError("endpoints must differ")
        if self.sublattice(v1) == self.sublattice(v2):
            raise OddPathError("no odd path between same-sublattice vertices on a bipartite graph")
        path = self.shortest_path(v1, v2)
        if path is None:
            raise OddPathError(f"vertices {v1}, {v2} are disconnected")
        assert len(path) % 2 == 1
        return path

    # -- geometry (universal cover) ----------------------------------------------

    def step_displacement(self, frm: int, to: int) -> np.ndarray:
        """Displacement in the plane when walking an edge, independent of wrapping."""
        e = self.edge_between(frm, to)
        if e is None:
            raise FloquetError(f"no edge {frm}-{to}")
        base = {1: -_DELTA, 2: _U - _DELTA, 3: _V - _DELTA}[e.bond]
        return base if frm == e.u else -base

    def lift_path(self, path: LatticePath) -> np.ndarray:
        """Unwrapped positions of the path's vertices, starting at the stored position."""
        pts = [self.vertex_pos[path.vertices[0]].copy()]
        for a, b in zip(path.vertices, path.vertices[1:]):
            pts.append(pts[-1] + self.step_displacement(a, b))
        return np.array(pts)

    def face_center(self, p: Plaquette) -> np.ndarray:
        """Center of the face's canonical (unwrapped) hexagon copy."""
        cx, cy = p.cell
        a = cx * _U + cy * _V
        # centroid of hexagon H(c): average of the six canonical corners
        corners = [a, a + _DELTA, a + _V, a + _V - _U + _DELTA, a + _V - _U, a - _U + _DELTA]
        return np.mean(corners, axis=0)

    def lattice_vectors(self) -> tuple[np.ndarray, np.ndarray] | None:
        if not self.is_torus:
            return None
        _, Lx, Ly = self.topology
        return Lx * _U, Ly * _V

    # -- export ---------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "topology": list(self.topology),
            "vertices": [
                {"id": i, "cell": list(self.vertex_cell[i][:2]), "sub": self.vertex_cell[i][2]}
                for i in range(self.n_vertices)
            ],
            "edges": [
                {"id": e.id, "u": e.u, "v": e.v, "label": e.label, "color": e.color}
                for e in self.edges
            ],
            "plaquettes": [
                {
                    "id": p.id,
                    "cell": list(p.cell),
                    "color": p.color,
                    "vertices": list(p.vertices),
                    "truncated": p.truncated,
                }
                for p in self.plaquettes
            ],
            "boundary_vertices": list(self.boundary_vertices),
        }

    @classmethod
    def from_json(cls, data: dict) -> "HexLattice":
        kind = data["topology"][0]
        if kind == "torus":
            lat = build_torus(data["topology"][1], data["topology"][2])
        else:
            lat = build_planar(data["topology"][1], data["topology"][2])
        if len(lat.edges) != len(data["edges"]) or lat.n_vertices != len(data["vertices"]):
            raise FloquetError("lattice JSON does not match its declared topology")
        return lat

    def to_dot(self) -> str:
        colors = {0: "red", 1: "gold", 2: "blue"}
        lines = ["graph hexlattice {", "  node [shape=point];"]
        for i in range(self.n_vertices):
            x, y = self.vertex_pos[i]
            lines.append(f'  v{i} [pos="{x:.3f},{y:.3f}!"];')
        for e in self.edges:
            lines.append(f'  v{e.u} -- v{e.v} [color={colors[e.color]}, label="{e.label}"];')
        lines.append("}")
        return "\n".join(lines)


def _col(cx: int, cy: int) -> int:
    return (cx + 2 * cy) % 3


def _edge_color(bond: int, cx: int, cy: int) -> int:
    k = _col(cx, cy)
    return {1: (k + 1) % 3, 2: k, 3: (k + 2) % 3}[bond]


def _hexagon(cell, a_of, b_of):
    """Face H(c) as interleaved vertex/edge walk (forward = counterclockwise).

    Vertex order: A(c), B(c), A(c+y), B(c+y-x), A(c+y-x), B(c-x);
    edge bonds:   1(c), 3(c), 2(c+y-x), 1(c+y-x), 3(c-x), 2(c-x).
    """
    cx, cy = cell
    verts = [
        a_of(cx, cy),
        b_of(cx, cy),
        a_of(cx, cy + 1),
        b_of(cx - 1, cy + 1),
        a_of(cx - 1, cy + 1),
        b_of(cx - 1, cy),
    ]
    bonds = [
        (1, (cx, cy)),
        (3, (cx, cy)),
        (2, (cx - 1, cy + 1)),
        (1, (cx - 1, cy + 1)),
        (3, (cx - 1, cy)),
        (2, (cx - 1, cy)),
    ]
    return verts, bonds


def _orient_cycle(lat: HexLattice, verts: list[int], edge_ids: list[int]) -> tuple[tuple, tuple]:
    """Rotate/reflect the hexagon cycle so outward labels run x,y,z,x,y,z."""
    k = len(verts)
    labels = []
    for i, v in enumerate(verts):
        e_prev = lat.edges[edge_ids[(i - 1) % k]]
        e_next = lat.edges[edge_ids[i]]
        labels.append((set("xyz") - {e_prev.label, e_next.label}).pop())
    candidates = []
    for direction in (1, -1):
        for start in range(k):
            order = [(start + direction * i) % k for i in range(k)]
            if [labels[i] for i in order] != ["x", "y", "z"] * (k // 3):
                continue
            vs = tuple(verts[i] for i in order)
            if direction == 1:
                es = tuple(edge_ids[i] for i in order)
            else:
                es = tuple(edge_ids[(i - 1) % k] for i in order)
            candidates.append((vs, es))
    if not candidates:
        raise FloquetError("hexagon cycle admits no x,y,z positional orientation")
    return min(candidates, key=lambda c: c[0])  # smallest starting vertex id is canonical


def build_torus(Lx: int, Ly: int) -> HexLattice:
    """Torus of Lx x Ly cells: 2 Lx Ly vertices, 3 Lx Ly edges, Lx Ly plaquettes."""
    if Lx <= 0 or Ly <= 0 or Lx % 3 or Ly % 3:
        raise ColoringError(f"torus dimensions must be positive multiples of 3, got {Lx}x{Ly}")
    lat = HexLattice()
    lat.topology = ("torus", Lx, Ly)
    lat.n_vertices = 2 * Lx * Ly

    def cell_id(cx, cy):
        return (cx % Lx) * Ly + (cy % Ly)

    def a_of(cx, cy):
        return 2 * cell_id(cx, cy)

    def b_of(cx, cy):
        return 2 * cell_id(cx, cy) + 1

    cells = [(cx, cy) for cx in range(Lx) for cy in range(Ly)]
    lat.vertex_cell = [None] * lat.n_vertices
    pos = np.zeros((lat.n_vertices, 2))
    for cx, cy in cells:
        base = cx * _U + cy * _V
        lat.vertex_cell[a_of(cx, cy)] = (cx, cy, 0)
        lat.vertex_cell[b_of(cx, cy)] = (cx, cy, 1)
        pos[a_of(cx, cy)] = base
        pos[b_of(cx, cy)] = base + _DELTA
    lat.vertex_pos = pos

    edge_lookup = {}
    for cx, cy in cells:
        for bond, (u, v) in (
            (1, (b_of(cx, cy), a_of(cx, cy))),
            (2, (b_of(cx, cy), a_of(cx + 1, cy))),
            (3, (b_of(cx, cy), a_of(cx, cy + 1))),
        ):
            e = Edge(len(lat.edges), u, v, bond, _BOND_LABEL[bond], _edge_color(bond, cx, cy), (cx, cy))
            lat.edges.append(e)
            edge_lookup[(bond, cell_id(cx, cy))] = e
    lat._index()

    for cx, cy in cells:
        verts, bonds = _hexagon((cx, cy), a_of, b_of)
        edge_ids = [edge_lookup[(b, cell_id(*c))].id for b, c in bonds]
        vs, es = _orient_cycle(lat, verts, edge_ids)
        lat.plaquettes.append(Plaquette(len(lat.plaquettes), (cx, cy), _col(cx, cy), vs, es))
    lat._index()
    _validate(lat)
    return lat


def build_planar(rows: int, cols: int) -> HexLattice:
    """Planar patch with 0-plaquettes on the boundary and bivalent boundary vertices."""
    if rows < 2 or cols < 2:
        raise ColoringError("planar patch needs rows >= 2 and cols >= 2")
    core = [(cx, cy) for cx in range(cols) for cy in range(rows) if _col(cx, cy) != 0]
    if not core:
        raise ColoringError("region contains no 1- or 2-colored hexagons")

    # every face neighboring a core face across an edge; 0-faces among them are kept
    def face_neighbors(c):
        cx, cy = c
        return [(cx + 1, cy - 1), (cx - 1, cy + 1), (cx + 1, cy), (cx - 1, cy), (cx, cy + 1), (cx, cy - 1)]

    ring = set()
    core_set = set(core)
    for c in core:
        for nb in face_neighbors(c):
            if _col(*nb) == 0 and nb not in core_set:
                ring.add(nb)
    faces = sorted(core_set) + sorted(ring)

    lat = HexLattice()
    lat.topology = ("planar", rows, cols)
    vert_ids: dict[tuple[int, int, int], int] = {}

    def a_of(cx, cy):
        return vert_ids.setdefault((cx, cy, 0), len(vert_ids))

    def b_of(cx, cy):
        return vert_ids.setdefault((cx, cy, 1), len(vert_ids))

    face_data = []
    for c in faces:
        verts, bonds = _hexagon(c, a_of, b_of)
        face_data.append((c, verts, bonds))
    lat.n_vertices = len(vert_ids)
    lat.vertex_cell = [None] * lat.n_vertices
    pos = np.zeros((lat.n_vertices, 2))
    for (cx, cy, sub), vid in vert_ids.items():
        lat.vertex_cell[vid] = (cx, cy, sub)
        pos[vid] = cx * _U + cy * _V + (sub * _DELTA)
    lat.vertex_pos = pos

    edge_lookup = {}
    for c, verts, bonds in face_data:
        for (u, v), (bond, bc) in zip(
            [(verts[i], verts[(i + 1) % 6]) for i in range(6)], bonds
        ):
            key = (bond, bc)
            if key in edge_lookup:
                continue
            bu, bv = (u, v) if lat.vertex_cell[u][2] == 1 else (v, u)
            e = Edge(len(lat.edges), bu, bv, bond, _BOND_LABEL[bond], _edge_color(bond, *bc), bc)
            lat.edges.append(e)
            edge_lookup[key] = e
    lat._index()

    for c, verts, bonds in face_data:
        edge_ids = [edge_lookup[(b, bc)].id for b, bc in bonds]
        vs, es = _orient_cycle(lat, verts, edge_ids)
        lat.plaquettes.append(Plaquette(len(lat.plaquettes), c, _col(*c), vs, es))
    lat._index()

    # boundary bivalent vertices: degree-2 vertices missing exactly their 0-edge
    for v in range(lat.n_vertices):
        deg = len(lat._vertex_edges[v])
        if deg == 2:
            missing = (set("xyz") - set(lat._vertex_edges[v])).pop()
            lat.boundary_vertices.append(v)
            lat.missing_edge_label[v] = missing
        elif deg != 3:
            raise FloquetError(f"planar construction produced degree-{deg} vertex {v}")
    _validate(lat)
    if not lat.boundary_vertices:
        raise FloquetError("planar patch has no boundary vertices")
    for v in lat.boundary_vertices:
        labels = {lat.edges[lat._vertex_edges[v][l].id].color for l in lat._vertex_edges[v]}
        if 0 in labels:
            raise FloquetError("bivalent vertex retains a 0-edge; cut geometry inconsistent")
        faces_at_v = lat.vertex_plaquettes(v)
        zero_faces = [p for p in faces_at_v if lat.plaquettes[p].color == 0]
        if len(zero_faces) != 1 or len(faces_at_v) != 1:
            raise FloquetError("bivalent vertex must belong to exactly one 0-plaquette")
    return lat


def _validate(lat: HexLattice):
    # one edge of each label and color per trivalent vertex
    for v in range(lat.n_vertices):
        edges = list(lat._vertex_edges[v].values())
        if len(edges) == 3:
            assert {e.label for e in edges} == set("xyz")
            assert {e.color for e in edges} == {0, 1, 2}
    # every edge joins two faces of the two other colors (where both faces exist)
    face_of_edge: dict[int, list[int]] = {}
    for p in lat.plaquettes:
        for e in p.edges:
            face_of_edge.setdefault(e, []).append(p.id)
    for e in lat.edges:
        owners = face_of_edge.get(e.id, [])
        assert len(owners) <= 2
        for pid in owners:
            assert lat.plaquettes[pid].color != e.color
    euler = lat.n_vertices - len(lat.edges) + len(lat.plaquettes)
    expected = 0 if lat.is_torus else 1
    if euler != expected:
        raise FloquetError(f"Euler check failed: V-E+P = {euler}, expected {expected}")
