"""Square-lattice Z2 toric code with fermion condensation lines.

Static (non-Floquet) oracle for the defect methodology: a qubit sits on each
edge, stabilizers are the vertex stars A_v (X on incident edges) and
plaquettes B_p (Z around a face).  Condensing the emergent fermion along a
dual-lattice path replaces the stabilizers that detect the fermion pairs with
2-body short strings; twist defects appear at the path endpoints.

The "infinite plane" of the construction is realized as a finite patch with
open boundary; assertions should stay a few lattice spacings inside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DecompositionError, FloquetError
from .pauli import PauliWord, product
from .stabilizer import (
    StabilizerGroup,
    solve_violation_pattern,
    span_contains,
    span_of,
    words_to_vectors,
)
from .modmath import kernel

__all__ = ["SquareToricCode", "build_toric", "short_string", "condense_fermion_line", "verify_tc_twist"]


@dataclass(frozen=True)
class DualStep:
    """One step of a dual-lattice path between neighboring plaquettes."""

    plaquette: tuple[int, int]
    direction: str  # "right" | "up" | "left" | "down"


class SquareToricCode:
    """Vertex/plaquette stabilizers on a torus or an open planar patch."""

    def __init__(self, width: int, height: int, torus: bool):
        if width < 2 or height < 2:
            raise FloquetError("degenerate lattice dimensions")
        self.width = width
        self.height = height
        self.torus = bool(torus)
        self._edge_ids: dict[tuple, int] = {}
        for j in range(height):
            for i in range(width):
                if torus or i + 1 < width:
                    self._edge_ids[("h", i, j)] = len(self._edge_ids)
                if torus or j + 1 < height:
                    self._edge_ids[("v", i, j)] = len(self._edge_ids)
        self.n = len(self._edge_ids)
        self.vertex_stars: dict[tuple[int, int], PauliWord] = {}
        self.plaquette_ops: dict[tuple[int, int], PauliWord] = {}
        for j in range(height):
            for i in range(width):
                star = [
                    self.edge("h", i, j),
                    self.edge("h", i - 1, j),
                    self.edge("v", i, j),
                    self.edge("v", i, j - 1),
                ]
                word = PauliWord.identity(self.n, 2)
                for e in star:
                    if e is not None:
                        word = word * PauliWord.x_op(e, self.n, 2)
                self.vertex_stars[(i, j)] = word
                plaq = [
                    self.edge("h", i, j),
                    self.edge("v", i, j),
                    self.edge("h", i, j + 1),
                    self.edge("v", i + 1, j),
                ]
                if all(e is not None for e in plaq):
                    word = PauliWord.identity(self.n, 2)
                    for e in plaq:
                        word = word * PauliWord.z_op(e, self.n, 2)
                    self.plaquette_ops[(i, j)] = word
        self.condensation_lines: list[list[DualStep]] = []
        self.piece_groups: list[list[PauliWord]] = []
        self._stabilizers: list[PauliWord] | None = None

    # -- lattice helpers ----------------------------------------------------------

    def edge(self, kind: str, i: int, j: int) -> int | None:
        if self.torus:
            return self._edge_ids[(kind, i % self.width, j % self.height)]
        return self._edge_ids.get((kind, i, j))

    def edge_midpoint(self, eid: int) -> np.ndarray:
        kind, i, j = next(k for k, v in self._edge_ids.items() if v == eid)
        return np.array([i + 0.5, j]) if kind == "h" else np.array([i, j + 0.5])

    def stabilizers(self) -> list[PauliWord]:
        """Current stabilizer generators (S_TC, or S'_TC after condensation)."""
        if self._stabilizers is None:
            return list(self.vertex_stars.values()) + list(self.plaquette_ops.values())
        return self._stabilizers

    def group(self) -> StabilizerGroup:
        return StabilizerGroup(self.n, 2, self.stabilizers())

    def logical_count(self):
        return self.group().logical_count()


def build_toric(width: int, height: int, torus: bool = True) -> SquareToricCode:
    return SquareToricCode(width, height, torus)


def short_string(code: SquareToricCode, species: str, step) -> PauliWord:
    """Short string operator at an edge (e, m) or along a dual step (psi).

    e: a single Z; m: a single X; psi: the 2-body word that moves the
    fermion one dual step, violating one star and one plaquette at each end.
    """
    if species == "e":
        return PauliWord.z_op(step, code.n, 2)
    if species == "m":
        return PauliWord.x_op(step, code.n, 2)
    if species != "psi":
        raise FloquetError(f"unknown species {species!r}")
    (i, j), direction = step.plaquette, step.direction
    if direction == "right":
        xe, ze = code.edge("v", i + 1, j), code.edge("h", i, j)
    elif direction == "left":
        xe, ze = code.edge("v", i, j), code.edge("h", i - 1, j)
    elif direction == "up":
        xe, ze = code.edge("h", i, j + 1), code.edge("v", i, j)
    else:  # down
        xe, ze = code.edge("h", i, j), code.edge("v", i, j - 1)
    if xe is None or ze is None:
        raise FloquetError("psi short string leaves the patch")
    return PauliWord.x_op(xe, code.n, 2) * PauliWord.z_op(ze, code.n, 2)


def _walk(path: list[DualStep]) -> list[tuple[int, int]]:
    moves = {"right": (1, 0), "left": (-1, 0), "up": (0, 1), "down": (0, -1)}
    cells = [path[0].plaquette]
    for step in path:
        if step.plaquette != cells[-1]:
            raise FloquetError("dual path steps are not consecutive")
        d = moves[step.direction]
        cells.append((step.plaquette[0] + d[0], step.plaquette[1] + d[1]))
    if len(set(cells)) != len(cells):
        raise FloquetError("dual path is self-intersecting")
    return cells


def dual_path(cells: list[tuple[int, int]]) -> list[DualStep]:
    """Dual steps through the given sequence of neighboring plaquettes."""
    dirs = {(1, 0): "right", (-1, 0): "left", (0, 1): "up", (0, -1): "down"}
    return [
        DualStep(a, dirs[(b[0] - a[0], b[1] - a[1])]) for a, b in zip(cells, cells[1:])
    ]


def condense_fermion_line(code: SquareToricCode, path: list[DualStep]) -> SquareToricCode:
    """Condense the emergent fermion along a dual path.

    The fermion string along the path is re-decomposed into 2-body short
    strings that (i) commute, (ii) have disjoint supports, and (iii) each
    create a fermion pair; at corners this pairs X with Y rather than X with
    Z.  The new stabilizer group keeps exactly the elements of the old group
    (extended by the pieces) that commute with every old stabilizer.
    """
    cells = _walk(path)
    w_total = product([short_string(code, "psi", s) for s in path], code.n, 2)
    support = [int(v) for v in w_total.support]
    # order support edges along the path
    order = []
    for s in path:
        piece = short_string(code, "psi", s)
        for e in (int(v) for v in piece.support):
            if e in support and e not in order:
                order.append(e)
    pieces = None
    for head in (0, 1):
        for tail in (0, 1):
            core = order[head : len(order) - tail if tail else len(order)]
            if len(core) % 2 or not core:
                continue
            cand = [
                w_total.restrict(core[k : k + 2]) for k in range(0, len(core), 2)
            ]
            if _valid_pieces(code, cand):
                pieces = cand
                break
        if pieces is not None:
            break
    if pieces is None:
        raise DecompositionError(
            f"no commuting 2-body re-pairing for the dual path through {cells[:3]}..."
        )
    new = SquareToricCode(code.width, code.height, code.torus)
    new.condensation_lines = code.condensation_lines + [path]
    new.piece_groups = code.piece_groups + [pieces]
    all_pieces = [w for grp in new.piece_groups for w in grp]
    base = list(new.vertex_stars.values()) + list(new.plaquette_ops.values())
    pool = base + all_pieces
    # elements of <S_TC, pieces> commuting with every short string survive
    pool_vecs = words_to_vectors(pool, code.n, 2)
    piece_vecs = words_to_vectors(all_pieces, code.n, 2)
    Xp, Zp = pool_vecs[:, : code.n], pool_vecs[:, code.n :]
    Xq, Zq = piece_vecs[:, : code.n], piece_vecs[:, code.n :]
    comm = (Zp @ Xq.T - Xp @ Zq.T) % 2
    combos = kernel(comm, 2)
    gens = []
    for row in combos:
        word = PauliWord.identity(code.n, 2)
        for idx in np.nonzero(row % 2)[0]:
            word = word * pool[int(idx)]
        if not word.is_identity(up_to_phase=True):
            gens.append(word)
    new._stabilizers = gens
    return new


def _valid_pieces(code: SquareToricCode, pieces: list[PauliWord]) -> bool:
    vec = words_to_vectors(pieces, code.n, 2)
    X, Z = vec[:, : code.n], vec[:, code.n :]
    if ((Z @ X.T - X @ Z.T) % 2).any():
        return False
    supports = [set(int(v) for v in w.support) for w in pieces]
    for a in range(len(pieces)):
        if len(supports[a]) != 2:
            return False
        for b in range(a + 1, len(pieces)):
            if supports[a] & supports[b]:
                return False
    # each piece creates a fermion pair: two star and two plaquette violations
    stars = list(code.vertex_stars.values())
    plaqs = list(code.plaquette_ops.values())
    for w in pieces:
        sviol = sum(1 for s in stars if s.comm_exponent(w))
        pviol = sum(1 for p in plaqs if p.comm_exponent(w))
        if (sviol, pviol) != (2, 2):
            return False
    return True


@dataclass
class ToricTwistReport:
    crossing: bool
    condensation: dict[int, bool]
    order_parameter: complex
    ok: bool


def _interior_margin_ok(code: SquareToricCode, point: np.ndarray, margin: float = 2.0) -> bool:
    if code.torus:
        return True
    return (
        margin <= point[0] <= code.width - 1 - margin
        and margin <= point[1] <= code.height - 1 - margin
    )


def verify_tc_twist(code: SquareToricCode) -> ToricTwistReport:
    """Crossing-string, endpoint condensation, and order-parameter checks."""
    if len(code.condensation_lines) != 1:
        raise FloquetError("verification expects exactly one condensation line")
    path = code.condensation_lines[0]
    cells = _walk(path)
    mid = np.mean([np.array(c) + 0.5 for c in cells], axis=0)
    a = np.array(cells[0]) + 0.5
    b = np.array(cells[-1]) + 0.5
    direction = b - a
    norm = np.linalg.norm(direction)
    perp = np.array([-direction[1], direction[0]]) / (norm if norm else 1.0)
    span = words_to_vectors(code.stabilizers(), code.n, 2)

    def corridor(p1, p2, radius):
        out = set()
        seg = p2 - p1
        L2 = float(seg @ seg)
        for eid in range(code.n):
            q = code.edge_midpoint(eid)
            t = 0.0 if L2 == 0 else float(np.clip((q - p1) @ seg / L2, 0.0, 1.0))
            if np.linalg.norm(q - (p1 + t * seg)) <= radius:
                out.add(eid)
        return out

    def nearest_star(point):
        verts = sorted(code.vertex_stars)
        return min(verts, key=lambda v: np.linalg.norm(np.array(v) - point))

    def nearest_plaq(point):
        plaqs = sorted(code.plaquette_ops)
        return min(plaqs, key=lambda p: np.linalg.norm(np.array(p) + 0.5 - point))

    crossing = False
    for reach in (2.5, 3.5):
        v_e = nearest_star(mid + reach * perp)
        p_m = nearest_plaq(mid - reach * perp)
        anchors = [(code.vertex_stars[v_e], 1), (code.plaquette_ops[p_m], 1)]
        corr = corridor(mid + (reach + 0.7) * perp, mid - (reach + 0.7) * perp, 1.6)
        w = solve_violation_pattern(code.n, 2, span, anchors, corr)
        if w is not None:
            crossing = True
            break

    condensation: dict[int, bool] = {}
    for endpoint_cell in (cells[0], cells[-1]):
        pos = np.array(endpoint_cell) + 0.5
        out_dir = (pos - mid) / max(np.linalg.norm(pos - mid), 1e-9)
        found = False
        for reach in (3.0, 4.0):
            away = pos + out_dir * reach
            v_far = nearest_star(away)
            p_far = nearest_plaq(away)
            anchors = [(code.vertex_stars[v_far], 1), (code.plaquette_ops[p_far], 1)]
            corr = corridor(pos, away, 1.8)
            w = solve_violation_pattern(code.n, 2, span, anchors, corr)
            if w is not None:
                found = True
                break
        condensation[len(condensation)] = found

    # order parameter: fermion string between interior plaquettes of the line
    pieces = code.piece_groups[0]
    w_mid = product(pieces, code.n, 2)
    order = abs(StabilizerGroup(code.n, 2, code.stabilizers()).expectation(w_mid))
    ok = crossing and all(condensation.values()) and abs(order - 1) < 1e-9
    return ToricTwistReport(crossing, condensation, order, ok)
