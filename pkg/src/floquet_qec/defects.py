"""Defect lines from fermion condensation: insertion, verification, logicals.

A defect line along an odd open path gamma is created by (i) building the
fermion (or m e^q) string along gamma, (ii) stripping the Pauli factors at the
two endpoint vertices, (iii) splitting the rest into 2-body defect checks on
consecutive vertex pairs, and (iv) removing every original check that fails to
commute with a defect check.  Twist defects live at the stripped endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import (
    DefectConflictError,
    FloquetError,
    InferenceImpossibleError,
    InsufficientDefectsError,
    PathCompletionError,
)
from .floquet import FloquetCode, Schedule, comm_matrix
from .lattice import HexLattice, LatticePath
from .modmath import solve_left
from .pauli import PauliWord, product
from .stabilizer import StabilizerGroup, words_to_vectors

__all__ = [
    "DefectLine",
    "StaticStabilizerSet",
    "WindowOracle",
    "alternating_path",
    "path_distance",
    "place_parallel_lines",
    "fermion_string",
    "insert_defect_line",
    "defect_schedule",
    "defect_connecting_string",
    "logical_defect_operators",
    "logical_pairs",
    "static_stabilizers",
    "verify_defect_line",
    "verify_inference",
    "steady_state_group",
]


def path_distance(lat: HexLattice, a: LatticePath, b: LatticePath) -> float:
    """Minimal Euclidean distance between two paths' vertices (torus-aware)."""
    pa = np.array([lat.vertex_pos[v] for v in a.vertices])
    pb = np.array([lat.vertex_pos[v] for v in b.vertices])
    shifts = [np.zeros(2)]
    vecs = lat.lattice_vectors()
    if vecs is not None:
        u, v = vecs
        shifts = [i * u + j * v for i in (-1, 0, 1) for j in (-1, 0, 1)]
    best = np.inf
    for s in shifts:
        d = np.linalg.norm(pa[:, None, :] - (pb + s)[None, :, :], axis=2).min()
        best = min(best, float(d))
    return best


def place_parallel_lines(
    code: FloquetCode, k: int, length: int = 3, removed_color: int = 0, min_gap: float = 2.0
) -> list[LatticePath]:
    """Greedily place k non-overlapping zigzag defect paths, keeping them at
    least min_gap apart and away from any boundary."""
    lat = code.lattice
    candidates = []
    for v in range(lat.n_vertices):
        if v in lat.boundary_vertices:
            continue
        try:
            p = alternating_path(lat, v, removed_color, length)
        except (StopIteration, FloquetError):
            continue
        if set(p.vertices) & set(lat.boundary_vertices):
            continue
        if lat.boundary_vertices:
            pts = lat.lift_path(p)
            clearance = min(
                np.linalg.norm(lat.vertex_pos[b] - q) for b in lat.boundary_vertices for q in pts
            )
            if clearance < min_gap:
                continue
        candidates.append(p)
    chosen: list[LatticePath] = []
    for p in candidates:
        if len(chosen) == k:
            break
        if any(set(p.vertices) & set(q.vertices) for q in chosen):
            continue
        if any(path_distance(lat, p, q) < min_gap for q in chosen):
            continue
        chosen.append(p)
    if len(chosen) < k:
        raise FloquetError(f"could not place {k} separated defect lines (got {len(chosen)})")
    return chosen


def alternating_path(lat: HexLattice, v0: int, removed_color: int, n_edges: int) -> LatticePath:
    """Straight zigzag from v0 whose odd-position edges all have one color.

    Edge colors run c, a, c, b, c, a, ... where c = removed_color and a, b are
    the other two colors; a defect line on such a path removes only c-checks.
    Using a single alternate color instead would circle a hexagon.
    """
    others = sorted({0, 1, 2} - {removed_color})
    seq = [v0]
    v = v0
    for i in range(n_edges):
        want = removed_color if i % 2 == 0 else others[(i // 2) % 2]
        e = next(e for e in lat.vertex_edges(v).values() if e.color == want)
        v = e.u if e.v == v else e.v
        seq.append(v)
    return LatticePath.from_vertices(lat, seq)


@dataclass
class DefectLine:
    index: int
    path: LatticePath
    defect_checks: list[PauliWord]
    removed_edges: list[int]
    endpoints: tuple[int, int]

    @property
    def interior_vertices(self) -> tuple[int, ...]:
        return self.path.vertices[1:-1]


@dataclass
class StaticStabilizerSet:
    generators: list[PauliWord]
    labels: list[str]  # "plaquette:<id>" | "defect:<line>:<piece>" | "product:<k>"
    pairing_ok: bool = True  # every modeled single error flips exactly two generators


# -- geometry: enclosed faces of a contractible loop --------------------------------


def _polygon_winding(points: np.ndarray, q: np.ndarray) -> int:
    """Winding number of a closed polyline around q (points[0] == points[-1])."""
    angles = np.arctan2(points[:, 1] - q[1], points[:, 0] - q[0])
    d = np.diff(angles)
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return int(round(d.sum() / (2 * np.pi)))


def _enclosed_faces(lat: HexLattice, loop: LatticePath) -> tuple[list[int], int]:
    """Face ids enclosed by a contractible loop and its orientation (+1 = CCW).

    Faces are tested against every lattice translate of their canonical
    center that falls inside the loop's bounding box (universal cover).
    """
    pts = lat.lift_path(loop)
    if not np.allclose(pts[0], pts[-1], atol=1e-6):
        raise PathCompletionError("loop does not close in the universal cover")
    area = 0.5 * np.sum(pts[:-1, 0] * pts[1:, 1] - pts[1:, 0] * pts[:-1, 1])
    orientation = 1 if area > 0 else -1
    lo = pts.min(axis=0) - 1.0
    hi = pts.max(axis=0) + 1.0
    vecs = lat.lattice_vectors()
    shifts = [np.zeros(2)]
    if vecs is not None:
        a, b = vecs
        # enough translates to cover the bounding box
        reach = 2 + int(np.ceil((np.linalg.norm(hi - lo)) / min(np.linalg.norm(a), np.linalg.norm(b))))
        shifts = [
            i * a + j * b for i in range(-reach, reach + 1) for j in range(-reach, reach + 1)
        ]
    enclosed = []
    for p in lat.plaquettes:
        c = lat.face_center(p)
        count = 0
        for s in shifts:
            q = c + s
            if not (lo[0] <= q[0] <= hi[0] and lo[1] <= q[1] <= hi[1]):
                continue
            count += abs(_polygon_winding(pts, q))
        if count % 2:
            enclosed.append(p.id)
        elif count:
            raise PathCompletionError("loop winds a face more than once")
    return enclosed, orientation


def _cover_completion(lat: HexLattice, path: LatticePath) -> LatticePath:
    """Path from the end of ``path`` back to its start that closes the loop in
    the universal cover (hence the loop is contractible), avoiding the open
    path's interior vertices."""
    pts = lat.lift_path(path)
    start_v, end_v = path.vertices[0], path.vertices[-1]
    target = tuple(np.round(pts[0], 4))
    avoid = set(path.vertices[1:-1])
    lo = pts.min(axis=0) - 6.0
    hi = pts.max(axis=0) + 6.0
    seen = {(end_v, tuple(np.round(pts[-1], 4))): None}
    queue = [(end_v, pts[-1])]
    keyq = [(end_v, tuple(np.round(pts[-1], 4)))]
    while queue:
        (v, pos), key = queue.pop(0), keyq.pop(0)
        if v == start_v and tuple(np.round(pos, 4)) == target:
            seq = [v]
            cur = key
            while seen[cur] is not None:
                cur = seen[cur]
                seq.append(cur[0])
            seq.reverse()
            return LatticePath.from_vertices(lat, seq)
        for w in sorted(lat.neighbors(v)):
            if w in avoid:
                continue
            npos = pos + lat.step_displacement(v, w)
            if not (lo[0] <= npos[0] <= hi[0] and lo[1] <= npos[1] <= hi[1]):
                continue
            nkey = (w, tuple(np.round(npos, 4)))
            if nkey not in seen:
                seen[nkey] = key
                queue.append((w, npos))
                keyq.append(nkey)
    raise PathCompletionError("no contractible completion found for the open path")


def fermion_string(code: FloquetCode, path: LatticePath) -> PauliWord:
    """Invariant-anyon string along a path.

    N = 2: the ordered product of check operators along the path.  N > 2: the
    m e^q string, built as the product of the plaquette stabilizers enclosed by
    a clockwise completion of the path, truncated to the path's vertices.
    """
    N = code.params.N
    if N == 2:
        return product([code.check_word(("e", eid)) for eid in path.edges], code.n, 2)
    if path.closed:
        loop = path
    else:
        completion = _cover_completion(code.lattice, path)
        loop = LatticePath.from_vertices(
            code.lattice, list(path.vertices) + list(completion.vertices[1:])
        )
    enclosed, orientation = _enclosed_faces(code.lattice, loop)
    w = product([code.plaquette_stabilizer(p) for p in enclosed], code.n, N)
    if orientation > 0:  # clockwise convention: CCW loops carry the adjoint
        w = w.adjoint()
    if path.closed:
        return w
    return w.restrict(path.vertices)


# -- insertion -------------------------------------------------------------------------


def insert_defect_line(code: FloquetCode, path: LatticePath) -> tuple[FloquetCode, DefectLine]:
    """Condense the invariant anyon along an odd open path; returns a new code."""
    if path.closed:
        raise FloquetError("defect lines live on open paths")
    if len(path) % 2 == 0:
        raise FloquetError("defect path must have odd length (even paths need a 3-body check)")
    if len(path) < 3:
        raise FloquetError("defect path must contain at least 3 edges")
    occupied = {v for line in code.defect_lines for v in line.path.vertices}
    if occupied & set(path.vertices):
        raise DefectConflictError("defect path overlaps an existing defect line")

    n, N = code.n, code.params.N
    w = fermion_string(code, path)
    support = set(int(v) for v in w.support)
    if support != set(path.vertices):
        raise FloquetError("fermion string support does not match the path")
    interior = path.vertices[1:-1]
    stripped = w.restrict(interior)
    pieces = []
    for j in range(0, len(interior), 2):
        pair = interior[j : j + 2]
        piece = code._normalize_order(stripped.restrict(pair))
        pieces.append(piece)

    piece_vecs = words_to_vectors(pieces, n, N)
    if comm_matrix(piece_vecs, piece_vecs, n, N).any():
        raise FloquetError("defect checks fail to commute with each other")
    for line in code.defect_lines:
        old = words_to_vectors(line.defect_checks, n, N)
        if comm_matrix(piece_vecs, old, n, N).any():
            raise DefectConflictError("defect checks conflict with an existing line")

    removed = []
    for e in code.lattice.edges:
        if e.id in code.removed_edges:
            continue
        k = code.check_word(("e", e.id))
        if any(k.comm_exponent(piece) for piece in pieces):
            removed.append(e.id)
    for v, site in code.site_checks.items():
        if any(site.comm_exponent(piece) for piece in pieces):
            raise DefectConflictError("defect line too close to the boundary checks")
    l = len(path) // 2
    if len(pieces) != l or len(removed) != l + 1:
        raise FloquetError(
            f"unexpected defect structure: {len(pieces)} checks, {len(removed)} removed (l={l})"
        )

    new = FloquetCode.__new__(FloquetCode)
    new.lattice = code.lattice
    new.params = code.params
    new._edge_words = code._edge_words
    new.site_checks = code.site_checks
    new._plaquette_words = code._plaquette_words
    new.removed_edges = set(code.removed_edges) | set(removed)
    new.defect_lines = list(code.defect_lines)
    new.defect_check_words = dict(code.defect_check_words)
    idx = len(new.defect_lines)
    line = DefectLine(idx, path, pieces, sorted(removed), (path.vertices[0], path.vertices[-1]))
    new.defect_lines.append(line)
    for j, piece in enumerate(pieces):
        new.defect_check_words[("d", idx, j)] = piece

    active = words_to_vectors(new.active_check_words(), n, N)
    if comm_matrix(piece_vecs, active, n, N).any():
        raise FloquetError("a defect check fails to commute with a surviving check")
    return new, line


def defect_schedule(code: FloquetCode, d: int, six_round: bool = False) -> Schedule:
    """Initialization with d-1 plain periods, then defect periods.

    Three-round period (0~*, 1*, 2*) by default; the six-round variant
    (0~*, 1*, 2*, 1*, 0~*, 2*) requires every removed check to be a 0- or
    1-check, otherwise the products of plaquettes along the line can never be
    re-inferred.
    """
    if not code.has_defects:
        raise FloquetError("defect schedule requires defect lines")
    if d < 1:
        raise FloquetError("distance must be >= 1")
    if six_round:
        bad = [e for e in code.removed_edges if code.lattice.edges[e].color == 2]
        if bad:
            raise InferenceImpossibleError(
                "six-round schedule cannot infer products over removed 2-checks"
            )
        period = ("0~*", "1*", "2*", "1*", "0~*", "2*")
    else:
        period = ("0~*", "1*", "2*")
    init = ("2", "0", "1", "2") + ("0", "1", "2") * (d - 1)
    return Schedule(init, period)


# -- logical strings ----------------------------------------------------------------


def defect_connecting_string(
    code: FloquetCode, va: int, vb: int, avoid: set[int] | None = None
) -> PauliWord:
    """Fermion (m e^q) string between two twist-defect sites, endpoint-dressed
    so it commutes with every active check."""
    lat = code.lattice
    n, N = code.n, code.params.N
    line_vertices = {v for line in code.defect_lines for v in line.path.vertices}
    block = (line_vertices | (avoid or set())) - {va, vb}
    path = lat.shortest_path(va, vb, avoid=block)
    if path is None:
        raise FloquetError(f"no connecting path between twist sites {va} and {vb}")
    base = fermion_string(code, path).restrict(path.vertices[1:-1])
    # endpoint dressing: one single-qudit factor at each end
    unknown_sites = [va, vb]
    checks = code.active_check_words()
    rows = []
    for v in unknown_sites:
        rows.append(words_to_vectors([PauliWord.x_op(v, n, N)], n, N)[0])
        rows.append(words_to_vectors([PauliWord.z_op(v, n, N)], n, N)[0])
    rows = np.stack(rows)
    cvecs = words_to_vectors(checks, n, N)
    A = comm_matrix(rows, cvecs, n, N)
    target = (-comm_matrix(words_to_vectors([base], n, N), cvecs, n, N)[0]) % N
    coeffs = solve_left(A, target, N)
    if coeffs is None:
        raise FloquetError("no endpoint dressing makes the string commute with the checks")
    dress = PauliWord.from_factors(
        n, N, {va: (int(coeffs[0]), int(coeffs[1])), vb: (int(coeffs[2]), int(coeffs[3]))}
    )
    return base * dress


def logical_defect_operators(code: FloquetCode, include_redundant: bool = False) -> list[PauliWord]:
    """One fermion string per defect line connecting its own twist defects.

    k lines give k such strings; the product of all of them is generated by
    the remaining instantaneous stabilizers, so only k-1 are returned unless
    include_redundant is set.
    """
    k = len(code.defect_lines)
    if k < 2:
        raise InsufficientDefectsError("need at least two defect lines to encode logical qudits")
    out = []
    for line in code.defect_lines:
        va, vb = line.endpoints
        out.append(defect_connecting_string(code, va, vb))
    return out if include_redundant else out[:-1]


def logical_pairs(code: FloquetCode) -> list[tuple[PauliWord, PauliWord]]:
    """(Z-type, X-type) invariant string pairs for the defect-encoded qudits.

    Z_i connects the endpoints of line i; X_i connects line i to line i+1,
    anticommuting with Z_i and commuting with the other pairs.
    """
    k = len(code.defect_lines)
    if k < 2:
        raise InsufficientDefectsError("need at least two defect lines")
    pairs = []
    for i in range(k - 1):
        z = defect_connecting_string(code, *code.defect_lines[i].endpoints)
        x = defect_connecting_string(
            code, code.defect_lines[i].endpoints[1], code.defect_lines[i + 1].endpoints[0]
        )
        pairs.append((z, x))
    return pairs


# -- static stabilizers -----------------------------------------------------------------


def model_single_errors(code: FloquetCode) -> list[tuple[int, int, PauliWord]]:
    """(vertex, round color, Pauli) for the simplified noise model.

    A Pauli error matching the measured check letter strikes one endpoint right
    after the check is measured.  Single-site checks are excluded: their
    matching Pauli is the check itself and acts trivially after measurement.
    """
    out = []
    for r in range(3):
        for e in code.lattice.edges_of_color(r):
            if e.id in code.removed_edges:
                continue
            for v in e.endpoints:
                out.append((v, r, code._site_factor(v, e.label)))
    return out


def _error_flip_counts(
    code: FloquetCode,
    gens: list[PauliWord],
    vertices: set[int] | None = None,
    exclude: list[PauliWord] | None = None,
) -> np.ndarray:
    """Per-error count of anticommuting generators; errors touching any of
    the exclude words are dropped (their tracks are not in gens yet)."""
    n, N = code.n, code.params.N
    gvec = words_to_vectors(gens, n, N)
    errors = [w for v, _, w in model_single_errors(code) if vertices is None or v in vertices]
    if exclude:
        xvec = words_to_vectors(exclude, n, N)
        errors = [
            w
            for w in errors
            if not comm_matrix(xvec, words_to_vectors([w], n, N), n, N).any()
        ]
    evec = words_to_vectors(errors, n, N)
    if evec.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return (comm_matrix(gvec, evec, n, N) != 0).sum(axis=0)


def _choose_multipliers(
    code: FloquetCode,
    fixed: list[PauliWord],
    plain: list[PauliWord],
    dwords: list[PauliWord],
    allowed: set[int],
) -> list[PauliWord]:
    """Pick defect-check multipliers minimizing non-pair error flips.

    Exhaustive joint search for small layouts, otherwise iterated local
    search dressing each product with defect checks neighboring its support.
    Returns the best assignment found; the caller records whether exact
    pairing was achieved (it is provably unachievable for some multi-line
    layouts once the cross-line static products are tracked).
    """
    from itertools import combinations as icombos
    from itertools import product as iproduct

    lat = code.lattice
    n, N = code.n, code.params.N
    bits = len(plain) * len(dwords)
    if bits <= 12:
        best_words, best_bad = list(plain), None
        for choice in sorted(
            iproduct(*[range(2 ** len(dwords))] * len(plain)),
            key=lambda c: sum(bin(x).count("1") for x in c),
        ):
            cand = []
            for word, subset in zip(plain, choice):
                for j in range(len(dwords)):
                    if subset >> j & 1:
                        word = word * dwords[j]
                cand.append(word)
            counts = _error_flip_counts(code, fixed + cand)
            bad = int(sum(1 for c in counts if c not in allowed))
            if best_bad is None or bad < best_bad:
                best_words, best_bad = cand, bad
            if bad == 0:
                break
        return best_words

    def near_support(word, hops=2):
        out = set(int(v) for v in word.support)
        for _ in range(hops):
            for v in list(out):
                out.update(lat.neighbors(v))
        return out

    relevant = []
    for wp in plain:
        supp = near_support(wp, hops=1)
        relevant.append([j for j, d in enumerate(dwords) if set(int(v) for v in d.support) & supp])
    chosen = list(plain)
    for _ in range(4):
        changed = False
        for k, base in enumerate(plain):
            region = near_support(base)
            best_word, best_bad = None, None
            options = []
            for r in range(len(relevant[k]) + 1):
                options.extend(icombos(relevant[k], r))
            for subset in options:
                word = base
                for j in subset:
                    word = word * dwords[j]
                trial = fixed + [w for i, w in enumerate(chosen) if i != k] + [word]
                counts = _error_flip_counts(code, trial, region)
                bad = int(sum(1 for c in counts if c not in allowed))
                if best_bad is None or bad < best_bad:
                    best_word, best_bad = word, bad
                if bad == 0:
                    break
            if not best_word.equals_up_to_phase(chosen[k]):
                chosen[k] = best_word
                changed = True
        if not changed:
            break
    return chosen


def _span_intersection(A: np.ndarray, B: np.ndarray, N: int) -> np.ndarray:
    """Rows spanning rowspan(A) ∩ rowspan(B) over Z_N (Zassenhaus-style)."""
    from .modmath import howell, kernel as _kernel

    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.zeros((0, A.shape[1]), dtype=np.int64)
    M = np.vstack([A, B])
    K = _kernel(M, N)  # rows (a | b) with a@A = -b@B
    if K.shape[0] == 0:
        return np.zeros((0, A.shape[1]), dtype=np.int64)
    inter = (K[:, : A.shape[0]] @ A) % N
    return howell(inter, N)


def static_stabilizers(code: FloquetCode, schedule: Schedule | None = None) -> StaticStabilizerSet:
    """Stabilizers present in every ISG, chosen so single errors flip pairs.

    Untouched plaquettes, defect checks, and the periodically re-inferable
    products of touched plaquettes times defect checks.  The product space is
    the part of the defect-check centralizer that the periodic schedule alone
    determines (the rest carries the logical information fixed at insertion);
    each basis product is then multiplied by a subset of defect checks, found
    by search, so that every single error of the simplified noise model flips
    exactly two generators (or one next to a boundary).
    """
    from itertools import product as iproduct

    from .modmath import howell, reduce_row

    key = tuple(schedule.period) if schedule is not None else None
    cache = getattr(code, "_static_cache", None)
    if cache is None:
        cache = {}
        code.__dict__["_static_cache"] = cache
    if key in cache:
        return cache[key]

    lat = code.lattice
    n, N = code.n, code.params.N
    gens: list[PauliWord] = []
    labels: list[str] = []
    touched_all = set(code.touched_plaquettes())
    for p in lat.plaquettes:
        if p.id not in touched_all:
            gens.append(code.plaquette_stabilizer(p.id))
            labels.append(f"plaquette:{p.id}")
    for (tag, li, j), w in sorted(code.defect_check_words.items()):
        gens.append(w)
        labels.append(f"defect:{li}:{j}")

    if code.defect_lines:
        from .modmath import kernel as _kernel

        sched = schedule or defect_schedule(code, d=1)
        twords = [code.plaquette_stabilizer(p) for p in sorted(touched_all)]
        tvec = words_to_vectors(twords, n, N)
        dwords = list(code.defect_check_words.values())
        dvec = words_to_vectors(dwords, n, N)
        combos = _kernel(comm_matrix(tvec, dvec, n, N), N)
        kernel_vecs = (combos @ tvec) % N if combos.size else np.zeros((0, 2 * n), dtype=np.int64)
        candidates = np.vstack([kernel_vecs, dvec]) if kernel_vecs.size else dvec
        steady = steady_state_group(code, sched, periods=3)
        steady_vecs = words_to_vectors(steady.generators, n, N)
        inferable = _span_intersection(candidates % N, steady_vecs, N)
        # quotient out the defect checks themselves (tracked separately), then
        # choose a basis adapted to the lines: per-line products first, then
        # the cross-line leftovers (fermion-parity pair products)
        dspan = howell(dvec, N)
        rows = []
        for i in range(inferable.shape[0]):
            residual, _ = reduce_row(dspan, inferable[i], N)
            if residual.any():
                rows.append(residual)
        # Among all elements of the inferable quotient space, pick a basis of
        # minimal-support representatives: small supports keep each touched
        # plaquette in as few tracks as possible, which is what makes the
        # pair-flip property achievable.
        basis_rows: list[np.ndarray] = []
        if rows:
            inferable_q = howell(np.stack(rows), N)
            r = inferable_q.shape[0]
            if N == 2 and r <= 10:
                candidates = []
                for mask in range(1, 2 ** r):
                    coeff = np.array([(mask >> i) & 1 for i in range(r)], dtype=np.int64)
                    vec = (coeff @ inferable_q) % 2
                    vec, _ = reduce_row(dspan, vec, 2)
                    if vec.any():
                        support = int(np.count_nonzero(vec[:n] | vec[n:]))
                        candidates.append((support, mask, vec))
                candidates.sort(key=lambda c: (c[0], c[1]))
                have = dspan
                for support, mask, vec in candidates:
                    residual, _ = reduce_row(have, vec, 2)
                    if residual.any():
                        basis_rows.append(vec)
                        have = howell(np.vstack([np.stack(basis_rows), dvec]), 2)
                    if len(basis_rows) == r:
                        break
            else:
                basis_rows = [inferable_q[i] for i in range(r)]
        plain = [PauliWord(n, N, x=row[:n], z=row[n:]) for row in basis_rows]
        if N != 2:
            # the pair-flip criterion belongs to the N = 2 noise model
            for k, word in enumerate(plain):
                gens.append(word)
                labels.append(f"product:{k}")
        elif plain:
            allowed = {2} if lat.is_torus else {1, 2}
            chosen = _choose_multipliers(code, gens, plain, dwords, allowed)
            for k, word in enumerate(chosen):
                gens.append(word)
                labels.append(f"product:{k}")
    pairing_ok = True
    if code.params.N == 2:
        counts = _error_flip_counts(code, gens)
        allowed = {2} if lat.is_torus else {1, 2}
        pairing_ok = bool(all(c in allowed for c in counts))
        if not code.defect_lines and not pairing_ok:
            raise FloquetError("defect-free static stabilizers fail the pair-flip sweep")
    gvec = words_to_vectors(gens, n, N)
    active = words_to_vectors(code.active_check_words(), n, N)
    if gvec.size and active.size and comm_matrix(gvec, active, n, N).any():
        raise FloquetError("a static stabilizer fails to commute with an active check")
    result = StaticStabilizerSet(gens, labels, pairing_ok)
    cache[key] = result
    return result


# -- steady-state ISG (what the periodic schedule alone infers) -------------------------


def steady_state_group(code: FloquetCode, schedule: Schedule, periods: int = 3) -> StabilizerGroup:
    """ISG inferable from the periodic part of the schedule alone.

    Runs the measurement engine from the maximally mixed state through the
    period labels; initialization data (the logical strings fixed when the
    defects were inserted) is absent by construction, so the logical count of
    this group counts the protected qudits.
    """
    rng = np.random.default_rng(0)
    group = StabilizerGroup(code.n, code.params.N, [])
    for _ in range(periods):
        for label in schedule.period:
            for cid, w in code.round_checks(label):
                _, group = group.measure(w, rng)
    return group


# -- inference windows (Appendix-B machinery) ---------------------------------------------


def _gf2_solvable(A: np.ndarray, target: np.ndarray) -> bool:
    """Whether a @ A = target has a solution over GF(2) (bitset elimination)."""
    def pack(v):
        return int.from_bytes(np.packbits(v.astype(np.uint8)).tobytes(), "big")

    basis: dict[int, int] = {}
    for i in range(A.shape[0]):
        cur = pack(A[i])
        while cur:
            p = cur & -cur
            if p in basis:
                cur ^= basis[p]
            else:
                basis[p] = cur
                break
    cur = pack(target)
    while cur:
        p = cur & -cur
        if p not in basis:
            return False
        cur ^= basis[p]
    return True


def _period_length(labels: list[str], start: int) -> int:
    for w in range(1, len(labels)):
        if labels[start : start + w] == labels[start + w : start + 2 * w] and start + 2 * w <= len(labels):
            return w
    return max(1, len(labels) - start)


class WindowOracle:
    """Decides when a static stabilizer's value can be derived from a span of
    measurement rounds.

    A measurement window over rounds [t0, t] is an assignment of slot
    coefficients a(tau, check) such that (i) the slot words multiply to the
    target word and (ii) for every round tau in the span, the part of the
    target not yet peeled off by rounds >= tau commutes with round tau's
    checks, so its eigenvalue telescopes through the round.  Feasibility of
    this linear system over Z_N depends only on the label sequence, which
    makes caching effective.
    """

    def __init__(self, code: FloquetCode, labels: list[str]):
        self.code = code
        self.labels = list(labels)
        self.n, self.N = code.n, code.params.N
        self._round_vecs = {
            lbl: words_to_vectors([w for _, w in code.round_checks(lbl)], self.n, self.N)
            for lbl in set(labels)
        }
        self._cache: dict[tuple, bool] = {}

    def feasible(self, key, word: PauliWord, t0: int, t1: int) -> bool:
        label_slice = tuple(self.labels[t0 : t1 + 1])
        ck = (key, label_slice)
        if ck in self._cache:
            return self._cache[ck]
        n, N = self.n, self.N
        blocks = [self._round_vecs[lbl] for lbl in label_slice]
        sizes = [b.shape[0] for b in blocks]
        slots = np.vstack(blocks) if blocks else np.zeros((0, 2 * n), dtype=np.int64)
        target_vec = np.concatenate([word.x, word.z]) % N
        # columns: word equality (2n) + telescoping constraints per round
        cols = [slots % N]
        rhs = [target_vec]
        offset = 0
        for b, lbl in zip(blocks, label_slice):
            # comm(target - sum_{tau' >= tau} slots, round-tau checks) = 0
            cm = comm_matrix(slots, b, n, N)
            mask = np.zeros((slots.shape[0], b.shape[0]), dtype=np.int64)
            mask[offset:] = 1
            cols.append((cm * mask) % N)
            rhs.append(comm_matrix(target_vec[None, :], b, n, N)[0])
            offset += b.shape[0]
        A = np.hstack(cols)
        t = np.concatenate(rhs) % N
        if N == 2:
            ok = _gf2_solvable(A % 2, t % 2)
        else:
            ok = solve_left(A, t, N) is not None
        self._cache[ck] = ok
        return ok

    def first_inference_after(self, key, word: PauliWord, start: int, horizon: int | None = None) -> int | None:
        """First round t >= start with a window supported on rounds [start, t].

        The scan stops after two periods past the start: the schedule is
        periodic, so a window that has not completed by then never does."""
        if horizon is None:
            horizon = start + 2 * _period_length(self.labels, start) + 2
        for t in range(start, min(horizon, len(self.labels))):
            if self.feasible(key, word, start, t):
                return t
        return None

    def min_lookback(self, key, word: PauliWord, t: int, cap: int = 8, t_min: int = 0) -> int | None:
        for w in range(1, min(cap, t - t_min + 1) + 1):
            if self.feasible(key, word, t - w + 1, t):
                return w
        return None

    def inference_times(self, key, word: PauliWord, cap: int = 8, t_min: int = 0) -> list[int]:
        """Rounds where a minimal-lookback window completes, using only
        measurement slots from rounds >= t_min (periodic windows only)."""
        wmins = [
            self.min_lookback(key, word, t, cap, t_min) if t >= t_min else None
            for t in range(len(self.labels))
        ]
        finite = [w for w in wmins if w is not None]
        if not finite:
            return []
        wmin = min(finite)
        return [t for t, w in enumerate(wmins) if w == wmin]


# -- verification ------------------------------------------------------------------------


@dataclass
class DefectLineReport:
    crossing: dict[int, bool]  # round index -> crossing string exists
    condensation: dict[int, bool]  # endpoint vertex -> terminating string exists
    order_parameter: complex
    ok: bool = field(init=False)

    def __post_init__(self):
        self.ok = all(self.crossing.values()) and all(self.condensation.values()) and (
            abs(self.order_parameter - 1) < 1e-9
        )


def _anchored_solve(
    code: FloquetCode,
    span_vectors: np.ndarray,
    anchors: list[tuple[PauliWord, int]],
    corridor: set[int],
) -> PauliWord | None:
    """Word supported on corridor that commutes with the whole stabilizer span
    except for prescribed commutation exponents with the anchor elements.

    The violation pattern is a linear functional on the span, so targets are
    assigned on a Howell basis: each basis row's target is the anchor
    coefficient in its decomposition times the requested exponent.
    """
    from .modmath import howell, reduce_row

    n, N = code.n, code.params.N
    H = howell(span_vectors, N)
    targets = np.zeros(H.shape[0], dtype=np.int64)
    for word, exponent in anchors:
        residual, coeffs = reduce_row(H, np.concatenate([word.x, word.z]), N)
        if residual.any():
            return None  # anchor is not a stabilizer of this span
        targets = (targets + exponent * coeffs) % N
    sites = sorted(corridor)
    unknown_rows = []
    for v in sites:
        unknown_rows.append(np.concatenate([PauliWord.x_op(v, n, N).x, PauliWord.x_op(v, n, N).z]))
        unknown_rows.append(np.concatenate([PauliWord.z_op(v, n, N).x, PauliWord.z_op(v, n, N).z]))
    if not unknown_rows:
        return None
    U = np.stack(unknown_rows)
    A = comm_matrix(U, H, n, N)
    coeffs = solve_left(A, targets, N)
    if coeffs is None:
        return None
    factors = {}
    for idx, v in enumerate(sites):
        xe, ze = int(coeffs[2 * idx]), int(coeffs[2 * idx + 1])
        if xe or ze:
            factors[v] = (xe, ze)
    return PauliWord.from_factors(n, N, factors)


def _faces_near(lat: HexLattice, point: np.ndarray, color_filter) -> int:
    best, best_d = None, np.inf
    for p in lat.plaquettes:
        if not color_filter(p.color):
            continue
        d = np.linalg.norm(lat.face_center(p) - point)
        if d < best_d:
            best, best_d = p.id, d
    return best


def _corridor(lat: HexLattice, a: np.ndarray, b: np.ndarray, radius: float) -> set[int]:
    """Vertices within distance radius of the segment [a, b] (canonical lifts
    plus lattice translates on the torus)."""
    seg = b - a
    L2 = float(seg @ seg)
    shifts = [np.zeros(2)]
    vecs = lat.lattice_vectors()
    if vecs is not None:
        u, v = vecs
        shifts = [i * u + j * v for i in range(-1, 2) for j in range(-1, 2)]
    out = set()
    for vid in range(lat.n_vertices):
        for s in shifts:
            pnt = lat.vertex_pos[vid] + s
            t = 0.0 if L2 == 0 else float(np.clip((pnt - a) @ seg / L2, 0.0, 1.0))
            if np.linalg.norm(pnt - (a + t * seg)) <= radius:
                out.add(vid)
                break
    return out


def verify_defect_line(code: FloquetCode, line: DefectLine, trace) -> DefectLineReport:
    """Fig-7-style checks: anyons permute across the line, the invariant anyon
    condenses at the twist defects, and the order parameter along the line is 1."""
    from .floquet import predicted_isg_vectors

    lat = code.lattice
    n, N = code.n, code.params.N
    t_ins = trace.first_defect_round()
    if t_ins is None:
        raise FloquetError("trace was taken without defect rounds")
    pts = lat.lift_path(line.path)
    mid = pts.mean(axis=0)
    direction = pts[-1] - pts[0]
    norm = np.linalg.norm(direction)
    perp = np.array([-direction[1], direction[0]]) / (norm if norm else 1.0)

    crossing: dict[int, bool] = {}
    for t in range(t_ins, min(t_ins + 3, trace.n_rounds)):
        r = int(trace.label(t)[0])
        p_e = _faces_near(lat, mid + 2.6 * perp, lambda c: c != r)
        p_m = _faces_near(lat, mid - 2.6 * perp, lambda c: c == r)
        span = words_to_vectors(trace.group_after(t).generators, n, N)
        found = False
        for radius in (2.2, 3.2, 4.5):
            corridor = _corridor(lat, mid + (radius + 1.0) * perp, mid - (radius + 1.0) * perp, radius)
            for alpha in range(1, N):
                for beta in range(1, N):
                    anchors = [
                        (code.plaquette_stabilizer(p_e), alpha),
                        (code.plaquette_stabilizer(p_m), beta),
                    ]
                    w = _anchored_solve(code, span, anchors, corridor)
                    if w is not None:
                        found = True
                        break
                if found:
                    break
            if found:
                break
        crossing[t] = found

    # condensation: constraints round-independent (all active checks plus the
    # static stabilizers); the string creates a single invariant-anyon pair
    # near `away` and terminates on the twist without violations
    condensation: dict[int, bool] = {}
    stat = static_stabilizers(code)
    span_words = code.active_check_words() + stat.generators
    span = words_to_vectors(span_words, n, N)
    for endpoint in line.endpoints:
        pos = lat.vertex_pos[endpoint]
        out_dir = (pos - mid) / max(np.linalg.norm(pos - mid), 1e-9)
        found = False
        for reach in (3.2, 4.5):
            away = pos + out_dir * reach
            corridor = _corridor(lat, pos, away, reach - 0.8)
            p_far_m = _faces_near(lat, away, lambda c: True)
            far_color = lat.plaquettes[p_far_m].color
            p_far_e = _faces_near(lat, away, lambda c: c != far_color)
            for alpha in range(1, N):
                for beta in range(1, N):
                    anchors = [
                        (code.plaquette_stabilizer(p_far_m), alpha),
                        (code.plaquette_stabilizer(p_far_e), beta),
                    ]
                    w = _anchored_solve(code, span, anchors, corridor)
                    if w is not None:
                        found = True
                        break
                if found:
                    break
            if found:
                break
        condensation[endpoint] = found

    # Fredenhagen-Marcu order parameter between interior points of the line;
    # the sign tracks the recorded defect-check outcomes, so report |<W>|
    w_mid = product(line.defect_checks[: max(1, len(line.defect_checks))], n, N)
    group = trace.group_after(min(t_ins + 2, trace.n_rounds - 1))
    order = abs(group.expectation(w_mid))
    return DefectLineReport(crossing, condensation, order)


@dataclass
class InferenceReport:
    first_inferred: dict[str, int | None]  # static-stabilizer label -> round (None = never)
    ok_within_period: bool


def verify_inference(code: FloquetCode, schedule: Schedule, periods: int = 4) -> InferenceReport:
    """When can each static stabilizer be inferred from the defect rounds?

    For each static stabilizer, reports the first round t such that a
    measurement window supported entirely on rounds [t_ins, t] exists, where
    t_ins is the first defect round; pre-insertion measurements are excluded,
    so the report captures what the periodic starred schedule alone infers.
    With the three-round schedule every static stabilizer is inferred within
    one period; with the six-round schedule the products over removed 2-checks
    report None ("never").
    """
    labels = schedule.rounds(periods)
    t_ins = next(i for i, l in enumerate(labels) if "~" in l)
    oracle = WindowOracle(code, labels)
    stat = static_stabilizers(code)
    first: dict[str, int | None] = {}
    for w, lbl in zip(stat.generators, stat.labels):
        first[lbl] = oracle.first_inference_after(lbl, w, t_ins)
    period_len = len(schedule.period)
    ok = all(v is not None and v <= t_ins + period_len for v in first.values())
    return InferenceReport(first, ok)
