"""Check-operator construction, measurement schedules, and ISG verification.

Check ids are sortable tuples: ("e", edge_id) for 2-body edge checks,
("s", vertex) for single-site boundary checks, ("d", line, piece) for defect
checks.  Round labels: "0", "1", "2" measure every edge check of that color
(plus single-site checks in 0-rounds); starred labels "0*", "1*", "2*" skip
checks removed by defect lines; "0~*" additionally measures the defect checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CheckRemovedError, FloquetError
from .lattice import Edge, HexLattice, LatticePath
from .modmath import kernel, solve_left
from .pauli import ModParams, PauliWord, product
from .stabilizer import StabilizerGroup, span_contains, span_equal, span_of, words_to_vectors

__all__ = [
    "FloquetCode",
    "Schedule",
    "RunTrace",
    "plain_schedule",
    "run_schedule",
    "verify_isg",
    "verify_automorphism",
    "verify_effective_toric",
]

CheckId = tuple


def comm_matrix(A: np.ndarray, B: np.ndarray, n: int, N: int) -> np.ndarray:
    """Pairwise commutation exponents between rows of two (x|z) stacks."""
    Xa, Za = A[:, :n], A[:, n:]
    Xb, Zb = B[:, :n], B[:, n:]
    return (Za @ Xb.T - Xa @ Zb.T) % N


class FloquetCode:
    """Lattice + parameters + current check set + defect data."""

    def __init__(self, lattice: HexLattice, params: ModParams, validate: bool = True):
        self.lattice = lattice
        self.params = params
        self.removed_edges: set[int] = set()
        self.defect_lines: list = []  # DefectLine objects, appended by insert_defect_line
        self.defect_check_words: dict[CheckId, PauliWord] = {}
        self._edge_words = {e.id: self._build_edge_check(e) for e in lattice.edges}
        self.site_checks = {
            v: self._single_site_check(v, lattice.missing_edge_label[v])
            for v in lattice.boundary_vertices
        }
        self._plaquette_words = {p.id: self._build_plaquette(p.id) for p in lattice.plaquettes}
        if validate:
            self._self_test()

    # -- operator construction ---------------------------------------------------

    @property
    def n(self) -> int:
        return self.lattice.n_vertices

    def _site_factor(self, v: int, label: str) -> PauliWord:
        n, N, q = self.n, self.params.N, self.params.q
        if N == 2:
            return {
                "x": PauliWord.x_op(v, n, 2),
                "y": PauliWord.y_op(v, n),
                "z": PauliWord.z_op(v, n, 2),
            }[label]
        if label == "x":
            return PauliWord.x_op(v, n, N)
        if label == "y":
            return (PauliWord.x_op(v, n, N) * PauliWord.z_op(v, n, N, q)).adjoint()
        return PauliWord.z_op(v, n, N, q)

    def _normalize_order(self, w: PauliWord) -> PauliWord:
        """Adjust the gamma phase so the word has exact order N."""
        wn = w ** self.params.N
        if not wn.is_identity(up_to_phase=True):
            raise FloquetError("check word is not order N up to phase")
        c = wn.phase
        if c == 0:
            return w
        if c % self.params.N:
            raise FloquetError("check word order cannot be fixed by a gamma phase")
        t = (-(c // self.params.N)) % 2
        return w.mul_phase(t)

    def _build_edge_check(self, e: Edge) -> PauliWord:
        w = self._site_factor(e.u, e.label) * self._site_factor(e.v, e.label)
        return self._normalize_order(w)

    def _single_site_check(self, v: int, label: str) -> PauliWord:
        return self._normalize_order(self._site_factor(v, label))

    def _build_plaquette(self, p_id: int) -> PauliWord:
        p = self.lattice.plaquettes[p_id]
        w = product(
            [self._site_factor(v, self.lattice.outward_label(p, v)) for v in p.vertices],
            self.n,
            self.params.N,
        )
        return self._normalize_order(w)

    def _self_test(self):
        n, N = self.n, self.params.N
        checks = words_to_vectors(list(self._edge_words.values()) + list(self.site_checks.values()), n, N)
        plaqs = words_to_vectors(list(self._plaquette_words.values()), n, N)
        if plaqs.size and checks.size and comm_matrix(plaqs, checks, n, N).any():
            raise FloquetError("plaquette stabilizers do not commute with the check operators")

    # -- public check access -------------------------------------------------------

    def check_operator(self, key) -> PauliWord:
        """Check word for an edge id, (u, v) pair, or boundary vertex."""
        if isinstance(key, tuple) and len(key) == 2 and all(isinstance(k, int) for k in key):
            e = self.lattice.edge_between(*key)
            if e is None:
                raise FloquetError(f"no edge between {key}")
            key = e.id
        if isinstance(key, int):
            if key in self.removed_edges:
                raise CheckRemovedError(f"edge {key} check removed by a defect line")
            return self._edge_words[key]
        if isinstance(key, tuple) and key and key[0] == "s":
            return self.site_checks[key[1]]
        if isinstance(key, tuple) and key and key[0] == "d":
            return self.defect_check_words[key]
        raise FloquetError(f"unrecognized check key {key!r}")

    def check_word(self, cid: CheckId) -> PauliWord:
        kind = cid[0]
        if kind == "e":
            return self._edge_words[cid[1]]
        if kind == "s":
            return self.site_checks[cid[1]]
        return self.defect_check_words[cid]

    def plaquette_stabilizer(self, p_id: int) -> PauliWord:
        return self._plaquette_words[p_id]

    def plaquette_words(self, colors=None, untouched_only: bool = False) -> list[PauliWord]:
        out = []
        for p in self.lattice.plaquettes:
            if colors is not None and p.color not in colors:
                continue
            if untouched_only and any(e in self.removed_edges for e in p.edges):
                continue
            out.append(self._plaquette_words[p.id])
        return out

    def touched_plaquettes(self) -> list[int]:
        return [
            p.id for p in self.lattice.plaquettes if any(e in self.removed_edges for e in p.edges)
        ]

    @property
    def has_defects(self) -> bool:
        return bool(self.defect_lines)

    # -- rounds ------------------------------------------------------------------------

    def round_checks(self, label: str) -> list[tuple[CheckId, PauliWord]]:
        color = int(label[0])
        starred = "*" in label
        tilde = "~" in label
        if tilde and not self.has_defects:
            raise FloquetError("defect round in a schedule for a defect-free code")
        out: list[tuple[CheckId, PauliWord]] = []
        for e in self.lattice.edges_of_color(color):
            if starred and e.id in self.removed_edges:
                continue
            out.append((("e", e.id), self._edge_words[e.id]))
        if color == 0:
            for v, w in self.site_checks.items():
                out.append((("s", v), w))
        if tilde:
            out.extend(sorted(self.defect_check_words.items()))
        return sorted(out, key=lambda kv: kv[0])

    def active_check_words(self) -> list[PauliWord]:
        """Every check the defect schedule ever measures."""
        out = [w for eid, w in self._edge_words.items() if eid not in self.removed_edges]
        out.extend(self.site_checks.values())
        out.extend(self.defect_check_words.values())
        return out

    def to_json(self) -> dict:
        return {
            "lattice": self.lattice.to_json(),
            "params": {"N": self.params.N, "p": self.params.p, "q": self.params.q},
            "removed_edges": sorted(self.removed_edges),
            "defect_lines": [
                {"path_vertices": list(l.path.vertices), "defect_checks": [w.to_string() for w in l.defect_checks]}
                for l in self.defect_lines
            ],
        }


@dataclass(frozen=True)
class Schedule:
    init: tuple[str, ...]
    period: tuple[str, ...]

    def __post_init__(self):
        if not self.period:
            raise FloquetError("schedule period must be non-empty")

    def validate(self, code: FloquetCode):
        uses_defects = any("~" in lbl for lbl in self.init + self.period)
        if uses_defects and not code.has_defects:
            raise FloquetError("schedule has defect rounds but the code has no defect lines")
        if code.has_defects and not uses_defects:
            raise FloquetError("code has defect lines but the schedule never measures them")

    def rounds(self, n_periods: int) -> list[str]:
        return list(self.init) + list(self.period) * n_periods


def plain_schedule() -> Schedule:
    return Schedule(("2", "0", "1", "2"), ("0", "1", "2"))


@dataclass
class RoundRecord:
    index: int
    label: str
    check_ids: list[CheckId]
    outcomes: list[int]
    group: StabilizerGroup


@dataclass
class RunTrace:
    code: FloquetCode
    labels: list[str]
    records: list[RoundRecord] = field(default_factory=list)

    def group_after(self, t: int) -> StabilizerGroup:
        return self.records[t].group

    @property
    def n_rounds(self) -> int:
        return len(self.records)

    def label(self, t: int) -> str:
        return self.records[t].label

    def first_defect_round(self) -> int | None:
        for rec in self.records:
            if "~" in rec.label:
                return rec.index
        return None

    def to_json(self) -> dict:
        return {
            "rounds": [
                {
                    "index": rec.index,
                    "label": rec.label,
                    "checks": [list(c) for c in rec.check_ids],
                    "outcomes": rec.outcomes,
                    "isg": rec.group.to_json(),
                }
                for rec in self.records
            ]
        }


def run_schedule(
    code: FloquetCode, schedule: Schedule, n_periods: int, rng: np.random.Generator
) -> RunTrace:
    """Execute init plus n_periods periods, measuring each round in a fixed order."""
    schedule.validate(code)
    labels = schedule.rounds(n_periods)
    trace = RunTrace(code, labels)
    group = StabilizerGroup(code.n, code.params.N, [])
    for t, label in enumerate(labels):
        checks = code.round_checks(label)
        ids, outcomes = [], []
        for cid, w in checks:
            m, group = group.measure(w, rng)
            ids.append(cid)
            outcomes.append(m)
        trace.records.append(RoundRecord(t, label, ids, outcomes, group))
    return trace


# -- ISG verification ------------------------------------------------------------


@dataclass
class IsgReport:
    round_index: int
    label: str
    equal: bool
    missing: list[str]  # predicted generators absent from the measured ISG
    extra: list[str]  # measured generators absent from the prediction

    @property
    def ok(self) -> bool:
        return self.equal


def _survivor_vectors(code, trace, t) -> np.ndarray:
    """Products of checks from rounds t-2, t-1 that commute with later rounds."""
    n, N = code.n, code.params.N
    cur = words_to_vectors([code.check_word(c) for c in trace.records[t].check_ids], n, N)
    out = []
    if t >= 1:
        prev1 = words_to_vectors([code.check_word(c) for c in trace.records[t - 1].check_ids], n, N)
        pool = [prev1]
        if t >= 2:
            prev2 = words_to_vectors([code.check_word(c) for c in trace.records[t - 2].check_ids], n, N)
            k2 = kernel(comm_matrix(prev2, prev1, n, N), N)
            if k2.size:
                pool.append((k2 @ prev2) % N)
        pool_m = np.vstack(pool)
        k = kernel(comm_matrix(pool_m, cur, n, N), N)
        if k.size:
            out.append((k @ pool_m) % N)
    if out:
        return np.vstack(out)
    return np.zeros((0, 2 * n), dtype=np.int64)


def predicted_isg_vectors(code: FloquetCode, trace: RunTrace, t: int) -> np.ndarray:
    """Phaseless span prediction for the ISG after round t (post-init rounds).

    Defect-free: the r-checks plus all plaquette stabilizers.  With defect
    lines (after the first defect round): untouched plaquettes, r*-checks,
    defect checks, and the products of touched plaquettes that commute with
    the defect checks; plus surviving products of the two previous rounds'
    checks (boundary products on planar patches and partial products along
    defect lines).
    """
    n, N = code.n, code.params.N
    inserted = trace.first_defect_round()
    post_insertion = inserted is not None and t >= inserted
    words = [code.check_word(c) for c in trace.records[t].check_ids]
    words += code.plaquette_words(untouched_only=post_insertion)
    vec_blocks = [words_to_vectors(words, n, N)]
    if post_insertion:
        dwords = list(code.defect_check_words.values())
        vec_blocks.append(words_to_vectors(dwords, n, N))
        touched = words_to_vectors([code.plaquette_stabilizer(p) for p in code.touched_plaquettes()], n, N)
        if touched.size:
            dvecs = words_to_vectors(dwords, n, N)
            k = kernel(comm_matrix(touched, dvecs, n, N), N)
            if k.size:
                vec_blocks.append((k @ touched) % N)
    vec_blocks.append(_survivor_vectors(code, trace, t))
    return np.vstack([b for b in vec_blocks if b.size] or [np.zeros((0, 2 * n), dtype=np.int64)])


def verify_isg(code: FloquetCode, trace: RunTrace, t: int) -> IsgReport:
    """Compare the measured ISG after round t against the predicted generator set."""
    from .modmath import howell, reduce_row

    n, N = code.n, code.params.N
    rec = trace.records[t]
    predicted = predicted_isg_vectors(code, trace, t)
    measured = words_to_vectors(rec.group.generators, n, N)
    hp = howell(predicted, N)
    hm = howell(measured, N)
    equal = hp.shape == hm.shape and np.array_equal(hp, hm)
    missing, extra = [], []
    if not equal:
        for i in range(predicted.shape[0]):
            if reduce_row(hm, predicted[i], N)[0].any():
                missing.append(_vec_to_string(predicted[i], n, N))
        for w in rec.group.generators:
            if not span_contains(hp, w, N):
                extra.append(w.to_string())
    return IsgReport(t, rec.label, equal, missing, extra)


def _vec_to_string(vec: np.ndarray, n: int, N: int) -> str:
    return PauliWord(n, N, x=vec[:n], z=vec[n:]).to_string()


# -- anyon string operators -------------------------------------------------------


def _face_of_vertex(lat: HexLattice, v: int, color: int) -> int | None:
    for pid in lat.vertex_plaquettes(v):
        if lat.plaquettes[pid].color == color:
            return pid
    return None


def _shared_face_adjacency(code: FloquetCode, r: int):
    """Arcs between the two faces sharing each r-edge (the non-r faces).

    Returns {face: [(other_face, edge, cell_delta)]} with exact unwrapped cell
    displacements, used for homology bookkeeping on the torus.
    """
    lat = code.lattice
    owners: dict[int, list[int]] = {}
    for p in lat.plaquettes:
        for e in p.edges:
            owners.setdefault(e, []).append(p.id)
    # owner faces of e(bond, d): bond 1 -> H(d), H(d+x-y); bond 2 -> H(d+x), H(d+x-y); bond 3 -> H(d), H(d+x)
    base_delta = {1: ((0, 0), (1, -1)), 2: ((1, 0), (1, -1)), 3: ((0, 0), (1, 0))}
    adj: dict[int, list[tuple[int, Edge, tuple[int, int]]]] = {}
    for e in lat.edges:
        if e.color != r:
            continue
        faces = owners.get(e.id, [])
        if len(faces) != 2:
            continue
        (c0, c1) = base_delta[e.bond]
        d = (c1[0] - c0[0], c1[1] - c0[1])
        p0 = next(p for p in faces if _same_cell(lat, p, (e.cell[0] + c0[0], e.cell[1] + c0[1])))
        p1 = faces[0] if faces[1] == p0 else faces[1]
        adj.setdefault(p0, []).append((p1, e, d))
        adj.setdefault(p1, []).append((p0, e, (-d[0], -d[1])))
    return adj


def _endpoint_face_adjacency(code: FloquetCode, r: int):
    """Arcs between the two r-faces an r-edge connects (via its endpoints)."""
    lat = code.lattice
    # r-face at B-side and A-side of e(bond, d):
    # bond 1: H(d+x) -> H(d-y); bond 2: H(d) -> H(d+2x-y); bond 3: H(d+x-y) -> H(d+y)
    base_delta = {1: ((1, 0), (0, -1)), 2: ((0, 0), (2, -1)), 3: ((1, -1), (0, 1))}
    adj: dict[int, list[tuple[int, Edge, tuple[int, int]]]] = {}
    for e in lat.edges:
        if e.color != r:
            continue
        pu = _face_of_vertex(lat, e.u, r)
        pv = _face_of_vertex(lat, e.v, r)
        if pu is None or pv is None:
            continue
        (c0, c1) = base_delta[e.bond]
        d = (c1[0] - c0[0], c1[1] - c0[1])
        adj.setdefault(pu, []).append((pv, e, d))
        adj.setdefault(pv, []).append((pu, e, (-d[0], -d[1])))
    return adj


def _same_cell(lat: HexLattice, p_id: int, cell) -> bool:
    p = lat.plaquettes[p_id]
    if lat.is_torus:
        _, Lx, Ly = lat.topology
        return (p.cell[0] - cell[0]) % Lx == 0 and (p.cell[1] - cell[1]) % Ly == 0
    return tuple(p.cell) == tuple(cell)


def face_cycle(code: FloquetCode, adj, wrap: tuple[int, int], slack: int = 3) -> list[tuple[int, Edge]]:
    """Closed super-lattice walk with net unwrapped cell displacement ``wrap``.

    Returns [(face_reached, edge_crossed), ...]; the last face is the start."""
    lat = code.lattice
    if not lat.is_torus:
        raise FloquetError("non-contractible cycles need a torus")
    start = min(adj)
    target = wrap
    lo_x, hi_x = min(0, target[0]) - slack, max(0, target[0]) + slack
    lo_y, hi_y = min(0, target[1]) - slack, max(0, target[1]) + slack
    seen = {(start, (0, 0)): None}
    queue = [(start, (0, 0))]
    while queue:
        node = queue.pop(0)
        p, off = node
        if p == start and off == target:
            arcs = []
            cur = node
            while seen[cur] is not None:
                prev, edge = seen[cur]
                arcs.append((cur[0], edge))
                cur = prev
            arcs.reverse()
            return arcs
        for p2, e, d in adj.get(p, []):
            off2 = (off[0] + d[0], off[1] + d[1])
            if not (lo_x <= off2[0] <= hi_x and lo_y <= off2[1] <= hi_y):
                continue
            key = (p2, off2)
            if key not in seen:
                seen[key] = (node, e)
                queue.append(key)
    raise FloquetError("no wrapping face cycle found")


def effective_z(code: FloquetCode, e: Edge) -> PauliWord:
    """Z_e of the effective qudit at an r-edge (i = B-side endpoint, j = A-side)."""
    n, N, p, q = code.n, code.params.N, code.params.p, code.params.q
    i, j = e.u, e.v
    if e.label == "x":
        return PauliWord.x_op(i, n, N, p)
    if e.label == "y":
        return PauliWord.x_op(j, n, N, p) * PauliWord.z_op(j, n, N)
    return PauliWord.z_op(j, n, N)


def effective_x(code: FloquetCode, e: Edge) -> PauliWord:
    n, N, q = code.n, code.params.N, code.params.q
    i, j = e.u, e.v
    xiq = (PauliWord.x_op(i, n, N) * PauliWord.z_op(i, n, N, q)).adjoint()
    if e.label == "x":
        return xiq * PauliWord.z_op(j, n, N, q)
    if e.label == "y":
        return PauliWord.z_op(i, n, N, q) * PauliWord.x_op(j, n, N)
    return xiq * PauliWord.x_op(j, n, N)


def _string_from_walk(code, arcs, base_words: list[PauliWord], start_exp: int) -> PauliWord:
    """Combine base-word powers along a closed walk into a logical string.

    The first exponent is the transported anyon charge; each later exponent is
    propagated so the accumulated word commutes with the plaquette stabilizer
    at the interior face between consecutive arcs.  The closed result is
    checked to commute with every plaquette stabilizer.
    """
    from math import gcd

    n, N = code.n, code.params.N
    word = PauliWord.identity(n, N)
    for idx, w in enumerate(base_words):
        if idx == 0:
            a = start_exp % N
        else:
            stab = code.plaquette_stabilizer(arcs[idx - 1][0])
            acc = stab.comm_exponent(word)
            c = stab.comm_exponent(w)
            g = gcd(c, N)
            if acc % g:
                raise FloquetError("string walk exponent propagation is infeasible")
            a = ((-acc // g) * pow(c // g, -1, N // g)) % N if N // g > 1 else 0
        if a:
            word = word * (w ** int(a))
    all_stabs = words_to_vectors([code.plaquette_stabilizer(p.id) for p in code.lattice.plaquettes], n, N)
    if comm_matrix(words_to_vectors([word], n, N), all_stabs, n, N).any():
        raise FloquetError("string walk did not close into a logical operator")
    return word


def e_string(code: FloquetCode, r: int, wrap: tuple[int, int], power: int = 1) -> PauliWord:
    """Closed e-type string for round r: Z_e powers along a super-lattice cycle."""
    arcs = face_cycle(code, _shared_face_adjacency(code, r), wrap)
    base = [effective_z(code, e) for _, e in arcs]
    return _string_from_walk(code, arcs, base, power)


def m_string(code: FloquetCode, r: int, wrap: tuple[int, int], power: int = 1) -> PauliWord:
    """Closed m-type string for round r: X_e powers along a dual cycle of r-plaquettes."""
    arcs = face_cycle(code, _endpoint_face_adjacency(code, r), wrap)
    base = [effective_x(code, e) for _, e in arcs]
    return _string_from_walk(code, arcs, base, power)


def psi_string_closed(code: FloquetCode, cycle: LatticePath) -> PauliWord:
    """Product of check operators along a closed lattice path."""
    if not cycle.closed:
        raise FloquetError("expected a closed path")
    return product(
        [code.check_word(("e", eid)) for eid in cycle.edges], code.n, code.params.N
    )


# -- automorphism -------------------------------------------------------------------


@dataclass
class AutomorphismReport:
    start: str
    end: str
    rounds: int
    ok: bool
    detail: str = ""


def _commuting_update(word: PauliWord, group: StabilizerGroup, next_checks: list[PauliWord]):
    """Multiply by stabilizers so the word commutes with the next round's checks."""
    n, N = word.n, word.N
    gens = group.generators
    gvec = words_to_vectors(gens, n, N)
    cvec = words_to_vectors(next_checks, n, N)
    wvec = words_to_vectors([word], n, N)
    target = (-comm_matrix(wvec, cvec, n, N)[0]) % N
    A = comm_matrix(gvec, cvec, n, N)
    coeffs = solve_left(A, target, N)
    if coeffs is None:
        raise FloquetError("logical operator has no commuting update through the next round")
    out = word
    for i, a in enumerate(coeffs):
        if a:
            out = out * (gens[i] ** int(a))
    return out


def verify_automorphism(
    code: FloquetCode, rng: np.random.Generator, start: str = "e", wrap_dir: str = "x"
) -> AutomorphismReport:
    """Track an anyon string through one period and identify its image.

    Builds the round-r string (e^q for start="e", m for start="m"), applies the
    commuting update through three rounds, and checks membership of the result
    times the inverse of the expected image (m for e^q, e^q for m... i.e. the
    automorphism e -> m^p, m -> e^q) in the final ISG.
    """
    if not code.lattice.is_torus:
        raise FloquetError("automorphism verification runs on the torus")
    _, Lx, Ly = code.lattice.topology
    wrap = (Lx, 0) if wrap_dir == "x" else (0, Ly)
    trace = run_schedule(code, plain_schedule(), 2, rng)
    t0 = 4  # first round of the second period; label "0"
    assert trace.label(t0) == "0"
    N, p, q = code.params.N, code.params.p, code.params.q
    if start == "e":
        word = e_string(code, 0, wrap, power=1)
        expected = m_string(code, 0, wrap, power=p)
        end_name = f"m^{p}"
    else:
        word = m_string(code, 0, wrap, power=1)
        expected = e_string(code, 0, wrap, power=q)
        end_name = f"e^{q}"
    group = trace.group_after(t0)
    if comm_matrix(words_to_vectors([word], code.n, N), words_to_vectors(group.generators, code.n, N), code.n, N).any():
        return AutomorphismReport(start, end_name, 3, False, "initial string is not a logical operator")
    for step in range(1, 4):
        t = t0 + step
        next_checks = [code.check_word(c) for c in trace.records[t].check_ids]
        word = _commuting_update(word, group, next_checks)
        group = trace.group_after(t)
    residue = word * expected.adjoint()
    res = group.contains(residue)
    ok = res.generated_up_to_phase
    return AutomorphismReport(
        start, end_name, 3, ok, "" if ok else f"residue not in ISG: {residue.to_string()}"
    )


# -- effective toric code -------------------------------------------------------------


@dataclass
class EffectiveToricReport:
    round_index: int
    ok: bool
    z_orientation: int
    x_exponent: int
    failures: list[str]


def verify_effective_toric(code: FloquetCode, trace: RunTrace, t: int) -> EffectiveToricReport:
    """Check the effective-qudit dictionary at round t.

    (a) each r-plaquette stabilizer equals a super-plaquette of Z_e factors
    modulo r-checks; (b) each other plaquette stabilizer equals a super-vertex
    of X_e factors modulo r-checks.  Orientation conventions are resolved by a
    consistency scan and reported.
    """
    lat = code.lattice
    n, N, q = code.n, code.params.N, code.params.q
    r = int(trace.label(t)[0])
    check_words = [code.check_word(c) for c in trace.records[t].check_ids]
    check_span = span_of(check_words, n, N)

    def in_check_span(w: PauliWord) -> bool:
        return span_contains(check_span, w, N)

    failures: list[str] = []
    # (a) r-plaquettes vs super-plaquettes of Z_e.  The super-lattice edge
    # orientation: +1 on the A-side of z-labeled r-edges and the B-side of
    # x/y-labeled ones, -1 otherwise; factors enter as the q-th power.
    r_edge_at = {}
    for v in range(n):
        for e in lat.vertex_edges(v).values():
            if e.color == r:
                r_edge_at[v] = e

    def zsigma(v, e):
        a_side = lat.sublattice(v) == 0
        return 1 if (a_side and e.label == "z") or (not a_side and e.label != "z") else -1

    z_orient = None
    for orient in (1, -1):
        ok_all = True
        for p in lat.plaquettes_of_color(r):
            word = PauliWord.identity(n, N)
            for v in p.vertices:
                e = r_edge_at.get(v)
                if e is None:
                    ok_all = False
                    break
                word = word * (effective_z(code, e) ** (orient * zsigma(v, e) * q))
            if not ok_all:
                break
            if not in_check_span(code.plaquette_stabilizer(p.id) * word.adjoint()):
                ok_all = False
                break
        if ok_all:
            z_orient = orient
            break
    if z_orient is None:
        failures.append("no global Z_e orientation reproduces the r-plaquette stabilizers")
        z_orient = 0
    # (b) other plaquettes vs super-vertices of X_e: +1 on x/y-labeled r-edges,
    # -1 on z, with the overall sign flipped between the two super-vertex colors
    x_exp = None
    for exp in (1, -1):
        ok_all = True
        for p in lat.plaquettes:
            if p.color == r:
                continue
            face_sign = 1 if p.color == (r + 2) % 3 else -1
            word = PauliWord.identity(n, N)
            for eid in p.edges:
                e = lat.edges[eid]
                if e.color == r:
                    sigma = 1 if e.label != "z" else -1
                    word = word * (effective_x(code, e) ** (exp * face_sign * sigma))
            if not in_check_span(code.plaquette_stabilizer(p.id) * word.adjoint()):
                ok_all = False
                break
        if ok_all:
            x_exp = exp
            break
    if x_exp is None:
        failures.append("no global X_e exponent reproduces the vertex stabilizers")
        x_exp = 0
    return EffectiveToricReport(t, not failures, z_orient, x_exp, failures)
