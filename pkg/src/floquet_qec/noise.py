"""Simplified noise model, spacetime syndrome graph, and matching decoder.

Noise model (N = 2 only): right after a round is measured, each endpoint of
every 2-body check suffers the check's own Pauli letter with probability p,
and every defect-check outcome is reported flipped with probability p.

A Pauli error flips the eigenvalues of exactly two static stabilizers (the
Eq.-(20)-style generator choice guarantees pairs); each flip first becomes
visible at that track's next inference round, which reproduces the spacetime
table of the simplified model.  A defect-check fault flips the same track at
two neighboring inference times.  Decoding is exact minimum-weight perfect
matching over the flipped detection events with shortest-path distances.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .defects import WindowOracle, logical_pairs, model_single_errors, static_stabilizers
from .errors import FloquetError, GraphConstructionError
from .floquet import FloquetCode, Schedule, comm_matrix
from .pauli import PauliWord
from .stabilizer import words_to_vectors

__all__ = [
    "ErrorEvent",
    "SyndromeGraph",
    "build_syndrome_graph",
    "sample_errors",
    "decode",
    "estimate_logical_error_rate",
    "wrapping_psi_loops",
]


@dataclass(frozen=True)
class ErrorEvent:
    time: int  # error strikes after this round
    kind: str  # "pauli" | "measurement"
    location: object  # vertex id | defect check id
    channel: int  # index into the graph's channel list


@dataclass
class _Channel:
    time: int
    kind: str
    location: object
    word: PauliWord | None
    flips: tuple[int, ...]  # detection-vertex indices (terminal resolved)
    signature: int  # bitmask over tracked logicals


@dataclass
class SyndromeGraph:
    code: FloquetCode
    labels: list[str]
    noisy_rounds: tuple[int, int]  # [start, end)
    track_labels: list[str]
    vertices: list[tuple[str, int]]  # (track label, inference round)
    terminals: dict[int, int]  # time -> vertex index (planar only)
    channels: list[_Channel] = field(default_factory=list)
    logicals: list[PauliWord] = field(default_factory=list)
    edge_weight: float = 1.0
    _adj: dict[int, set[int]] = field(default_factory=dict)
    _dist: np.ndarray | None = None
    _pred: np.ndarray | None = None
    _edge_channel: dict[tuple[int, int], int] = field(default_factory=dict)
    _boundary_dist: np.ndarray | None = None
    _boundary_channel: dict[int, int] = field(default_factory=dict)
    _boundary_pred: np.ndarray | None = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def is_planar(self) -> bool:
        return bool(self.terminals)

    # -- construction helpers -------------------------------------------------

    def _add_channel(self, ch: _Channel):
        ch_id = len(self.channels)
        self.channels.append(ch)
        reals = [v for v in ch.flips if v >= 0]
        if len(reals) == 2:
            key = (min(reals), max(reals))
            self._adj.setdefault(reals[0], set()).add(reals[1])
            self._adj.setdefault(reals[1], set()).add(reals[0])
            self._edge_channel.setdefault(key, ch_id)
        elif len(reals) == 1:
            self._boundary_channel.setdefault(reals[0], ch_id)
        return ch_id

    def _finalize(self):
        nv = self.n_vertices
        dist = np.full((nv, nv), np.iinfo(np.int32).max, dtype=np.int32)
        pred = np.full((nv, nv), -1, dtype=np.int32)
        for s in range(nv):
            dist[s, s] = 0
            queue = [s]
            while queue:
                nxt = []
                for u in queue:
                    for w in self._adj.get(u, ()):
                        if dist[s, w] == np.iinfo(np.int32).max:
                            dist[s, w] = dist[s, u] + 1
                            pred[s, w] = u
                            nxt.append(w)
                queue = nxt
        self._dist = dist
        self._pred = pred
        if self.is_planar:
            bd = np.full(nv, np.iinfo(np.int32).max, dtype=np.int32)
            bp = np.full(nv, -1, dtype=np.int32)
            queue = []
            for v in self._boundary_channel:
                bd[v] = 1
                bp[v] = -2  # boundary itself
                queue.append(v)
            while queue:
                nxt = []
                for u in queue:
                    for w in self._adj.get(u, ()):
                        if bd[w] == np.iinfo(np.int32).max:
                            bd[w] = bd[u] + 1
                            bp[w] = u
                            nxt.append(w)
                queue = nxt
            self._boundary_dist = bd
            self._boundary_pred = bp

    # -- decoding ----------------------------------------------------------------

    def path_channels(self, u: int, v: int) -> list[int]:
        out = []
        cur = v
        while cur != u:
            prev = int(self._pred[u, cur])
            if prev < 0:
                raise FloquetError("matched vertices are disconnected in the syndrome graph")
            out.append(self._edge_channel[(min(prev, cur), max(prev, cur))])
            cur = prev
        return out

    def boundary_path_channels(self, u: int) -> list[int]:
        out = []
        cur = u
        while True:
            prev = int(self._boundary_pred[cur])
            if prev == -2:
                out.append(self._boundary_channel[cur])
                return out
            if prev < 0:
                raise FloquetError("vertex cannot reach the boundary")
            out.append(self._edge_channel[(min(prev, cur), max(prev, cur))])
            cur = prev

    def to_dot(self) -> str:
        lines = ["graph syndrome {"]
        for i, (lbl, t) in enumerate(self.vertices):
            lines.append(f'  d{i} [label="{lbl}@t{t}"];')
        seen = set()
        for (a, b) in self._edge_channel:
            if (a, b) not in seen:
                seen.add((a, b))
                lines.append(f"  d{a} -- d{b};")
        for v in self._boundary_channel:
            lines.append(f"  d{v} -- boundary;")
        lines.append("}")
        return "\n".join(lines)


def wrapping_psi_loops(code: FloquetCode) -> list[PauliWord]:
    """Invariant fermion-loop logical representatives on both torus cycles."""
    from .floquet import psi_string_closed
    from .lattice import LatticePath

    lat = code.lattice
    loops = []
    for labels in (("z", "x"), ("z", "y")):
        line_vertices = {v for line in code.defect_lines for v in line.path.vertices}
        start = next(v for v in range(lat.n_vertices) if v not in line_vertices)
        seq = [start]
        v = start
        step = 0
        while True:
            e = lat.vertex_edges(v)[labels[step % 2]]
            v = e.u if e.v == v else e.v
            step += 1
            seq.append(v)
            if v == start:
                break
        loops.append(psi_string_closed(code, LatticePath.from_vertices(lat, seq)))
    return loops


def build_syndrome_graph(
    code: FloquetCode,
    schedule: Schedule,
    T: int,
    p: float,
    logicals: list[PauliWord] | None = None,
    tail_periods: int = 2,
) -> SyndromeGraph:
    """Spacetime detection graph for T noisy periods plus a noiseless tail.

    Vertices sit at (static stabilizer, inference round); every modeled single
    error must flip exactly two of them (one plus a terminal on a planar
    patch), otherwise construction fails.
    """
    if code.params.N != 2:
        raise FloquetError("the simplified noise model is defined for N = 2")
    if not 0 <= p < 1:
        raise FloquetError("error probability must be in [0, 1)")
    n = code.n
    labels = schedule.rounds(T + tail_periods)
    period = len(schedule.period)
    noisy_start = len(schedule.init) + period  # one settling period after init
    noisy_end = noisy_start + T * period
    if noisy_end + period > len(labels):
        labels = schedule.rounds(T + tail_periods + 1)

    stat = static_stabilizers(code, schedule)
    oracle = WindowOracle(code, labels)
    track_words = stat.generators
    track_labels = stat.labels
    t_min = len(schedule.init)  # periodic windows only: no initialization slots
    track_times: list[list[int]] = []
    for w, lbl in zip(track_words, track_labels):
        times = oracle.inference_times(lbl, w, t_min=t_min)
        if not times:
            raise GraphConstructionError(f"track {lbl} is never inferred by the schedule")
        track_times.append(times)

    graph = SyndromeGraph(
        code,
        labels,
        (noisy_start, noisy_end),
        track_labels,
        [],
        {},
        edge_weight=1.0 if p in (0.0,) else -math.log(p / (1 - p)),
    )
    vid: dict[tuple[int, int], int] = {}
    for ti, times in enumerate(track_times):
        for t in times:
            vid[(ti, t)] = len(graph.vertices)
            graph.vertices.append((track_labels[ti], t))
    if not code.lattice.is_torus:
        for t in range(len(labels)):
            graph.terminals[t] = len(graph.vertices)
            graph.vertices.append(("terminal", t))

    graph.logicals = list(logicals) if logicals is not None else []
    tvec = words_to_vectors(track_words, n, 2)
    lvec = words_to_vectors(graph.logicals, n, 2) if graph.logicals else None

    def next_inference(ti: int, t: int) -> int | None:
        times = track_times[ti]
        k = bisect_right(times, t)
        return times[k] if k < len(times) else None

    # Pauli channels: per noisy round, per measured 2-body check endpoint
    for t in range(noisy_start, noisy_end):
        round_checks = code.round_checks(labels[t])
        errors: list[tuple[int, PauliWord]] = []
        for cid, w in round_checks:
            if cid[0] == "s":
                continue  # a single-site check's own letter acts trivially
            supp = [int(v) for v in w.support]
            for v in supp:
                xe, ze = int(w.x[v]), int(w.z[v])
                errors.append((v, PauliWord.from_factors(n, 2, {v: (xe, ze)})))
        if not errors:
            continue
        evec = words_to_vectors([w for _, w in errors], n, 2)
        flips_matrix = comm_matrix(tvec, evec, n, 2)
        sig_matrix = (comm_matrix(lvec, evec, n, 2) if lvec is not None else None)
        for j, (v, w) in enumerate(errors):
            flipped = np.nonzero(flips_matrix[:, j])[0]
            verts = []
            for ti in flipped:
                tk = next_inference(int(ti), t)
                if tk is not None:
                    verts.append(vid[(int(ti), tk)])
            sig = 0
            if sig_matrix is not None:
                for li in np.nonzero(sig_matrix[:, j])[0]:
                    sig |= 1 << int(li)
            if len(verts) == 2:
                pass
            elif len(verts) == 1 and not code.lattice.is_torus:
                verts.append(-1)  # resolved to terminal at decode time via boundary
            else:
                raise GraphConstructionError(
                    f"error at vertex {v} after round {t} flips {len(verts)} detections"
                )
            graph._add_channel(_Channel(t, "pauli", v, w, tuple(verts), sig))

    # measurement-fault channels for defect checks: neighboring inference times
    for t in range(noisy_start, noisy_end):
        if "~" not in labels[t]:
            continue
        for cid in sorted(code.defect_check_words):
            ti = track_labels.index(f"defect:{cid[1]}:{cid[2]}")
            tk_next = next_inference(ti, t)
            if tk_next is None:
                continue
            verts = (vid[(ti, t)], vid[(ti, tk_next)])
            graph._add_channel(_Channel(t, "measurement", cid, None, verts, 0))

    graph._finalize()
    return graph


def sample_errors(graph: SyndromeGraph, p: float, rng: np.random.Generator) -> list[ErrorEvent]:
    """Independent Bernoulli(p) over every channel of the graph's template."""
    mask = rng.random(len(graph.channels)) < p
    return [
        ErrorEvent(ch.time, ch.kind, ch.location, i)
        for i, (ch, hit) in enumerate(zip(graph.channels, mask))
        if hit
    ]


def syndrome_of(graph: SyndromeGraph, events: list[ErrorEvent]) -> set[int]:
    flips = np.zeros(graph.n_vertices + 1, dtype=np.int64)  # last slot = boundary
    for ev in events:
        for v in graph.channels[ev.channel].flips:
            flips[v if v >= 0 else graph.n_vertices] += 1
    return {v for v in range(graph.n_vertices) if flips[v] % 2}


def decode(graph: SyndromeGraph, syndrome: set[int]) -> list[int]:
    """Exact minimum-weight perfect matching; returns correction channel ids."""
    flipped = sorted(syndrome)
    if not flipped:
        return []
    G = nx.Graph()
    planar = graph.is_planar
    if not planar and len(flipped) % 2:
        raise FloquetError("odd syndrome parity on a closed surface")
    for i, u in enumerate(flipped):
        for v in flipped[i + 1 :]:
            d = int(graph._dist[u, v])
            if d < np.iinfo(np.int32).max:
                G.add_edge(("r", u), ("r", v), weight=float(d))
        if planar:
            bd = int(graph._boundary_dist[u])
            if bd < np.iinfo(np.int32).max:
                G.add_edge(("r", u), ("b", u), weight=float(bd))
    if planar:
        for i, u in enumerate(flipped):
            for v in flipped[i + 1 :]:
                G.add_edge(("b", u), ("b", v), weight=0.0)
    matching = nx.min_weight_matching(G)
    correction: list[int] = []
    for a, b in matching:
        if a[0] == "b" and b[0] == "b":
            continue
        if a[0] == "r" and b[0] == "r":
            correction.extend(graph.path_channels(a[1], b[1]))
        else:
            real = a[1] if a[0] == "r" else b[1]
            correction.extend(graph.boundary_path_channels(real))
    return correction


def logical_failure(graph: SyndromeGraph, events: list[ErrorEvent], correction: list[int]) -> bool:
    sig = 0
    for ev in events:
        sig ^= graph.channels[ev.channel].signature
    for ch_id in correction:
        sig ^= graph.channels[ch_id].signature
    return sig != 0


def _run_trials(graph: SyndromeGraph, p: float, seeds) -> int:
    failures = 0
    for s in seeds:
        trial_rng = np.random.default_rng(int(s))
        events = sample_errors(graph, p, trial_rng)
        syndrome = syndrome_of(graph, events)
        correction = decode(graph, syndrome)
        if logical_failure(graph, events, correction):
            failures += 1
    return failures


def estimate_logical_error_rate(
    graph: SyndromeGraph,
    p: float,
    trials: int,
    rng: np.random.Generator,
    workers: int | None = None,
) -> tuple[float, float]:
    """Monte Carlo failure fraction and binomial standard error.

    Per-trial seeds are derived from the master generator up front and failure
    counts are order-independent sums, so results are identical for any number
    of workers (FLOQUET_THREADS caps parallelism at the CLI).
    """
    if trials < 1:
        raise FloquetError("need at least one trial")
    if p == 0.0:
        return 0.0, 0.0
    seeds = [int(s) for s in rng.integers(0, 2**63 - 1, size=trials)]
    if workers and workers > 1 and trials >= 4 * workers:
        from concurrent.futures import ProcessPoolExecutor

        chunks = [seeds[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            failures = sum(pool.map(_run_trials, [graph] * workers, [p] * workers, chunks))
    else:
        failures = _run_trials(graph, p, seeds)
    rate = failures / trials
    stderr = math.sqrt(max(rate * (1 - rate), 1.0 / trials) / trials)
    return rate, stderr
