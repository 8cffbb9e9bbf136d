"""Noise model, syndrome graph, and matching decoder tests."""

import numpy as np
import pytest

from floquet_qec.defects import alternating_path, defect_schedule, insert_defect_line, logical_pairs
from floquet_qec.errors import FloquetError
from floquet_qec.floquet import FloquetCode, plain_schedule, run_schedule
from floquet_qec.lattice import build_planar, build_torus
from floquet_qec.noise import (
    build_syndrome_graph,
    decode,
    estimate_logical_error_rate,
    logical_failure,
    sample_errors,
    syndrome_of,
    wrapping_psi_loops,
)
from floquet_qec.pauli import ModParams


def torus_code(L=6):
    return FloquetCode(build_torus(L, L), ModParams(2, 1, 1))


def line_code(L=6, length=5, start=0, removed_color=0):
    code = torus_code(L)
    return insert_defect_line(code, alternating_path(code.lattice, start, removed_color, length))


def test_graph_builds_defect_free_torus():
    code = torus_code(3)
    g = build_syndrome_graph(code, plain_schedule(), 2, 0.01, wrapping_psi_loops(code))
    assert g.n_vertices > 0
    assert g.channels
    for ch in g.channels:
        assert len([v for v in ch.flips if v >= 0]) == 2


def test_graph_vertex_times_follow_table():
    # track of plaquette color c is inferred at rounds measuring color c-1
    code = torus_code(3)
    g = build_syndrome_graph(code, plain_schedule(), 2, 0.01)
    for lbl, t in g.vertices:
        if lbl.startswith("plaquette"):
            pid = int(lbl.split(":")[1])
            c = code.lattice.plaquettes[pid].color
            assert int(g.labels[t]) == (c - 1) % 3


def test_syndrome_table_spacing():
    # error after a 0-round: 2-plaquette flips one round later, 1-plaquette
    # three rounds later (the "Error after t=0" row of the simplified model)
    code = torus_code(3)
    g = build_syndrome_graph(code, plain_schedule(), 2, 0.01)
    lat = code.lattice
    checked = 0
    for ch in g.channels:
        if ch.kind != "pauli" or g.labels[ch.time] != "0":
            continue
        times = {}
        for v in ch.flips:
            lbl, t = g.vertices[v]
            pid = int(lbl.split(":")[1])
            times[lat.plaquettes[pid].color] = t - ch.time
        assert times == {2: 1, 1: 3}, (ch, times)
        checked += 1
    assert checked


def test_graph_builds_with_defect_line():
    code, line = line_code()
    sched = defect_schedule(code, d=2)
    g = build_syndrome_graph(code, sched, 2, 0.005, [w for pair in [] for w in pair])
    kinds = {ch.kind for ch in g.channels}
    assert kinds == {"pauli", "measurement"}
    for ch in g.channels:
        assert len([v for v in ch.flips if v >= 0]) == 2


def test_graph_builds_planar():
    code = FloquetCode(build_planar(4, 4), ModParams(2, 1, 1))
    g = build_syndrome_graph(code, plain_schedule(), 2, 0.01)
    boundary_channels = [ch for ch in g.channels if -1 in ch.flips]
    assert boundary_channels  # boundary-adjacent errors pair with the terminal
    for ch in g.channels:
        reals = [v for v in ch.flips if v >= 0]
        assert len(reals) in (1, 2)


def test_zero_error_rate():
    code = torus_code(3)
    g = build_syndrome_graph(code, plain_schedule(), 2, 0.0, wrapping_psi_loops(code))
    rate, err = estimate_logical_error_rate(g, 0.0, 1000, np.random.default_rng(0))
    assert rate == 0.0


def test_sample_errors_statistics():
    code = torus_code(3)
    g = build_syndrome_graph(code, plain_schedule(), 2, 0.01)
    rng = np.random.default_rng(1)
    p = 0.01
    trials = 2000
    counts = [len(sample_errors(g, p, rng)) for _ in range(trials)]
    expected = p * len(g.channels)
    sigma = np.sqrt(len(g.channels) * p * (1 - p) / trials)
    assert abs(np.mean(counts) - expected) < 5 * sigma


def test_single_error_recovered():
    code = torus_code(6)
    g = build_syndrome_graph(code, plain_schedule(), 2, 0.01, wrapping_psi_loops(code))
    rng = np.random.default_rng(2)
    for ch_id in rng.integers(0, len(g.channels), size=25):
        ch = g.channels[int(ch_id)]
        from floquet_qec.noise import ErrorEvent

        events = [ErrorEvent(ch.time, ch.kind, ch.location, int(ch_id))]
        syndrome = syndrome_of(g, events)
        correction = decode(g, syndrome)
        assert len(correction) == 1
        corr = g.channels[correction[0]]
        assert set(corr.flips) == set(ch.flips)
        assert not logical_failure(g, events, correction)


def test_residual_commutes_with_statics():
    code, line = line_code()
    sched = defect_schedule(code, d=2)
    g = build_syndrome_graph(code, sched, 2, 0.01, [w for z, x in logical_pairs_safe(code) for w in (z, x)])
    rng = np.random.default_rng(3)
    for _ in range(200):
        events = sample_errors(g, 0.01, rng)
        syndrome = syndrome_of(g, events)
        correction = decode(g, syndrome)
        # residual flips vanish: error plus correction is detector-silent
        from floquet_qec.noise import ErrorEvent

        resid_events = events + [
            ErrorEvent(g.channels[c].time, g.channels[c].kind, g.channels[c].location, c)
            for c in correction
        ]
        assert not syndrome_of(g, resid_events)


def logical_pairs_safe(code):
    try:
        return logical_pairs(code)
    except Exception:
        return []


def test_rate_monotone_quick():
    code = torus_code(3)
    g = build_syndrome_graph(code, plain_schedule(), 2, 0.01, wrapping_psi_loops(code))
    rng = np.random.default_rng(4)
    r_low, e_low = estimate_logical_error_rate(g, 0.01, 400, rng)
    r_high, e_high = estimate_logical_error_rate(g, 0.08, 400, rng)
    assert r_high >= r_low - 3 * (e_low + e_high)


def test_detector_completeness_end_to_end():
    # noiseless trace: every static stabilizer's recorded phase is constant
    from floquet_qec.defects import static_stabilizers

    code, line = line_code()
    sched = defect_schedule(code, d=2)
    trace = run_schedule(code, sched, 4, np.random.default_rng(5))
    t_ins = trace.first_defect_round()
    stat = static_stabilizers(code)
    for w in stat.generators:
        phases = set()
        for t in range(t_ins, trace.n_rounds):
            res = trace.group_after(t).contains(w)
            assert res.generated_up_to_phase
            phases.add(res.phase_offset)
        assert len(phases) == 1
