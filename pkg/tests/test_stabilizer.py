"""Stabilizer engine tests, cross-checked against the dense-matrix oracle."""

import numpy as np
import pytest

from floquet_qec.dense import DenseState, group_projector
from floquet_qec.errors import InconsistentGroupError, NonCommutingError, NonMeasurableError
from floquet_qec.pauli import PauliWord
from floquet_qec.stabilizer import StabilizerGroup


def X(i, n, N, k=1):
    return PauliWord.x_op(i, n, N, k)


def Z(i, n, N, k=1):
    return PauliWord.z_op(i, n, N, k)


def test_canonicalize_duplicate_removal():
    g = StabilizerGroup(2, 2, [Z(0, 2, 2), Z(0, 2, 2)])
    assert len(g) == 1


def test_canonicalize_empty():
    g = StabilizerGroup(3, 2, [])
    assert len(g) == 0
    assert g.logical_count() == 3


def test_same_group_different_generators():
    n = 3
    g1 = StabilizerGroup(n, 2, [Z(0, n, 2) * Z(1, n, 2), Z(1, n, 2) * Z(2, n, 2)])
    g2 = StabilizerGroup(n, 2, [Z(0, n, 2) * Z(1, n, 2), Z(0, n, 2) * Z(2, n, 2)])
    assert g1.group_equal(g2)


def test_non_commuting_rejected():
    with pytest.raises(NonCommutingError):
        StabilizerGroup(1, 2, [X(0, 1, 2), Z(0, 1, 2)])


def test_minus_identity_rejected():
    minus_i = PauliWord(1, 2, phase=2)
    with pytest.raises(InconsistentGroupError):
        StabilizerGroup(1, 2, [minus_i])
    # also via products: <-Z, Z> generates -I
    with pytest.raises(InconsistentGroupError):
        StabilizerGroup(1, 2, [Z(0, 1, 2).mul_phase(2), Z(0, 1, 2)])


def test_contains_basic():
    g = StabilizerGroup(1, 2, [Z(0, 1, 2)])
    assert g.contains(Z(0, 1, 2)).in_group
    res = g.contains(Z(0, 1, 2).mul_phase(2))  # -Z
    assert res.kind == "proportional" and res.phase_offset == 2
    assert g.contains(X(0, 1, 2)).kind == "not_in_group"


def test_measure_deterministic_and_idempotent():
    rng = np.random.default_rng(0)
    g = StabilizerGroup(2, 2, [Z(0, 2, 2)])
    m, g2 = g.measure(Z(0, 2, 2), rng)
    assert m == 0 and g2 is g
    # measure -Z: outcome flips
    m, _ = g.measure(Z(0, 2, 2).mul_phase(2), rng)
    assert m == 1


def test_measure_anticommuting_single_qubit():
    rng = np.random.default_rng(1)
    g = StabilizerGroup(2, 2, [X(0, 2, 2) * X(1, 2, 2)])
    m, g2 = g.measure(Z(0, 2, 2), rng)
    assert m in (0, 1)
    expected = StabilizerGroup(2, 2, [Z(0, 2, 2).mul_phase(-2 * m)])
    assert g2.group_equal(expected)
    # remeasurement reproduces the outcome with unchanged group
    m2, g3 = g2.measure(Z(0, 2, 2), rng)
    assert m2 == m and g3 is g2


def test_measure_outcome_uniformity():
    rng = np.random.default_rng(42)
    counts = np.zeros(2)
    g = StabilizerGroup(1, 2, [X(0, 1, 2)])
    trials = 10_000
    for _ in range(trials):
        m, _ = g.measure(Z(0, 1, 2), rng)
        counts[m] += 1
    # 5 sigma binomial bounds
    sigma = np.sqrt(trials * 0.25)
    assert abs(counts[0] - trials / 2) < 5 * sigma


def test_measure_rejects_bad_spectrum():
    rng = np.random.default_rng(0)
    g = StabilizerGroup(1, 4, [])
    bad = PauliWord(1, 4, x=[1], z=[1])  # (XZ)^4 = -1 at N=4
    with pytest.raises(NonMeasurableError):
        g.measure(bad, rng)


def test_measure_composite_coset():
    # N=4, group <Z^2>: measuring Z gives outcomes in {0, 2} uniformly
    rng = np.random.default_rng(5)
    g = StabilizerGroup(1, 4, [Z(0, 1, 4, 2)])
    seen = set()
    for _ in range(64):
        m, g2 = g.measure(Z(0, 1, 4), rng)
        seen.add(m)
        assert (2 * m) % 4 == 0
        assert g2.contains(Z(0, 1, 4).mul_phase(-2 * m)).in_group
    assert seen == {0, 2}


def test_measure_unconstrained_qudit():
    # free qudit at N=4: measuring X^2 gives outcomes in {0, 2}... actually
    # X^2 has order 2, eigenvalues +-1 = omega^{0,2}; uniform over both
    rng = np.random.default_rng(6)
    g = StabilizerGroup(1, 4, [])
    seen = {g.measure(X(0, 1, 4, 2), rng)[0] for _ in range(64)}
    assert seen == {0, 2}


def _engine_vs_dense(seed, n, N, n_meas):
    rng_words = np.random.default_rng(seed)
    engine_rng = np.random.default_rng(seed + 1)
    g = StabilizerGroup(n, N, [])
    dense = DenseState(n, N)
    for _ in range(n_meas):
        w = PauliWord(
            n, N,
            x=rng_words.integers(0, N, size=n),
            z=rng_words.integers(0, N, size=n),
            phase=2 * int(rng_words.integers(0, N)),
        )
        if not (w ** N).is_identity():
            continue
        # engine's predicted outcome distribution: uniform over its coset
        t, s = g._coset(w)
        coset = [m for m in range(N) if (t * m) % N == s]
        probs = dense.outcome_distribution(w)
        for m in range(N):
            expected = 1.0 / len(coset) if m in coset else 0.0
            assert abs(probs[m] - expected) < 1e-9, (w, m, probs)
        m, g = g.measure(w, engine_rng)
        dense.measure_forced(w, m)
        # post-measurement states agree: engine's code projector vs dense rho
        proj_engine = group_projector(g.generators, n, N)
        pe = proj_engine / np.trace(proj_engine)
        pd = dense.rho / np.trace(dense.rho)
        np.testing.assert_allclose(pe, pd, atol=1e-9)


def test_engine_matches_dense_oracle():
    for seed, n, N in [(0, 2, 2), (1, 3, 2), (2, 2, 3), (3, 2, 4), (4, 1, 6)]:
        _engine_vs_dense(seed * 100, n, N, 6)


def test_logical_count_monotone():
    n, N = 3, 2
    g = StabilizerGroup(n, N, [Z(0, n, N)])
    c1 = g.logical_count()
    g2 = StabilizerGroup(n, N, [Z(0, n, N), Z(1, n, N)])
    assert g2.logical_count() <= c1


def test_json_round_trip():
    g = StabilizerGroup(3, 3, [Z(0, 3, 3) * Z(1, 3, 3, 2), X(2, 3, 3)])
    g2 = StabilizerGroup.from_json(g.to_json())
    assert g.group_equal(g2)
