import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from floquet_qec.modmath import ann, gcd_ext, howell, howell_complete, kernel, solve_left, unit


def test_gcd_ext_unimodular():
    rng = np.random.default_rng(0)
    for N in (2, 3, 4, 6, 12):
        for _ in range(50):
            a, b = int(rng.integers(N)), int(rng.integers(N))
            g, s, t, u, v = gcd_ext(a, b, N)
            assert (s * a + t * b) % N == g % N
            assert (u * a + v * b) % N == 0
            det = (s * v - t * u) % N
            assert np.gcd(det, N) == 1  # unimodular


def test_unit_and_ann():
    for N in (2, 4, 6, 12):
        for a in range(N):
            u = unit(a, N)
            assert np.gcd(u, N) == 1
            if a:
                assert (u * a) % N == np.gcd(a, N)
            x = ann(a, N)
            assert (x * a) % N == 0


def test_howell_known_case():
    # standard worked example over Z_12
    mat = np.array([[8, 5, 5], [0, 9, 8], [0, 0, 10]])
    H = howell(mat, 12)
    expected = np.array([[4, 1, 0], [0, 3, 0], [0, 0, 1]])
    assert np.array_equal(H, expected)


def _row_span(mat, N):
    """All elements of the row span (small cases only)."""
    from itertools import product

    span = set()
    for coeffs in product(range(N), repeat=mat.shape[0]):
        v = (np.array(coeffs) @ mat) % N
        span.add(tuple(v))
    return span


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4, 6]), st.integers(1, 3), st.integers(1, 3))
def test_howell_preserves_span_and_canonical(seed, N, r, c):
    rng = np.random.default_rng(seed)
    mat = rng.integers(0, N, size=(r, c))
    H, U, K = howell_complete(mat, N)
    assert np.array_equal((U @ mat) % N, H % N)
    assert not ((K @ mat) % N).any()
    assert _row_span(mat, N) == _row_span(H, N) if H.size else {tuple([0] * c)} == _row_span(mat, N)
    # canonical: same span under a random row shuffle/mix gives the same form
    mix = rng.integers(0, N, size=(r + 1, r))
    mat2 = np.vstack([mat, (mix[0] @ mat) % N])
    H2 = howell(mat2, N)
    assert np.array_equal(H, H2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 4, 6]), st.integers(1, 4))
def test_solve_left(seed, N, r):
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, N, size=(r, 3))
    coeffs = rng.integers(0, N, size=r)
    target = (coeffs @ rows) % N
    a = solve_left(rows, target, N)
    assert a is not None
    assert np.array_equal((a @ rows) % N, target)
    # unreachable targets report None
    bad = target.copy()
    span = _row_span(rows, N)
    for candidate in ([1, 0, 0], [0, 1, 0], [1, 1, 1]):
        if tuple(np.array(candidate) % N) not in span:
            assert solve_left(rows, np.array(candidate), N) is None
            break


def test_kernel_spans_all_relations():
    N = 4
    rng = np.random.default_rng(3)
    rows = rng.integers(0, N, size=(3, 2))
    K = kernel(rows, N)
    from itertools import product

    kern = {
        coeffs
        for coeffs in product(range(N), repeat=3)
        if not ((np.array(coeffs) @ rows) % N).any()
    }
    gen = _row_span(K, N) if K.size else {(0, 0, 0)}
    assert gen == kern
