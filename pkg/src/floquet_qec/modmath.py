"""Linear algebra over the ring Z_N: Howell form, kernels, and solvers.

Z_N has zero divisors for composite N, so plain Gaussian elimination does not
give a canonical form.  The Howell form does: pivots divide N, entries above a
pivot are reduced modulo it, and for every matrix with the same row span the
form is identical.  The construction follows the standard Storjohann recipe
(unimodular 2x2 row transforms from extended gcd, plus annihilator rows for
zero-divisor pivots).
"""

from __future__ import annotations

from math import gcd

import numpy as np

__all__ = ["gcd_ext", "unit", "ann", "howell", "howell_complete", "kernel", "solve_left", "reduce_row"]


def gcd_ext(a: int, b: int, N: int) -> tuple[int, int, int, int, int]:
    """(g, s, t, u, v) with s*a+t*b = g, u*a+v*b = 0 mod N and [[s,t],[u,v]] unimodular."""
    a %= N
    b %= N
    if b == 0:
        return a, 1, 0, 0, 1
    if a == 0:
        return b, 0, 1, 1, 0
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    g = old_r
    # determinant (old_s * a/g + old_t * b/g) == 1, so the transform is unimodular
    return g, old_s % N, old_t % N, (-(b // g)) % N, (a // g) % N


def unit(a: int, N: int) -> int:
    """Unit u (gcd(u, N) = 1) with u*a = gcd(a, N) mod N."""
    a %= N
    if a == 0:
        return 1
    g = gcd(a, N)
    b = a // g
    step = N // g
    u = pow(b, -1, step) if step > 1 else 1
    while gcd(u, N) != 1:
        u += step
    return u % N


def ann(a: int, N: int) -> int:
    """Generator of the annihilator ideal of a in Z_N (0 when a is a unit)."""
    a %= N
    if a == 0:
        return 1
    return (N // gcd(a, N)) % N


def howell_complete(mat: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Howell form H, transform U with U@mat = H mod N, and kernel rows K.

    Rows of K span {v : v @ mat = 0 mod N}.
    """
    work = np.asarray(mat, dtype=np.int64) % N
    if work.ndim != 2:
        raise ValueError("expected a 2D matrix")
    n_row, n_col = work.shape
    if n_row == 0:
        empty = np.zeros((0, n_row), dtype=np.int64)
        return np.zeros((0, n_col), dtype=np.int64), empty, empty
    transform = np.eye(n_row, dtype=np.int64)
    rows = [work[i].copy() for i in range(n_row)]
    trows = [transform[i].copy() for i in range(n_row)]
    r = 0
    for c in range(n_col):
        piv = next((j for j in range(r, len(rows)) if rows[j][c] % N), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        trows[r], trows[piv] = trows[piv], trows[r]
        u = unit(int(rows[r][c]), N)
        if u != 1:
            rows[r] = (rows[r] * u) % N
            trows[r] = (trows[r] * u) % N
        for j in range(r + 1, len(rows)):
            if rows[j][c] % N:
                g, s, t, uu, vv = gcd_ext(int(rows[r][c]), int(rows[j][c]), N)
                new_r = (s * rows[r] + t * rows[j]) % N
                new_j = (uu * rows[r] + vv * rows[j]) % N
                new_tr = (s * trows[r] + t * trows[j]) % N
                new_tj = (uu * trows[r] + vv * trows[j]) % N
                rows[r], rows[j] = new_r, new_j
                trows[r], trows[j] = new_tr, new_tj
        b = int(rows[r][c])
        for j in range(r):
            if rows[j][c] >= b:
                k = int(rows[j][c]) // b
                rows[j] = (rows[j] - k * rows[r]) % N
                trows[j] = (trows[j] - k * trows[r]) % N
        x = ann(b, N)
        if x > 0:
            extra = (x * rows[r]) % N
            if extra.any():
                rows.append(extra)
                trows.append((x * trows[r]) % N)
        r += 1

    H = np.array([rows[i] for i in range(len(rows))], dtype=np.int64).reshape(len(rows), n_col)
    U = np.array([trows[i] for i in range(len(trows))], dtype=np.int64).reshape(len(trows), n_row)
    nz = [i for i in range(len(rows)) if H[i].any()]
    zr = [i for i in range(len(rows)) if not H[i].any()]
    K = U[zr] % N if zr else np.zeros((0, n_row), dtype=np.int64)
    return H[nz], U[nz] % N, K


def howell(mat: np.ndarray, N: int) -> np.ndarray:
    return howell_complete(mat, N)[0]


def kernel(mat: np.ndarray, N: int) -> np.ndarray:
    """Rows spanning the left kernel {v : v @ mat = 0 mod N}."""
    return howell_complete(mat, N)[2]


def _pivots(H: np.ndarray) -> list[tuple[int, int]]:
    out = []
    for i in range(H.shape[0]):
        nz = np.nonzero(H[i])[0]
        if nz.size:
            out.append((i, int(nz[0])))
    return out


def reduce_row(H: np.ndarray, v: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduce v against Howell rows H; returns (residual, coefficients)."""
    v = np.asarray(v, dtype=np.int64) % N
    coeffs = np.zeros(H.shape[0], dtype=np.int64)
    for i, c in _pivots(H):
        h = int(H[i, c])
        if v[c] % h == 0:  # Howell pivots divide N, so span membership is divisibility
            k = int(v[c]) // h
            if k:
                v = (v - k * H[i]) % N
                coeffs[i] = k
    return v, coeffs


def solve_left(rows: np.ndarray, target: np.ndarray, N: int) -> np.ndarray | None:
    """Coefficient vector a with a @ rows = target mod N, or None."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.shape[0] == 0:
        return None if (np.asarray(target) % N).any() else np.zeros(0, dtype=np.int64)
    H, U, _ = howell_complete(rows, N)
    residual, coeffs = reduce_row(H, target, N)
    if residual.any():
        return None
    return (coeffs @ U) % N


def row_span_rank_profile(H: np.ndarray, N: int) -> int:
    """Size of the module spanned, as log over elementary divisors: prod N/pivot."""
    size = 1
    for i, c in _pivots(H):
        size *= N // gcd(int(H[i, c]), N)
    return size
