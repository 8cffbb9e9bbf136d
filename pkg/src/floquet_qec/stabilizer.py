"""Stabilizer-group state representation over Z_N qudits.

A group is a list of commuting :class:`PauliWord` generators, kept in a unique
Howell-style canonical form on the concatenated (x|z) exponent matrix.  Row
operations are performed with exact word arithmetic so gamma phases stay
correct through elimination.  Measurement follows the Gottesman-Knill update,
extended to composite N: the outcome of measuring ``w`` is uniform over the
coset {m : t*m = s mod N} where t is the smallest positive integer such that
the word part of ``w**t`` is generated by the group and omega^s is the stored
value of that element.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import DimensionMismatchError, InconsistentGroupError, NonCommutingError, NonMeasurableError
from .modmath import ann, gcd_ext, unit
from .pauli import PauliWord

__all__ = ["StabilizerGroup", "MembershipResult"]


@dataclass(frozen=True)
class MembershipResult:
    kind: str  # "in_group" | "proportional" | "not_in_group"
    phase_offset: int | None = None  # gamma exponent, reported when the phaseless word is generated

    @property
    def in_group(self) -> bool:
        return self.kind == "in_group"

    @property
    def generated_up_to_phase(self) -> bool:
        return self.kind in ("in_group", "proportional")


def _factorize(m: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


class _Rows:
    """Mutable (x|z|phase) row store with exact word arithmetic."""

    def __init__(self, n: int, N: int):
        self.n = n
        self.N = N
        self.vec = np.zeros((0, 2 * n), dtype=np.int64)
        self.phase = np.zeros(0, dtype=np.int64)

    @classmethod
    def from_words(cls, words, n, N):
        rows = cls(n, N)
        if words:
            rows.vec = np.stack([np.concatenate([w.x, w.z]) for w in words]).astype(np.int64)
            rows.phase = np.array([w.phase for w in words], dtype=np.int64)
        return rows

    def word(self, i: int) -> PauliWord:
        n = self.n
        return PauliWord(n, self.N, x=self.vec[i, :n], z=self.vec[i, n:], phase=int(self.phase[i]))

    def combine(self, i: int, j: int, a: int, b: int):
        """Rows (i, j) <- (i^a * j^b, ...) for one target row; returns the new row."""
        return _row_pow_mul(self.vec[i], self.phase[i], self.vec[j], self.phase[j], a, b, self.n, self.N)


def _row_phase_pow(vec, phase, k, n, N):
    x, z = vec[:n], vec[n:]
    p = k * int(phase) + k * (k - 1) * int(x @ z)
    return (k * vec) % N, p % (2 * N)


def _row_mul(vec_a, ph_a, vec_b, ph_b, n, N):
    za = vec_a[n:]
    xb = vec_b[:n]
    p = int(ph_a) + int(ph_b) + 2 * int(za @ xb)
    return (vec_a + vec_b) % N, p % (2 * N)


def _row_pow_mul(vec_a, ph_a, vec_b, ph_b, a, b, n, N):
    va, pa = _row_phase_pow(vec_a, ph_a, a, n, N)
    vb, pb = _row_phase_pow(vec_b, ph_b, b, n, N)
    return _row_mul(va, pa, vb, pb, n, N)


class StabilizerGroup:
    """Canonical stabilizer group over n qudits of dimension N."""

    def __init__(self, n: int, N: int, generators: list[PauliWord] | None = None):
        self.n = int(n)
        self.N = int(N)
        words = list(generators or [])
        for w in words:
            if w.n != self.n or w.N != self.N:
                raise DimensionMismatchError("generator does not match group dimensions")
        self._vec = np.zeros((0, 2 * self.n), dtype=np.int64)
        self._phase = np.zeros(0, dtype=np.int64)
        if words:
            self._vec = np.stack([np.concatenate([w.x, w.z]) for w in words]).astype(np.int64)
            self._phase = np.array([w.phase for w in words], dtype=np.int64)
        self._canonicalize()

    # -- construction helpers ------------------------------------------------

    def copy(self) -> "StabilizerGroup":
        g = StabilizerGroup.__new__(StabilizerGroup)
        g.n, g.N = self.n, self.N
        g._vec = self._vec.copy()
        g._phase = self._phase.copy()
        return g

    @property
    def generators(self) -> list[PauliWord]:
        n = self.n
        return [
            PauliWord(n, self.N, x=self._vec[i, :n], z=self._vec[i, n:], phase=int(self._phase[i]))
            for i in range(self._vec.shape[0])
        ]

    def __len__(self):
        return self._vec.shape[0]

    def __repr__(self):
        return f"StabilizerGroup(n={self.n}, N={self.N}, generators={len(self)})"

    # -- canonical form --------------------------------------------------------

    def _comm_matrix(self, vec: np.ndarray) -> np.ndarray:
        n = self.n
        X, Z = self._vec[:, :n], self._vec[:, n:]
        xw, zw = vec[:n], vec[n:]
        return (Z @ xw - X @ zw) % self.N

    def _validate_commuting(self):
        n, N = self.n, self.N
        X, Z = self._vec[:, :n], self._vec[:, n:]
        comm = (Z @ X.T - X @ Z.T) % N
        if comm.any():
            i, j = np.argwhere(comm)[0]
            raise NonCommutingError(f"generators {i} and {j} do not commute")

    def _canonicalize(self):
        self._validate_commuting()
        n, N = self.n, self.N
        rows = [self._vec[i].copy() for i in range(self._vec.shape[0])]
        phases = [int(p) for p in self._phase]
        r = 0
        for c in range(2 * n):
            piv = next((j for j in range(r, len(rows)) if rows[j][c] % N), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            phases[r], phases[piv] = phases[piv], phases[r]
            u = unit(int(rows[r][c]), N)
            if u != 1:
                rows[r], phases[r] = _row_phase_pow(rows[r], phases[r], u, n, N)
            for j in range(r + 1, len(rows)):
                if rows[j][c] % N:
                    g, s, t, uu, vv = gcd_ext(int(rows[r][c]), int(rows[j][c]), N)
                    new_r = _row_pow_mul(rows[r], phases[r], rows[j], phases[j], s, t, n, N)
                    new_j = _row_pow_mul(rows[r], phases[r], rows[j], phases[j], uu, vv, n, N)
                    rows[r], phases[r] = new_r
                    rows[j], phases[j] = new_j
            b = int(rows[r][c])
            for j in range(r):
                if rows[j][c] >= b:
                    k = int(rows[j][c]) // b
                    inv, pinv = _row_phase_pow(rows[r], phases[r], -k, n, N)
                    rows[j], phases[j] = _row_mul(rows[j], phases[j], inv, pinv, n, N)
            x = ann(b, N)
            if x > 0:
                extra, pex = _row_phase_pow(rows[r], phases[r], x, n, N)
                if extra.any():
                    rows.append(extra)
                    phases.append(pex)
                elif pex != 0:
                    raise InconsistentGroupError("group generates a nontrivial phase times identity")
            r += 1
        keep_vec, keep_phase = [], []
        for row, ph in zip(rows, phases):
            if row.any():
                keep_vec.append(row)
                keep_phase.append(ph)
            elif ph != 0:
                raise InconsistentGroupError("group generates a nontrivial phase times identity")
        if keep_vec:
            self._vec = np.stack(keep_vec)
            self._phase = np.array(keep_phase, dtype=np.int64)
        else:
            self._vec = np.zeros((0, 2 * n), dtype=np.int64)
            self._phase = np.zeros(0, dtype=np.int64)

    def canonicalize(self) -> "StabilizerGroup":
        """Groups are kept canonical; returns self for interface symmetry."""
        return self

    # -- membership ------------------------------------------------------------

    def _pivots(self) -> list[tuple[int, int]]:
        out = []
        for i in range(self._vec.shape[0]):
            nz = np.nonzero(self._vec[i])[0]
            if nz.size:
                out.append((i, int(nz[0])))
        return out

    def _reduce_word(self, vec: np.ndarray, phase: int) -> tuple[np.ndarray, int]:
        n, N = self.n, self.N
        for i, c in self._pivots():
            h = int(self._vec[i, c])
            v = int(vec[c])
            if v and v % h == 0:
                k = v // h
                inv, pinv = _row_phase_pow(self._vec[i], self._phase[i], -k, n, N)
                vec, phase = _row_mul(vec, phase, inv, pinv, n, N)
        return vec, phase

    def contains(self, w: PauliWord) -> MembershipResult:
        if w.n != self.n or w.N != self.N:
            raise DimensionMismatchError("word does not match group dimensions")
        vec = np.concatenate([w.x, w.z])
        residual, phase = self._reduce_word(vec, w.phase)
        if residual.any():
            return MembershipResult("not_in_group")
        if phase == 0:
            return MembershipResult("in_group", 0)
        return MembershipResult("proportional", phase)

    def expectation(self, w: PauliWord) -> complex:
        """omega^k-valued expectation of w in the maximally mixed code state."""
        if self._comm_matrix(np.concatenate([w.x, w.z])).any():
            return 0j
        res = self.contains(w)
        if not res.generated_up_to_phase:
            return 0j
        # w = gamma^offset * (element with eigenvalue +1)
        return complex(np.exp(1j * np.pi * res.phase_offset / self.N))

    # -- measurement -------------------------------------------------------------

    def _coset(self, w: PauliWord) -> tuple[int, int]:
        """(t, s): smallest divisor t of N with word(w^t) generated; value omega^s."""
        N = self.N
        for t in sorted(d for d in range(1, N + 1) if N % d == 0):
            wt = w ** t
            residual, phase = self._reduce_word(np.concatenate([wt.x, wt.z]), wt.phase)
            if not residual.any():
                if phase % 2 != 0:
                    raise InconsistentGroupError("generated element with non-omega phase")
                return t, (phase // 2) % N
        raise AssertionError("w^N must reduce to identity")

    def measure(self, w: PauliWord, rng: np.random.Generator) -> tuple[int, "StabilizerGroup"]:
        """Measure w (with w^N = 1); returns (outcome k meaning omega^k, new group)."""
        if not (w ** self.N).is_identity():
            raise NonMeasurableError("operator does not square to identity under N-th power")
        comm = self._comm_matrix(np.concatenate([w.x, w.z]))
        t, s = self._coset(w)
        outcomes = [m for m in range(self.N) if (t * m) % self.N == s]
        if len(outcomes) == 1:
            m = outcomes[0]
        else:
            m = int(outcomes[int(rng.integers(len(outcomes)))])
        if not comm.any() and t == 1:
            return m, self  # already determined, state unchanged
        new = self.copy()
        n, N = self.n, self.N
        if comm.any():
            d = 0
            for c in comm:
                d = gcd(d, int(c))
            d = gcd(d, N)
            # build h with comm(h, w) = d from the non-commuting generators
            h_vec = h_ph = None
            h_c = 0
            for i in range(len(comm)):
                ci = int(comm[i])
                if ci == 0:
                    continue
                if h_vec is None:
                    h_vec, h_ph, h_c = new._vec[i].copy(), int(new._phase[i]), ci
                else:
                    g, s_, t_, _, _ = gcd_ext(h_c, ci, N)
                    h_vec, h_ph = _row_pow_mul(h_vec, h_ph, new._vec[i], new._phase[i], s_, t_, n, N)
                    h_c = g
            if h_c % N != d:
                # lift gcd(h_c, N) = d into the exponent: h <- h^alpha with alpha*h_c = d mod N
                alpha = pow(h_c // d, -1, N // d) if N // d > 1 else 1
                h_vec, h_ph = _row_phase_pow(h_vec, h_ph, int(alpha), n, N)
            rows, phases = [], []
            for i in range(new._vec.shape[0]):
                k = int(comm[i]) // d
                if k:
                    vec, ph = _row_pow_mul(new._vec[i], new._phase[i], h_vec, h_ph, 1, -k, n, N)
                else:
                    vec, ph = new._vec[i].copy(), int(new._phase[i])
                rows.append(vec)
                phases.append(ph)
            hv, hp = _row_phase_pow(h_vec, h_ph, N // d, n, N)
            if hv.any():
                rows.append(hv)
                phases.append(hp)
            new._vec = np.stack(rows)
            new._phase = np.array(phases, dtype=np.int64)
        # append omega^{-m} w as a fixed generator
        meas = w.mul_phase(-2 * m)
        new._vec = np.vstack([new._vec, np.concatenate([meas.x, meas.z])[None, :]])
        new._phase = np.concatenate([new._phase, [meas.phase]])
        new._canonicalize()
        return m, new

    # -- counting / comparison ---------------------------------------------------

    def constraint_size(self) -> int:
        """Order of the group as a subgroup of the phaseless Pauli module."""
        size = 1
        for i, c in self._pivots():
            size *= self.N // gcd(int(self._vec[i, c]), self.N)
        return size

    def logical_count(self) -> Fraction:
        """log_N of the codespace dimension, as an exact rational."""
        dim = self.N ** self.n // self.constraint_size()
        if dim == 1:
            return Fraction(0)
        nf = _factorize(self.N)
        df = _factorize(dim)
        if set(df) - set(nf):
            raise ValueError("codespace dimension is not a rational power of N")
        ratios = {Fraction(df[p], nf[p]) for p in df}
        for p in nf:
            if p not in df:
                ratios.add(Fraction(0))
        if len(ratios) != 1:
            raise ValueError("codespace dimension is not a rational power of N")
        return ratios.pop()

    def group_equal(self, other: "StabilizerGroup", up_to_phase: bool = False) -> bool:
        if self.n != other.n or self.N != other.N:
            raise DimensionMismatchError("groups act on different systems")
        if self._vec.shape != other._vec.shape or not np.array_equal(self._vec, other._vec):
            return False
        return up_to_phase or np.array_equal(self._phase, other._phase)

    # -- serialization -------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "generators": [w.to_string() for w in self.generators],
        }

    @classmethod
    def from_json(cls, data: dict) -> "StabilizerGroup":
        n, N = data["n"], data["N"]
        return cls(n, N, [PauliWord.from_string(s, n, N) for s in data["generators"]])


# -- phase-insensitive span utilities ------------------------------------------
#
# ISG shape comparisons ignore measurement outcomes, so they work on the raw
# (x|z) exponent vectors over Z_N rather than on phase-carrying groups.


def words_to_vectors(words, n: int, N: int) -> np.ndarray:
    if not words:
        return np.zeros((0, 2 * n), dtype=np.int64)
    return np.stack([np.concatenate([w.x, w.z]) for w in words]).astype(np.int64) % N


def span_of(words, n: int, N: int) -> np.ndarray:
    """Canonical Howell form of the phaseless span of the given words."""
    from .modmath import howell

    return howell(words_to_vectors(words, n, N), N)


def span_contains(span_howell: np.ndarray, w: PauliWord, N: int) -> bool:
    from .modmath import reduce_row

    vec = np.concatenate([w.x, w.z])
    residual, _ = reduce_row(span_howell, vec, N)
    return not residual.any()


def span_equal(words_a, words_b, n: int, N: int) -> tuple[bool, list[PauliWord], list[PauliWord]]:
    """Phase-insensitive span equality; returns (equal, a_not_in_b, b_not_in_a)."""
    ha = span_of(words_a, n, N)
    hb = span_of(words_b, n, N)
    if ha.shape == hb.shape and np.array_equal(ha, hb):
        return True, [], []
    missing = [w for w in words_a if not span_contains(hb, w, N)]
    extra = [w for w in words_b if not span_contains(ha, w, N)]
    return False, missing, extra


def solve_violation_pattern(
    n: int, N: int, span_vectors: np.ndarray, anchors, sites
) -> PauliWord | None:
    """Word supported on the given qudits that commutes with an entire
    stabilizer span except for prescribed commutation exponents with the
    anchor elements (each anchor must lie in the span).

    The violation pattern is a linear functional on the span, so targets are
    assigned on a Howell basis of it: each basis row inherits the anchor
    coefficients from its decomposition.
    """
    from .modmath import howell, reduce_row, solve_left

    H = howell(span_vectors, N)
    targets = np.zeros(H.shape[0], dtype=np.int64)
    for word, exponent in anchors:
        residual, coeffs = reduce_row(H, np.concatenate([word.x, word.z]), N)
        if residual.any():
            return None
        targets = (targets + exponent * coeffs) % N
    sites = sorted(sites)
    if not sites:
        return None
    rows = []
    for v in sites:
        x = np.zeros(2 * n, dtype=np.int64)
        x[v] = 1
        z = np.zeros(2 * n, dtype=np.int64)
        z[n + v] = 1
        rows.append(x)
        rows.append(z)
    U = np.stack(rows)
    Xh, Zh = H[:, :n], H[:, n:]
    Xu, Zu = U[:, :n], U[:, n:]
    A = (Zu @ Xh.T - Xu @ Zh.T) % N
    coeffs = solve_left(A, targets, N)
    if coeffs is None:
        return None
    factors = {}
    for idx, v in enumerate(sites):
        xe, ze = int(coeffs[2 * idx]), int(coeffs[2 * idx + 1])
        if xe or ze:
            factors[v] = (xe, ze)
    return PauliWord.from_factors(n, N, factors)
