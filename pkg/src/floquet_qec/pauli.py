"""Exact arithmetic for the generalized Pauli group over Z_N qudits.

A word is stored in the fixed normal order

    gamma^phase * prod_i X_i^{x_i} Z_i^{z_i}

with ``gamma = exp(i*pi/N)``, so ``omega = gamma**2 = exp(2i*pi/N)`` and the
phase exponent lives in Z_{2N}.  Keeping the half-angle phase makes Hermitian
2-body checks and ``Y = gamma*X*Z`` at N = 2 exactly representable.  Equal
operators have equal fields, so equality is plain field comparison.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError

__all__ = ["PauliWord", "ModParams", "mul", "comm_exponent", "adjoint", "word_pow"]


@dataclass(frozen=True)
class ModParams:
    """Qudit dimension and the Floquet automorphism pair (p, q), pq = 1 mod N."""

    N: int
    p: int = 1
    q: int = 1

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"qudit dimension must be >= 2, got {self.N}")
        object.__setattr__(self, "p", self.p % self.N)
        object.__setattr__(self, "q", self.q % self.N)
        if (self.p * self.q) % self.N != 1:
            raise ValueError(f"p*q must be 1 mod N, got p={self.p}, q={self.q}, N={self.N}")


class PauliWord:
    """Immutable normal-ordered generalized Pauli operator with exact phase."""

    __slots__ = ("n", "N", "x", "z", "phase")

    def __init__(self, n: int, N: int, x=None, z=None, phase: int = 0):
        self_n = int(n)
        self_N = int(N)
        xv = np.zeros(self_n, dtype=np.int64) if x is None else np.asarray(x, dtype=np.int64) % self_N
        zv = np.zeros(self_n, dtype=np.int64) if z is None else np.asarray(z, dtype=np.int64) % self_N
        if xv.shape != (self_n,) or zv.shape != (self_n,):
            raise ValueError("exponent vectors must have length n")
        xv.setflags(write=False)
        zv.setflags(write=False)
        object.__setattr__(self, "n", self_n)
        object.__setattr__(self, "N", self_N)
        object.__setattr__(self, "x", xv)
        object.__setattr__(self, "z", zv)
        object.__setattr__(self, "phase", int(phase) % (2 * self_N))

    def __setattr__(self, name, value):
        raise AttributeError("PauliWord is immutable")

    def __getstate__(self):
        return (self.n, self.N, self.x.tolist(), self.z.tolist(), self.phase)

    def __setstate__(self, state):
        n, N, x, z, phase = state
        self.__init__(n, N, x=x, z=z, phase=phase)

    def __reduce__(self):
        return (PauliWord, (self.n, self.N, self.x, self.z, self.phase))

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int, N: int) -> "PauliWord":
        return cls(n, N)

    @classmethod
    def x_op(cls, i: int, n: int, N: int, power: int = 1) -> "PauliWord":
        x = np.zeros(n, dtype=np.int64)
        x[i] = power
        return cls(n, N, x=x)

    @classmethod
    def z_op(cls, i: int, n: int, N: int, power: int = 1) -> "PauliWord":
        z = np.zeros(n, dtype=np.int64)
        z[i] = power
        return cls(n, N, z=z)

    @classmethod
    def y_op(cls, i: int, n: int) -> "PauliWord":
        """Pauli Y at qubit i; defined for N = 2 only (Y = gamma*X*Z)."""
        x = np.zeros(n, dtype=np.int64)
        z = np.zeros(n, dtype=np.int64)
        x[i] = 1
        z[i] = 1
        return cls(n, 2, x=x, z=z, phase=1)

    @classmethod
    def from_factors(cls, n: int, N: int, factors: dict[int, tuple[int, int]], phase: int = 0) -> "PauliWord":
        """Build a word from per-qudit (x_exp, z_exp) factors."""
        x = np.zeros(n, dtype=np.int64)
        z = np.zeros(n, dtype=np.int64)
        for i, (xe, ze) in factors.items():
            x[i] = xe
            z[i] = ze
        return cls(n, N, x=x, z=z, phase=phase)

    # -- basic queries -----------------------------------------------------

    def is_identity(self, up_to_phase: bool = False) -> bool:
        flat = not self.x.any() and not self.z.any()
        return flat if up_to_phase else (flat and self.phase == 0)

    @property
    def support(self) -> np.ndarray:
        return np.nonzero(self.x | self.z)[0]

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def restrict(self, sites, phase: int = 0) -> "PauliWord":
        """Word with exponents kept only on ``sites``; phase reset by default."""
        keep = np.zeros(self.n, dtype=bool)
        keep[list(sites)] = True
        return PauliWord(self.n, self.N, x=np.where(keep, self.x, 0), z=np.where(keep, self.z, 0), phase=phase)

    # -- group operations --------------------------------------------------

    def __mul__(self, other: "PauliWord") -> "PauliWord":
        if not isinstance(other, PauliWord):
            return NotImplemented
        _check_compat(self, other)
        # Reordering Z^za past X^xb contributes omega^(za.xb) = gamma^(2 za.xb).
        phase = self.phase + other.phase + 2 * int(self.z @ other.x)
        return PauliWord(self.n, self.N, x=self.x + other.x, z=self.z + other.z, phase=phase)

    def __pow__(self, k: int) -> "PauliWord":
        k = int(k)
        # (X^x Z^z)^k = omega^(x z k(k-1)/2) X^(kx) Z^(kz) per site.
        phase = k * self.phase + k * (k - 1) * int(self.x @ self.z)
        return PauliWord(self.n, self.N, x=k * self.x, z=k * self.z, phase=phase)

    def adjoint(self) -> "PauliWord":
        phase = -self.phase + 2 * int(self.x @ self.z)
        return PauliWord(self.n, self.N, x=-self.x, z=-self.z, phase=phase)

    def comm_exponent(self, other: "PauliWord") -> int:
        """c with self*other = omega^c * other*self."""
        _check_compat(self, other)
        return int(self.z @ other.x - self.x @ other.z) % self.N

    def commutes_with(self, other: "PauliWord") -> bool:
        return self.comm_exponent(other) == 0

    def with_phase(self, phase: int) -> "PauliWord":
        return PauliWord(self.n, self.N, x=self.x, z=self.z, phase=phase)

    def mul_phase(self, gamma_exponent: int) -> "PauliWord":
        return self.with_phase(self.phase + gamma_exponent)

    # -- hashing / comparison / text ----------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliWord)
            and self.n == other.n
            and self.N == other.N
            and self.phase == other.phase
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def equals_up_to_phase(self, other: "PauliWord") -> bool:
        return (
            self.n == other.n
            and self.N == other.N
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self):
        return hash((self.n, self.N, self.phase, self.x.tobytes(), self.z.tobytes()))

    def __repr__(self):
        return f"PauliWord({self.to_string()!r}, n={self.n}, N={self.N})"

    def to_string(self) -> str:
        """Compact text form, e.g. ``"w^3 X2^1 Z2^2 X5^1"``; identity is ``"w^0"``."""
        parts = [f"w^{self.phase}"]
        for i in range(self.n):
            if self.x[i]:
                parts.append(f"X{i}^{self.x[i]}")
            if self.z[i]:
                parts.append(f"Z{i}^{self.z[i]}")
        return " ".join(parts)

    @classmethod
    def from_string(cls, text: str, n: int, N: int) -> "PauliWord":
        phase = 0
        x = np.zeros(n, dtype=np.int64)
        z = np.zeros(n, dtype=np.int64)
        for token in text.split():
            m = re.fullmatch(r"(w|X(\d+)|Z(\d+))\^(-?\d+)", token)
            if m is None:
                raise ValueError(f"bad token {token!r} in Pauli string")
            exp = int(m.group(4))
            if m.group(1) == "w":
                phase = exp
            elif m.group(2) is not None:
                x[int(m.group(2))] += exp
            else:
                z[int(m.group(3))] += exp
        return cls(n, N, x=x, z=z, phase=phase)


def _check_compat(a: PauliWord, b: PauliWord):
    if a.n != b.n or a.N != b.N:
        raise DimensionMismatchError(f"incompatible words: (n={a.n}, N={a.N}) vs (n={b.n}, N={b.N})")


def mul(a: PauliWord, b: PauliWord) -> PauliWord:
    return a * b


def comm_exponent(a: PauliWord, b: PauliWord) -> int:
    return a.comm_exponent(b)


def adjoint(a: PauliWord) -> PauliWord:
    return a.adjoint()


def word_pow(a: PauliWord, k: int) -> PauliWord:
    return a ** k


def product(words, n: int | None = None, N: int | None = None) -> PauliWord:
    """Ordered product of an iterable of words (identity for an empty iterable)."""
    acc = None
    for w in words:
        acc = w if acc is None else acc * w
    if acc is None:
        if n is None or N is None:
            raise ValueError("empty product needs explicit n and N")
        return PauliWord.identity(n, N)
    return acc
