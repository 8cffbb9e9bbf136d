"""Dense-matrix oracle for small systems.

Builds explicit complex matrices for Pauli words and simulates measurements on
density matrices.  Only intended for cross-checking the stabilizer engine at
desk scale (N <= 4, n <= 4); everything is exact up to float tolerance.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliWord

__all__ = ["word_matrix", "projector", "DenseState"]


def _single_qudit_xz(N: int) -> tuple[np.ndarray, np.ndarray]:
    X = np.roll(np.eye(N, dtype=complex), 1, axis=0)  # X|a> = |a+1>
    omega = np.exp(2j * np.pi / N)
    Z = np.diag(omega ** np.arange(N))
    return X, Z


def word_matrix(w: PauliWord) -> np.ndarray:
    """Complex matrix of a Pauli word, gamma phase included."""
    X, Z = _single_qudit_xz(w.N)
    gamma = np.exp(1j * np.pi / w.N)
    m = np.ones((1, 1), dtype=complex)
    for i in range(w.n):
        site = np.linalg.matrix_power(X, int(w.x[i])) @ np.linalg.matrix_power(Z, int(w.z[i]))
        m = np.kron(m, site)
    return gamma ** w.phase * m


def projector(w: PauliWord, outcome: int) -> np.ndarray:
    """Projector onto the omega^outcome eigenspace of a word with w^N = 1."""
    N = w.N
    m = word_matrix(w)
    dim = m.shape[0]
    omega = np.exp(2j * np.pi / N)
    proj = np.zeros((dim, dim), dtype=complex)
    power = np.eye(dim, dtype=complex)
    for k in range(N):
        proj += omega ** (-outcome * k) * power
        power = power @ m
    return proj / N


def group_projector(words: list[PauliWord], n: int, N: int) -> np.ndarray:
    """Projector onto the joint +1 eigenspace of phase-carrying generators."""
    dim = N ** n
    proj = np.eye(dim, dtype=complex)
    for w in words:
        proj = proj @ projector(w, 0)
    return proj


class DenseState:
    """Density-matrix simulator starting from the maximally mixed state."""

    def __init__(self, n: int, N: int):
        self.n = n
        self.N = N
        dim = N ** n
        self.rho = np.eye(dim, dtype=complex) / dim

    def outcome_distribution(self, w: PauliWord) -> np.ndarray:
        probs = np.empty(self.N)
        for k in range(self.N):
            probs[k] = np.real(np.trace(projector(w, k) @ self.rho))
        return probs

    def measure(self, w: PauliWord, rng: np.random.Generator) -> int:
        probs = self.outcome_distribution(w)
        probs = np.clip(probs, 0.0, None)
        probs /= probs.sum()
        k = int(rng.choice(self.N, p=probs))
        self._project(w, k)
        return k

    def measure_forced(self, w: PauliWord, k: int) -> int:
        """Project onto a chosen outcome; the outcome must have nonzero probability."""
        probs = self.outcome_distribution(w)
        if probs[k] < 1e-12:
            raise ValueError(f"forced outcome {k} has zero probability")
        self._project(w, k)
        return k

    def _project(self, w: PauliWord, k: int):
        proj = projector(w, k)
        self.rho = proj @ self.rho @ proj.conj().T
        self.rho /= np.real(np.trace(self.rho))
