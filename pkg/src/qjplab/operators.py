"""Finite-dimensional observables: spectral decomposition, functional calculus, Born statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimMismatch, NotHermitian

MAX_DIM = 256
HERMITICITY_RTOL = 1e-12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _as_square(entries) -> np.ndarray:
    mat = np.array(entries, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
        raise DimMismatch(f"expected a non-empty square matrix, got shape {mat.shape}")
    if mat.shape[0] > MAX_DIM:
        raise DimMismatch(f"dimension {mat.shape[0]} exceeds supported maximum {MAX_DIM}")
    return mat


class HermitianOperator:
    """Dense Hermitian matrix with a lazily computed, cached spectral decomposition."""

    __slots__ = ("_entries", "_decomp")

    def __init__(self, entries):
        mat = _as_square(entries)
        scale = float(np.max(np.abs(mat))) if mat.size else 0.0
        if np.max(np.abs(mat - mat.conj().T)) > HERMITICITY_RTOL * max(scale, 1e-300):
            raise NotHermitian("matrix is not Hermitian within tolerance")
        mat = 0.5 * (mat + mat.conj().T)
        mat.setflags(write=False)
        self._entries = mat
        self._decomp = None

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def decomposition(self) -> "SpectralDecomposition":
        if self._decomp is None:
            self._decomp = spectral_decompose(self)
        return self._decomp

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._entries, dtype=dtype)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct eigenvalues (strictly increasing) with their orthogonal projectors."""

    eigenvalues: np.ndarray
    projectors: np.ndarray  # shape (N, dim, dim)

    @property
    def dim(self) -> int:
        return self.projectors.shape[1]

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def ranks(self) -> np.ndarray:
        return np.rint(np.real(np.einsum("kii->k", self.projectors))).astype(int)

    def matrix(self) -> np.ndarray:
        return np.einsum("k,kij->ij", self.eigenvalues, self.projectors)

    def index_of(self, value: float, tol: float = 1e-9) -> int:
        idx = int(np.argmin(np.abs(self.eigenvalues - value)))
        if abs(self.eigenvalues[idx] - value) > tol * (1.0 + abs(value)):
            raise ValueError(f"{value!r} is not an eigenvalue (spectrum {self.eigenvalues.tolist()})")
        return idx

    def eigenvector(self, index: int) -> np.ndarray:
        """Unit vector spanning a rank-1 eigenspace."""
        proj = self.projectors[index]
        col = int(np.argmax(np.real(np.diag(proj))))
        vec = proj[:, col]
        return vec / np.linalg.norm(vec)


def as_decomposition(op) -> SpectralDecomposition:
    if isinstance(op, SpectralDecomposition):
        return op
    if isinstance(op, HermitianOperator):
        return op.decomposition
    return spectral_decompose(op)


def as_matrix(op) -> np.ndarray:
    if isinstance(op, SpectralDecomposition):
        return op.matrix()
    return np.asarray(op, dtype=complex)


def spectral_decompose(op, eig_tol: float | None = None) -> SpectralDecomposition:
    """Merge numerically degenerate eigenvalues and build one projector per distinct value.

    ``eig_tol`` defaults to ``1e-9 * (1 + ||A||)``.
    """
    if not isinstance(op, HermitianOperator):
        op = HermitianOperator(op)
    mat = op.entries
    vals, vecs = np.linalg.eigh(mat)
    if eig_tol is None:
        eig_tol = 1e-9 * (1.0 + float(np.max(np.abs(vals))))
    if eig_tol <= 0:
        raise ValueError("eig_tol must be positive")

    groups = [[0]]
    for k in range(1, len(vals)):
        if vals[k] - vals[groups[-1][-1]] <= eig_tol:
            groups[-1].append(k)
        else:
            groups.append([k])

    eigenvalues = np.array([vals[g].mean() for g in groups])
    projectors = np.empty((len(groups), op.dim, op.dim), dtype=complex)
    for i, g in enumerate(groups):
        v = vecs[:, g]
        projectors[i] = v @ v.conj().T
    eigenvalues.setflags(write=False)
    projectors.setflags(write=False)
    return SpectralDecomposition(eigenvalues, projectors)


def apply_function(decomp: SpectralDecomposition, f: Callable[[float], complex]) -> np.ndarray:
    """Return sum_a f(a) Pi_a."""
    decomp = as_decomposition(decomp)
    coeffs = np.array([f(a) for a in decomp.eigenvalues], dtype=complex)
    return np.einsum("k,kij->ij", coeffs, decomp.projectors)


def unitary(decomp: SpectralDecomposition, t: float) -> np.ndarray:
    """exp(-i t A)."""
    decomp = as_decomposition(decomp)
    return np.einsum("k,kij->ij", np.exp(-1j * t * decomp.eigenvalues), decomp.projectors)


class PureState:
    """Normalised state vector of the target system."""

    __slots__ = ("_amps",)

    def __init__(self, amplitudes):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("state vector must have finite non-zero norm")
        amps = amps / norm
        amps.setflags(write=False)
        self._amps = amps

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    @property
    def dim(self) -> int:
        return self._amps.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._amps, dtype=dtype)

    def __repr__(self):
        return f"PureState({np.round(self._amps, 6).tolist()})"


def as_state(state) -> np.ndarray:
    if isinstance(state, PureState):
        return state.amplitudes
    return PureState(state).amplitudes


def check_dims(*dims):
    if len(set(dims)) > 1:
        raise DimMismatch(f"dimension mismatch: {dims}")


@dataclass(frozen=True)
class ProbTable:
    outcomes: np.ndarray
    weights: np.ndarray

    def as_dict(self) -> dict:
        return {float(a): float(w) for a, w in zip(self.outcomes, self.weights)}

    def mean(self) -> float:
        return float(np.dot(self.outcomes, self.weights))


def expectation(op, state) -> float:
    mat = as_matrix(op)
    phi = as_state(state)
    check_dims(mat.shape[0], phi.shape[0])
    val = np.vdot(phi, mat @ phi) / np.vdot(phi, phi).real
    scale = 1.0 + float(np.max(np.abs(mat)))
    if abs(val.imag) > 1e-12 * scale:
        raise NotHermitian(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def born_probabilities(decomp, state) -> ProbTable:
    decomp = as_decomposition(decomp)
    phi = as_state(state)
    check_dims(decomp.dim, phi.shape[0])
    weights = np.array([np.linalg.norm(p @ phi) ** 2 for p in decomp.projectors])
    weights = weights / weights.sum()
    return ProbTable(np.array(decomp.eigenvalues, dtype=float), weights)


def spectral_moment(decomp, state, n: int) -> float:
    born = born_probabilities(decomp, state)
    return float(np.dot(born.outcomes**n, born.weights))


def operator_norm(op) -> float:
    """Largest singular value."""
    mat = np.asarray(op, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimMismatch("operator_norm expects a square matrix")
    return float(np.linalg.norm(mat, 2))


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix rescaled to operator norm ``scale``."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = 0.5 * (z + z.conj().T)
    return scale * h / np.linalg.norm(h, 2)


def random_state(rng: np.random.Generator, dim: int) -> PureState:
    return PureState(rng.normal(size=dim) + 1j * rng.normal(size=dim))
