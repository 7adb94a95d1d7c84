"""Conditional quasi-expectations, weak values and the post-selection amplification limit."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import EigenvectorInput, IndefiniteConditioning, OrthogonalSelection, TrivialOperator
from .measurement import P_MIN, CompositeState, branch_matrices
from .meter import observable_tag
from .operators import PureState, as_decomposition, as_matrix, as_state, check_dims
from .qjp import QuasiProbTable


@dataclass(frozen=True)
class ConditionalFunction:
    """Values of a function of B, tabulated on the spectrum of B.

    Entries where the Born weight of b falls below ``P_MIN`` are kept but flagged undefined.
    """

    b: np.ndarray
    values: np.ndarray
    defined: np.ndarray
    alpha: complex
    born: np.ndarray

    def __len__(self):
        return len(self.b)

    def __call__(self, b: float, tol: float = 1e-9) -> complex:
        idx = int(np.argmin(np.abs(self.b - b)))
        if abs(self.b[idx] - b) > tol * (1 + abs(b)):
            raise KeyError(b)
        if not self.defined[idx]:
            raise IndefiniteConditioning(f"conditional value undefined at b={b}")
        return complex(self.values[idx])

    def as_dict(self) -> dict:
        return {float(b): complex(v) for b, v, ok in zip(self.b, self.values, self.defined) if ok}

    def total_expectation(self) -> complex:
        """``sum_b value(b) mu_B(b)`` over defined b."""
        return complex(np.sum(self.values[self.defined] * self.born[self.defined]))

    def operator(self, B) -> np.ndarray:
        """``sum_b value(b) Pi_b`` (undefined slices contribute nothing)."""
        decomp = as_decomposition(B)
        coeffs = np.where(self.defined, self.values, 0.0)
        return np.einsum("k,kij->ij", coeffs, decomp.projectors)

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["b", "re", "im", "defined"])
            for b, v, ok in zip(self.b, self.values, self.defined):
                writer.writerow([f"{b + 0.0:.17g}", f"{v.real + 0.0:.17g}", f"{v.imag + 0.0:.17g}", int(ok)])


def _weak_ratios(A, B, phi):
    """Per-b ``<phi, Pi_b A phi> / ||Pi_b phi||^2`` with Born weights and definedness."""
    mat = as_matrix(A)
    db = as_decomposition(B)
    vec = as_state(phi)
    check_dims(mat.shape[0], db.dim, vec.shape[0])
    born = np.array([np.vdot(p @ vec, p @ vec).real for p in db.projectors])
    defined = born >= P_MIN
    ratios = np.zeros(len(db), dtype=complex)
    for k, p in enumerate(db.projectors):
        if defined[k]:
            ratios[k] = np.vdot(vec, p @ mat @ vec) / born[k]
    return db, ratios, born, defined


def cond_quasi_expectation(alpha: complex, A, B, phi) -> ConditionalFunction:
    alpha = complex(alpha)
    db, z, born, defined = _weak_ratios(A, B, phi)
    values = (1 + alpha) / 2 * z + (1 - alpha) / 2 * np.conj(z)
    values[~defined] = 0.0
    return ConditionalFunction(np.array(db.eigenvalues, dtype=float), values, defined, alpha, born)


def weak_value(A, phi_i, phi_f) -> complex:
    mat = as_matrix(A)
    vi = as_state(phi_i)
    vf = as_state(phi_f)
    check_dims(mat.shape[0], vi.shape[0], vf.shape[0])
    overlap = np.vdot(vf, vi)
    if abs(overlap) < np.sqrt(P_MIN):
        raise OrthogonalSelection(f"|<phi_f, phi_i>| = {abs(overlap):.3e} is too small")
    return complex(np.vdot(vf, mat @ vi) / overlap)


def two_state_value(alpha: complex, A, phi_i, phi_f) -> complex:
    aw = weak_value(A, phi_i, phi_f)
    alpha = complex(alpha)
    return (1 + alpha) / 2 * aw + (1 - alpha) / 2 * np.conj(aw)


def conditional_average_from_qjp(table: QuasiProbTable, b: float, tol: float = 1e-9) -> complex:
    """``sum_a a w(a, b) / sum_a w(a, b)`` on one b-slice of a table."""
    mask = np.abs(table.b - b) <= tol * (1 + abs(b))
    mass = table.w[mask].sum()
    if abs(mass) < P_MIN:
        raise IndefiniteConditioning(f"b-marginal weight {abs(mass):.3e} at b={b} is below {P_MIN:g}")
    return complex(np.sum(table.a[mask] * table.w[mask]) / mass)


def construct_post_selection(A, phi, c: complex) -> PureState:
    """A post-selected state whose weak value with pre-selection ``phi`` is the target ``c``."""
    mat = as_matrix(A)
    vec = as_state(phi)
    check_dims(mat.shape[0], vec.shape[0])
    scale = np.max(np.abs(mat))
    if np.max(np.abs(mat - mat[0, 0] * np.eye(mat.shape[0]))) <= 1e-12 * (1 + scale):
        raise TrivialOperator("A is a multiple of the identity")
    mean = np.vdot(vec, mat @ vec).real
    spread_vec = mat @ vec - mean * vec
    spread = np.linalg.norm(spread_vec)
    if spread <= 1e-10:
        raise EigenvectorInput("phi is an eigenvector of A; every weak value equals its eigenvalue")
    c_prime = (complex(c) - mean) / spread
    if abs(c_prime) < 1e-15:
        return PureState(vec)
    chi = spread_vec / spread
    return PureState(vec / np.conj(c_prime) + chi)


def amplification_bound(cs: CompositeState, X: str, rtol: float = 1e-12) -> float:
    """Norm of X compressed to the span of the branch meter states.

    Solved as the generalised eigenproblem ``M v = lambda G v`` after restricting to
    the numerically non-null part of the Gram matrix G.  Branches that phi does not
    populate cannot appear in any post-selected meter state and are left out.
    """
    gram, mat = branch_matrices(cs, observable_tag(X))
    live = np.flatnonzero(cs.weights >= P_MIN)
    gram = gram[np.ix_(live, live)]
    mat = mat[np.ix_(live, live)]
    gram = 0.5 * (gram + gram.conj().T)
    mat = 0.5 * (mat + mat.conj().T)
    evals, evecs = np.linalg.eigh(gram)
    keep = evals > rtol * evals.max()
    basis = evecs[:, keep] / np.sqrt(evals[keep])
    compressed = basis.conj().T @ mat @ basis
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (compressed + compressed.conj().T)))))
