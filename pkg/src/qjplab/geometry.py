"""State-induced operator inner products and projections onto the algebra generated by B.

For real alpha in [-1, 1] the form

    <<Y, X>>_{psi,alpha} = (1+alpha)/2 <Y psi, X psi> + (1-alpha)/2 <X* psi, Y* psi>

is a positive semi-definite Hermitian form, so operators that agree on psi (in this
seminorm) are identified.  Nothing here builds quotient spaces explicitly; equality
is always tested as a small seminorm distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conditioning import ConditionalFunction
from .errors import DimMismatch
from .measurement import P_MIN
from .operators import as_decomposition, as_matrix, as_state, check_dims


@dataclass(frozen=True)
class OperatorInnerProduct:
    psi: np.ndarray
    alpha: float = 0.0

    def __post_init__(self):
        alpha = complex(self.alpha)
        if abs(alpha.imag) > 0 or not -1.0 <= alpha.real <= 1.0:
            raise ValueError(f"alpha must be real and lie in [-1, 1], got {self.alpha!r}")
        object.__setattr__(self, "alpha", float(alpha.real))
        object.__setattr__(self, "psi", as_state(self.psi))

    @property
    def dim(self) -> int:
        return self.psi.shape[0]


def _form(alpha: complex, psi: np.ndarray, Y, X) -> complex:
    Y = np.asarray(Y, dtype=complex)
    X = np.asarray(X, dtype=complex)
    if Y.shape != X.shape or Y.shape[0] != psi.shape[0]:
        raise DimMismatch(f"operator shapes {Y.shape}, {X.shape} do not match state dimension {psi.shape[0]}")
    left = np.vdot(Y @ psi, X @ psi)
    right = np.vdot(X.conj().T @ psi, Y.conj().T @ psi)
    return complex((1 + alpha) / 2 * left + (1 - alpha) / 2 * right)


def inner_product(ip: OperatorInnerProduct, Y, X) -> complex:
    return _form(ip.alpha, ip.psi, Y, X)


def norm(ip: OperatorInnerProduct, X) -> float:
    val = inner_product(ip, X, X).real
    return float(np.sqrt(max(val, 0.0)))


def quantum_covariance(alpha: complex, A, B, psi) -> complex:
    """``CV_S[A,B] + alpha i CV_A[A,B]``, i.e. ``<<A - E[A], B - E[B]>>`` extended to complex alpha."""
    a = as_matrix(A)
    b = as_matrix(B)
    vec = as_state(psi)
    check_dims(a.shape[0], b.shape[0], vec.shape[0])
    eye = np.eye(vec.shape[0])
    ca = a - np.vdot(vec, a @ vec) * eye
    cb = b - np.vdot(vec, b @ vec) * eye
    return _form(complex(alpha), vec, ca, cb)


def project_onto_algebra(alpha: float, A, B, psi) -> ConditionalFunction:
    """Coefficients ``c_b`` of the orthogonal projection ``sum_b c_b Pi_b`` of A onto functions of B.

    Found by solving the normal equations over the spectral projectors of B; slices
    with vanishing psi-weight are left undefined.
    """
    ip = OperatorInnerProduct(psi, alpha)
    a = as_matrix(A)
    db = as_decomposition(B)
    check_dims(a.shape[0], db.dim, ip.dim)
    born = np.array([np.vdot(p @ ip.psi, p @ ip.psi).real for p in db.projectors])
    defined = born >= P_MIN
    basis = db.projectors[defined]
    gram = np.array([[inner_product(ip, pj, pk) for pk in basis] for pj in basis])
    rhs = np.array([inner_product(ip, pj, a) for pj in basis])
    values = np.zeros(len(db), dtype=complex)
    values[defined] = np.linalg.solve(gram, rhs)
    return ConditionalFunction(np.array(db.eigenvalues, dtype=float), values, defined, complex(ip.alpha), born)


def projection_operator(alpha: float, A, B, psi) -> np.ndarray:
    return project_onto_algebra(alpha, A, B, psi).operator(B)


def function_of(B, values) -> np.ndarray:
    """``sum_b f(b) Pi_b`` from values listed in the order of the spectrum of B."""
    db = as_decomposition(B)
    return np.einsum("k,kij->ij", np.asarray(values, dtype=complex), db.projectors)


def orthogonality_residual(alpha: float, A, B, psi, f_values) -> float:
    """``|<<f(B), A - P_alpha(A|B)>>|`` for one test function of B."""
    ip = OperatorInnerProduct(psi, alpha)
    residual = as_matrix(A) - projection_operator(alpha, A, B, psi)
    return abs(inner_product(ip, function_of(B, f_values), residual))


@dataclass(frozen=True)
class PythagoreanResult:
    lhs: float
    rhs_sum: float
    gap: float
    projection_error: float
    proxy_error: float


def pythagorean_residual(alpha: float, A, B, psi, f_values) -> PythagoreanResult:
    """Compare ``||A - f(B)||^2`` with ``||A - P||^2 + ||P - f(B)||^2``."""
    ip = OperatorInnerProduct(psi, alpha)
    a = as_matrix(A)
    proj = projection_operator(alpha, A, B, psi)
    fb = function_of(B, f_values)
    lhs = inner_product(ip, a - fb, a - fb).real
    first = inner_product(ip, a - proj, a - proj).real
    second = inner_product(ip, proj - fb, proj - fb).real
    return PythagoreanResult(
        float(lhs), float(first + second), float(abs(lhs - first - second)), float(first), float(lhs)
    )
