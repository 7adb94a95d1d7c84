"""Quasi-joint-probability tables for a pair of finite-spectrum observables.

Two one-parameter families are built from the split products of ``exp(-isA)``
and ``exp(-itB)``:

* additive:    ``(1+alpha)/2 e^{-itB} e^{-isA} + (1-alpha)/2 e^{-isA} e^{-itB}``
* convolutive: ``e^{-i<s,(1-alpha)/2> A} e^{-itB} e^{-i<s,(1+alpha)/2> A}`` with s complex

Tables are atomic: each atom is ``(a, b, w)`` with complex outcome ``a`` (real for
the additive family), real ``b`` and complex weight ``w``.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConditioning, MarginalViolation, SingularTransform
from .operators import ProbTable, as_decomposition, as_state, born_probabilities, check_dims, unitary

ADDITIVE = "additive"
CONVOLUTIVE = "convolutive"
KD = "kd"
CUSTOM = "custom"
FAMILIES = (ADDITIVE, CONVOLUTIVE, KD)

MERGE_TOL = 1e-10


def state_fingerprint(phi) -> str:
    vec = np.round(as_state(phi), 12) + 0.0  # +0.0 folds -0.0
    return hashlib.sha256(vec.tobytes()).hexdigest()[:16]


def pairing(s, a):
    """Real pairing ``<s, a> = Re s Re a + Im s Im a`` of two complex numbers viewed as vectors in R^2."""
    s = np.asarray(s, dtype=complex)
    a = np.asarray(a, dtype=complex)
    return s.real * a.real + s.imag * a.imag


@dataclass(frozen=True)
class QuasiProbTable:
    a: np.ndarray
    b: np.ndarray
    w: np.ndarray
    family: str = CUSTOM
    alpha: complex = 0j
    fingerprint: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name, dtype in (("a", complex), ("b", float), ("w", complex)):
            arr = np.array(getattr(self, name), dtype=dtype).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (len(self.a) == len(self.b) == len(self.w)):
            raise ValueError("atom arrays differ in length")
        object.__setattr__(self, "alpha", complex(self.alpha))

    def __len__(self):
        return len(self.w)

    def total(self) -> complex:
        return complex(self.w.sum())

    def fourier(self, s, t: float) -> complex:
        """``sum w exp(-i(<s,a> + t b))``."""
        return complex(np.sum(self.w * np.exp(-1j * (pairing(s, self.a) + t * self.b))))

    def merged(self, tol: float = MERGE_TOL) -> "QuasiProbTable":
        """Coalesce atoms whose outcomes agree within ``tol`` and sort canonically."""
        order = np.lexsort((self.a.imag, self.a.real, self.b))
        reps_a, reps_b, weights = [], [], []
        for i in order:
            match = None
            for k in range(len(reps_a) - 1, -1, -1):
                if reps_b[k] < self.b[i] - tol:
                    break
                if abs(reps_b[k] - self.b[i]) <= tol and abs(reps_a[k] - self.a[i]) <= tol:
                    match = k
                    break
            if match is None:
                reps_a.append(self.a[i])
                reps_b.append(self.b[i])
                weights.append(self.w[i])
            else:
                weights[match] += self.w[i]
        a, b, w = np.array(reps_a), np.array(reps_b, dtype=float), np.array(weights)
        order = np.lexsort((a.imag, a.real, b))
        return QuasiProbTable(a[order], b[order], w[order], self.family, self.alpha, self.fingerprint, self.meta)

    def slice(self, b: float, tol: float = 1e-9) -> "QuasiProbTable":
        mask = np.abs(self.b - b) <= tol
        return QuasiProbTable(self.a[mask], self.b[mask], self.w[mask], self.family, self.alpha, self.fingerprint)

    def with_(self, **changes) -> "QuasiProbTable":
        fields = dict(a=self.a, b=self.b, w=self.w, family=self.family, alpha=self.alpha, fingerprint=self.fingerprint)
        fields.update(changes)
        return QuasiProbTable(**fields)

    # serialisation

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["re_a", "im_a", "b", "re_w", "im_w"])
            for a, b, w in zip(self.a, self.b, self.w):
                writer.writerow([f"{v + 0.0:.17g}" for v in (a.real, a.imag, b, w.real, w.imag)])

    def to_json(self) -> str:
        payload = {
            "family": self.family,
            "alpha": [self.alpha.real, self.alpha.imag],
            "fingerprint": self.fingerprint,
            "atoms": [[a.real, a.imag, b, w.real, w.imag] for a, b, w in zip(self.a, self.b, self.w)],
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "QuasiProbTable":
        payload = json.loads(text)
        atoms = np.array(payload["atoms"], dtype=float).reshape(-1, 5)
        return cls(
            atoms[:, 0] + 1j * atoms[:, 1],
            atoms[:, 2],
            atoms[:, 3] + 1j * atoms[:, 4],
            payload["family"],
            complex(*payload["alpha"]),
            payload.get("fingerprint", ""),
        )


def tables_close(first: QuasiProbTable, second: QuasiProbTable, atol: float = 1e-10, loc_tol: float = 1e-8) -> bool:
    return table_distance(first, second, loc_tol) <= atol


def table_distance(first: QuasiProbTable, second: QuasiProbTable, loc_tol: float = 1e-8) -> float:
    """Largest weight discrepancy between two tables compared as atomic measures."""
    p = first.merged(loc_tol)
    q = second.merged(loc_tol)
    used = np.zeros(len(q), dtype=bool)
    worst = 0.0
    for a, b, w in zip(p.a, p.b, p.w):
        hits = np.flatnonzero((np.abs(q.b - b) <= loc_tol) & (np.abs(q.a - a) <= loc_tol) & ~used)
        if len(hits):
            used[hits[0]] = True
            worst = max(worst, abs(w - q.w[hits[0]]))
        else:
            worst = max(worst, abs(w))
    if (~used).any():
        worst = max(worst, float(np.abs(q.w[~used]).max()))
    return float(worst)


def _prepare(A, B, phi):
    da = as_decomposition(A)
    db = as_decomposition(B)
    vec = as_state(phi)
    check_dims(da.dim, db.dim, vec.shape[0])
    return da, db, vec


def char_function(family: str, alpha: complex, A, B, phi, s, t: float) -> complex:
    """Expectation of the hashed operator: the Fourier transform of the family member."""
    da, db, vec = _prepare(A, B, phi)
    alpha = complex(alpha)
    ut = unitary(db, t)
    if family in (ADDITIVE, KD):
        if family == KD:
            alpha = 1.0
        us = unitary(da, float(np.real(s)))
        val = (1 + alpha) / 2 * np.vdot(vec, ut @ us @ vec) + (1 - alpha) / 2 * np.vdot(vec, us @ ut @ vec)
    elif family == CONVOLUTIVE:
        left = unitary(da, float(pairing(s, (1 - alpha) / 2)))
        right = unitary(da, float(pairing(s, (1 + alpha) / 2)))
        val = np.vdot(vec, left @ ut @ right @ vec)
    else:
        raise ValueError(f"unknown family {family!r}")
    return complex(val / np.vdot(vec, vec).real)


def qjp_additive(alpha: complex, A, B, phi) -> QuasiProbTable:
    da, db, vec = _prepare(A, B, phi)
    alpha = complex(alpha)
    a_out, b_out, w_out = [], [], []
    for b, pb in zip(db.eigenvalues, db.projectors):
        for a, pa in zip(da.eigenvalues, da.projectors):
            ba = np.vdot(vec, pb @ pa @ vec)
            ab = np.vdot(vec, pa @ pb @ vec)
            a_out.append(a)
            b_out.append(b)
            w_out.append((1 + alpha) / 2 * ba + (1 - alpha) / 2 * ab)
    return QuasiProbTable(a_out, b_out, w_out, ADDITIVE, alpha, state_fingerprint(vec))


def qjp_kirkwood_dirac(A, B, phi) -> QuasiProbTable:
    """``w(a, b) = <phi, b><b, Pi_a phi>``; falls back to the additive alpha = 1 member for degenerate B."""
    da, db, vec = _prepare(A, B, phi)
    if np.any(db.ranks != 1):
        return qjp_additive(1.0, da, db, vec).with_(family=KD)
    a_out, b_out, w_out = [], [], []
    for j, b in enumerate(db.eigenvalues):
        bvec = db.eigenvector(j)
        for a, pa in zip(da.eigenvalues, da.projectors):
            a_out.append(a)
            b_out.append(b)
            w_out.append(np.vdot(vec, bvec) * np.vdot(bvec, pa @ vec))
    return QuasiProbTable(a_out, b_out, w_out, KD, 1.0, state_fingerprint(vec))


def t_matrix(alpha: complex) -> np.ndarray:
    a1, a2 = complex(alpha).real, complex(alpha).imag
    return np.array([[(1 - a1) / 2, (1 + a1) / 2], [-a2 / 2, a2 / 2]])


def _apply_t(mat: np.ndarray, a: np.ndarray) -> np.ndarray:
    vecs = np.vstack([a.real, a.imag])
    out = mat @ vecs
    return out[0] + 1j * out[1]


def qjp_convolutive(alpha: complex, A, B, phi) -> QuasiProbTable:
    """Per-b product kernel ``nu_b* (x) nu_b`` weighted by the Born mass of b, pushed forward by T_alpha.

    The slice weights ``<phi, Pi_{a1} b><b, Pi_{a2} phi>`` are used directly, which equals
    ``nu_b*(a1) nu_b(a2) |<b, phi>|^2`` whenever ``<b, phi> != 0`` and stays exact otherwise.
    """
    da, db, vec = _prepare(A, B, phi)
    if np.any(db.ranks != 1):
        raise DegenerateConditioning("convolutive construction needs a non-degenerate B")
    alpha = complex(alpha)
    tmat = t_matrix(alpha)
    a_out, b_out, w_out = [], [], []
    for j, b in enumerate(db.eigenvalues):
        bvec = db.eigenvector(j)
        left = np.array([np.vdot(vec, pa @ bvec) for pa in da.projectors])  # <phi, Pi_a1 b>
        right = np.array([np.vdot(bvec, pa @ vec) for pa in da.projectors])  # <b, Pi_a2 phi>
        for i1, a1 in enumerate(da.eigenvalues):
            for i2, a2 in enumerate(da.eigenvalues):
                a_out.append(complex(a1, a2))
                b_out.append(b)
                w_out.append(left[i1] * right[i2])
    a_arr = _apply_t(tmat, np.array(a_out))
    table = QuasiProbTable(a_arr, b_out, w_out, CONVOLUTIVE, alpha, state_fingerprint(vec))
    return table.merged()


def qjp_table(family: str, alpha: complex, A, B, phi) -> QuasiProbTable:
    if family == ADDITIVE:
        return qjp_additive(alpha, A, B, phi)
    if family == CONVOLUTIVE:
        return qjp_convolutive(alpha, A, B, phi)
    if family == KD:
        return qjp_kirkwood_dirac(A, B, phi)
    raise ValueError(f"unknown family {family!r}")


def transform_alpha(table: QuasiProbTable, alpha_new: complex) -> QuasiProbTable:
    """Move a convolutive member to another parameter via ``T_new T_alpha^{-1}`` on outcomes."""
    if table.family != CONVOLUTIVE:
        raise SingularTransform("transform_alpha needs a convolutive source table")
    if abs(table.alpha.imag) < 1e-14:
        raise SingularTransform(f"T_alpha is singular for real alpha={table.alpha}")
    mat = t_matrix(alpha_new) @ np.linalg.inv(t_matrix(table.alpha))
    return table.with_(a=_apply_t(mat, table.a), alpha=complex(alpha_new)).merged()


def conjugate(table: QuasiProbTable) -> QuasiProbTable:
    """Complex-conjugate every weight; relabel the parameter where the family is closed under it."""
    w = np.conj(table.w)
    if table.family == ADDITIVE:
        return table.with_(w=w, alpha=-np.conj(table.alpha))
    if table.family == KD:
        return table.with_(w=w, family=ADDITIVE, alpha=-1.0)
    if table.family == CONVOLUTIVE:
        return table.with_(w=w, alpha=-table.alpha)
    return table.with_(w=w)


@dataclass(frozen=True)
class MarginalsAndMoments:
    prob_a: ProbTable
    prob_b: ProbTable
    moments: dict  # (m, n) -> sum b^m a^n w
    imaginary_mass: float


def _collapse(keys: np.ndarray, weights: np.ndarray, tol: float = MERGE_TOL):
    order = np.lexsort((keys.imag, keys.real))
    out_k, out_w = [], []
    for i in order:
        if out_k and abs(keys[i] - out_k[-1]) <= tol:
            out_w[-1] += weights[i]
        else:
            out_k.append(keys[i])
            out_w.append(weights[i])
    return np.array(out_k), np.array(out_w)


def _as_prob(outcomes, weights, tol) -> ProbTable:
    w = np.asarray(weights)
    if np.any(w.real < -tol):
        raise MarginalViolation(f"negative marginal weight {w.real.min():.3e}")
    return ProbTable(np.real(outcomes).astype(float), np.clip(w.real, 0.0, None))


def marginals_and_moments(table: QuasiProbTable, max_order: int = 3, tol: float = 1e-8) -> MarginalsAndMoments:
    """Both marginals as Born-like tables plus ``sum b^m a^n w`` for m, n <= max_order.

    Complex outcomes a carry zero net mass off the real axis in a genuine member
    of either family; any residue above ``tol`` raises MarginalViolation.
    """
    bk, bw = _collapse(table.b.astype(complex), table.w)
    ak, aw = _collapse(table.a, table.w)
    off_axis = np.abs(ak.imag) > MERGE_TOL
    imag_mass = max(
        float(np.max(np.abs(aw[off_axis]), initial=0.0)),
        float(np.max(np.abs(aw[~off_axis].imag), initial=0.0)),
        float(np.max(np.abs(bw.imag), initial=0.0)),
    )
    if imag_mass > tol:
        raise MarginalViolation(f"marginal carries imaginary or off-axis mass {imag_mass:.3e}")
    prob_a = _as_prob(ak[~off_axis], aw[~off_axis], tol)
    prob_b = _as_prob(bk, bw, tol)
    moments = {}
    for m in range(max_order + 1):
        for n in range(max_order + 1):
            moments[(m, n)] = complex(np.sum(table.b**m * table.a**n * table.w))
    return MarginalsAndMoments(prob_a, prob_b, moments, imag_mass)


def prob_tables_distance(first: ProbTable, second: ProbTable, loc_tol: float = 1e-8) -> float:
    """Max weight discrepancy between two atomic probability tables (missing atoms count as zero)."""
    worst = 0.0
    matched = np.zeros(len(second.outcomes), dtype=bool)
    for x, w in zip(first.outcomes, first.weights):
        hits = np.flatnonzero(np.abs(second.outcomes - x) <= loc_tol)
        if len(hits):
            matched[hits] = True
            worst = max(worst, abs(w - second.weights[hits].sum()))
        else:
            worst = max(worst, abs(w))
    if (~matched).any():
        worst = max(worst, float(np.abs(second.weights[~matched]).max()))
    return float(worst)


def born_marginal_errors(table: QuasiProbTable, A, B, phi) -> dict:
    mm = marginals_and_moments(table)
    return {
        "a": prob_tables_distance(mm.prob_a, born_probabilities(A, phi)),
        "b": prob_tables_distance(mm.prob_b, born_probabilities(B, phi)),
        "total": abs(table.total() - 1),
    }
