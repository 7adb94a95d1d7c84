"""Unconditioned and conditioned von Neumann measurements on (finite target) x (grid meter).

The composite state after the coupling ``exp(-i g A (x) Y)`` is kept in branch
form ``sum_a Pi_a phi (x) exp(-i g a Y) psi``; nothing here ever builds the
dense dim x n_points tensor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import factorial

import numpy as np

from . import meter
from .errors import DegenerateConditioning, IndefiniteConditioning, OrthogonalSelection, StepTooLarge
from .meter import MOMENTUM, POSITION, Density, GridWavefunction, observable_tag
from .operators import as_decomposition, as_state, born_probabilities, check_dims

P_MIN = 1e-12


@dataclass(frozen=True)
class Branch:
    eigenvalue: float
    target: np.ndarray  # Pi_a phi
    meter: GridWavefunction  # exp(-i g a Y) psi


@dataclass(frozen=True)
class CompositeState:
    branches: tuple
    g: float
    coupled: str  # Y
    psi: GridWavefunction

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([br.eigenvalue for br in self.branches])

    @property
    def weights(self) -> np.ndarray:
        return np.array([np.vdot(br.target, br.target).real for br in self.branches])

    def norm2(self) -> float:
        return float(np.sum(self.weights * np.array([br.meter.norm2() for br in self.branches])))


def evolve_composite(A, phi, psi: GridWavefunction, g: float, Y: str = MOMENTUM) -> CompositeState:
    decomp = as_decomposition(A)
    vec = as_state(phi)
    check_dims(decomp.dim, vec.shape[0])
    Y = observable_tag(Y)
    psi = psi.normalize()
    branches = []
    for a, proj in zip(decomp.eigenvalues, decomp.projectors):
        if Y == MOMENTUM:
            m = meter.translate(psi, g * a)
        else:
            m = meter.kick(psi, g * a)
        branches.append(Branch(float(a), proj @ vec, m))
    return CompositeState(tuple(branches), float(g), Y, psi)


def branch_matrices(cs: CompositeState, X: str | None):
    """``G[m,n] = <psi_m, psi_n>`` and ``M[m,n] = <psi_m, X psi_n>`` over branch meters."""
    meters = np.array([br.meter.samples for br in cs.branches])
    dx = cs.psi.grid.dx
    gram = meters.conj() @ meters.T * dx
    if X is None:
        return gram, None
    applied = np.array([meter.apply_observable(br.meter, X) for br in cs.branches])
    return gram, meters.conj() @ applied.T * dx


def um_expectation(cs: CompositeState, X: str) -> float:
    X = observable_tag(X)
    vals = np.array([meter.expectation(br.meter, X) for br in cs.branches])
    return float(np.dot(cs.weights, vals) / cs.weights.sum())


def um_outcome_density(cs: CompositeState, X: str) -> Density:
    """Density of X on the reduced meter state (branch meters are mutually incoherent)."""
    dens = [meter.density(br.meter, X) for br in cs.branches]
    w = cs.weights / cs.weights.sum()
    values = sum(wi * d.values for wi, d in zip(w, dens))
    return Density(dens[0].coords, values)


def convolution_oracle(A, phi, coords: np.ndarray, base_density, g: float) -> np.ndarray:
    """``sum_a w_a rho(x - g a)`` for a callable base density ``rho``."""
    born = born_probabilities(A, phi)
    return sum(w * base_density(coords - g * a) for a, w in zip(born.outcomes, born.weights))


def strong_um_recover(A, phi, psi: GridWavefunction, g_list, resolution: float | None = None):
    """Total-variation error of the ``1/g``-rescaled position readout against the Born atoms.

    The rescaled readout is binned into windows ``|y - a| < resolution`` around each
    eigenvalue; the error is ``sum_a |mass_a - w_a|`` plus the mass outside every
    window.  ``resolution`` defaults to one eighth of the smallest spectral gap
    (0.5 for a single eigenvalue).
    """
    decomp = as_decomposition(A)
    born = born_probabilities(decomp, phi)
    if resolution is None:
        gaps = np.diff(decomp.eigenvalues)
        resolution = float(gaps.min()) / 8 if len(gaps) else 0.5
    out = []
    for g in g_list:
        if g == 0:
            raise ValueError("strong recovery needs g != 0")
        cs = evolve_composite(decomp, phi, psi, g, MOMENTUM)
        dens = um_outcome_density(cs, POSITION)
        y = dens.coords / g
        mass = dens.values * dens.spacing
        err = 0.0
        inside = np.zeros_like(mass, dtype=bool)
        for a, w in zip(born.outcomes, born.weights):
            win = np.abs(y - a) < resolution
            inside |= win
            err += abs(mass[win].sum() - w)
        err += mass[~inside].sum()
        out.append((float(g), float(err)))
    return out


def recovered_weights(A, phi, psi: GridWavefunction, g: float, resolution: float | None = None) -> np.ndarray:
    decomp = as_decomposition(A)
    if resolution is None:
        gaps = np.diff(decomp.eigenvalues)
        resolution = float(gaps.min()) / 8 if len(gaps) else 0.5
    dens = um_outcome_density(evolve_composite(decomp, phi, psi, g), POSITION)
    y = dens.coords / g
    return np.array([dens.values[np.abs(y - a) < resolution].sum() * dens.spacing for a in decomp.eigenvalues])


def central_difference_weights(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of a symmetric fourth-order stencil for the ``order``-th derivative."""
    r = (order - 1) // 2 + 2 if order > 0 else 0
    offsets = np.arange(-r, r + 1)
    npts = len(offsets)
    vander = np.array([offsets**k / factorial(k) for k in range(npts)], dtype=float)
    rhs = np.zeros(npts)
    rhs[order] = 1.0
    return offsets, np.linalg.solve(vander, rhs)


def richardson_derivative(f, order: int, step: float, tol: float = 1e-3):
    """``order``-th derivative of ``f`` at 0: two stencil evaluations plus one Richardson step.

    Returns ``(estimate, residual)``.  Raises StepTooLarge when the two stencils disagree
    by more than ``tol`` (relative to ``1 + |estimate|``).
    """
    if order == 0:
        return float(f(0.0)), 0.0
    offsets, weights = central_difference_weights(order)
    cache = {}

    def value(k):
        if k not in cache:
            cache[k] = f(k * step / 2)
        return cache[k]

    coarse = sum(w * value(2 * int(o)) for o, w in zip(offsets, weights)) / step**order
    fine = sum(w * value(int(o)) for o, w in zip(offsets, weights)) / (step / 2) ** order
    estimate = (16 * fine - coarse) / 15
    residual = abs(fine - coarse)
    if residual > tol * (1 + abs(estimate)):
        raise StepTooLarge(f"extrapolation residual {residual:.3e} exceeds {tol:g}")
    return estimate, residual


def _default_step(psi: GridWavefunction) -> float:
    _, h = meter.profile(psi)
    return 1e-3 * (1 + h)


def weak_um_moments(A, phi, psi: GridWavefunction, n_max: int, step: float | None = None) -> list[float]:
    """Estimate ``E[A^n; phi]`` for n = 0..n_max from the weak-coupling behaviour of the readout.

    The n-th derivative at g = 0 of ``g -> int x^n rho^{psi^g}(x) dx`` equals
    ``E[A^n] * int x^n ((-D)^n rho^psi)(x) dx``; the pairing on the right is evaluated
    with spectral derivatives and divided out.
    """
    decomp = as_decomposition(A)
    psi = psi.normalize()
    if step is None:
        step = _default_step(psi)
    grid = psi.grid
    x = grid.x
    rho0 = np.abs(psi.samples) ** 2
    k = 2 * np.pi * np.fft.fftfreq(grid.n_points, d=grid.dx)
    rho_hat = np.fft.fft(rho0)

    estimates = []
    for n in range(n_max + 1):
        def functional(g, n=n):
            dens = um_outcome_density(evolve_composite(decomp, phi, psi, g), POSITION)
            return float(np.sum(x**n * dens.values) * grid.dx)

        deriv, _ = richardson_derivative(functional, n, step)
        d_rho = np.real(np.fft.ifft((-1j * k) ** n * rho_hat))
        pairing = float(np.sum(x**n * d_rho) * grid.dx)
        estimates.append(deriv / pairing)
    return estimates


def _conditioning_weights(cs: CompositeState, proj: np.ndarray) -> np.ndarray:
    targets = np.array([br.target for br in cs.branches])
    return targets.conj() @ proj @ targets.T


def conditioning_probability(cs: CompositeState, B, b: float) -> float:
    decomp = as_decomposition(B)
    proj = decomp.projectors[decomp.index_of(b)]
    gram, _ = branch_matrices(cs, None)
    return float(np.sum(_conditioning_weights(cs, proj) * gram).real)


def cm_conditional_expectation(cs: CompositeState, B, b: float, X: str) -> float:
    """``E[Pi_b (x) X; Psi^g] / ||(Pi_b (x) I) Psi^g||^2``."""
    decomp = as_decomposition(B)
    check_dims(decomp.dim, cs.branches[0].target.shape[0])
    proj = decomp.projectors[decomp.index_of(b)]
    weights = _conditioning_weights(cs, proj)
    gram, mat = branch_matrices(cs, observable_tag(X))
    denom = np.sum(weights * gram).real
    if denom < P_MIN:
        raise IndefiniteConditioning(f"outcome b={b} has probability {denom:.3e} < {P_MIN:g}")
    return float(np.sum(weights * mat).real / denom)


def cm_weak_derivative_check(A, B, phi, psi: GridWavefunction, b: float, X: str, Y: str = MOMENTUM, step=None) -> dict:
    """Finite-difference slope of the conditional expectation at g = 0 against the weak-value formula."""
    decomp_a = as_decomposition(A)
    decomp_b = as_decomposition(B)
    vec = as_state(phi)
    proj = decomp_b.projectors[decomp_b.index_of(b)]
    prob = np.vdot(proj @ vec, proj @ vec).real
    if prob < P_MIN:
        raise IndefiniteConditioning(f"outcome b={b} has probability {prob:.3e}")
    ratio = np.vdot(vec, proj @ decomp_a.matrix() @ vec) / prob
    cv_s, cv_a = meter.quantum_covariances(psi.normalize(), X, Y)
    analytic = 2 * ratio.real * cv_a + 2 * ratio.imag * cv_s
    if step is None:
        step = _default_step(psi)

    def f(g):
        return cm_conditional_expectation(evolve_composite(decomp_a, vec, psi, g, Y), decomp_b, b, X)

    numeric, residual = richardson_derivative(f, 1, step)
    return {"numeric": float(numeric), "analytic": float(analytic), "residual": float(residual), "ratio": complex(ratio)}


def conditional_meter_state(cs: CompositeState, B, b: float) -> GridWavefunction:
    """Normalised meter state given the rank-1 outcome b: ``sum_n <b, Pi_n phi> psi(x - g a_n)``."""
    decomp = as_decomposition(B)
    idx = decomp.index_of(b)
    if decomp.ranks[idx] != 1:
        raise DegenerateConditioning(f"outcome b={b} has rank {decomp.ranks[idx]}")
    bvec = decomp.eigenvector(idx)
    coeffs = np.array([np.vdot(bvec, br.target) for br in cs.branches])
    samples = sum(c * br.meter.samples for c, br in zip(coeffs, cs.branches))
    out = GridWavefunction(cs.psi.grid, samples)
    if out.norm2() < P_MIN:
        raise IndefiniteConditioning(f"outcome b={b} has vanishing probability")
    return out.normalize()


def gaussian_branch_overlaps(eigenvalues, g: float, h: float, center: float = 0.0):
    """Closed-form ``<psi_m, Z psi_n>`` for Z = I, x, p between translated Gaussians of width h."""
    a = np.asarray(eigenvalues, dtype=float)
    diff = (a[:, None] - a[None, :]) / 2
    mean = (a[:, None] + a[None, :]) / 2
    ident = np.exp(-(g**2) / h**2 * diff**2)
    return {
        "I": ident.astype(complex),
        POSITION: ((center + g * mean) * ident).astype(complex),
        MOMENTUM: 1j * g / h**2 * diff * ident,
    }


def gaussian_cm_closed_form(A, B, b: float, phi, g: float, h: float, X: str, center: float = 0.0) -> float:
    """Conditional expectation for a Gaussian meter coupled through Y = p, from exact overlaps."""
    decomp_a = as_decomposition(A)
    decomp_b = as_decomposition(B)
    vec = as_state(phi)
    proj = decomp_b.projectors[decomp_b.index_of(b)]
    targets = np.array([p @ vec for p in decomp_a.projectors])
    weights = targets.conj() @ proj @ targets.T
    ov = gaussian_branch_overlaps(decomp_a.eigenvalues, g, h, center)
    denom = np.sum(weights * ov["I"]).real
    if denom < P_MIN:
        raise IndefiniteConditioning(f"outcome b={b} has probability {denom:.3e}")
    return float(np.sum(weights * ov[observable_tag(X)]).real / denom)


def gaussian_cm_analytic(a1: float, a2: float, c1: complex, c2: complex, g: float, h: float) -> tuple[float, float]:
    """Full-order shifts ``(E[x], E[p])`` of the post-selected Gaussian meter for a dichotomic observable.

    ``c_n = <phi_f, Pi_{a_n} phi_i>``.  The momentum prefactor is ``g / h^2``.
    """
    total = complex(c1) + complex(c2)
    if abs(total) < math.sqrt(P_MIN):
        raise OrthogonalSelection("c1 + c2 = 0: pre- and post-selection are orthogonal")
    lam_m = (a1 + a2) / 2
    lam_r = (a2 - a1) / 2
    a_w = (a1 * c1 + a2 * c2) / total
    if lam_r == 0:
        return g * lam_m, 0.0
    a_w0 = a_w - lam_m
    amp = 0.5 * (abs(a_w0 / lam_r) ** 2 - 1)
    decay = math.exp(-(g**2) * lam_r**2 / h**2)
    denom = 1 + amp * (1 - decay)
    e_x = g * a_w0.real / denom + g * lam_m
    e_p = g / h**2 * a_w0.imag * decay / denom
    return e_x, e_p
