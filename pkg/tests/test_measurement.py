import math

import numpy as np
import pytest

from qjplab import meter
from qjplab.errors import AliasError, DegenerateConditioning, IndefiniteConditioning, OrthogonalSelection, StepTooLarge
from qjplab.measurement import (
    branch_matrices,
    central_difference_weights,
    cm_conditional_expectation,
    cm_weak_derivative_check,
    conditional_meter_state,
    conditioning_probability,
    evolve_composite,
    gaussian_cm_analytic,
    gaussian_cm_closed_form,
    recovered_weights,
    richardson_derivative,
    strong_um_recover,
    um_expectation,
    um_outcome_density,
    weak_um_moments,
)
from qjplab.meter import MOMENTUM, POSITION, Grid, gaussian_state
from qjplab.operators import PAULI, expectation, random_hermitian, random_state

SZ = PAULI["Z"]


@pytest.fixture(scope="module")
def psi():
    return gaussian_state(Grid(1024, 40.0 / 1024), 0.0, 1.0)


def projector(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def test_branches_and_norm(psi):
    cs = evolve_composite(SZ, [1, 1], psi, 2.0)
    assert cs.eigenvalues.tolist() == [-1.0, 1.0]
    assert cs.weights == pytest.approx([0.5, 0.5])
    assert cs.norm2() == pytest.approx(1.0)
    gram, _ = branch_matrices(cs, None)
    # <psi(x+2), psi(x-2)> = exp(-16/4) for unit width
    assert gram[0, 1].real == pytest.approx(math.exp(-4.0), abs=1e-14)


def test_um_expectation_law(psi):
    rng = np.random.default_rng(5)
    a = random_hermitian(rng, 4)
    phi = random_state(rng, 4)
    for g in (-5.0, -1.3, 0.0, 2.2, 5.0):
        cs = evolve_composite(a, phi, psi, g)
        assert um_expectation(cs, POSITION) == pytest.approx(g * expectation(a, phi), abs=1e-10)
        assert um_expectation(cs, MOMENTUM) == pytest.approx(0.0, abs=1e-10)


def test_um_density_is_mixture_of_shifted_gaussians(psi):
    g = 2.5
    dens = um_outcome_density(evolve_composite(SZ, [np.cos(0.4), np.sin(0.4)], psi, g), POSITION)
    x = dens.coords
    oracle = (np.cos(0.4) ** 2 * np.exp(-((x - g) ** 2)) + np.sin(0.4) ** 2 * np.exp(-((x + g) ** 2))) / math.sqrt(math.pi)
    assert dens.l1_distance(oracle) < 1e-12
    assert dens.total() == pytest.approx(1.0, abs=1e-12)


def test_position_coupling_moves_momentum(psi):
    cs = evolve_composite(SZ, [1, 0], psi, 1.5, Y=POSITION)
    assert um_expectation(cs, MOMENTUM) == pytest.approx(-1.5, abs=1e-10)


def test_aliasing_guard(psi):
    with pytest.raises(AliasError):
        evolve_composite(SZ, [1, 1], psi, 18.0)


def test_central_difference_weights():
    offsets, w = central_difference_weights(1)
    assert offsets.tolist() == [-2, -1, 0, 1, 2]
    assert w == pytest.approx([1 / 12, -2 / 3, 0, 2 / 3, -1 / 12])
    _, w2 = central_difference_weights(2)
    assert w2 == pytest.approx([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12])


def test_richardson_derivative_of_known_function():
    est, _ = richardson_derivative(np.sin, 1, 1e-2)
    assert est == pytest.approx(1.0, abs=1e-12)
    est3, _ = richardson_derivative(lambda x: math.exp(2 * x), 3, 1e-2)
    assert est3 == pytest.approx(8.0, abs=1e-6)
    with pytest.raises(StepTooLarge):
        richardson_derivative(lambda x: math.sin(1e4 * x), 1, 1e-1)


def test_weak_moments_sigma_z_plus(psi):
    est = weak_um_moments(SZ, [1, 1], psi, 3)
    assert est == pytest.approx([1.0, 0.0, 1.0, 0.0], abs=1e-6)


def test_weak_moments_diagonal_oracle(psi):
    # A = diag(0.5, -0.25, 1), phi uniform: moments are plain averages of a^n
    a = np.diag([0.5, -0.25, 1.0])
    est = weak_um_moments(a, [1, 1, 1], psi, 3)
    exact = [np.mean(np.array([0.5, -0.25, 1.0]) ** n) for n in range(4)]
    assert est == pytest.approx(exact, abs=1e-5)


def test_strong_recovery_improves_with_g():
    wide = gaussian_state(Grid(4096, 0.04), 0.0, 1.0)
    errs = [e for _, e in strong_um_recover(SZ, [1, 1], wide, [5.0, 20.0, 50.0])]
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 1e-10
    assert recovered_weights(SZ, [np.cos(0.3), np.sin(0.3)], wide, 50.0) == pytest.approx(
        [np.sin(0.3) ** 2, np.cos(0.3) ** 2], abs=1e-10
    )


def test_gaussian_analytic_aw_i():
    # A = sigma_z, phi_i = |+>, phi_f = |+i>: c_{-1} = -i/2, c_{+1} = 1/2, A_w = i
    for g, h in ((0.3, 1.0), (1.0, 1.0), (2.0, 1.5)):
        ex, ep = gaussian_cm_analytic(-1.0, 1.0, -0.5j, 0.5, g, h)
        assert ex == pytest.approx(0.0, abs=1e-15)
        assert ep == pytest.approx(g / h**2 * math.exp(-(g**2) / h**2), abs=1e-15)
    assert gaussian_cm_analytic(-1.0, 1.0, -0.5j, 0.5, 1.0, 1.0)[1] == pytest.approx(0.36787944117144233, abs=1e-15)


def test_gaussian_analytic_orthogonal_selection():
    with pytest.raises(OrthogonalSelection):
        gaussian_cm_analytic(-1.0, 1.0, 0.5, -0.5, 1.0, 1.0)


@pytest.mark.parametrize("g", [-4.0, -0.7, 0.05, 1.0, 3.0])
def test_cm_simulation_matches_closed_forms(psi, g):
    phi_i = np.array([np.cos(0.3), np.sin(0.3)])
    phi_f = np.array([0.6, 0.8j])
    B = projector(phi_f)
    cs = evolve_composite(SZ, phi_i, psi, g)
    c = [np.vdot(phi_f, p @ phi_i) for p in (np.diag([0, 1]), np.diag([1, 0]))]
    ex, ep = gaussian_cm_analytic(-1.0, 1.0, c[0], c[1], g, 1.0)
    assert cm_conditional_expectation(cs, B, 1.0, POSITION) == pytest.approx(ex, abs=1e-10)
    assert cm_conditional_expectation(cs, B, 1.0, MOMENTUM) == pytest.approx(ep, abs=1e-10)
    assert gaussian_cm_closed_form(SZ, B, 1.0, phi_i, g, 1.0, POSITION) == pytest.approx(ex, abs=1e-12)


def test_cm_weak_derivative(psi):
    rng = np.random.default_rng(11)
    a = random_hermitian(rng, 3)
    phi = random_state(rng, 3)
    B = projector(random_state(rng, 3).amplitudes)
    for X in (POSITION, MOMENTUM):
        res = cm_weak_derivative_check(a, B, phi, psi, 1.0, X)
        assert res["numeric"] == pytest.approx(res["analytic"], abs=1e-7)
    # with Y = p and a unit Gaussian: slope of E[x] is Re z, slope of E[p] is Im z
    z = res["ratio"]
    assert cm_weak_derivative_check(a, B, phi, psi, 1.0, POSITION)["analytic"] == pytest.approx(z.real)
    assert res["analytic"] == pytest.approx(z.imag)


def test_conditioning_errors(psi):
    cs = evolve_composite(SZ, [1, 0], psi, 1.0)
    with pytest.raises(IndefiniteConditioning):
        cm_conditional_expectation(cs, projector([0, 1]), 1.0, POSITION)
    assert conditioning_probability(cs, projector([0, 1]), 1.0) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DegenerateConditioning):
        conditional_meter_state(cs, np.diag([1.0, 1.0, 0.0])[:2, :2], 1.0)


def test_conditional_meter_state_is_normalised(psi):
    cs = evolve_composite(SZ, [1, 1], psi, 1.0)
    post = conditional_meter_state(cs, projector([1, 1j]), 1.0)
    assert post.norm2() == pytest.approx(1.0)
    assert meter.expectation(post, MOMENTUM) == pytest.approx(math.exp(-1.0), abs=1e-12)
