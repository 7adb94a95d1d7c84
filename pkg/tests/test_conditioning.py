import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjplab.conditioning import (
    amplification_bound,
    cond_quasi_expectation,
    conditional_average_from_qjp,
    construct_post_selection,
    two_state_value,
    weak_value,
)
from qjplab.errors import EigenvectorInput, IndefiniteConditioning, OrthogonalSelection, TrivialOperator
from qjplab.measurement import cm_conditional_expectation, evolve_composite
from qjplab.meter import MOMENTUM, POSITION, Grid, gaussian_state
from qjplab.operators import PAULI, expectation, random_hermitian, random_state
from qjplab.qjp import qjp_additive, qjp_convolutive

SZ, SX = PAULI["Z"], PAULI["X"]
PLUS = np.array([1, 1]) / np.sqrt(2)
PLUS_I = np.array([1, 1j]) / np.sqrt(2)
THETA = 0.3
C, S = np.cos(THETA), np.sin(THETA)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture(scope="module")
def psi():
    return gaussian_state(Grid(1024, 40.0 / 1024), 0.0, 1.0)


def projector(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def test_weak_value_is_i():
    assert weak_value(SZ, PLUS, PLUS_I) == pytest.approx(1j, abs=1e-15)


def test_weak_value_orthogonal_selection():
    with pytest.raises(OrthogonalSelection):
        weak_value(SZ, [1, 0], [0, 1])


def test_two_state_value_alpha_family():
    assert two_state_value(1.0, SZ, PLUS, PLUS_I) == pytest.approx(1j)
    assert two_state_value(0.0, SZ, PLUS, PLUS_I) == pytest.approx(0.0)
    assert two_state_value(-1.0, SZ, PLUS, PLUS_I) == pytest.approx(-1j)
    assert two_state_value(1j, SZ, PLUS, PLUS_I) == pytest.approx(-1.0)


def test_conditional_expectation_frozen():
    # phi = (c, i s): z(+1) = e^{-2i theta}, z(-1) = e^{2i theta}
    phi = [C, 1j * S]
    for alpha in (-1.0, 0.0, 0.4, 1.0):
        f = cond_quasi_expectation(alpha, SZ, SX, phi)
        assert f(1.0) == pytest.approx(np.cos(2 * THETA) - alpha * 1j * np.sin(2 * THETA), abs=1e-14)
        assert f(-1.0) == pytest.approx(np.cos(2 * THETA) + alpha * 1j * np.sin(2 * THETA), abs=1e-14)
        assert f.total_expectation() == pytest.approx(expectation(SZ, phi), abs=1e-14)


def test_conditional_expectation_matches_additive_table():
    rng = np.random.default_rng(3)
    A, B = random_hermitian(rng, 3), random_hermitian(rng, 3)
    phi = random_state(rng, 3)
    for alpha in (-1.0, 0.2, 1j, 0.5 - 2j):
        f = cond_quasi_expectation(alpha, A, B, phi)
        table = qjp_additive(alpha, A, B, phi)
        for b in f.b:
            assert conditional_average_from_qjp(table, b) == pytest.approx(f(b), abs=1e-12)


def test_convolutive_conditional_average_frozen():
    table = qjp_convolutive(1j, SZ, SX, [C, S])
    expected = np.cos(2 * THETA) / (1 + np.sin(2 * THETA))
    assert conditional_average_from_qjp(table, 1.0) == pytest.approx(expected, abs=1e-14)
    assert cond_quasi_expectation(1j, SZ, SX, [C, S])(1.0) == pytest.approx(expected, abs=1e-14)


def test_eigenvector_gives_constant_function():
    f = cond_quasi_expectation(0.3, SZ, SX, [0, 1])
    assert f(1.0) == pytest.approx(-1.0) and f(-1.0) == pytest.approx(-1.0)


def test_undefined_slices():
    f = cond_quasi_expectation(0.0, SX, SZ, [1, 0])
    assert f.defined.tolist() == [False, True]
    assert f.as_dict() == {1.0: 0j}
    with pytest.raises(IndefiniteConditioning):
        f(-1.0)
    with pytest.raises(KeyError):
        f(0.5)
    with pytest.raises(IndefiniteConditioning):
        conditional_average_from_qjp(qjp_additive(0.0, SX, SZ, [1, 0]), -1.0)


def test_conditional_function_csv(tmp_path):
    f = cond_quasi_expectation(0.0, SX, SZ, [1, 0])
    path = tmp_path / "f.csv"
    f.to_csv(path)
    assert path.read_text().splitlines() == ["b,re,im,defined", "-1,0,0,0", "1,0,0,1"]


@pytest.mark.parametrize("target", [10 + 5j, -3.0, 0.0, 2j])
def test_post_selection_hits_target(target):
    phi = [C, S]
    post = construct_post_selection(SZ, phi, target)
    assert weak_value(SZ, phi, post) == pytest.approx(target, abs=1e-12)


def test_post_selection_at_mean_is_pre_selection():
    phi = [C, S]
    post = construct_post_selection(SZ, phi, np.cos(2 * THETA))
    assert abs(np.vdot(post.amplitudes, phi)) == pytest.approx(1.0)


def test_post_selection_errors():
    with pytest.raises(EigenvectorInput):
        construct_post_selection(SZ, [1, 0], 3.0)
    with pytest.raises(TrivialOperator):
        construct_post_selection(2 * np.eye(2), [C, S], 3.0)


def test_amplification_single_branch(psi):
    # one branch: the meter is a translated Gaussian and the compressed norm is |g a|
    g = 2.5
    cs = evolve_composite(SZ, [0, 1], psi, g)
    assert amplification_bound(cs, POSITION) == pytest.approx(g, abs=1e-10)
    assert amplification_bound(cs, MOMENTUM) == pytest.approx(0.0, abs=1e-10)


def test_amplification_bounds_post_selected_shifts(psi):
    g = 3.0
    cs = evolve_composite(SZ, PLUS, psi, g)
    bound = amplification_bound(cs, POSITION)
    assert bound >= g
    assert bound == pytest.approx(g, abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_amplification_bound_dominates(seed):
    rng = np.random.default_rng(seed)
    grid_psi = gaussian_state(Grid(1024, 40.0 / 1024), 0.0, 1.0)
    A = random_hermitian(rng, 3)
    phi = random_state(rng, 3)
    g = float(rng.uniform(-3, 3))
    cs = evolve_composite(A, phi, grid_psi, g)
    for X in (POSITION, MOMENTUM):
        bound = amplification_bound(cs, X)
        for _ in range(4):
            post = random_state(rng, 3)
            try:
                val = cm_conditional_expectation(cs, projector(post.amplitudes), 1.0, X)
            except IndefiniteConditioning:
                continue
            assert abs(val) <= bound * (1 + 1e-9) + 1e-12
