import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjplab.errors import DimMismatch, NotHermitian
from qjplab.operators import (
    PAULI,
    HermitianOperator,
    PureState,
    apply_function,
    born_probabilities,
    expectation,
    operator_norm,
    random_hermitian,
    random_state,
    spectral_decompose,
    spectral_moment,
    unitary,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=8)


def test_sigma_z_decomposition():
    d = spectral_decompose(PAULI["Z"])
    assert d.eigenvalues.tolist() == [-1.0, 1.0]
    assert np.allclose(d.projectors[0], [[0, 0], [0, 1]])
    assert np.allclose(d.projectors[1], [[1, 0], [0, 0]])
    assert d.ranks.tolist() == [1, 1]


def test_degenerate_eigenvalues_merge():
    d = spectral_decompose(np.diag([2.0, 2.0 + 1e-12, -1.0]))
    assert len(d) == 2
    assert d.ranks.tolist() == [1, 2]
    assert d.eigenvalues[1] == pytest.approx(2.0)


def test_identity_has_single_projector():
    d = spectral_decompose(np.eye(3))
    assert d.eigenvalues.tolist() == [1.0]
    assert np.allclose(d.projectors[0], np.eye(3))


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitian):
        HermitianOperator([[0, 1], [0, 0]])


def test_non_square_rejected():
    with pytest.raises(DimMismatch):
        HermitianOperator([[1, 0, 0], [0, 1, 0]])


def test_index_of_rejects_non_eigenvalue():
    d = spectral_decompose(PAULI["X"])
    assert d.index_of(1.0) == 1
    with pytest.raises(ValueError):
        d.index_of(0.5)


def test_born_on_plus_state():
    born = born_probabilities(PAULI["Z"], [1, 1])
    assert born.as_dict() == pytest.approx({-1.0: 0.5, 1.0: 0.5})
    assert born.mean() == pytest.approx(0.0)


def test_expectation_frozen_value():
    # <phi|Y|phi> for phi = (cos t, e^{i f} sin t) is sin(2t) sin(f)
    t, f = 0.3, 0.7
    phi = [np.cos(t), np.exp(1j * f) * np.sin(t)]
    assert expectation(PAULI["Y"], phi) == pytest.approx(np.sin(2 * t) * np.sin(f), abs=1e-15)


def test_expectation_dim_mismatch():
    with pytest.raises(DimMismatch):
        expectation(PAULI["Z"], [1, 0, 0])


def test_unitary_of_pauli_x():
    t = 0.4
    u = unitary(spectral_decompose(PAULI["X"]), t)
    assert np.allclose(u, np.cos(t) * np.eye(2) - 1j * np.sin(t) * PAULI["X"])


def test_state_normalises_and_is_readonly():
    s = PureState([3, 4j])
    assert np.linalg.norm(s.amplitudes) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1.0
    with pytest.raises(ValueError):
        PureState([0, 0])


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_decomposition_reconstructs_and_projectors_are_orthogonal(seed, dim):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, dim, scale=3.0)
    d = spectral_decompose(a)
    assert np.allclose(d.matrix(), a, atol=1e-12)
    assert np.allclose(d.projectors.sum(axis=0), np.eye(dim), atol=1e-12)
    for i in range(len(d)):
        for j in range(len(d)):
            prod = d.projectors[i] @ d.projectors[j]
            assert np.allclose(prod, d.projectors[i] if i == j else 0, atol=1e-12)
    assert np.all(np.diff(d.eigenvalues) > 0)
    assert operator_norm(a) == pytest.approx(3.0)


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_born_weights_and_moments(seed, dim):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, dim)
    phi = random_state(rng, dim)
    born = born_probabilities(a, phi)
    assert born.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(born.weights >= 0)
    assert spectral_moment(a, phi, 1) == pytest.approx(expectation(a, phi), abs=1e-12)
    vec = phi.amplitudes
    assert spectral_moment(a, phi, 2) == pytest.approx(np.vdot(a @ vec, a @ vec).real, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seeds, dims)
def test_functional_calculus_matches_matrix_power(seed, dim):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, dim)
    cube = apply_function(spectral_decompose(a), lambda x: x**3)
    assert np.allclose(cube, a @ a @ a, atol=1e-12)
