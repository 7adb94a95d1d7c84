import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjplab.errors import DegenerateConditioning, MarginalViolation, SingularTransform
from qjplab.operators import PAULI, expectation, random_hermitian, random_state
from qjplab.qjp import (
    ADDITIVE,
    CONVOLUTIVE,
    KD,
    QuasiProbTable,
    born_marginal_errors,
    char_function,
    conjugate,
    marginals_and_moments,
    qjp_additive,
    qjp_convolutive,
    qjp_kirkwood_dirac,
    qjp_table,
    t_matrix,
    table_distance,
    transform_alpha,
)

SZ, SX = PAULI["Z"], PAULI["X"]
THETA = 0.3
PHI = np.array([np.cos(THETA), np.sin(THETA)])
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def atoms(table):
    return {(complex(round(a.real, 12), round(a.imag, 12)), float(b)): complex(w) for a, b, w in zip(table.a, table.b, table.w)}


def test_kd_sigma_z_sigma_x_on_zero():
    t = qjp_kirkwood_dirac(SZ, SX, [1, 0])
    got = atoms(t)
    assert got[(1, 1.0)] == pytest.approx(0.5)
    assert got[(1, -1.0)] == pytest.approx(0.5)
    assert got[(-1, 1.0)] == pytest.approx(0.0)
    assert got[(-1, -1.0)] == pytest.approx(0.0)


def test_kd_on_tilted_state_frozen():
    # w(a, b) = <phi, b><b, Pi_a phi> worked by hand for sigma_z / sigma_x
    c, s = np.cos(THETA), np.sin(THETA)
    got = atoms(qjp_kirkwood_dirac(SZ, SX, PHI))
    assert got[(1, 1.0)] == pytest.approx((c + s) * c / 2)
    assert got[(-1, 1.0)] == pytest.approx((c + s) * s / 2)
    assert got[(1, -1.0)] == pytest.approx((c - s) * c / 2)
    assert got[(-1, -1.0)] == pytest.approx(-(c - s) * s / 2)


def test_convolutive_i_frozen_table():
    # slice b = +-1 carries {1: c^2/2, -1: s^2/2, +-i: +-cs/2}
    c, s = np.cos(THETA), np.sin(THETA)
    got = atoms(qjp_convolutive(1j, SZ, SX, PHI))
    for b, sign in ((1.0, 1), (-1.0, -1)):
        assert got[(1, b)] == pytest.approx(c * c / 2)
        assert got[(-1, b)] == pytest.approx(s * s / 2)
        assert got[(1j, b)] == pytest.approx(sign * c * s / 2)
        assert got[(-1j, b)] == pytest.approx(sign * c * s / 2)


def test_char_function_trivial_and_kd_oracle():
    for family in (ADDITIVE, CONVOLUTIVE, KD):
        assert char_function(family, 0.3, SZ, SX, PHI, 0.0, 0.0) == pytest.approx(1.0)
    s = t = np.pi / 2
    kd = qjp_kirkwood_dirac(SZ, SX, [1, 0])
    assert char_function(ADDITIVE, 1.0, SZ, SX, [1, 0], s, t) == pytest.approx(kd.fourier(s, t), abs=1e-14)


def test_commuting_pair_is_alpha_independent():
    A = np.diag([1.0, -1.0, 2.0])
    B = np.diag([0.5, 0.5, -1.0])
    phi = [0.6, 0.0 + 0.48j, 0.64]
    vals = [char_function(ADDITIVE, a, A, B, phi, 0.7, -1.1) for a in (-1, 0, 1j, 1)]
    assert np.allclose(vals, vals[0], atol=1e-14)
    ref = qjp_additive(0.0, A, B, phi)
    for a in (-1, 1j, 1):
        assert table_distance(qjp_additive(a, A, B, phi), ref) < 1e-14


def test_additive_alpha_zero_is_real():
    assert np.max(np.abs(qjp_additive(0.0, SZ, SX, [1, 0]).w.imag)) < 1e-15


def test_same_observable_gives_diagonal_table():
    t = qjp_additive(0.4 + 0.2j, SZ, SZ, PHI).merged()
    got = atoms(t)
    assert got[(1, 1.0)] == pytest.approx(np.cos(THETA) ** 2)
    assert got[(-1, -1.0)] == pytest.approx(np.sin(THETA) ** 2)
    assert abs(got[(1, -1.0)]) < 1e-15


def test_convolutive_alpha_one_collapses_to_kd():
    assert table_distance(qjp_convolutive(1.0, SZ, SX, PHI), qjp_kirkwood_dirac(SZ, SX, PHI)) < 1e-14


def test_t_matrix_determinant():
    for alpha in (1j, 0.3 - 0.8j, 2.0 + 0.5j):
        assert np.linalg.det(t_matrix(alpha)) == pytest.approx(alpha.imag / 2)


def test_transform_alpha_round_trip_and_errors():
    src = qjp_convolutive(0.2 + 0.7j, SZ, SX, PHI)
    back = transform_alpha(transform_alpha(src, -0.5 + 1.3j), 0.2 + 0.7j)
    assert table_distance(back, src) < 1e-12
    assert table_distance(transform_alpha(src, src.alpha), src) < 1e-14
    with pytest.raises(SingularTransform):
        transform_alpha(qjp_convolutive(0.5, SZ, SX, PHI), 1j)
    with pytest.raises(SingularTransform):
        transform_alpha(qjp_additive(1j, SZ, SX, PHI), 1.0)


def test_transform_i_to_zero_is_real():
    t = transform_alpha(qjp_convolutive(1j, SZ, SX, PHI), 0.0)
    assert np.max(np.abs(t.w.imag)) < 1e-15
    assert table_distance(t, qjp_convolutive(0.0, SZ, SX, PHI)) < 1e-14


def test_conjugation_relations():
    assert table_distance(conjugate(qjp_additive(1.0, SZ, SX, PHI)), qjp_additive(-1.0, SZ, SX, PHI)) < 1e-15
    assert table_distance(conjugate(qjp_additive(0.0, SZ, SX, PHI)), qjp_additive(0.0, SZ, SX, PHI)) < 1e-15
    assert table_distance(conjugate(qjp_convolutive(1j, SZ, SX, PHI)), qjp_convolutive(-1j, SZ, SX, PHI)) < 1e-15


def test_convolutive_needs_non_degenerate_b():
    with pytest.raises(DegenerateConditioning):
        qjp_convolutive(1j, np.diag([1.0, 2.0, 3.0]), np.diag([1.0, 1.0, 0.0]), [1, 1, 1])


def test_kd_falls_back_for_degenerate_b():
    A, B = random_hermitian(np.random.default_rng(1), 3), np.diag([1.0, 1.0, 0.0])
    phi = [1, 1j, 0.5]
    t = qjp_kirkwood_dirac(A, B, phi)
    assert t.family == KD
    assert table_distance(t, qjp_additive(1.0, A, B, phi)) < 1e-15


def test_moments_frozen():
    # additive moment(1,1) = <<B, A>> = Re<B phi, A phi> + alpha i Im<B phi, A phi>
    alpha = 0.5
    mm = marginals_and_moments(qjp_additive(alpha, SZ, SX, [1, 0]))
    assert mm.moments[(0, 0)] == pytest.approx(1.0)
    assert mm.moments[(0, 1)] == pytest.approx(1.0)
    assert mm.moments[(1, 0)] == pytest.approx(0.0)
    # <X|0>, Z|0>> = <1|0> = 0 ... use |+i> for a non-trivial value
    mm = marginals_and_moments(qjp_additive(alpha, SZ, SX, [1, 1j]))
    # <X phi, Z phi> = <(i,1)/sqrt2, (1,-i)/sqrt2> = (-i - i)/2 = -i
    assert mm.moments[(1, 1)] == pytest.approx(alpha * 1j * -1.0)


def test_marginal_violation_is_detected():
    bad = QuasiProbTable([1.0, -1.0], [0.0, 0.0], [0.5 + 0.1j, 0.5 - 0.1j])
    with pytest.raises(MarginalViolation):
        marginals_and_moments(bad)


def test_json_and_csv_round_trip(tmp_path):
    t = qjp_convolutive(0.3 + 0.9j, SZ, SX, PHI)
    back = QuasiProbTable.from_json(t.to_json())
    assert back.family == CONVOLUTIVE and back.alpha == t.alpha and back.fingerprint == t.fingerprint
    assert np.array_equal(back.a, t.a) and np.array_equal(back.w, t.w)
    path = tmp_path / "t.csv"
    t.to_csv(path)
    rows = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(rows[:, 0] + 1j * rows[:, 1], t.a)
    assert np.array_equal(rows[:, 3] + 1j * rows[:, 4], t.w)
    assert path.read_text().splitlines()[0] == "re_a,im_a,b,re_w,im_w"


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=4), st.sampled_from([ADDITIVE, CONVOLUTIVE, KD]))
def test_random_tables_qualify_and_match_fourier(seed, dim, family):
    rng = np.random.default_rng(seed)
    A, B = random_hermitian(rng, dim), random_hermitian(rng, dim)
    phi = random_state(rng, dim)
    alpha = complex(rng.normal(), rng.normal())
    t = qjp_table(family, alpha, A, B, phi)
    errs = born_marginal_errors(t, A, B, phi)
    assert max(errs.values()) < 1e-10
    for _ in range(5):
        s = complex(rng.normal(), rng.normal()) if family == CONVOLUTIVE else rng.normal()
        tt = rng.normal()
        assert abs(t.fourier(s, tt) - char_function(family, alpha, A, B, phi, s, tt)) < 1e-10
    mm = marginals_and_moments(t)
    assert mm.moments[(0, 1)] == pytest.approx(expectation(A, phi), abs=1e-10)
    assert mm.moments[(1, 0)] == pytest.approx(expectation(B, phi), abs=1e-10)
