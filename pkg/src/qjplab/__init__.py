"""Quasi-joint-probability distributions, von Neumann measurement models and weak values."""

from .conditioning import (
    ConditionalFunction,
    amplification_bound,
    cond_quasi_expectation,
    conditional_average_from_qjp,
    construct_post_selection,
    two_state_value,
    weak_value,
)
from . import errors
from .errors import QJPLabError
from .geometry import OperatorInnerProduct, inner_product, project_onto_algebra, pythagorean_residual, quantum_covariance
from .measurement import (
    CompositeState,
    cm_conditional_expectation,
    evolve_composite,
    gaussian_cm_analytic,
    strong_um_recover,
    um_expectation,
    um_outcome_density,
    weak_um_moments,
)
from .meter import Grid, GridWavefunction, gaussian_state, translate, wigner_ville
from .operators import (
    PAULI,
    HermitianOperator,
    PureState,
    SpectralDecomposition,
    apply_function,
    born_probabilities,
    expectation,
    spectral_decompose,
)
from .qjp import (
    QuasiProbTable,
    char_function,
    conjugate,
    marginals_and_moments,
    qjp_additive,
    qjp_convolutive,
    qjp_kirkwood_dirac,
    transform_alpha,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "ConditionalFunction",
    "amplification_bound",
    "cond_quasi_expectation",
    "conditional_average_from_qjp",
    "construct_post_selection",
    "two_state_value",
    "weak_value",
    "QJPLabError",
    "OperatorInnerProduct",
    "inner_product",
    "project_onto_algebra",
    "pythagorean_residual",
    "quantum_covariance",
    "CompositeState",
    "cm_conditional_expectation",
    "evolve_composite",
    "gaussian_cm_analytic",
    "strong_um_recover",
    "um_expectation",
    "um_outcome_density",
    "weak_um_moments",
    "Grid",
    "GridWavefunction",
    "gaussian_state",
    "translate",
    "wigner_ville",
    "PAULI",
    "HermitianOperator",
    "PureState",
    "SpectralDecomposition",
    "apply_function",
    "born_probabilities",
    "expectation",
    "spectral_decompose",
    "QuasiProbTable",
    "char_function",
    "conjugate",
    "marginals_and_moments",
    "qjp_additive",
    "qjp_convolutive",
    "qjp_kirkwood_dirac",
    "transform_alpha",
]
