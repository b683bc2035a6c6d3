"""Quantum measurement errors from Fisher information, and their trade-off bounds."""

__version__ = "0.1.0"

from .blocks import BlockDecomposition, invariant_blocks, quantum_correlation, quantum_variance
from .bounds import (
    OptimalMeasurement,
    TradeoffReport,
    attainable_rhs,
    find_optimal,
    heisenberg_rhs,
    random_measurement_product,
    spin_gamma_solve,
    tradeoff_report,
)
from .fisher import (
    FisherMatrix,
    classical_fisher,
    eta,
    measurement_error,
    measurement_errors,
    quadratic_form_pinv,
    rld_fisher,
    sld_fisher,
)
from .measurements import Povm, apply_noise, mix, projection_of, random_povm, random_projection
from .quantum_objects import (
    DensityMatrix,
    Observable,
    commutator_expectation,
    correlations,
    density_from_bloch,
    expectation,
    spin_family_state,
    spin_operators,
    variance,
)
from .su_basis import GeneratorBasis, OperatorDecomposition, decompose, generators, reconstruct
