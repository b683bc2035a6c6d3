import math

import numpy as np
import pytest

from quantum_tradeoff.errors import InvalidDimensionError, NotAStateError
from quantum_tradeoff.quantum_objects import (
    DensityMatrix,
    Observable,
    commutator_expectation,
    correlations,
    density_from_bloch,
    expectation,
    maximally_mixed,
    pure_state,
    random_observable,
    random_state,
    spin_family_state,
    spin_operators,
    variance,
)
from quantum_tradeoff.su_basis import generators

from .conftest import SX, SY, SZ


def test_density_from_bloch_examples():
    assert np.allclose(density_from_bloch(3, np.zeros(8)).matrix, np.eye(3) / 3)
    rho = density_from_bloch(2, [0, 0, 1 / math.sqrt(2)])
    assert np.allclose(rho.matrix, np.diag([1.0, 0.0]), atol=1e-15)
    with pytest.raises(NotAStateError):
        density_from_bloch(2, [0, 0, 1.0])


def test_from_matrix_validation():
    with pytest.raises(NotAStateError):
        DensityMatrix.from_matrix(np.eye(2))
    with pytest.raises(NotAStateError):
        DensityMatrix.from_matrix(np.diag([1.5, -0.5]))


def test_expectation_examples():
    assert expectation(maximally_mixed(3), generators(3).generators[2]) == pytest.approx(0.0, abs=1e-15)
    fam = spin_operators(1.5)
    top = spin_family_state(1.5, 0.0)
    assert expectation(top, fam.Sz) == pytest.approx(1.5)
    theta = np.array([0.1, -0.2, 0.3])
    rho = density_from_bloch(2, theta)
    assert expectation(rho, generators(2).generators[0]) == pytest.approx(0.1)


def test_variance_of_spin_eigenstate():
    fam = spin_operators(1.5)
    top = spin_family_state(1.5, 0.0)
    assert variance(top, fam.Sz) == pytest.approx(0.0, abs=1e-15)
    # <S|Sx^2|S> = (S(S+1) - S^2)/2 = S/2
    assert variance(top, fam.Sx) == pytest.approx(0.75, abs=1e-12)


def test_pauli_correlations():
    up = pure_state([1, 0])
    cs, c = correlations(up, SX, SY)
    assert cs == pytest.approx(0.0, abs=1e-15)
    assert c == pytest.approx(1j)
    # Tr(XY)/2 = Tr(iZ)/2 vanishes
    cs, c = correlations(maximally_mixed(2), SX, SY)
    assert c == pytest.approx(0.0, abs=1e-15)


def test_commutator_expectation():
    up = pure_state([1, 0])
    assert commutator_expectation(up, SX, SY) == pytest.approx(2j)
    assert commutator_expectation(up, SZ, SZ) == 0


def test_spin_case_commutator(spin_case):
    rho, x1, x2 = spin_case
    # (1 - r) S sin(phi) with r = 1/2, S = 3/2, phi = pi/6
    assert commutator_expectation(rho, x1, x2) == pytest.approx(0.375j, abs=1e-14)


def test_spin_half():
    fam = spin_operators(0.5)
    assert np.allclose(fam.Sz.matrix, np.diag([0.5, -0.5]))
    assert np.allclose(fam.Sx.matrix, SX / 2)
    assert np.allclose(fam.Sy.matrix, SY / 2)


@pytest.mark.parametrize("S", [0.5, 1, 1.5, 2, 3.5])
def test_spin_algebra(S):
    fam = spin_operators(S)
    x, y, z = fam.Sx.matrix, fam.Sy.matrix, fam.Sz.matrix
    assert np.max(np.abs(x @ y - y @ x - 1j * z)) <= 1e-12
    assert np.max(np.abs(y @ z - z @ y - 1j * x)) <= 1e-12
    assert np.max(np.abs(z @ x - x @ z - 1j * y)) <= 1e-12
    assert np.allclose(np.diag(z).real, S - np.arange(int(2 * S + 1)))


def test_spin_three_halves_trace():
    assert np.trace(spin_operators(1.5).Sx.matrix @ spin_operators(1.5).Sx.matrix).real == pytest.approx(5.0)


@pytest.mark.parametrize("S", [0, 0.25, -1, 1.3])
def test_invalid_spin(S):
    with pytest.raises(InvalidDimensionError):
        spin_operators(S)


def test_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        expectation(maximally_mixed(2), np.eye(3))


@pytest.mark.parametrize("d", range(2, 8))
def test_moment_identities_random(d):
    rng = np.random.default_rng(100 + d)
    for _ in range(100):
        rho = random_state(d, rng)
        x = random_observable(d, rng)
        y = random_observable(d, rng)
        assert expectation(rho, x) == pytest.approx(
            x.decomposition.scalar + x.vector @ rho.bloch, abs=1e-10
        )
        cs_xx, _ = correlations(rho, x, x)
        assert cs_xx == variance(rho, x)
        _, cxy = correlations(rho, x, y)
        _, cyx = correlations(rho, y, x)
        assert abs(cxy - cyx.conjugate()) <= 1e-12
        assert cxy.imag == pytest.approx((commutator_expectation(rho, x, y) / 2j).real, abs=1e-12)


def test_observable_arithmetic():
    fam = spin_operators(1)
    combo = 2 * fam.Sx + fam.Sy
    assert isinstance(combo, Observable)
    assert np.allclose(combo.matrix, 2 * fam.Sx.matrix + fam.Sy.matrix)
