import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantum_tradeoff.errors import InvalidDimensionError, NotHermitianError
from quantum_tradeoff.su_basis import (
    OperatorDecomposition,
    decompose,
    generators,
    reconstruct,
)

from .conftest import SX, SY, SZ


@pytest.mark.parametrize("d", range(2, 8))
def test_generator_invariants(d):
    basis = generators(d)
    g = basis.generators
    assert g.shape == (d * d - 1, d, d)
    assert np.max(np.abs(g - g.conj().transpose(0, 2, 1))) <= 1e-12
    assert np.max(np.abs(np.trace(g, axis1=1, axis2=2))) <= 1e-12
    assert np.allclose(basis.gram(), np.eye(d * d - 1), atol=1e-12, rtol=0)


def test_qubit_generators_are_scaled_paulis():
    g = generators(2).generators
    for got, pauli in zip(g, (SX, SY, SZ)):
        assert np.allclose(got, pauli / np.sqrt(2), atol=1e-15)


def test_d4_has_fifteen_generators():
    assert len(generators(4)) == 15


@pytest.mark.parametrize("d", [1, 0, -3, 2.5])
def test_invalid_dimension(d):
    with pytest.raises(InvalidDimensionError):
        generators(d)


def test_generators_are_immutable():
    with pytest.raises(ValueError):
        generators(3).generators[0, 0, 0] = 1.0


def test_decompose_identity():
    dec = decompose(np.eye(3))
    assert dec.scalar == pytest.approx(1.0)
    assert np.allclose(dec.vector, 0.0, atol=1e-15)


def test_decompose_generator_gives_unit_vector():
    basis = generators(3)
    dec = decompose(basis.generators[5], basis)
    expected = np.zeros(8)
    expected[5] = 1.0
    assert dec.scalar == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(dec.vector, expected, atol=1e-15)


def test_decompose_sigma_z():
    # Tr(Z Z/sqrt 2) = 2/sqrt 2; the other inner products vanish
    dec = decompose(SZ)
    assert dec.scalar == 0.0
    assert np.allclose(dec.vector, [0.0, 0.0, np.sqrt(2.0)], atol=1e-15)


def test_decompose_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        decompose(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(NotHermitianError):
        decompose(np.ones((2, 3)))


def test_reconstruct_examples():
    basis = generators(3)
    assert np.allclose(reconstruct(OperatorDecomposition(1 / 3, np.zeros(8)), basis), np.eye(3) / 3)
    e1 = np.zeros(8)
    e1[0] = 1.0
    assert np.allclose(reconstruct(OperatorDecomposition(0.0, e1), basis), basis.generators[0])
    with pytest.raises(InvalidDimensionError):
        reconstruct(OperatorDecomposition(0.0, np.zeros(7)), basis)


@pytest.mark.parametrize("d", range(2, 8))
def test_round_trip_random_hermitian(d):
    rng = np.random.default_rng(d)
    basis = generators(d)
    for _ in range(100):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = g + g.conj().T
        back = reconstruct(decompose(h, basis), basis)
        assert np.max(np.abs(back - h)) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(
    d=st.integers(2, 5),
    data=st.data(),
)
def test_coefficient_round_trip(d, data):
    basis = generators(d)
    x0 = data.draw(st.floats(-10, 10))
    x = np.array(data.draw(st.lists(st.floats(-10, 10), min_size=d * d - 1, max_size=d * d - 1)))
    dec = decompose(reconstruct(OperatorDecomposition(x0, x), basis), basis)
    assert dec.scalar == pytest.approx(x0, abs=1e-12)
    assert np.allclose(dec.vector, x, atol=1e-12)
