import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantum_tradeoff.bounds import (
    attainable_rhs,
    error_product,
    find_optimal,
    heisenberg_rhs,
    random_measurement_product,
    spin_gamma_residual,
    spin_gamma_solve,
    tradeoff_report,
)
from quantum_tradeoff.fisher import classical_fisher, measurement_errors, pinv_forms
from quantum_tradeoff.measurements import mix, projection_of, random_povm
from quantum_tradeoff.quantum_objects import (
    Observable,
    correlations,
    maximally_mixed,
    pure_state,
    random_observable,
    random_state,
    spin_family_state,
    spin_operators,
)

from .conftest import SX, SY, SZ


def test_heisenberg_examples(spin_case):
    assert heisenberg_rhs(pure_state([1, 0]), SX, SY) == pytest.approx(1.0)
    assert heisenberg_rhs(maximally_mixed(2), SX, SY) == pytest.approx(0.0, abs=1e-15)
    rho, x1, x2 = spin_case
    assert heisenberg_rhs(rho, x1, x2) == pytest.approx(9 / 256, abs=1e-12)


def test_attainable_examples(spin_case):
    rho, x1, x2 = spin_case
    assert attainable_rhs(rho, x1, x2) == pytest.approx(0.25, abs=1e-12)
    assert attainable_rhs(maximally_mixed(2), SX, SY) == pytest.approx(1.0, abs=1e-12)
    assert attainable_rhs(maximally_mixed(2), SZ, 2 * SZ) == pytest.approx(0.0, abs=1e-12)


def test_error_product_infinity():
    assert error_product(math.inf, 0.0) == math.inf
    assert error_product(0.0, math.inf) == math.inf
    assert error_product(2.0, 3.0) == 6.0


def test_random_measurement_identity_is_q_independent(rng):
    rho = random_state(3, rng)
    x1, x2 = random_observable(3, rng), random_observable(3, rng)
    a = random_measurement_product(rho, x1, x2, 0.3)
    b = random_measurement_product(rho, x1, x2, 0.7)
    assert a.product == pytest.approx(b.product, rel=1e-9)
    assert a.product == pytest.approx(a.predicted_product, rel=1e-9)
    assert a.slack_attainable >= -1e-9 and a.slack_heisenberg >= -1e-9
    with pytest.raises(ValueError):
        random_measurement_product(rho, x1, x2, 1.0)


def test_tradeoff_report_for_sigma_x_measurement():
    rep = tradeoff_report(maximally_mixed(2), SX, SY, projection_of(SX))
    assert rep.eps1 == pytest.approx(0.0, abs=1e-12)
    assert rep.eps2 == math.inf
    assert rep.product == math.inf
    assert rep.slack_attainable == math.inf


def test_attainable_dominates_heisenberg(rng):
    for d in (2, 3, 4):
        for _ in range(25):
            rho = random_state(d, rng)
            x1, x2 = random_observable(d, rng), random_observable(d, rng)
            assert attainable_rhs(rho, x1, x2) >= heisenberg_rhs(rho, x1, x2) - 1e-10


def test_general_povms_respect_bounds(rng):
    for d in (2, 3):
        rho = random_state(d, rng)
        x1, x2 = random_observable(d, rng), random_observable(d, rng)
        for _ in range(50):
            rep = tradeoff_report(rho, x1, x2, random_povm(d, d * d + 1, 1, rng))
            assert rep.slack_attainable >= -1e-9


def _check_optimum(rho, x1, x2, opt):
    J = classical_fisher(rho, opt.povm)
    forms = pinv_forms(J, np.array([x1.vector, x2.vector]).T)
    cs = correlations(rho, x1, x2)[0]
    rhs = attainable_rhs(rho, x1, x2)
    scale = max(1.0, rhs)
    e1, e2 = measurement_errors(rho, [x1, x2], opt.povm)
    assert abs(e1 * e2 - rhs) <= 1e-6 * scale
    assert abs(forms[0, 1] - cs) <= 1e-6 * scale
    # A maps measured observables back onto the targets
    ys = np.array([opt.Y1.vector, opt.Y2.vector])
    assert np.allclose(opt.A @ ys, [x1.vector, x2.vector], atol=1e-9)


def test_find_optimal_spin_case(spin_case):
    rho, x1, x2 = spin_case
    opt = find_optimal(rho, x1, x2)
    _check_optimum(rho, x1, x2, opt)
    fixed = find_optimal(rho, x1, x2, q1=0.5)
    assert fixed.q1 == 0.5
    _check_optimum(rho, x1, x2, fixed)
    assert abs(spin_gamma_residual(*fixed.gammas, math.pi / 6)) <= 1e-6


@pytest.mark.parametrize("d", [2, 3, 4])
def test_find_optimal_random(d):
    rng = np.random.default_rng(50 + d)
    for _ in range(3):
        rho = random_state(d, rng)
        x1, x2 = random_observable(d, rng), random_observable(d, rng)
        _check_optimum(rho, x1, x2, find_optimal(rho, x1, x2))


def test_find_optimal_commuting(rng):
    rho = random_state(3, rng)
    x1 = Observable.from_matrix(np.diag([1.0, 2.0, -1.0]))
    x2 = Observable.from_matrix(np.diag([0.5, -1.0, 3.0]))
    opt = find_optimal(rho, x1, x2)
    e1, e2 = measurement_errors(rho, [x1, x2], opt.povm)
    assert max(e1, e2) <= 1e-9
    assert opt.rhs == 0.0


def test_spin_gamma_examples():
    g1, g2 = spin_gamma_solve(math.pi / 2)
    assert (g1, g2) == pytest.approx((math.pi / 2, 0.0), abs=1e-10)
    g1, g2 = spin_gamma_solve(math.pi / 6)
    assert g1 + g2 == pytest.approx(math.pi / 6)
    assert abs(spin_gamma_residual(g1, g2, math.pi / 6)) <= 1e-12
    with pytest.raises(ValueError):
        spin_gamma_solve(math.pi / 6, q1=0.3)
    with pytest.raises(ValueError):
        spin_gamma_solve(0.0)


def test_spin_gamma_mixture_attains_bound():
    fam = spin_operators(1.5)
    rho = spin_family_state(1.5, 0.5)
    phi = math.pi / 6
    g1, g2 = spin_gamma_solve(phi)
    povm = mix(projection_of(fam.in_plane(g1)), projection_of(fam.in_plane(g2)), 0.5)
    e1, e2 = measurement_errors(rho, [fam.Sx, fam.in_plane(phi)], povm)
    assert e1 * e2 == pytest.approx(0.25, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 4), extra=st.integers(0, 4))
def test_any_povm_respects_both_bounds(seed, d, extra):
    rng = np.random.default_rng(seed)
    rho = random_state(d, rng)
    x1, x2 = random_observable(d, rng), random_observable(d, rng)
    rep = tradeoff_report(rho, x1, x2, random_povm(d, d * d - 1 + extra, 1, rng))
    assert rep.rhs_attainable >= rep.rhs_heisenberg - 1e-10
    assert rep.slack_attainable >= -1e-9


def test_random_measurement_of_identical_observables(rng):
    rho = random_state(3, rng)
    x = random_observable(3, rng)
    rep = random_measurement_product(rho, x, x, 0.4)
    # the commutant of one observable splits into its eigenvectors, so DQ vanishes
    assert rep.predicted_product == pytest.approx(0.0, abs=1e-12)
    assert rep.product == pytest.approx(0.0, abs=1e-9)
    assert rep.rhs_attainable == pytest.approx(0.0, abs=1e-12)


def test_commuting_distinct_observables_mixture_is_not_error_free():
    # each projection only resolves its own eigenspaces, so the mixture loses
    # information although the block moments vanish
    rho = np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex)
    x1 = np.diag([1.0, 1.0, -1.0, -1.0])
    x2 = np.diag([1.0, -1.0, 1.0, -1.0])
    rep = random_measurement_product(rho, x1, x2, 0.5)
    assert rep.predicted_product == pytest.approx(0.0, abs=1e-12)
    assert rep.eps1 > 0.1 and rep.eps2 > 0.1
    assert rep.slack_attainable > 0
    opt = find_optimal(rho, x1, x2)
    assert max(measurement_errors(rho, [x1, x2], opt.povm)) <= 1e-9
