"""Trade-off bounds on the measurement errors of two observables.

Two lower bounds on ``eps(X1) * eps(X2)`` are evaluated:

* the commutator bound ``|<[X1, X2]>|^2 / 4``, valid for every POVM;
* the attainable bound ``DQ^2(X1) DQ^2(X2) - C_Q(X1, X2)^2``, built from
  block-averaged moments over the simultaneous invariant subspaces.

:func:`find_optimal` constructs a random mixture of two projection
measurements that attains the second bound.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .blocks import block_moments, invariant_blocks
from .errors import NoRootError, SearchFailedError
from .fisher import classical_fisher, measurement_errors, pinv_forms
from .measurements import Povm, mix, projection_of
from .quantum_objects import (
    Observable,
    _mat,
    as_observable,
    commutator_expectation,
    correlations,
    variance,
)
from .su_basis import OperatorDecomposition, generators, reconstruct

SLACK_ATOL = 1e-9
EQUALITY_RTOL = 1e-6
N_STARTS = 20


@dataclass(frozen=True)
class TradeoffReport:
    eps1: float
    eps2: float
    product: float
    rhs_heisenberg: float
    rhs_attainable: float
    slack_heisenberg: float
    slack_attainable: float
    predicted_product: float = None

    def as_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True, eq=False)
class OptimalMeasurement:
    Y1: Observable
    Y2: Observable
    A: np.ndarray
    q1: float
    residual: float
    gammas: tuple = (math.nan, math.nan)
    cross_term: float = 0.0
    product: float = 0.0
    rhs: float = 0.0
    povm: Povm = field(default=None, repr=False)


def error_product(e1, e2):
    """``e1 * e2`` with an unlearnable observable (``inf``) dominating."""
    if math.isinf(e1) or math.isinf(e2):
        return math.inf
    return e1 * e2


def heisenberg_rhs(rho, x1, x2):
    return 0.25 * abs(commutator_expectation(rho, x1, x2)) ** 2


def attainable_rhs(rho, x1, x2, blocks=None):
    v1, v2, c = block_moments(rho, x1, x2, blocks)
    return v1 * v2 - c * c


def tradeoff_report(rho, x1, x2, povm, blocks=None, rhs=None):
    """Errors of ``povm`` for both observables against both bounds.

    ``rhs`` may carry precomputed ``(rhs_heisenberg, rhs_attainable)``.
    """
    e1, e2 = measurement_errors(rho, [x1, x2], povm)
    prod = error_product(e1, e2)
    if rhs is None:
        rhs = (heisenberg_rhs(rho, x1, x2), attainable_rhs(rho, x1, x2, blocks))
    h, a = rhs
    return TradeoffReport(e1, e2, prod, h, a, prod - h, prod - a)


def random_measurement_product(rho, x1, x2, q1, blocks=None):
    """Report for measuring ``X1`` with probability ``q1`` and ``X2`` otherwise.

    ``predicted_product`` is ``DQ^2(X1) DQ^2(X2)``; for observables whose
    algebra is irreducible this equals the measured product for every ``q1``.
    """
    if not 0.0 < q1 < 1.0:
        raise ValueError(f"q1 must lie in (0, 1), got {q1}")
    x1, x2 = as_observable(x1), as_observable(x2)
    if blocks is None:
        blocks = invariant_blocks(x1, x2)
    v1, v2, c = block_moments(rho, x1, x2, blocks)
    povm = mix(projection_of(x1), projection_of(x2), q1)
    r = tradeoff_report(rho, x1, x2, povm, rhs=(heisenberg_rhs(rho, x1, x2), v1 * v2 - c * c))
    return TradeoffReport(**{**r.__dict__, "predicted_product": v1 * v2})


def spin_gamma_residual(g1, g2, phi):
    """Left side of the angle condition for the spin example (zero at optimum)."""
    dm = math.cos(g1 - g2)
    return math.cos(phi) * dm * dm - 2.0 * math.cos(g1 + g2 - phi) * dm + math.cos(phi)


def spin_gamma_solve(phi, q1=0.5):
    """Measurement angles ``(g1, g2) = (phi/2 + delta, phi/2 - delta)`` for the spin example.

    ``Y_nu = Sx cos(g_nu) + Sy sin(g_nu)`` measured with equal probability
    attains the attainable bound for ``X1 = Sx``, ``X2 = Sx cos(phi) + Sy sin(phi)``.
    """
    if q1 != 0.5:
        raise ValueError("the closed angle condition holds for q1 = 1/2 only")
    if not 0.0 < phi < math.pi:
        raise ValueError(f"phi must lie in (0, pi), got {phi}")

    def f(delta):
        return spin_gamma_residual(phi / 2 + delta, phi / 2 - delta, phi)

    lo, hi = 0.0, math.pi / 2
    if f(lo) * f(hi) > 0:
        raise NoRootError(f"no sign change for phi={phi}")
    delta = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return phi / 2 + delta, phi / 2 - delta


class _Search:
    """Equality residual as a function of the two angles and the mixing weight."""

    def __init__(self, rho, x1, x2):
        self.rho = _mat(rho)
        self.x1, self.x2 = as_observable(x1), as_observable(x2)
        self.basis = generators(self.rho.shape[0])
        a, b = self.x1.vector, self.x2.vector
        self.u1 = a / np.linalg.norm(a)
        w = b - (self.u1 @ b) * self.u1
        self.u2 = w / np.linalg.norm(w)
        # traceless parts of X in the (u1, u2) frame, one row per observable
        self.frame_x = np.array([[np.linalg.norm(a), 0.0], [self.u1 @ b, self.u2 @ b]])
        self.xs = np.array([a, b]).T
        cs12 = correlations(self.rho, self.x1, self.x2)[0]
        v1, v2 = variance(self.rho, self.x1), variance(self.rho, self.x2)
        self.sld_forms = np.array([[v1, cs12], [cs12, v2]])
        self.rhs = attainable_rhs(self.rho, self.x1, self.x2)
        self.scale_product = max(1.0, self.rhs)
        self.scale_cross = max(1.0, math.sqrt(v1 * v2))

    def observable(self, g):
        y = math.cos(g) * self.u1 + math.sin(g) * self.u2
        return Observable.from_matrix(reconstruct(OperatorDecomposition(0.0, y), self.basis))

    def povm(self, g1, g2, q1):
        return mix(projection_of(self.observable(g1)), projection_of(self.observable(g2)), q1)

    def excess(self, g1, g2, q1):
        """``[x_mu . (J^+ - J_S^{-1}) x_nu]`` for the mixture, or None if unusable."""
        if not 0.0 < q1 < 1.0 or abs(math.sin(g1 - g2)) < 1e-6:
            return None
        J = classical_fisher(self.rho, self.povm(g1, g2, q1))
        forms = pinv_forms(J, self.xs)
        if not np.all(np.isfinite(forms)):
            return None
        return forms - self.sld_forms

    def residuals(self, g1, g2, q1):
        e = self.excess(g1, g2, q1)
        if e is None:
            return None
        cross = e[0, 1] / self.scale_cross
        gap = (e[0, 0] * e[1, 1] - self.rhs) / self.scale_product
        return cross, gap

    def objective(self, g1, g2, q1):
        r = self.residuals(g1, g2, q1)
        return 1e6 if r is None else r[0] ** 2 + r[1] ** 2


def _q_from(s):
    return 1.0 / (1.0 + math.exp(-s))


def _polish(search, g1, g2, q1):
    """Drive the cross term to zero along ``g2`` with a bracketing root finder."""

    def cross(g):
        r = search.residuals(g1, g, q1)
        return math.nan if r is None else r[0]

    c0 = cross(g2)
    if not math.isfinite(c0):
        return g2
    for h in (1e-6, 1e-4, 1e-3, 1e-2, 5e-2):
        for lo, hi in ((g2 - h, g2), (g2, g2 + h)):
            clo, chi = cross(lo), cross(hi)
            if math.isfinite(clo) and math.isfinite(chi) and clo * chi <= 0:
                return brentq(cross, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return g2


def _start_grid(n, fixed_q):
    starts = []
    angles = np.linspace(0.0, math.pi, 5, endpoint=False) + math.pi / 10
    qs = [0.5] if fixed_q is not None else [0.5, 0.3, 0.7, 0.15, 0.85]
    for q in qs:
        for i, a in enumerate(angles):
            for b in angles[i + 1:]:
                starts.append((a, b, q if fixed_q is None else fixed_q))
    return starts[:n]


def _commuting_optimum(rho, x1, x2):
    """Both observables are functions of one joint-eigenbasis measurement."""
    eye = np.eye(x1.dim)
    a = x1.matrix - x1.decomposition.scalar * eye
    b = x2.matrix - x2.decomposition.scalar * eye
    scale = max(1.0, variance(rho, x1), variance(rho, x2))
    for t in (math.sqrt(2) - 1, math.pi / 7, math.e / 5):
        y1 = Observable.from_matrix(a + t * b)
        y2 = Observable.from_matrix(a - t * b)
        povm = mix(projection_of(y1), projection_of(y2), 0.5)
        e1, e2 = measurement_errors(rho, [x1, x2], povm)
        if max(e1, e2) <= 1e-9 * scale:
            A = np.array([[0.5, 0.5], [0.5 / t, -0.5 / t]])
            return OptimalMeasurement(
                y1, y2, A, 0.5, residual=error_product(e1, e2), cross_term=0.0,
                product=error_product(e1, e2), rhs=0.0, povm=povm,
            )
    raise SearchFailedError("could not separate the joint eigenspaces of commuting observables")


def find_optimal(rho, x1, x2, q1=None, n_starts=N_STARTS, tol=EQUALITY_RTOL):
    """Random mixture of two projections attaining the attainable bound.

    The measured observables ``Y_nu`` are unit-norm traceless operators in the
    plane spanned by the traceless parts of ``X1`` and ``X2``, at angle
    ``gammas[nu]`` from ``X1``.  ``q1`` fixes the mixing weight; by default it
    is searched along with the angles.
    """
    x1, x2 = as_observable(x1), as_observable(x2)
    comm = np.linalg.norm(x1.matrix @ x2.matrix - x2.matrix @ x1.matrix)
    if comm <= 1e-10 * max(1.0, np.linalg.norm(x1.matrix) * np.linalg.norm(x2.matrix)):
        return _commuting_optimum(rho, x1, x2)

    search = _Search(rho, x1, x2)
    best = None
    for g1, g2, q in _start_grid(n_starts, q1):
        if q1 is None:
            fun = lambda p: search.objective(p[0], p[1], _q_from(p[2]))
            x0 = [g1, g2, math.log(q / (1 - q))]
        else:
            fun = lambda p: search.objective(p[0], p[1], q1)
            x0 = [g1, g2]
        res = minimize(
            fun, x0, method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-28, "maxiter": 4000},
        )
        h1, h2 = res.x[0], res.x[1]
        q = q1 if q1 is not None else _q_from(res.x[2])
        h2 = _polish(search, h1, h2, q)
        r = search.residuals(h1, h2, q)
        if r is None:
            continue
        residual = max(abs(r[0]), abs(r[1]))
        if best is None or residual < best[0]:
            best = (residual, h1, h2, q)
        if residual <= tol:
            break
    if best is None or best[0] > tol:
        raise SearchFailedError(
            f"no attaining measurement found in {n_starts} starts "
            f"(best residual {None if best is None else best[0]:.3e})",
            best=best,
        )
    residual, g1, g2, q = best
    g1, g2 = _wrap(g1), _wrap(g2)
    y1, y2 = search.observable(g1), search.observable(g2)
    ymat = np.array([[math.cos(g1), math.cos(g2)], [math.sin(g1), math.sin(g2)]])
    # rows of ymat.T are the Y coordinates in the frame; X = A Y
    A = search.frame_x @ np.linalg.inv(ymat.T)
    povm = mix(projection_of(y1), projection_of(y2), q)
    e1, e2 = measurement_errors(rho, [x1, x2], povm)
    cross = search.excess(g1, g2, q)[0, 1]
    return OptimalMeasurement(
        y1, y2, A, q, residual=residual, gammas=(g1, g2), cross_term=cross,
        product=error_product(e1, e2), rhs=search.rhs, povm=povm,
    )


def _wrap(g):
    """Angles are defined modulo pi (Y and -Y give the same measurement)."""
    return float(np.mod(g, math.pi))
