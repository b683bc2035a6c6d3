"""Classical and quantum Fisher information in su(d) Bloch coordinates.

The outcome probabilities ``p_k = Tr(rho M_k)`` are affine in the Bloch
vector, so ``dp_k/dtheta_i = Tr(M_k l_i)`` exactly and the classical Fisher
matrix is ``sum_k c_k c_k^T / p_k``.

Measurement errors are ``x . J(M)^+ x - Var(X)``: the Cramer-Rao quadratic
form of the classical Fisher matrix minus the intrinsic variance, which equals
the same form for any quantum Fisher matrix.  Only the classical matrix is
ever (pseudo-)inverted.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryStateError, RankDeficientStateError
from .quantum_objects import _mat, as_observable, variance
from .su_basis import coefficients, generators

CLASSICAL = "classical"
SLD = "sld"
RLD = "rld"

PROB_FLOOR = 1e-12
PINV_RCOND = 1e-10
RANGE_RTOL = 1e-8
FULL_RANK_FLOOR = 1e-10
ERROR_CLAMP = 1e-9


@dataclass(frozen=True, eq=False)
class FisherMatrix:
    matrix: np.ndarray
    kind: str = CLASSICAL

    def inverse(self):
        return np.linalg.inv(self.matrix)


def classical_fisher(rho, povm):
    """Fisher information matrix of the outcome distribution of ``povm`` on ``rho``."""
    r = _mat(rho)
    basis = generators(r.shape[0])
    effects = povm.effects if hasattr(povm, "effects") else np.asarray(povm)
    c = coefficients(effects, basis)
    p = np.einsum("ab,kba->k", r, effects).real
    informative = np.linalg.norm(c, axis=1) > PROB_FLOOR
    vanishing = informative & (p <= PROB_FLOOR)
    if np.any(vanishing):
        k = int(np.flatnonzero(vanishing)[0])
        raise BoundaryStateError(
            f"outcome {k} is informative but has probability {p[k]:.3e}"
        )
    c, p = c[informative], p[informative]
    j = (c.T / p) @ c
    return FisherMatrix(0.5 * (j + j.T), CLASSICAL)


def _eigen_full_rank(rho):
    r = _mat(rho)
    w, v = np.linalg.eigh(r)
    if w[0] <= FULL_RANK_FLOOR:
        raise RankDeficientStateError(float(w[0]), FULL_RANK_FLOOR)
    return r, w, v


def sld_operators(rho):
    """Solutions ``L_i`` of ``l_i = (rho L_i + L_i rho)/2`` in the computational basis."""
    r, w, v = _eigen_full_rank(rho)
    lam = generators(r.shape[0]).generators
    lam_eig = v.conj().T @ lam @ v
    l_eig = 2.0 * lam_eig / (w[:, None] + w[None, :])
    return v @ l_eig @ v.conj().T


def sld_fisher(rho):
    """``[J_S]_ij = <{L_i, L_j}>/2``."""
    r, w, v = _eigen_full_rank(rho)
    lam = v.conj().T @ generators(r.shape[0]).generators @ v
    # in the eigenbasis of rho: sum_mn 2 l_i[m, n] l_j[n, m] / (r_m + r_n)
    k = 2.0 / (w[:, None] + w[None, :])
    j = np.einsum("imn,jnm,mn->ij", lam, lam, k).real
    return FisherMatrix(0.5 * (j + j.T), SLD)


def rld_operators(rho):
    """Solutions ``L'_i = rho^{-1} l_i`` of ``l_i = rho L'_i``."""
    r, w, v = _eigen_full_rank(rho)
    inv = (v / w) @ v.conj().T
    return inv @ generators(r.shape[0]).generators


def rld_fisher(rho):
    """``[J_R]_ij = <L'_j L'_i>`` (complex Hermitian)."""
    r, w, v = _eigen_full_rank(rho)
    lam = v.conj().T @ generators(r.shape[0]).generators @ v
    # Tr(rho L'_j L'_i) = Tr(l_j rho^{-1} l_i), evaluated without forming rho rho^{-1}
    j = np.einsum("jnm,imn,m->ij", lam, lam, 1.0 / w)
    return FisherMatrix(0.5 * (j + j.conj().T), RLD)


def quadratic_form_pinv(J, x, rcond=PINV_RCOND, range_rtol=RANGE_RTOL):
    """``x . J^+ x`` or ``inf`` when ``x`` lies outside the range of ``J``."""
    m = getattr(J, "matrix", J)
    x = np.asarray(x, dtype=float)
    return _pinv_forms(m, x[:, None], rcond, range_rtol)[0, 0]


def pinv_forms(J, xs, rcond=PINV_RCOND, range_rtol=RANGE_RTOL):
    """Gram matrix ``[x_a . J^+ x_b]`` for the columns of ``xs``; ``inf`` rows for
    vectors outside the range."""
    m = getattr(J, "matrix", J)
    return _pinv_forms(m, np.asarray(xs, dtype=float), rcond, range_rtol)


def _pinv_forms(m, xs, rcond, range_rtol):
    w, v = np.linalg.eigh(m)
    top = max(abs(w).max(initial=0.0), 0.0)
    keep = w > rcond * top if top > 0 else np.zeros_like(w, dtype=bool)
    vk = v[:, keep]
    proj = vk.T @ xs  # coordinates in the kept eigenbasis
    resid = np.linalg.norm(xs - vk @ proj, axis=0)
    norms = np.linalg.norm(xs, axis=0)
    ok = resid <= range_rtol * norms
    forms = (proj.T / w[keep]) @ proj
    bad = ~ok
    forms[bad, :] = math.inf
    forms[:, bad] = math.inf
    return forms


def clamp_error(eps, scale=1.0):
    """Clamp round-off negatives to zero; larger negatives are returned unchanged."""
    if eps < 0.0 and eps >= -ERROR_CLAMP * max(1.0, scale):
        return 0.0
    return eps


def measurement_error(rho, x, povm, J=None):
    """Excess asymptotic variance of the best consistent estimator of ``<X>``."""
    obs = as_observable(x)
    if J is None:
        J = classical_fisher(rho, povm)
    form = quadratic_form_pinv(J, obs.vector)
    if math.isinf(form):
        return math.inf
    return clamp_error(form - variance(rho, obs), scale=form)


def measurement_errors(rho, xs, povm, J=None):
    """Errors of several observables sharing one Fisher matrix."""
    obs = [as_observable(x) for x in xs]
    if J is None:
        J = classical_fisher(rho, povm)
    vecs = np.array([o.vector for o in obs]).T
    forms = pinv_forms(J, vecs)
    out = []
    for k, o in enumerate(obs):
        f = forms[k, k]
        out.append(math.inf if math.isinf(f) else clamp_error(f - variance(rho, o), f))
    return out


def eta(eps, var):
    """Normalized error ``1/(eps/var + 1)`` in ``[0, 1]``."""
    if not var > 0.0:
        raise ValueError(f"variance must be positive, got {var}")
    if math.isinf(eps):
        return 0.0
    return 1.0 / (eps / var + 1.0)
