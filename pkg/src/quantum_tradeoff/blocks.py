"""Simultaneous irreducible invariant subspaces of two observables.

The finest common block decomposition is read off a random Hermitian element
of the commutant ``{Y : [Y, X1] = [Y, X2] = 0}``.  A generic element of this
*-algebra separates every irreducible component, so the eigenspaces of one
draw are the blocks.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimensionError
from .quantum_objects import _mat, _pair

EIGEN_GAP = 1e-8
INVARIANCE_ATOL = 1e-8
PROB_THRESHOLD = 1e-12
MAX_ATTEMPTS = 5


@dataclass(frozen=True)
class BlockDecomposition:
    projectors: np.ndarray  # shape (n_blocks, d, d)
    commutant_dim: int = field(default=0)

    def __len__(self):
        return self.projectors.shape[0]

    @property
    def dims(self):
        return [int(round(np.trace(p).real)) for p in self.projectors]

    def probabilities(self, rho):
        return np.einsum("ab,kba->k", _mat(rho), self.projectors).real

    def conditional_states(self, rho):
        """``{a: P_a rho P_a / p_a}`` for blocks with ``p_a > 1e-12``."""
        r = _mat(rho)
        out = {}
        for a, (p, proj) in enumerate(zip(self.probabilities(r), self.projectors)):
            if p > PROB_THRESHOLD:
                out[a] = proj @ r @ proj / p
        return out


def commutant_basis(x1, x2, tol=1e-9):
    """Orthonormal basis (as d x d matrices) of the commutant of ``x1`` and ``x2``."""
    a, b = _pair(x1, x2)
    d = a.shape[0]
    eye = np.eye(d)
    # vec(AY - YA) = (I kron A - A^T kron I) vec(Y), column-major vec
    rows = [np.kron(eye, m) - np.kron(m.T, eye) for m in (a, b)]
    system = np.vstack(rows)
    _, s, vh = np.linalg.svd(system)
    cutoff = tol * max(1.0, s[0])
    null = vh[np.sum(s > cutoff):].conj()
    return null.reshape(-1, d, d).transpose(0, 2, 1)


def invariant_blocks(x1, x2, rng=None):
    """Finest decomposition of the space into subspaces invariant under ``x1`` and ``x2``."""
    a, b = _pair(x1, x2)
    rng = np.random.default_rng(0) if rng is None else rng
    basis = commutant_basis(a, b)
    for _ in range(MAX_ATTEMPTS):
        coeffs = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
        z = np.tensordot(coeffs, basis, axes=1)
        y = 0.5 * (z + z.conj().T)
        y /= max(np.linalg.norm(y, 2), 1e-300)
        projectors = _eigenspace_projectors(y)
        if _is_valid(projectors, (a, b)):
            return BlockDecomposition(np.array(projectors), commutant_dim=len(basis))
    raise ArithmeticError(f"block decomposition failed after {MAX_ATTEMPTS} draws")


def _eigenspace_projectors(y, gap=EIGEN_GAP):
    w, v = np.linalg.eigh(y)
    groups = np.split(np.arange(len(w)), np.nonzero(np.diff(w) > gap)[0] + 1)
    return [v[:, g] @ v[:, g].conj().T for g in groups]


def _is_valid(projectors, ops):
    d = projectors[0].shape[0]
    if np.max(np.abs(sum(projectors) - np.eye(d))) > 1e-10:
        return False
    for i, p in enumerate(projectors):
        for j, q in enumerate(projectors):
            if i == j:
                continue
            for op in ops:
                if np.max(np.abs(p @ op @ q)) > INVARIANCE_ATOL:
                    return False
    return True


def quantum_variance(rho, x, blocks):
    """Block-averaged variance ``sum_a p_a Var(rho_a, X)``."""
    return quantum_correlation(rho, x, x, blocks)


def quantum_correlation(rho, x1, x2, blocks):
    """Block-averaged symmetrized correlation ``sum_a p_a C_s(rho_a; X1, X2)``."""
    r, a = _pair(rho, x1)
    _, b = _pair(rho, x2)
    if blocks.projectors.shape[1] != r.shape[0]:
        raise InvalidDimensionError("blocks and state have different dimensions")
    total = 0.0
    for p, proj in zip(blocks.probabilities(r), blocks.projectors):
        if p <= PROB_THRESHOLD:
            continue
        ra = proj @ r @ proj / p
        ea = np.einsum("ab,ba->", ra, a).real
        eb = np.einsum("ab,ba->", ra, b).real
        sym = np.einsum("ab,bc,ca->", ra, a, b).real
        total += p * (sym - ea * eb)
    return float(total)


def block_moments(rho, x1, x2, blocks=None, rng=None):
    """Return ``(DQ^2(X1), DQ^2(X2), C_Q(X1, X2))``."""
    if blocks is None:
        blocks = invariant_blocks(x1, x2, rng=rng)
    return (
        quantum_variance(rho, x1, blocks),
        quantum_variance(rho, x2, blocks),
        quantum_correlation(rho, x1, x2, blocks),
    )
