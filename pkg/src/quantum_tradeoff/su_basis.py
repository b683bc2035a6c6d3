"""Orthonormal generator basis of su(d).

Generators are generalized Gell-Mann matrices rescaled so that
``Tr(l_i l_j) = delta_ij``.  Ordering is fixed:

1. symmetric off-diagonal generators ``(E_jk + E_kj)/sqrt(2)`` for ``j < k``,
   row-major;
2. antisymmetric generators ``(-i E_jk + i E_kj)/sqrt(2)`` for ``j < k``,
   row-major;
3. diagonal generators ``diag(1, ..., 1, -l, 0, ...)/sqrt(l (l + 1))`` for
   ``l = 1 .. d-1``.

For ``d = 2`` this gives the Pauli matrices ``(X, Y, Z)/sqrt(2)``.  Every
coefficient vector in the package uses this ordering.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidDimensionError, NotHermitianError

HERMITIAN_ATOL = 1e-10


@dataclass(frozen=True)
class GeneratorBasis:
    """The ``d**2 - 1`` orthonormal traceless Hermitian generators of su(d)."""

    dim: int
    generators: np.ndarray  # shape (d**2 - 1, d, d), read-only

    def __len__(self):
        return self.generators.shape[0]

    def gram(self):
        """Hilbert-Schmidt inner products ``Tr(l_i l_j)``."""
        g = self.generators
        return np.einsum("iab,jba->ij", g, g)


@dataclass(frozen=True)
class OperatorDecomposition:
    """Coefficients of ``H = scalar * I + vector . lambda``."""

    scalar: float
    vector: np.ndarray


@lru_cache(maxsize=None)
def generators(d):
    """Return the su(d) generator basis for dimension ``d >= 2``."""
    if int(d) != d or d < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {d!r}")
    d = int(d)
    mats = []
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    s = 1.0 / np.sqrt(2.0)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = s
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j * s
        m[k, j] = 1j * s
        mats.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    arr = np.array(mats)
    arr.setflags(write=False)
    return GeneratorBasis(dim=d, generators=arr)


def check_hermitian(h, atol=HERMITIAN_ATOL):
    """Return ``h`` as a complex square array, raising if it is not Hermitian."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {h.shape}")
    err = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if err > atol:
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {err:.3e})")
    return h


def decompose(h, basis=None):
    """Expand a Hermitian matrix as ``x0 * I + x . lambda``.

    ``x0 = Tr(H)/d`` and ``x_i = Tr(H l_i)``.
    """
    h = check_hermitian(h)
    d = h.shape[0]
    if basis is None:
        basis = generators(d)
    elif basis.dim != d:
        raise InvalidDimensionError(f"basis has dim {basis.dim}, matrix has dim {d}")
    x0 = float(np.trace(h).real) / d
    x = np.einsum("iab,ba->i", basis.generators, h).real
    return OperatorDecomposition(scalar=x0, vector=x)


def reconstruct(dec, basis):
    """Inverse of :func:`decompose`; the result is exactly Hermitian."""
    x = np.asarray(dec.vector, dtype=float)
    if x.shape != (len(basis),):
        raise InvalidDimensionError(
            f"coefficient vector has shape {x.shape}, expected ({len(basis)},)"
        )
    h = dec.scalar * np.eye(basis.dim, dtype=complex)
    h = h + np.tensordot(x, basis.generators, axes=1)
    return 0.5 * (h + h.conj().T)


def coefficients(ops, basis):
    """Traceless coefficient vectors for a stack of operators (no Hermiticity check).

    Returns ``Re Tr(op_k l_i)`` with shape ``(len(ops), d**2 - 1)``.
    """
    return np.einsum("kab,iba->ki", np.asarray(ops), basis.generators).real
