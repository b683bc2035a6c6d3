"""Density matrices, observables, spin operators and moment functionals."""
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidDimensionError, NotAStateError
from .su_basis import (
    OperatorDecomposition,
    check_hermitian,
    decompose,
    generators,
    reconstruct,
)

PSD_ATOL = 1e-10


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    bloch: np.ndarray

    @property
    def dim(self):
        return self.matrix.shape[0]

    @classmethod
    def from_matrix(cls, rho):
        rho = check_hermitian(rho)
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-10:
            raise NotAStateError(f"trace is {tr!r}, expected 1")
        lo = np.linalg.eigvalsh(rho)[0]
        if lo < -PSD_ATOL:
            raise NotAStateError(f"negative eigenvalue {lo:.3e}")
        rho = 0.5 * (rho + rho.conj().T)
        return cls(_frozen(rho), _frozen(decompose(rho).vector))


@dataclass(frozen=True)
class Observable:
    matrix: np.ndarray
    decomposition: OperatorDecomposition

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def vector(self):
        """Traceless coefficient vector ``x``."""
        return self.decomposition.vector

    @classmethod
    def from_matrix(cls, h):
        h = check_hermitian(h)
        h = 0.5 * (h + h.conj().T)
        dec = decompose(h)
        return cls(_frozen(h), OperatorDecomposition(dec.scalar, _frozen(dec.vector)))

    def __add__(self, other):
        return Observable.from_matrix(self.matrix + _mat(other))

    def __rmul__(self, c):
        return Observable.from_matrix(float(c) * self.matrix)

    __mul__ = __rmul__


@dataclass(frozen=True)
class SpinFamily:
    S: Fraction
    Sx: Observable
    Sy: Observable
    Sz: Observable

    @property
    def dim(self):
        return int(2 * self.S + 1)

    def along(self, direction):
        """``n_x Sx + n_y Sy + n_z Sz`` for a (not necessarily unit) direction."""
        nx, ny, nz = direction
        return Observable.from_matrix(
            nx * self.Sx.matrix + ny * self.Sy.matrix + nz * self.Sz.matrix
        )

    def in_plane(self, angle):
        """``Sx cos(angle) + Sy sin(angle)``."""
        return self.along((np.cos(angle), np.sin(angle), 0.0))


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


def _mat(obj):
    return np.asarray(getattr(obj, "matrix", obj))


def _pair(a, b):
    a, b = _mat(a), _mat(b)
    if a.shape != b.shape:
        raise InvalidDimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def as_state(rho):
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix.from_matrix(rho)


def as_observable(x):
    return x if isinstance(x, Observable) else Observable.from_matrix(x)


def density_from_bloch(d, theta):
    """``I/d + theta . lambda``; raises :class:`NotAStateError` if not PSD."""
    basis = generators(d)
    theta = np.asarray(theta, dtype=float)
    rho = reconstruct(OperatorDecomposition(1.0 / d, theta), basis)
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -PSD_ATOL:
        raise NotAStateError(f"Bloch vector gives negative eigenvalue {lo:.3e}")
    return DensityMatrix(_frozen(rho), _frozen(theta))


def maximally_mixed(d):
    return density_from_bloch(d, np.zeros(d * d - 1))


def pure_state(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix.from_matrix(np.outer(psi, psi.conj()))


def spin_family_state(S, r):
    """``r I/(2S+1) + (1-r)|S><S|`` with ``|S>`` the top ``Sz`` eigenstate."""
    if not 0.0 <= r <= 1.0:
        raise NotAStateError(f"mixing parameter r={r} outside [0, 1]")
    d = _spin_dim(S)
    rho = r * np.eye(d) / d
    rho[0, 0] += 1.0 - r
    return DensityMatrix.from_matrix(rho)


def random_state(d, rng):
    """Hilbert-Schmidt random density matrix (full rank with probability 1)."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return DensityMatrix.from_matrix(rho / np.trace(rho).real)


def random_observable(d, rng):
    """Gaussian Hermitian (GUE-like) observable."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return Observable.from_matrix(0.5 * (g + g.conj().T))


def expectation(rho, x):
    r, m = _pair(rho, x)
    return float(np.einsum("ab,ba->", r, m).real)


def variance(rho, x):
    return correlations(rho, x, x)[0]


def correlations(rho, x, y):
    """Return ``(C_s, C)``: symmetrized (real) and plain (complex) correlations.

    ``C(X, Y) = <XY> - <X><Y>`` and ``C_s(X, Y) = Re C(X, Y)``.
    """
    r, a = _pair(rho, x)
    _, b = _pair(rho, y)
    c = np.einsum("ab,bc,ca->", r, a, b) - expectation(r, a) * expectation(r, b)
    return float(c.real), complex(c)


def commutator_expectation(rho, x, y):
    r, a = _pair(rho, x)
    _, b = _pair(rho, y)
    return complex(np.einsum("ab,ba->", r, a @ b - b @ a))


def _spin_dim(S):
    two_s = Fraction(S).limit_denominator(2) * 2
    if two_s.denominator != 1 or two_s < 1 or abs(float(two_s) - 2 * float(S)) > 1e-12:
        raise InvalidDimensionError(f"S must be a positive half-integer, got {S!r}")
    return int(two_s) + 1


def spin_operators(S):
    """Angular-momentum matrices in the ``Sz`` eigenbasis ordered ``S, S-1, ..., -S``."""
    d = _spin_dim(S)
    s = (d - 1) / 2.0
    m = s - np.arange(d)
    # <m+1|S+|m> = sqrt(s(s+1) - m(m+1)); S+ has entries just above the diagonal
    sp = np.diag(np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    sx = 0.5 * (sp + sp.conj().T)
    sy = -0.5j * (sp - sp.conj().T)
    sz = np.diag(m).astype(complex)
    return SpinFamily(
        S=Fraction(d - 1, 2),
        Sx=Observable.from_matrix(sx),
        Sy=Observable.from_matrix(sy),
        Sz=Observable.from_matrix(sz),
    )
