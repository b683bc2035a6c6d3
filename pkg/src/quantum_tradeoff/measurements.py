"""POVMs for the nested classes random-mixture < noisy < general.

Noise convention: ``F[i, j]`` is the probability of reporting output ``i``
when the underlying outcome is ``j``.  Columns of ``F`` sum to one, and the
noisy effects are ``M'_i = sum_j F[i, j] M_j``.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPovmError
from .quantum_objects import _mat
from .su_basis import check_hermitian

PROJECTION = "projection"
RANDOM_MIXTURE = "random_mixture"
NOISY = "noisy"
GENERAL = "general"
KINDS = (PROJECTION, RANDOM_MIXTURE, NOISY, GENERAL)

POVM_ATOL = 1e-10
MERGE_GAP = 1e-8


@dataclass(frozen=True, eq=False)
class Povm:
    effects: np.ndarray  # shape (m, d, d)
    kind: str = GENERAL
    eigenvalues: np.ndarray = None  # outcome values for projection POVMs
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        e = np.asarray(self.effects, dtype=complex)
        if e.ndim != 3 or e.shape[1] != e.shape[2]:
            raise InvalidPovmError(f"effects must have shape (m, d, d), got {e.shape}")
        if self.kind not in KINDS:
            raise InvalidPovmError(f"unknown POVM class {self.kind!r}")
        validate_effects(e)
        e.setflags(write=False)
        object.__setattr__(self, "effects", e)

    @property
    def dim(self):
        return self.effects.shape[1]

    def __len__(self):
        return self.effects.shape[0]

    def probabilities(self, rho):
        return np.einsum("ab,kba->k", _mat(rho), self.effects).real

    def to_json(self):
        doc = {
            "d": self.dim,
            "effects": [
                [[[float(z.real), float(z.imag)] for z in row] for row in m]
                for m in self.effects
            ],
            "class": self.kind,
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        try:
            effects = np.array(doc["effects"], dtype=float)
            effects = effects[..., 0] + 1j * effects[..., 1]
            kind = doc.get("class", GENERAL)
            d = int(doc["d"])
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise InvalidPovmError(f"malformed POVM document: {exc}") from exc
        if effects.shape[1:] != (d, d):
            raise InvalidPovmError(f"effects do not match d={d}")
        return cls(effects, kind=kind)


def validate_effects(effects, atol=POVM_ATOL):
    d = effects.shape[1]
    herm = np.max(np.abs(effects - effects.conj().transpose(0, 2, 1)))
    if herm > atol:
        raise InvalidPovmError(f"effects are not Hermitian (deviation {herm:.3e})")
    lows = np.linalg.eigvalsh(effects)[:, 0]
    if lows.min() < -atol:
        k = int(np.argmin(lows))
        raise InvalidPovmError(f"effect {k} has negative eigenvalue {lows[k]:.3e}")
    err = np.max(np.abs(effects.sum(axis=0) - np.eye(d)))
    if err > atol:
        raise InvalidPovmError(f"effects sum to identity only within {err:.3e}")


def projection_of(x, gap=MERGE_GAP):
    """Spectral projection measurement of an observable; degenerate eigenvalues merged."""
    h = check_hermitian(_mat(x))
    w, v = np.linalg.eigh(h)
    w, v = w[::-1], v[:, ::-1]  # descending outcome values
    groups = np.split(np.arange(len(w)), np.nonzero(np.abs(np.diff(w)) > gap)[0] + 1)
    effects = np.array([v[:, g] @ v[:, g].conj().T for g in groups])
    alphas = np.array([w[g].mean() for g in groups])
    return Povm(effects, kind=PROJECTION, eigenvalues=alphas)


def mix(p1, p2, q1):
    """Perform ``p1`` with probability ``q1`` and ``p2`` otherwise."""
    if not 0.0 <= q1 <= 1.0:
        raise ValueError(f"mixing weight q1={q1} outside [0, 1]")
    if p1.dim != p2.dim:
        raise InvalidPovmError("POVMs act on different dimensions")
    q2 = 1.0 - q1
    parts = [q * p.effects for q, p in ((q1, p1), (q2, p2)) if q > 0.0]
    effects = _drop_zero(np.concatenate(parts))
    return Povm(
        effects,
        kind=RANDOM_MIXTURE,
        meta={"weights": (q1, q2), "sources": (p1, p2)},
    )


def apply_noise(F, povm):
    """Classical post-processing ``M'_i = sum_j F[i, j] M_j``."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[1] != len(povm):
        raise ValueError(
            f"noise matrix shape {F.shape} incompatible with {len(povm)} effects"
        )
    check_stochastic(F)
    effects = np.tensordot(F, povm.effects, axes=1)
    return Povm(_drop_zero(effects), kind=NOISY, meta={"noise": F, "source": povm})


def check_stochastic(F, atol=1e-12):
    if np.any(F < 0.0):
        raise ValueError("noise matrix has negative entries")
    err = np.max(np.abs(F.sum(axis=0) - 1.0))
    if err > atol:
        raise ValueError(f"noise matrix columns do not sum to 1 (error {err:.3e})")


def _drop_zero(effects, atol=1e-14):
    keep = np.max(np.abs(effects.reshape(len(effects), -1)), axis=1) > atol
    return effects[keep]


def trivial_povm(d):
    return Povm(np.eye(d, dtype=complex)[None], kind=PROJECTION, eigenvalues=np.zeros(1))


def random_povm(d, m, rank, rng, max_retries=3):
    """``S^{-1/2} G_i G_i^dag S^{-1/2}`` from complex Gaussian ``d x rank`` factors."""
    if m < 2 or not 1 <= rank <= d:
        raise ValueError(f"need m >= 2 and 1 <= rank <= d, got m={m}, rank={rank}")
    if m * rank < d:
        raise ValueError(f"m * rank = {m * rank} effects cannot span dimension {d}")
    rng = _as_rng(rng)
    for _ in range(max_retries):
        g = rng.normal(size=(m, d, rank)) + 1j * rng.normal(size=(m, d, rank))
        a = g @ g.conj().transpose(0, 2, 1)
        s = a.sum(axis=0)
        w, v = np.linalg.eigh(s)
        if w[0] <= 1e-12 * w[-1]:
            continue
        isqrt = (v / np.sqrt(w)) @ v.conj().T
        effects = isqrt @ a @ isqrt
        effects = 0.5 * (effects + effects.conj().transpose(0, 2, 1))
        return Povm(effects, kind=GENERAL)
    raise ArithmeticError(f"random POVM frame operator singular after {max_retries} draws")


def haar_unitary(d, rng):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_projection(d, rng):
    """Rank-one projectors onto the columns of a Haar-random unitary."""
    u = haar_unitary(d, _as_rng(rng))
    effects = np.einsum("ak,bk->kab", u, u.conj())
    return Povm(effects, kind=PROJECTION, eigenvalues=np.arange(d, 0, -1, dtype=float))


def coarse_grain(povm, groups):
    """Merge outcomes by label; ``groups[k]`` is the output index of outcome ``k``."""
    groups = np.asarray(groups)
    n_out = groups.max() + 1
    F = np.zeros((n_out, len(povm)))
    F[groups, np.arange(len(povm))] = 1.0
    out = apply_noise(F, povm)
    if povm.kind == PROJECTION:
        return Povm(out.effects, kind=PROJECTION, eigenvalues=np.arange(len(out), 0, -1.0))
    return out


def random_stochastic(n_out, n_in, rng):
    """Column-stochastic matrix with Dirichlet(1, ..., 1) columns."""
    return _as_rng(rng).dirichlet(np.ones(n_out), size=n_in).T


def _as_rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
