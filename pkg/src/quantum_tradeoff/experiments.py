"""Monte Carlo scans over random POVMs, bound curves and finite-sample estimation."""
import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .blocks import block_moments, invariant_blocks
from .bounds import SLACK_ATOL, error_product, heisenberg_rhs
from .fisher import classical_fisher, clamp_error, eta, pinv_forms, quadratic_form_pinv
from .measurements import (
    PROJECTION,
    apply_noise,
    mix,
    projection_of,
    random_povm,
    random_stochastic,
    trivial_povm,
)
from .quantum_objects import _mat, as_observable, expectation, variance
from .su_basis import coefficients, generators

DATASET_HEADER = (
    "index", "eta1", "eta2", "product", "rhs_heisenberg", "rhs_attainable",
    "violation2", "violation3",
)
CURVE_HEADER = ("curve_id", "eta1", "eta2")
SAMPLERS = ("all", "noisy", "random_mixture", "trivial")
ESTIMATORS = ("eigenvalue-average", "maximum-likelihood")


@dataclass(frozen=True)
class Sampler:
    """Random POVM family.

    ``all`` draws general POVMs; ``outcomes`` is a fixed count or an inclusive
    ``(lo, hi)`` range drawn per sample (default ``d**2``).

    ``random_mixture`` mixes the projections of two observables drawn at
    uniform angles in the plane of the traceless parts of ``X1`` and ``X2``,
    with a uniform weight.  Haar-random bases are useless here: two
    projections span ``2(d - 1)`` Bloch directions, so ``X1`` and ``X2`` are
    almost never estimable and every error would be infinite.

    ``noisy`` post-processes such a mixture with ``(1 - s) I + s R``, ``R``
    a random column-stochastic matrix and ``s`` uniform (loss of visibility).
    """

    kind: str = "all"
    outcomes: object = None
    rank: int = 1

    def __post_init__(self):
        if self.kind not in SAMPLERS:
            raise ValueError(f"unknown sampler {self.kind!r}; expected one of {SAMPLERS}")

    def draw(self, d, rng, plane=None):
        if self.kind == "trivial":
            return trivial_povm(d)
        if self.kind == "all":
            m = self.outcomes if self.outcomes is not None else d * d
            if not isinstance(m, int):
                lo, hi = m
                m = int(rng.integers(lo, hi + 1))
            return random_povm(d, m, self.rank, rng)
        if plane is None:
            raise ValueError(f"sampler {self.kind!r} needs the observable plane")
        g1, g2 = rng.uniform(0.0, np.pi, size=2)
        mixed = mix(_plane_projection(plane, g1), _plane_projection(plane, g2), rng.uniform())
        if self.kind == "random_mixture":
            return mixed
        m = len(mixed)
        s = rng.uniform()
        F = (1.0 - s) * np.eye(m) + s * random_stochastic(m, m, rng)
        return apply_noise(F, mixed)


def observable_plane(x1, x2):
    """Orthonormal traceless operators spanning the traceless parts of ``x1``, ``x2``."""
    basis = generators(x1.dim)
    a, b = x1.vector, x2.vector
    u1 = a / np.linalg.norm(a)
    w = b - (u1 @ b) * u1
    nw = np.linalg.norm(w)
    u2 = w / nw if nw > 1e-12 else np.zeros_like(w)
    return tuple(np.tensordot(u, basis.generators, axes=1) for u in (u1, u2))


def _plane_projection(plane, g):
    y = np.cos(g) * plane[0] + np.sin(g) * plane[1]
    return projection_of(0.5 * (y + y.conj().T))


@dataclass(frozen=True, eq=False)
class ScatterConfig:
    state: object
    x1: object
    x2: object
    sampler: Sampler = field(default_factory=Sampler)
    n_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        object.__setattr__(self, "x1", as_observable(self.x1))
        object.__setattr__(self, "x2", as_observable(self.x2))

    @property
    def d(self):
        return _mat(self.state).shape[0]


@dataclass(frozen=True)
class ScatterRow:
    index: int
    eta1: float
    eta2: float
    product: float
    rhs_heisenberg: float
    rhs_attainable: float
    violation2: bool
    violation3: bool


def sample_rng(seed, index):
    """Independent generator for sample ``index``, keyed on ``(seed, index)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


class _RowEvaluator:
    def __init__(self, rho, x1, x2):
        self.rho = _mat(rho)
        self.xs = np.array([x1.vector, x2.vector]).T
        self.vars = (variance(rho, x1), variance(rho, x2))
        v1, v2, c = block_moments(rho, x1, x2, invariant_blocks(x1, x2))
        self.rhs2 = heisenberg_rhs(rho, x1, x2)
        self.rhs3 = v1 * v2 - c * c

    def errors(self, povm):
        forms = pinv_forms(classical_fisher(self.rho, povm), self.xs)
        return [
            math.inf if math.isinf(forms[k, k]) else clamp_error(forms[k, k] - v, forms[k, k])
            for k, v in enumerate(self.vars)
        ]

    def row(self, index, povm):
        e1, e2 = self.errors(povm)
        prod = error_product(e1, e2)
        return ScatterRow(
            index,
            eta(e1, self.vars[0]),
            eta(e2, self.vars[1]),
            prod,
            self.rhs2,
            self.rhs3,
            bool(prod - self.rhs2 < -SLACK_ATOL),
            bool(prod - self.rhs3 < -SLACK_ATOL),
        )


def scatter_scan(config, threads=1, chunk=2048):
    """Evaluate ``n_samples`` random POVMs; rows are ordered by sample index."""
    ev = _RowEvaluator(config.state, config.x1, config.x2)
    d = config.d
    plane = observable_plane(config.x1, config.x2)

    def work(lo, hi):
        return [
            ev.row(i, config.sampler.draw(d, sample_rng(config.seed, i), plane))
            for i in range(lo, hi)
        ]

    bounds = [(lo, min(lo + chunk, config.n_samples)) for lo in range(0, config.n_samples, chunk)]
    if threads <= 1:
        parts = [work(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: work(*b), bounds))
    rows = [r for part in parts for r in part]
    rows.sort(key=lambda r: r.index)
    return rows


def evaluate_povm(index, rho, x1, x2, povm):
    """One dataset row for an explicit POVM."""
    return _RowEvaluator(rho, as_observable(x1), as_observable(x2)).row(index, povm)


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def dataset_to_csv(rows, fh=None):
    own = fh is None
    fh = io.StringIO() if own else fh
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(DATASET_HEADER)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) for k in DATASET_HEADER])
    return fh.getvalue() if own else None


def read_dataset_csv(fh):
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != DATASET_HEADER:
        raise ValueError(f"unexpected dataset header {reader.fieldnames}")
    return [
        ScatterRow(
            int(rec["index"]),
            float(rec["eta1"]),
            float(rec["eta2"]),
            float(rec["product"]),
            float(rec["rhs_heisenberg"]),
            float(rec["rhs_attainable"]),
            rec["violation2"] not in ("0", "False", "false"),
            rec["violation3"] not in ("0", "False", "false"),
        )
        for rec in reader
    ]


@dataclass(frozen=True)
class ViolationReport:
    n_rows: int
    heisenberg: list
    attainable: list

    @property
    def ok(self):
        return not self.heisenberg and not self.attainable

    def as_dict(self):
        return {
            "rows": self.n_rows,
            "violations_heisenberg": len(self.heisenberg),
            "violations_attainable": len(self.attainable),
            "heisenberg_indices": self.heisenberg,
            "attainable_indices": self.attainable,
        }


def verify_bounds(rows, atol=SLACK_ATOL):
    """Rows whose product falls below either bound by more than ``atol``.

    Slacks are recomputed from the stored product and bounds, so stale
    violation flags are ignored.
    """
    h = [r.index for r in rows if r.product - r.rhs_heisenberg < -atol]
    a = [r.index for r in rows if r.product - r.rhs_attainable < -atol]
    return ViolationReport(len(rows), h, a)


@dataclass(frozen=True, eq=False)
class Curve:
    curve_id: str
    rhs: float
    eta1: np.ndarray
    eta2: np.ndarray
    degenerate: bool = False


def curve_eta2(eta1, rhs, var_product):
    """``eta2`` on the locus ``V1 V2 (1/eta1 - 1)(1/eta2 - 1) = rhs``."""
    eta1 = np.asarray(eta1, dtype=float)
    return 1.0 / (1.0 + rhs / (var_product * (1.0 / eta1 - 1.0)))


def boundary_curves(rho, x1, x2, resolution=200, eta_min=0.0):
    """The three bound curves in the normalized-error plane.

    A bound with zero right-hand side degenerates to the edges ``eta2 = 1``
    and ``eta1 = 1`` of the unit square; such curves are flagged.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    x1, x2 = as_observable(x1), as_observable(x2)
    vp = variance(rho, x1) * variance(rho, x2)
    v1, v2, c = block_moments(rho, x1, x2)
    rhs = {
        "heisenberg": heisenberg_rhs(rho, x1, x2),
        "attainable": v1 * v2 - c * c,
        "random": v1 * v2,
    }
    grid = np.linspace(eta_min, 1.0, resolution + 2)[1:-1]
    out = {}
    for cid, value in rhs.items():
        if value <= 1e-15 * max(vp, 1.0):
            half = resolution // 2
            e1 = np.concatenate([np.linspace(0.0, 1.0, resolution - half), np.ones(half)])
            e2 = np.concatenate([np.ones(resolution - half), np.linspace(1.0, 0.0, half + 1)[1:]])
            out[cid] = Curve(cid, value, e1, e2, degenerate=True)
        else:
            out[cid] = Curve(cid, value, grid, curve_eta2(grid, value, vp))
    return out


def curves_to_csv(curves, fh=None):
    own = fh is None
    fh = io.StringIO() if own else fh
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for cid, cur in curves.items():
        for a, b in zip(cur.eta1, cur.eta2):
            w.writerow([cid, repr(float(a)), repr(float(b))])
    return fh.getvalue() if own else None


@dataclass(frozen=True, eq=False)
class EstimationRun:
    n: int
    trials: int
    estimator: str = "maximum-likelihood"
    estimates: np.ndarray = None
    empirical_nvar: float = None
    predicted_nvar: float = None
    mean: float = None
    truth: float = None

    def __post_init__(self):
        if self.trials < 2:
            raise ValueError("trials must be >= 2")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")

    @property
    def consistent(self):
        """Sample mean within four predicted standard errors of the truth."""
        return abs(self.mean - self.truth) <= 4.0 * math.sqrt(
            self.predicted_nvar / self.n / self.trials
        )

    def as_dict(self):
        return {
            "n": self.n,
            "trials": self.trials,
            "estimator": self.estimator,
            "empirical_nvar": self.empirical_nvar,
            "predicted_nvar": self.predicted_nvar,
            "mean": self.mean,
            "truth": self.truth,
            "consistent": self.consistent,
        }


def simulate_estimation(rho, x, povm, run, seed=0):
    """Draw ``run.trials`` outcome histograms of size ``run.n`` and estimate ``<X>``.

    Returns ``run`` filled with the estimates, the empirical ``n Var`` and the
    Cramer-Rao prediction ``x . J^+ x``.
    """
    x = as_observable(x)
    r = _mat(rho)
    p = np.clip(povm.probabilities(r), 0.0, None)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(run.n, p / p.sum(), size=run.trials)
    if run.estimator == "eigenvalue-average":
        estimates = _eigenvalue_average(x, povm, counts, run.n)
    else:
        estimates = _ml_estimates(x, povm, counts)
    predicted = quadratic_form_pinv(classical_fisher(r, povm), x.vector)
    return replace(
        run,
        estimates=estimates,
        empirical_nvar=float(run.n * np.var(estimates, ddof=1)),
        predicted_nvar=float(predicted),
        mean=float(np.mean(estimates)),
        truth=expectation(r, x),
    )


def _eigenvalue_average(x, povm, counts, n):
    if povm.kind != PROJECTION or povm.eigenvalues is None:
        raise ValueError("eigenvalue-average estimator needs a projection measurement")
    alphas = np.asarray(povm.eigenvalues)
    spectral = np.tensordot(alphas, povm.effects, axes=1)
    if np.max(np.abs(spectral - x.matrix)) > 1e-8:
        raise ValueError("projection measurement is not the spectral measure of X")
    return counts @ alphas / n


def _ml_estimates(x, povm, counts, max_iter=50):
    """Maximum-likelihood estimate of ``<X>`` per histogram.

    Outcome probabilities ``p = a + B phi`` are affine in the identifiable
    Bloch coordinates ``phi``; the log-likelihood is concave, so Newton steps
    with backtracking (keeping ``p > 0``) from the moment estimate converge to
    the maximizer.
    """
    d = povm.dim
    basis = generators(d)
    c = coefficients(povm.effects, basis)
    a = np.trace(povm.effects, axis1=1, axis2=2).real / d
    _, s, vh = np.linalg.svd(c, full_matrices=False)
    v = vh[s > 1e-10 * max(s[0], 1e-300)].T
    xv = v.T @ x.vector
    if np.linalg.norm(x.vector - v @ xv) > 1e-8 * max(np.linalg.norm(x.vector), 1.0):
        raise ValueError("observable is not estimable from this measurement")
    B = c @ v
    n = counts.sum(axis=1)
    out = np.empty(len(counts))
    for t, nk in enumerate(counts):
        f = nk / n[t]
        phi = np.linalg.lstsq(B, f - a, rcond=None)[0]
        phi = _feasible(a, B, phi)
        ll = _loglik(nk, a + B @ phi)
        for _ in range(max_iter):
            pk = a + B @ phi
            grad = B.T @ (nk / pk)
            hess = (B.T * (nk / pk**2)) @ B
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
            tau = 1.0
            while tau > 1e-12:
                trial = phi + tau * step
                pt = a + B @ trial
                if np.all(pt > 0):
                    lt = _loglik(nk, pt)
                    if lt >= ll - 1e-12 * abs(ll):
                        break
                tau *= 0.5
            else:
                break
            phi, ll_old, ll = trial, ll, lt
            if np.max(np.abs(tau * step)) < 1e-13 or abs(ll - ll_old) <= 1e-15 * abs(ll):
                break
        out[t] = x.decomposition.scalar + xv @ phi
    return out


def _feasible(a, B, phi):
    """Pull ``phi`` toward the maximally mixed point until all probabilities are positive."""
    p = a + B @ phi
    if np.all(p > 1e-12):
        return phi
    # a > 0 at phi = 0; shrink until the minimum probability is a small positive margin
    dp = B @ phi
    neg = dp < 0
    t = np.min(a[neg] / -dp[neg]) * 0.5
    return t * phi


def _loglik(nk, p):
    mask = nk > 0
    return float(nk[mask] @ np.log(p[mask]))
