"""Regularized-logistic posterior over part-worths: negative log-density,
MAP estimation, prior-strength cross-validation, and (projected) Hessians.

Sign convention, used consistently across the package: each recorded response
contributes a difference row ``delta = z_loser - z_winner`` in constrained
coordinates, so a part-worth consistent with the response satisfies
``w @ delta <= 0``.  The unnormalized negative log-posterior is

    sum_q log(1 + exp(w @ delta_q)) + (w @ w) / (2 C)

with prior strength ``C > 0`` (prior variance per coordinate).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .choice import sigmoid

C_GRID = (0.1, 1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8)
DEFAULT_C = 1.0
GRAD_TOL = 1e-8
MAX_NEWTON_ITER = 500


@dataclass(frozen=True)
class Response:
    winner: int
    loser: int
    query_id: str

    def __post_init__(self):
        if self.winner == self.loser:
            raise ValueError(f"winner and loser coincide in {self.query_id!r}")


class ResponseSet:
    """Ordered pairwise responses plus their cached difference rows."""

    def __init__(self, dim: int):
        self.dim = int(dim)
        self._records: list[Response] = []
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None

    @classmethod
    def from_delta_rows(cls, rows) -> "ResponseSet":
        """Build directly from loser-minus-winner rows (no design identities)."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        rs = cls(rows.shape[1])
        for q, row in enumerate(rows):
            rs._records.append(Response(-1, -2, f"raw-{q}"))
            rs._rows.append(row.copy())
        return rs

    def add_choice(self, market, winner: int, loser: int, query_id: str) -> None:
        """Record that ``winner`` was preferred over ``loser``."""
        self._records.append(Response(int(winner), int(loser), query_id))
        self._rows.append(market.vectors[loser] - market.vectors[winner])
        self._matrix = None

    def add_row(self, delta_row, winner: int = -1, loser: int = -2,
                query_id: str = "") -> None:
        row = np.asarray(delta_row, dtype=float)
        if row.shape != (self.dim,):
            raise ValueError(f"delta row must have length {self.dim}")
        self._records.append(Response(winner, loser, query_id or f"raw-{len(self)}"))
        self._rows.append(row.copy())
        self._matrix = None

    @property
    def records(self) -> tuple[Response, ...]:
        return tuple(self._records)

    @property
    def rows(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = (np.array(self._rows) if self._rows
                            else np.empty((0, self.dim)))
        return self._matrix

    def subset(self, indices) -> "ResponseSet":
        sub = ResponseSet(self.dim)
        for i in indices:
            sub._records.append(self._records[i])
            sub._rows.append(self._rows[i])
        return sub

    def __len__(self) -> int:
        return len(self._records)


def neg_log_posterior(w, rows: np.ndarray, prior_strength: float) -> float:
    w = np.asarray(w, dtype=float)
    t = rows @ w if len(rows) else np.empty(0)
    return float(np.logaddexp(0.0, t).sum() + w @ w / (2.0 * prior_strength))


def gradient(w, rows: np.ndarray, prior_strength: float) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    g = w / prior_strength
    if len(rows):
        g = g + rows.T @ sigmoid(rows @ w)
    return g


def hessian(w, rows: np.ndarray, prior_strength: float) -> np.ndarray:
    """(1/C) I plus one positively-weighted rank-1 term per response."""
    w = np.asarray(w, dtype=float)
    h = np.eye(len(w)) / prior_strength
    if len(rows):
        s = sigmoid(rows @ w)
        weights = s * (1.0 - s)  # in (0, 1/4]
        h = h + (rows * weights[:, None]).T @ rows
    return h


@dataclass(frozen=True)
class MAPResult:
    w: np.ndarray
    converged: bool
    iterations: int
    grad_norm: float
    trace: tuple[tuple[int, float, float], ...] = field(default=())


def map_estimate(rows: np.ndarray, prior_strength: float, w0=None,
                 tol: float = GRAD_TOL, max_iter: int = MAX_NEWTON_ITER,
                 keep_trace: bool = False) -> MAPResult:
    """Damped Newton with backtracking on the strictly convex objective.

    Non-convergence is flagged, never raised: the density is smooth and
    strictly convex, so a flag means a bug or a pathological prior strength.
    """
    dim = rows.shape[1] if rows.ndim == 2 else len(w0)
    w = np.zeros(dim) if w0 is None else np.asarray(w0, dtype=float).copy()
    trace = []
    grad_norm = np.inf
    for it in range(max_iter):
        g = gradient(w, rows, prior_strength)
        grad_norm = float(np.abs(g).max())
        if keep_trace:
            trace.append((it, neg_log_posterior(w, rows, prior_strength), grad_norm))
        if grad_norm < tol:
            return MAPResult(w, True, it, grad_norm, tuple(trace))
        h = hessian(w, rows, prior_strength)
        try:
            step = cho_solve(cho_factor(h), g)
        except np.linalg.LinAlgError:
            step = np.linalg.solve(h + 1e-10 * np.eye(dim), g)
        f0 = neg_log_posterior(w, rows, prior_strength)
        slope = float(g @ step)
        t = 1.0
        while t > 1e-12:
            w_new = w - t * step
            if neg_log_posterior(w_new, rows, prior_strength) <= f0 - 1e-4 * t * slope:
                break
            t *= 0.5
        w = w - t * step
    return MAPResult(w, False, max_iter, grad_norm, tuple(trace))


@dataclass(frozen=True)
class CVResult:
    prior_strength: float
    skipped: bool
    mean_scores: tuple[float, ...] = ()
    grid: tuple[float, ...] = ()


def heldout_log_likelihood(w, rows: np.ndarray) -> float:
    """Log-likelihood of held-out responses under a fixed part-worth."""
    if not len(rows):
        return 0.0
    return float(-np.logaddexp(0.0, rows @ w).sum())


def cross_validate(response_set: ResponseSet, grid=C_GRID, folds: int = 10,
                   shuffle_seed: int = 0) -> CVResult:
    """Pick the prior strength maximizing mean held-out log-likelihood.

    Folds are contiguous blocks over a fixed-seed shuffle of query order, so
    runs are reproducible.  With fewer responses than folds, CV is skipped
    and the default prior strength is returned with a marker.
    """
    n = len(response_set)
    if n < folds:
        return CVResult(DEFAULT_C, True)
    order = np.arange(n)
    np.random.default_rng(shuffle_seed).shuffle(order)
    blocks = np.array_split(order, folds)
    rows = response_set.rows
    means = []
    for c in grid:
        scores = []
        for block in blocks:
            train = np.setdiff1d(order, block, assume_unique=True)
            fit = map_estimate(rows[train], c)
            scores.append(heldout_log_likelihood(fit.w, rows[block]))
        means.append(float(np.mean(scores)))
    best = int(np.argmax(means))  # argmax takes the first, i.e. smallest C, on ties
    return CVResult(float(grid[best]), False, tuple(means), tuple(float(c) for c in grid))


def projected_hessian(h: np.ndarray, w_hat) -> tuple[np.ndarray, np.ndarray]:
    """Project out the MAP direction and find the flattest remaining axis.

    Returns ``(P @ h, v)`` where ``P = I - ŵŵᵀ/‖ŵ‖²`` and ``v`` is the unit
    eigenvector of the smallest eigenvalue of ``h`` restricted to the
    subspace orthogonal to ``ŵ`` (so ``v @ ŵ = 0``).  With ``ŵ = 0`` the
    projection is skipped and ``v`` is the global minimum-curvature axis.
    """
    h = np.asarray(h, dtype=float)
    w_hat = np.asarray(w_hat, dtype=float)
    dim = h.shape[0]
    norm = np.linalg.norm(w_hat)
    if norm == 0.0:
        eigvals, eigvecs = np.linalg.eigh(h)
        return h.copy(), eigvecs[:, 0]
    p = np.eye(dim) - np.outer(w_hat, w_hat) / norm**2
    # orthonormal basis of the complement of ŵ: drop the ŵ column of a
    # Householder-style full basis
    q, _ = np.linalg.qr(np.column_stack([w_hat / norm, np.eye(dim)]))
    basis = q[:, 1:dim]
    restricted = basis.T @ h @ basis
    eigvals, eigvecs = np.linalg.eigh(restricted)
    v = basis @ eigvecs[:, 0]
    v = v / np.linalg.norm(v)
    return p @ h, v


class Posterior:
    """Prior strength plus a response set; density, MAP and Hessian machinery."""

    def __init__(self, prior_strength: float, response_set: ResponseSet):
        if prior_strength <= 0:
            raise ValueError(f"prior strength must be positive, got {prior_strength}")
        self.prior_strength = float(prior_strength)
        self.response_set = response_set
        self._map: MAPResult | None = None

    @property
    def dim(self) -> int:
        return self.response_set.dim

    @property
    def rows(self) -> np.ndarray:
        return self.response_set.rows

    def neg_log(self, w) -> float:
        return neg_log_posterior(w, self.rows, self.prior_strength)

    def logpdf(self, w) -> float:
        """Unnormalized log-density (strictly positive density everywhere)."""
        return -self.neg_log(w)

    def gradient(self, w) -> np.ndarray:
        return gradient(w, self.rows, self.prior_strength)

    def hessian(self, at=None) -> np.ndarray:
        w = self.map().w if at is None else at
        return hessian(w, self.rows, self.prior_strength)

    def map(self, keep_trace: bool = False) -> MAPResult:
        if self._map is None or (keep_trace and not self._map.trace):
            if len(self.response_set) == 0:
                self._map = MAPResult(np.zeros(self.dim), True, 0, 0.0)
            else:
                self._map = map_estimate(self.rows, self.prior_strength,
                                         keep_trace=keep_trace)
        return self._map

    def sample(self, size: int, seed, w_init=None, trace_path=None):
        """Draw posterior samples with the cone-tailored MH sampler."""
        from .sampler import mh_sample

        start = self.map().w if w_init is None else np.asarray(w_init, dtype=float)
        return mh_sample(self.logpdf, self.rows, start, size, seed,
                         am_initial_variance=self.prior_strength,
                         trace_path=trace_path)


def write_map_trace(path, result: MAPResult) -> None:
    """Debug CSV of (iteration, objective, gradient norm) per Newton step."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "neg_log_posterior", "grad_norm"])
        for it, nll, gn in result.trace:
            writer.writerow([it, repr(nll), repr(gn)])
