"""Metropolis-Hastings with a cone-tailored proposal, plus an adaptive
Metropolis fallback for contradictory response sets.

Near noise-free responses concentrate the posterior on a plateau inside the
convex cone of part-worths consistent with every recorded choice (in this
package's convention: ``rows @ w <= 0`` for the loser-minus-winner rows).
A random-walk proposal mixes poorly there, so the tailored chain proposes
along a uniform random direction with a step drawn uniformly from the exact
interval that keeps the new point inside the cone.  Exactly opposite row
pairs (contradictions) are cancelled first; if nothing remains, a Haario-style
adaptive Metropolis chain targeting a 0.255 acceptance rate is used instead.

The chain runs ``2 * size`` iterations and returns the second half.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

MISSING_BOUND = 1e3
AM_TARGET_RATE = 0.255
AM_ADAPT_START = 100


class SamplerError(RuntimeError):
    pass


class EmptyConeError(SamplerError):
    """The surviving constraints admit no strictly interior point."""


@dataclass(frozen=True)
class SampleSet:
    samples: np.ndarray
    acceptance_rate: float
    mode: str  # "cone-MH" | "adaptive-metropolis"

    def __len__(self) -> int:
        return len(self.samples)


def reduce_contradictions(rows) -> np.ndarray:
    """Cancel every exactly-opposite row pair, keeping surviving duplicates.

    m copies of a row and n copies of its negation leave |m - n| copies of
    the majority row (earliest occurrences survive).
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[0] == 0 or rows.size == 0:
        return rows.reshape(0, rows.shape[1] if rows.ndim == 2 else 0)
    counts: dict[tuple, int] = {}
    for row in rows:
        key = tuple(row)
        counts[key] = counts.get(key, 0) + 1
    cancelled: dict[tuple, int] = {}
    for key, m in counts.items():
        neg = tuple(-x for x in np.asarray(key))
        n = counts.get(neg, 0)
        cancelled[key] = min(m, n)
    kept, used = [], {}
    for row in rows:
        key = tuple(row)
        survivors = counts[key] - cancelled[key]
        if used.get(key, 0) < survivors:
            used[key] = used.get(key, 0) + 1
            kept.append(row)
    return np.array(kept) if kept else np.empty((0, rows.shape[1]))


def _gap_matrix(reduced_rows: np.ndarray) -> np.ndarray:
    # winner-minus-loser rows: the cone is {w : gap_rows @ w >= 0}
    return -np.atleast_2d(np.asarray(reduced_rows, dtype=float))


def cone_step_bounds(reduced_rows, w_old, direction) -> tuple[float, float]:
    """Admissible step interval along ``direction`` staying inside the cone.

    ``w_old`` must be strictly inside ({rows @ w < 0} componentwise).  Rows
    orthogonal to the direction impose no bound; a missing side is clamped
    to -1e3 / +1e3.
    """
    gaps = _gap_matrix(reduced_rows)
    w_old = np.asarray(w_old, dtype=float)
    slack = gaps @ w_old
    if np.any(slack <= 0):
        bad = np.flatnonzero(slack <= 0).tolist()
        raise SamplerError(f"start point violates cone constraints {bad}")
    a = gaps @ np.asarray(direction, dtype=float)
    b = -slack
    pos, neg = a > 0, a < 0
    lower = float(np.max(b[pos] / a[pos])) if pos.any() else -MISSING_BOUND
    upper = float(np.min(b[neg] / a[neg])) if neg.any() else MISSING_BOUND
    return lower, upper


def chebyshev_direction(reduced_rows) -> np.ndarray:
    """Unit direction of deepest interior penetration of the cone.

    Solves max t s.t. Â w >= t (unit-norm rows Â) over the box |w| <= 1.
    Raises if the cone has an empty interior.
    """
    gaps = _gap_matrix(reduced_rows)
    norms = np.linalg.norm(gaps, axis=1)
    if np.any(norms == 0):
        raise SamplerError("zero constraint row in reduced response matrix")
    unit = gaps / norms[:, None]
    n_rows, dim = unit.shape
    # variables (w, t); minimize -t subject to -Â w + t <= 0
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-unit, np.ones((n_rows, 1))])
    bounds = [(-1.0, 1.0)] * dim + [(None, None)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n_rows), bounds=bounds, method="highs")
    if not res.success or res.x[-1] <= 0:
        raise EmptyConeError("surviving constraints leave no strict interior")
    w = res.x[:dim]
    return w / np.linalg.norm(w)


def _ensure_interior(reduced_rows, w_init: np.ndarray) -> np.ndarray:
    gaps = _gap_matrix(reduced_rows)
    if np.all(gaps @ w_init > 0):
        return w_init
    direction = chebyshev_direction(reduced_rows)
    eps = 1e-6
    while eps <= 1e8:
        candidate = w_init + eps * direction
        if np.all(gaps @ candidate > 0):
            return candidate
        eps *= 10.0
    bad = np.flatnonzero(gaps @ w_init <= 0).tolist()
    raise SamplerError(f"could not repair start point; offending constraints {bad}")


def _unit_direction(rng: np.random.Generator, dim: int) -> np.ndarray:
    while True:
        d = rng.standard_normal(dim)
        norm = np.linalg.norm(d)
        if norm > 0:
            return d / norm


def _cone_chain(logpdf, reduced_rows, w_init, size, rng, trace_rows):
    gaps = _gap_matrix(reduced_rows)
    w = _ensure_interior(reduced_rows, np.asarray(w_init, dtype=float).copy())
    dim = len(w)
    total = 2 * size
    out = np.empty((total, dim))
    logp = logpdf(w)
    accepted = 0
    for j in range(total):
        lower = upper = 0.0
        for _ in range(64):
            d = _unit_direction(rng, dim)
            lower, upper = cone_step_bounds(reduced_rows, w, d)
            if upper > lower:
                break
        step = rng.uniform(lower, upper)
        proposal = w + step * d
        took = False
        # guard against float rounding pushing the proposal onto the boundary
        if np.all(gaps @ proposal > 0):
            logp_new = logpdf(proposal)
            if np.log(rng.uniform()) < logp_new - logp:
                w, logp = proposal, logp_new
                accepted += 1
                took = True
        out[j] = w
        if trace_rows is not None:
            trace_rows.append((j, float(np.linalg.norm(w)), int(took)))
    return SampleSet(out[size:], accepted / total, "cone-MH")


def _adaptive_chain(logpdf, w_init, size, rng, initial_variance, trace_rows):
    w = np.asarray(w_init, dtype=float).copy()
    dim = len(w)
    total = 2 * size
    out = np.empty((total, dim))
    cov = initial_variance * (2.38**2 / dim) * np.eye(dim)
    mean = w.copy()
    log_scale = 0.0
    logp = logpdf(w)
    accepted = 0
    for t in range(1, total + 1):
        chol = np.linalg.cholesky(np.exp(log_scale) * cov + 1e-12 * np.eye(dim))
        proposal = w + chol @ rng.standard_normal(dim)
        logp_new = logpdf(proposal)
        alpha = min(1.0, float(np.exp(min(0.0, logp_new - logp))))
        took = False
        if rng.uniform() < alpha:
            w, logp = proposal, logp_new
            accepted += 1
            took = True
        if t > AM_ADAPT_START:
            gamma = (t - AM_ADAPT_START) ** -0.6
            mean = (1 - gamma) * mean + gamma * w
            dev = w - mean
            cov = (1 - gamma) * cov + gamma * np.outer(dev, dev)
            log_scale += gamma * (alpha - AM_TARGET_RATE)
        out[t - 1] = w
        if trace_rows is not None:
            trace_rows.append((t - 1, float(np.linalg.norm(w)), int(took)))
    return SampleSet(out[size:], accepted / total, "adaptive-metropolis")


def mh_sample(logpdf, delta_rows, w_init, size: int, seed,
              am_initial_variance: float = 1.0, trace_path=None) -> SampleSet:
    """Sample an unnormalized log-density tailored to the response cone.

    ``delta_rows`` are the loser-minus-winner rows; exactly-opposite pairs
    are removed, and if constraints remain the chain is confined to their
    cone.  With an empty reduced matrix the adaptive Metropolis fallback is
    used, with initial proposal covariance ``am_initial_variance * 2.38²/D I``.
    ``seed`` may be anything ``np.random.default_rng`` accepts.
    """
    if size < 1:
        raise ValueError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    rows = np.atleast_2d(np.asarray(delta_rows, dtype=float))
    if rows.size == 0:
        rows = np.empty((0, len(np.asarray(w_init))))
    reduced = reduce_contradictions(rows) if len(rows) else rows
    trace_rows = [] if trace_path is not None else None
    if len(reduced):
        try:
            result = _cone_chain(logpdf, reduced, w_init, size, rng, trace_rows)
        except EmptyConeError:
            # non-cancelling contradictions can still squeeze the cone shut;
            # the smoothed density is then sampled with the fallback chain
            result = _adaptive_chain(logpdf, w_init, size, rng,
                                     am_initial_variance, trace_rows)
    else:
        result = _adaptive_chain(logpdf, w_init, size, rng,
                                 am_initial_variance, trace_rows)
    if trace_path is not None:
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "w_norm", "accepted"])
            writer.writerows(trace_rows)
    return result
