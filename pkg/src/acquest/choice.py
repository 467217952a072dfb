"""Logit choice model: utility, market share, profit, and the induced
segmentation of part-worth space.

In a two-product market against a fixed competitor, a design's share is the
sigmoid of its utility gap to the competitor, and its profit is
``share * (price - cost)``.  For any fixed part-worth vector exactly one
candidate (up to measure-zero ties) attains the maximal profit; the regions
of part-worth space sharing one profit argmax partition the space into
nonlinear segments.
"""

from __future__ import annotations

import csv

import numpy as np

GAP_CAP = 1e4  # utility gaps are clipped here before exponentiation


def sigmoid(x):
    """Numerically stable logistic function; saturates for huge |x|."""
    arr = np.clip(np.asarray(x, dtype=float), -GAP_CAP, GAP_CAP)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    return float(out) if np.isscalar(x) else out


class Market:
    """Plain-array view of a candidate set: one row per design.

    ``vectors`` are design vectors in whatever coordinates the part-worths
    live in (constrained one-hot for schema spaces, raw coordinates for the
    planar visualization protocol).  Treated as immutable.
    """

    def __init__(self, vectors, prices, costs, competitor):
        self.vectors = np.asarray(vectors, dtype=float)
        self.prices = np.asarray(prices, dtype=float)
        self.costs = np.asarray(costs, dtype=float)
        self.competitor = np.asarray(competitor, dtype=float)
        k, d = self.vectors.shape
        if not (self.prices.shape == self.costs.shape == (k,)):
            raise ValueError("prices/costs must have one entry per design")
        if self.competitor.shape != (d,):
            raise ValueError("competitor dimension mismatch")
        self.margins = self.prices - self.costs
        self._pair_norms = None  # filled lazily by the query-selection layer

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def n_pairs(self) -> int:
        return self.size * (self.size - 1) // 2


def random_planar_market(n_products: int = 8, bounds=(-10.0, 10.0),
                         seed=0, costs=None) -> Market:
    """Visualization-scale market of raw 2-D products.

    Products (and a competitor) are drawn uniformly from ``bounds``^2; the
    second coordinate doubles as the price.  Costs default to zero.
    """
    rng = np.random.default_rng(seed)
    lo, hi = bounds
    pts = rng.uniform(lo, hi, size=(n_products + 1, 2))
    vectors, competitor = pts[:-1], pts[-1]
    prices = vectors[:, 1].copy()
    costs = np.zeros(n_products) if costs is None else np.asarray(costs, dtype=float)
    return Market(vectors, prices, costs, competitor)


def utility(w, design_vector) -> float:
    """Linear utility wᵀz.  Both vectors must share a layout."""
    w = np.asarray(w, dtype=float)
    z = np.asarray(design_vector, dtype=float)
    if w.shape != z.shape:
        raise ValueError(f"layout mismatch: {w.shape} vs {z.shape}")
    return float(w @ z)


def choice_probability(w, design_vector, competitor_vector) -> float:
    """Probability of choosing ``design`` over the competitor (its share)."""
    return float(sigmoid(utility(w, design_vector) - utility(w, competitor_vector)))


def profit(w, design_vector, competitor_vector, price, cost) -> float:
    """share * (price - cost); may be negative when cost exceeds price."""
    return choice_probability(w, design_vector, competitor_vector) * (price - cost)


def utility_matrix(samples, market: Market) -> np.ndarray:
    """(J, K) utilities of every design under every part-worth sample."""
    return np.atleast_2d(samples) @ market.vectors.T


def share_matrix(samples, market: Market) -> np.ndarray:
    gaps = utility_matrix(samples, market) \
        - (np.atleast_2d(samples) @ market.competitor)[:, None]
    return sigmoid(gaps)


def profit_matrix(samples, market: Market) -> np.ndarray:
    return share_matrix(samples, market) * market.margins[None, :]


def optimal_designs(samples, market: Market) -> np.ndarray:
    """Profit argmax per sample; ties broken toward the lowest index."""
    return np.argmax(profit_matrix(samples, market), axis=1)


def optimal_design(w, market: Market) -> int:
    return int(optimal_designs(np.atleast_2d(w), market)[0])


def expected_profits(samples, market: Market) -> np.ndarray:
    """Monte-Carlo expected profit of every design under the samples."""
    return profit_matrix(samples, market).mean(axis=0)


def equal_profit_residual(w, market: Market, i: int, j: int) -> float:
    """profit(z_i; w) - profit(z_j; w), zero exactly on the segment boundary.

    Antisymmetric in (i, j); positive wherever design i strictly beats j.
    """
    w = np.asarray(w, dtype=float)
    u0 = float(w @ market.competitor)
    si = sigmoid(float(w @ market.vectors[i]) - u0)
    sj = sigmoid(float(w @ market.vectors[j]) - u0)
    return float(si * market.margins[i] - sj * market.margins[j])


def segment_map(market: Market, bounds=(-10.0, 10.0), resolution: int = 200):
    """Label a 2-D grid of part-worths with their profit-argmax design.

    Returns (w1 axis, w2 axis, labels) where ``labels[i, j]`` is the optimal
    design at (w1[j], w2[i]).  Only defined for 2-D markets.
    """
    if market.dim != 2:
        raise ValueError(f"segment maps need 2-D part-worths, market has D={market.dim}")
    if resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    lo, hi = float(bounds[0]), float(bounds[1])
    if not hi > lo:
        raise ValueError(f"invalid grid bounds ({lo}, {hi})")
    axis1 = np.linspace(lo, hi, resolution)
    axis2 = np.linspace(lo, hi, resolution)
    g1, g2 = np.meshgrid(axis1, axis2)
    pts = np.column_stack([g1.ravel(), g2.ravel()])
    labels = optimal_designs(pts, market).reshape(resolution, resolution)
    return axis1, axis2, labels


def write_segment_csv(path, axis1, axis2, labels) -> None:
    """One (w1, w2, design) row per grid point."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["w1", "w2", "design"])
        for i, w2 in enumerate(axis2):
            for j, w1 in enumerate(axis1):
                writer.writerow([repr(float(w1)), repr(float(w2)), int(labels[i, j])])


def boundary_bisection(market: Market, i: int, j: int, w_a, w_b,
                       tol: float = 1e-8, max_iter: int = 200) -> np.ndarray:
    """Locate the (i, j) equal-profit boundary between two part-worths.

    The endpoints must have opposite residual signs; bisection narrows the
    bracket to length <= ``tol`` and returns its midpoint.
    """
    w_a = np.asarray(w_a, dtype=float)
    w_b = np.asarray(w_b, dtype=float)
    f_a = equal_profit_residual(w_a, market, i, j)
    f_b = equal_profit_residual(w_b, market, i, j)
    if f_a == 0.0:
        return w_a
    if f_b == 0.0:
        return w_b
    if np.sign(f_a) == np.sign(f_b):
        raise ValueError("endpoints do not bracket an equal-profit boundary")
    for _ in range(max_iter):
        if np.linalg.norm(w_b - w_a) <= tol:
            break
        mid = 0.5 * (w_a + w_b)
        f_mid = equal_profit_residual(mid, market, i, j)
        if f_mid == 0.0:
            return mid
        if np.sign(f_mid) == np.sign(f_a):
            w_a, f_a = mid, f_mid
        else:
            w_b, f_b = mid, f_mid
    return 0.5 * (w_a + w_b)
