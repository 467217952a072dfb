"""Preference-learning baseline: utility balance plus minimax variance.

The baseline asks the query whose design difference best aligns with the
flattest axis of the current posterior (the eigenvector of the smallest
eigenvalue of the projected Hessian) and, among equally aligned queries,
has the smallest estimated utility gap.  Per candidate difference row:

    c1 = |row @ w_hat|          (utility balance, smaller is better)
    c2 = |row @ v| / ||row||    (alignment, larger is better)

selection is lexicographic: max c2, then min c1, then list order.  At the
case-study scale (millions of pairs) the scan streams over row blocks
without materializing the difference rows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .choice import Market
from .estimation import Posterior, projected_hessian

C2_SIG_DIGITS = 12
_BLOCK = 256


@dataclass(frozen=True)
class BaselineState:
    """MAP estimate, projected Hessian, and its minimum-curvature axis."""

    map_w: np.ndarray
    hessian_projected: np.ndarray
    min_variance_axis: np.ndarray


def build_state(posterior: Posterior) -> BaselineState:
    w_hat = posterior.map().w
    h_proj, v = projected_hessian(posterior.hessian(), w_hat)
    return BaselineState(w_hat, h_proj, v)


def round_significant(values, digits: int = C2_SIG_DIGITS):
    """Round to ``digits`` significant digits (deterministic tie grouping)."""
    arr = np.asarray(values, dtype=float)
    out = np.zeros_like(arr)
    finite_nz = np.isfinite(arr) & (arr != 0)
    mag = np.floor(np.log10(np.abs(arr[finite_nz])))
    factors = 10.0 ** (digits - 1 - mag)
    out[finite_nz] = np.round(arr[finite_nz] * factors) / factors
    out[~np.isfinite(arr)] = arr[~np.isfinite(arr)]
    return float(out) if np.isscalar(values) else out


def score_candidates(state: BaselineState, rows) -> tuple[np.ndarray, np.ndarray]:
    """(c1, c2) per candidate difference row; zero rows lose with a warning."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    norms = np.linalg.norm(rows, axis=1)
    zero = norms == 0
    if zero.any():
        warnings.warn(f"excluding {int(zero.sum())} zero candidate rows",
                      stacklevel=2)
    c1 = np.abs(rows @ state.map_w)
    c2 = np.zeros(len(rows))
    c2[~zero] = np.abs(rows[~zero] @ state.min_variance_axis) / norms[~zero]
    c1[zero] = np.inf
    c2[zero] = -np.inf
    return c1, c2


def select_query_rows(state: BaselineState, rows) -> int | None:
    """Lexicographic pick over explicit rows; None when the list is empty."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[0] == 0 or rows.size == 0:
        return None
    c1, c2 = score_candidates(state, rows)
    c2r = round_significant(c2)
    top = c2r == c2r.max()
    best_c1 = c1[top].min()
    winners = np.flatnonzero(top & (c1 == best_c1))
    return int(winners[0])


def select_query(state: BaselineState, candidates, market: Market) -> tuple[int, int] | None:
    """Pick among explicit candidate pairs (i, j); None terminates."""
    candidates = list(candidates)
    if not candidates:
        return None
    rows = np.array([market.vectors[i] - market.vectors[j] for i, j in candidates])
    k = select_query_rows(state, rows)
    return None if k is None else tuple(candidates[k])


def _pair_norms(market: Market) -> np.ndarray:
    """(K, K) matrix of ||z_i - z_j||, cached on the market."""
    if market._pair_norms is None:
        k = market.size
        norms = np.empty((k, k))
        for start in range(0, k, _BLOCK):
            block = market.vectors[start:start + _BLOCK]
            diff = block[:, None, :] - market.vectors[None, :, :]
            norms[start:start + _BLOCK] = np.linalg.norm(diff, axis=2)
        market._pair_norms = norms
    return market._pair_norms


def _alignment_block(proj: np.ndarray, market: Market, start: int,
                     stop: int) -> np.ndarray:
    """c2 for pairs (i, j) with start <= i < stop, j > i; -inf elsewhere."""
    norms = _pair_norms(market)[start:stop]
    block = np.abs(proj[start:stop, None] - proj[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        block = np.where(norms > 0, block / norms, -np.inf)
    cols = np.arange(market.size)[None, :]
    rows = np.arange(start, stop)[:, None]
    block = np.where(cols > rows, block, -np.inf)
    return block


def top_alignment_pairs(v, market: Market, n: int, asked=()) -> list[tuple[int, int]]:
    """The ``n`` unasked pairs with the largest alignment score c2.

    Deterministic order: c2 descending (rounded to 12 significant digits),
    then pair order.  Streams over row blocks, so transient memory stays
    O(K) per block beyond the cached pair-norm table.
    """
    if n <= 0:
        return []
    asked = {tuple(sorted(p)) for p in asked}
    proj = market.vectors @ np.asarray(v, dtype=float)
    found: list[tuple[float, int, int]] = []
    want = n + len(asked)
    for start in range(0, market.size, _BLOCK):
        stop = min(start + _BLOCK, market.size)
        flat = _alignment_block(proj, market, start, stop).ravel()
        keep = min(want, flat.size)
        idx = np.argpartition(-flat, keep - 1)[:keep]
        for t in idx:
            if flat[t] == -np.inf:
                continue
            i = start + int(t) // market.size
            j = int(t) % market.size
            if (i, j) not in asked:
                found.append((float(round_significant(flat[t])), i, j))
    found.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [(i, j) for _, i, j in found[:n]]


def select_query_full(state: BaselineState, market: Market,
                      asked=()) -> tuple[int, int] | None:
    """Lexicographic pick over every unasked design pair, streamed in blocks."""
    asked_set = {tuple(sorted(p)) for p in asked}
    if len(asked_set) >= market.n_pairs:
        return None
    proj_v = market.vectors @ state.min_variance_axis
    proj_w = market.vectors @ state.map_w
    best: tuple[float, float, int, int] | None = None
    for start in range(0, market.size, _BLOCK):
        stop = min(start + _BLOCK, market.size)
        c2 = round_significant(_alignment_block(proj_v, market, start, stop))
        for (i, j) in asked_set:
            if start <= i < stop:
                c2[i - start, j] = -np.inf
        if not np.isfinite(c2).any():
            continue
        c1 = np.abs(proj_w[start:stop, None] - proj_w[None, :])
        top = c2 == c2[np.isfinite(c2)].max()
        masked_c1 = np.where(top, c1, np.inf)
        min_c1 = masked_c1.min()
        rows, cols = np.nonzero(top & (masked_c1 == min_c1))
        candidate = (-float(c2[rows[0], cols[0]]), float(min_c1),
                     int(rows[0]) + start, int(cols[0]))
        if best is None or candidate < best:
            best = candidate
    if best is None:
        return None
    return best[2], best[3]
