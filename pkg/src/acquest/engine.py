"""The per-session adaptive loop shared by the simulator and the service.

One round = absorb a response, re-estimate (cross-validated prior strength,
MAP), draw a fresh posterior sample set, recompute the per-design masses,
and select the next query under the configured strategy.  All randomness
flows from a single seed: the engine spawns one child seed per round plus
dedicated streams for the first-query pick, so identical configurations
reproduce identical trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import abernethy, gisa
from .choice import Market
from .estimation import DEFAULT_C, CVResult, Posterior, ResponseSet, cross_validate

STRATEGIES = ("gisa", "abernethy")


def pair_from_flat(t: int, k: int) -> tuple[int, int]:
    """Map a flat index in [0, K(K-1)/2) to the t-th pair (i, j), i < j."""
    counts = np.arange(k - 1, 0, -1)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    i = int(np.searchsorted(offsets, t, side="right") - 1)
    j = int(t - offsets[i] + i + 1)
    return i, j


@dataclass
class RoundState:
    """Everything the engine derived from the responses so far."""

    q: int
    prior_strength: float
    cv: CVResult
    posterior: Posterior
    samples: np.ndarray
    labels: np.ndarray
    masses: gisa.GroupMasses
    baseline: abernethy.BaselineState
    scores: list[gisa.QueryScore]


class AdaptiveEngine:
    """Runs one questionnaire against a market under a fixed strategy."""

    def __init__(self, market: Market, strategy: str, budget: int,
                 sample_size: int = 1000, candidate_size: int = 100,
                 seed=0, cv_folds: int = 10):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
        if budget < 0 or sample_size < 1 or candidate_size < 2:
            raise ValueError("invalid engine configuration")
        self.market = market
        self.strategy = strategy
        self.budget = int(budget)
        self.sample_size = int(sample_size)
        self.candidate_size = int(candidate_size)
        self.cv_folds = cv_folds
        self._seed_root = seed if isinstance(seed, np.random.SeedSequence) \
            else np.random.SeedSequence(seed)
        self._first_query_seed, self._round_seed_root = self._seed_root.spawn(2)
        self.responses = ResponseSet(market.dim)
        self.asked: set[tuple[int, int]] = set()
        self.state = self._compute_state()
        self.current_query: tuple[int, int] | None = None
        if self.budget > 0:
            self.current_query = self._first_query()

    # -- state ------------------------------------------------------------

    @property
    def complete(self) -> bool:
        return self.current_query is None

    @property
    def n_responses(self) -> int:
        return len(self.responses)

    def _round_seed(self) -> np.random.SeedSequence:
        return self._round_seed_root.spawn(1)[0]

    def _compute_state(self) -> RoundState:
        cv = cross_validate(self.responses, folds=self.cv_folds) \
            if len(self.responses) >= self.cv_folds else CVResult(DEFAULT_C, True)
        posterior = Posterior(cv.prior_strength, self.responses)
        sample_set = posterior.sample(self.sample_size, self._round_seed())
        labels = gisa.design_labels(sample_set.samples, self.market)
        masses = gisa.masses_from_labels(labels, self.market.size)
        baseline = abernethy.build_state(posterior)
        return RoundState(len(self.responses), cv.prior_strength, cv, posterior,
                          sample_set.samples, labels, masses, baseline, [])

    def _first_query(self) -> tuple[int, int]:
        rng = np.random.default_rng(self._first_query_seed)
        flat = int(rng.integers(self.market.n_pairs))
        return pair_from_flat(flat, self.market.size)

    def _next_query(self) -> tuple[int, int] | None:
        if len(self.responses) >= self.budget:
            return None
        if self.strategy == "abernethy":
            return abernethy.select_query_full(self.state.baseline, self.market,
                                               self.asked)
        candidates = gisa.generate_candidates(
            self.state.masses, self.state.baseline.min_variance_axis,
            self.market, self.candidate_size, self.asked)
        query, scores = gisa.select_query(candidates, self.state.samples,
                                          self.state.labels, self.state.masses,
                                          self.market)
        self.state.scores = scores
        return query

    # -- the loop ----------------------------------------------------------

    def absorb(self, winner: int, loser: int) -> RoundState:
        """Record a response to the outstanding query and advance one round."""
        if self.current_query is None:
            raise RuntimeError("questionnaire already complete")
        if {winner, loser} != set(self.current_query):
            raise ValueError(f"response ({winner}, {loser}) does not match the "
                             f"outstanding query {self.current_query}")
        query_id = f"q{len(self.responses) + 1}"
        self.responses.add_choice(self.market, winner, loser, query_id)
        self.asked.add(tuple(sorted(self.current_query)))
        self.state = self._compute_state()
        self.current_query = self._next_query()
        return self.state
