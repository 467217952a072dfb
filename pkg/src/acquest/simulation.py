"""Simulated-respondent questionnaires and the comparison protocol.

A simulated respondent with true part-worths ``w*`` and noise scale theta
picks design i over j with probability ``sigmoid(theta * (z_i - z_j) @ w*)``;
large theta means near noise-free answers.  A run tracks, per query index,
the posterior mass of the true optimal design, whether it is currently
identified (strict argmax of the masses), the part-worth correlation and
error, the mass entropy, and the profit gap of the identified design; a
comparison aggregates runs per strategy with bootstrap standard errors.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .choice import Market, expected_profits, optimal_design, profit_matrix, sigmoid
from .designs import DesignSpace, DesignSpaceError
from .engine import AdaptiveEngine
from .gisa import GroupMasses

N_BOOTSTRAP = 100


@dataclass(frozen=True)
class RespondentModel:
    """True part-worths (constrained layout) plus a response noise scale."""

    w_star: np.ndarray
    theta: float
    seed: int = 0

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be positive")

    def scaled_truth(self) -> np.ndarray:
        return self.theta * np.asarray(self.w_star, dtype=float)


def simulate_response(model: RespondentModel, market: Market, i: int, j: int,
                      rng: np.random.Generator) -> tuple[int, int]:
    """(winner, loser) drawn from the logit response model."""
    gap = float((market.vectors[i] - market.vectors[j]) @ model.w_star)
    p_i = sigmoid(model.theta * gap)
    return (i, j) if rng.uniform() < p_i else (j, i)


@dataclass
class RunMetrics:
    strategy: str
    seed: int
    competitor_index: int | None
    true_optimum: int
    rows: list[dict] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)

    def final(self, name: str) -> float:
        return float(self.rows[-1][name])


def _metric_row(q: int, masses: GroupMasses, map_w: np.ndarray,
                model: RespondentModel, market: Market, true_opt: int,
                samples: np.ndarray, truth_profits: np.ndarray) -> dict:
    probs = masses.probs
    chosen = int(np.argmax(probs))
    correct = bool(probs[true_opt] > np.max(np.delete(probs, true_opt))) \
        if market.size > 1 else True
    w_star = np.asarray(model.w_star, dtype=float)
    if np.std(map_w) > 0 and np.std(w_star) > 0:
        c_hat = float(np.corrcoef(map_w, w_star)[0, 1])
    else:
        c_hat = float("nan")
    gap = float(truth_profits[true_opt] - truth_profits[chosen])
    return {
        "q": q,
        "pi_true_opt": float(probs[true_opt]),
        "correct": int(correct),
        "c_hat": c_hat,
        "d_hat": float(np.linalg.norm(map_w - w_star)),
        "entropy_bits": masses.entropy_bits,
        "profit_gap": gap,
        "expected_profit_hat": float(expected_profits(samples, market)[chosen]),
    }


def run_questionnaire(strategy: str, market: Market, model: RespondentModel,
                      budget: int, sample_size: int = 1000,
                      candidate_size: int = 100, seed: int = 0,
                      competitor_index: int | None = None) -> RunMetrics:
    """One simulated questionnaire; returns the full metric trajectory.

    The true optimal design and its profit are evaluated under the
    theta-scaled truth, which the respondent actually answers by.
    """
    root = np.random.SeedSequence(seed)
    respondent_seed, engine_seed = root.spawn(2)
    rng = np.random.default_rng(respondent_seed)
    truth = model.scaled_truth()
    true_opt = optimal_design(truth, market)
    truth_profits = profit_matrix(truth[None, :], market)[0]
    engine = AdaptiveEngine(market, strategy, budget, sample_size,
                            candidate_size, seed=engine_seed)
    metrics = RunMetrics(strategy, seed, competitor_index, true_opt)
    metrics.rows.append(_metric_row(0, engine.state.masses,
                                    engine.state.posterior.map().w, model,
                                    market, true_opt, engine.state.samples,
                                    truth_profits))
    while not engine.complete:
        i, j = engine.current_query
        winner, loser = simulate_response(model, market, i, j, rng)
        state = engine.absorb(winner, loser)
        metrics.rows.append(_metric_row(state.q, state.masses,
                                        state.posterior.map().w, model,
                                        market, true_opt, state.samples,
                                        truth_profits))
    return metrics


def bootstrap_sem(values, n_boot: int = N_BOOTSTRAP, seed: int = 0) -> float:
    """Standard error of the mean from bootstrap resamples over runs."""
    values = np.asarray(values, dtype=float)
    rng = np.random.default_rng(seed)
    means = [values[rng.integers(len(values), size=len(values))].mean()
             for _ in range(n_boot)]
    return float(np.std(means))


METRIC_COLUMNS = ("pi_true_opt", "correct", "c_hat", "d_hat",
                  "entropy_bits", "profit_gap", "expected_profit_hat")


@dataclass
class ComparisonResult:
    runs: list[RunMetrics]
    aggregate: list[dict]  # one row per (strategy, q)

    def runs_for(self, strategy: str) -> list[RunMetrics]:
        return [r for r in self.runs if r.strategy == strategy]

    def final_values(self, strategy: str, column: str) -> np.ndarray:
        return np.array([r.final(column) for r in self.runs_for(strategy)])

    def aggregate_row(self, strategy: str, q: int) -> dict:
        for row in self.aggregate:
            if row["strategy"] == strategy and row["q"] == q:
                return row
        raise KeyError((strategy, q))


def compare_strategies(space: DesignSpace, model_factory, budget: int,
                       n_runs: int, strategies=("gisa", "abernethy"),
                       sample_size: int = 1000, candidate_size: int = 100,
                       seed: int = 0, competitor_policy="random") -> ComparisonResult:
    """Run both strategies over ``n_runs`` paired seeds and aggregate.

    ``model_factory(run_seed)`` builds the respondent; the competitor is
    drawn uniformly per run unless ``competitor_policy`` pins an index.
    Strategies share per-run seeds, so they face the same competitor and
    respondent noise stream.
    """
    if n_runs < 2:
        raise ValueError("need at least two runs for a comparison")
    root = np.random.SeedSequence(seed)
    run_seeds = [int(s.generate_state(1)[0]) for s in root.spawn(n_runs)]
    runs = []
    for t, run_seed in enumerate(run_seeds):
        comp_rng = np.random.default_rng(np.random.SeedSequence(run_seed).spawn(1)[0])
        if competitor_policy == "random":
            comp_index = int(comp_rng.integers(space.size))
        else:
            comp_index = int(competitor_policy)
        market = space.with_competitor(comp_index).market()
        model = model_factory(run_seed)
        for strategy in strategies:
            run = run_questionnaire(strategy, market, model, budget,
                                    sample_size, candidate_size, seed=run_seed,
                                    competitor_index=comp_index)
            runs.append(run)
    aggregate = []
    for strategy in strategies:
        group = [r for r in runs if r.strategy == strategy]
        for q in range(budget + 1):
            row = {"strategy": strategy, "q": q}
            for col in METRIC_COLUMNS:
                values = np.array([r.rows[q][col] for r in group if q < len(r.rows)],
                                  dtype=float)
                finite = values[np.isfinite(values)]
                row[f"{col}_mean"] = float(finite.mean()) if len(finite) else float("nan")
                row[f"{col}_sem"] = bootstrap_sem(finite) if len(finite) else float("nan")
            aggregate.append(row)
    return ComparisonResult(runs, aggregate)


# -- CSV / config output -----------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_run_metrics_csv(path, runs: list[RunMetrics]) -> None:
    """One row per query index per run."""
    header = ["strategy", "seed", "competitor", "true_optimum", "q",
              *METRIC_COLUMNS]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for run in runs:
            for row in run.rows:
                writer.writerow([run.strategy, run.seed,
                                 "" if run.competitor_index is None else run.competitor_index,
                                 run.true_optimum, row["q"],
                                 *[_fmt(row[c]) for c in METRIC_COLUMNS]])


def write_aggregate_csv(path, result: ComparisonResult) -> None:
    if not result.aggregate:
        raise ValueError("empty aggregate")
    header = list(result.aggregate[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in result.aggregate:
            writer.writerow([_fmt(row[k]) for k in header])


def write_config_echo(path, config: dict) -> None:
    """Fully-resolved run configuration, reloadable for byte-identical reruns."""
    Path(path).write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")


NARROW_CASE_LEVELS = {
    # level tuples of the documented narrow-segment triple (z1, z2, z3)
    "z1": (2, 2, 2, 3, 2, 3),
    "z2": (2, 2, 2, 3, 2, 4),
    "z3": (1, 1, 4, 1, 0, 0),
}


def narrow_segment_fixture(space: DesignSpace, w_star: np.ndarray,
                           theta: float = 100.0):
    """Pin the narrow-segment case: competitor z3, candidate checks on z1/z2.

    Returns (space with competitor z3, indices of z1/z2/z3, z1_is_optimal).
    The optimality of z1 depends on the cost data in use, so callers should
    treat ``z1_is_optimal`` as a notice, not an invariant.
    """
    try:
        idx = {name: space.find(levels) for name, levels in NARROW_CASE_LEVELS.items()}
    except DesignSpaceError as exc:
        raise DesignSpaceError(f"narrow-segment designs missing from space: {exc}") from exc
    pinned = space.with_competitor(idx["z3"])
    market = pinned.market()
    best = optimal_design(theta * np.asarray(w_star, dtype=float), market)
    return pinned, idx, best == idx["z1"]
