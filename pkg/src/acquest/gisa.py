"""Greedy query selection for profit-argmax identification.

Each candidate pairwise query (i, j) cuts part-worth space in half; the
selector scores a cut by how evenly it splits the posterior mass (reduction
factor near 0.5) while keeping each design's segment mass on one side (group
reduction factors near 0 or 1), and greedily asks the query minimizing

    objective = 1 - H(reduction) + sum_k mass_k * H(group_reduction_k)

with H the binary Shannon entropy in bits.  Masses are Monte-Carlo fractions
over a posterior sample set; an exact discrete variant over finite object
lists is included for validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .choice import Market, optimal_designs


def binary_entropy(p) -> np.ndarray | float:
    """Entropy in bits of a Bernoulli(p), with 0 log 0 := 0."""
    arr = np.asarray(p, dtype=float)
    if np.any((arr < -1e-12) | (arr > 1 + 1e-12)):
        raise ValueError("entropy argument outside [0, 1]")
    arr = np.clip(arr, 0.0, 1.0)
    out = np.zeros_like(arr)
    inner = (arr > 0) & (arr < 1)
    q = arr[inner]
    out[inner] = -q * np.log2(q) - (1 - q) * np.log2(1 - q)
    return float(out) if np.isscalar(p) else out


def shannon_entropy_bits(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return max(0.0, float(-(p * np.log2(p)).sum()))


@dataclass(frozen=True)
class GroupMasses:
    """Per-design probability of being the profit argmax."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("group masses must be nonnegative and sum to 1")

    @property
    def entropy_bits(self) -> float:
        return shannon_entropy_bits(self.probs)

    def top(self, n: int = 10) -> list[tuple[int, float]]:
        order = np.argsort(-self.probs, kind="stable")[:n]
        return [(int(k), float(self.probs[k])) for k in order]


def design_labels(samples, market: Market) -> np.ndarray:
    """Profit-argmax design of every sample (the sample's segment label)."""
    return optimal_designs(samples, market)


def masses_from_labels(labels, n_designs: int) -> GroupMasses:
    counts = np.bincount(labels, minlength=n_designs)
    return GroupMasses(counts / counts.sum())


def estimate_masses(samples, market: Market) -> GroupMasses:
    """Monte-Carlo segment masses: fraction of samples per argmax design."""
    samples = np.atleast_2d(samples)
    if len(samples) < 1:
        raise ValueError("need at least one posterior sample")
    return masses_from_labels(design_labels(samples, market), market.size)


@dataclass(frozen=True)
class BranchMasses:
    left_total: float
    right_total: float
    left_by_group: np.ndarray
    right_by_group: np.ndarray


def branch_masses(samples, labels, market: Market, i: int, j: int) -> BranchMasses:
    """Mass landing on each side of the cut w @ (z_i - z_j) > 0, per design."""
    if i == j:
        raise ValueError("a query needs two distinct designs")
    samples = np.atleast_2d(samples)
    left = samples @ (market.vectors[i] - market.vectors[j]) > 0
    n = len(samples)
    k = market.size
    left_by = np.bincount(labels[left], minlength=k) / n
    total_by = np.bincount(labels, minlength=k) / n
    return BranchMasses(float(left.mean()), float(1.0 - left.mean()),
                        left_by, total_by - left_by)


@dataclass(frozen=True)
class QueryScore:
    """Scoring record behind one candidate query's greedy evaluation."""

    query: tuple[int, int]
    left_prob: float
    right_prob: float
    reduction_factor: float
    group_reductions: np.ndarray
    objective: float


def score_query(query, left_total: float, left_by_group, masses: GroupMasses) -> QueryScore:
    """Evaluate the greedy objective for one candidate cut.

    Zero-mass designs contribute nothing (0 * H := 0); group reduction
    factors are validated to [0, 1] only, since Monte-Carlo fractions make
    them exact ratios.
    """
    probs = np.asarray(masses.probs, dtype=float)
    left_by = np.asarray(left_by_group, dtype=float)
    right_by = probs - left_by
    reduction = max(left_total, 1.0 - left_total)
    group_red = np.ones_like(probs)
    active = probs > 0
    group_red[active] = np.maximum(left_by[active], right_by[active]) / probs[active]
    if np.any(group_red < -1e-12) or np.any(group_red > 1 + 1e-12):
        raise ValueError("group reduction factor outside [0, 1]")
    group_red = np.clip(group_red, 0.0, 1.0)
    objective = 1.0 - binary_entropy(reduction) \
        + float(probs[active] @ binary_entropy(group_red[active]))
    return QueryScore(tuple(query), float(left_total), float(1.0 - left_total),
                      float(reduction), group_red, float(objective))


def score_candidates(candidates, samples, labels, masses: GroupMasses,
                     market: Market) -> list[QueryScore]:
    scores = []
    for (i, j) in candidates:
        bm = branch_masses(samples, labels, market, i, j)
        scores.append(score_query((i, j), bm.left_total, bm.left_by_group, masses))
    return scores


def select_query(candidates, samples, labels, masses: GroupMasses,
                 market: Market) -> tuple[tuple[int, int] | None, list[QueryScore]]:
    """Greedy argmin of the objective; ties break toward candidate order.

    Returns (None, []) when the candidate list is empty (termination signal).
    """
    candidates = list(candidates)
    if not candidates:
        return None, []
    scores = score_candidates(candidates, samples, labels, masses, market)
    best = int(np.argmin([s.objective for s in scores]))
    return scores[best].query, scores


def mass_sorted_pairs(masses: GroupMasses, n: int, asked=()) -> list[tuple[int, int]]:
    """First ``n`` unasked pairs in the mass-descending pairing order.

    Designs are sorted by mass (descending, index breaking ties); pairs are
    enumerated as (1st, 2nd), (1st, 3rd), (2nd, 3rd), (1st, 4th), ...
    """
    asked = {frozenset(p) for p in asked}
    order = np.argsort(-np.asarray(masses.probs), kind="stable")
    out: list[tuple[int, int]] = []
    k = len(order)
    for m in range(1, k):
        for a in range(m):
            pair = (int(order[a]), int(order[m]))
            if frozenset(pair) in asked:
                continue
            out.append(pair)
            if len(out) == n:
                return out
    return out


def generate_candidates(masses: GroupMasses, min_variance_axis, market: Market,
                        n: int, asked=()) -> list[tuple[int, int]]:
    """Heuristic candidate set: half mass-ranked pairs, half variance-aligned.

    The first half pairs the currently most probable designs; the second
    half are the unasked pairs whose difference vector best aligns with the
    posterior's minimum-curvature axis (the baseline module's minimax
    variance criterion).  Previously asked queries are excluded, duplicates
    collapsed; fewer than ``n`` may remain near exhaustion.
    """
    if n < 2:
        raise ValueError("candidate set size must be at least 2")
    from .abernethy import top_alignment_pairs

    n_mass = n // 2
    half = mass_sorted_pairs(masses, n_mass, asked)
    seen = {frozenset(p) for p in half} | {frozenset(p) for p in asked}
    budget = n - len(half)
    aligned = top_alignment_pairs(min_variance_axis, market, budget + len(half), asked)
    for pair in aligned:
        if len(half) >= n:
            break
        if frozenset(pair) not in seen:
            half.append(pair)
            seen.add(frozenset(pair))
    return half


# ---------------------------------------------------------------------------
# Discrete variant over finite object lists (validation-scale)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteGroupInstance:
    """Finite objects with prior masses, a group partition, and binary queries."""

    objects: tuple[str, ...]
    priors: np.ndarray
    group_of: tuple[str, ...]  # group label per object
    queries: tuple[str, ...]
    answers: np.ndarray  # (n_queries, n_objects) booleans

    def __post_init__(self):
        n = len(self.objects)
        priors = np.asarray(self.priors, dtype=float)
        if priors.shape != (n,) or np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-9:
            raise ValueError("priors must be a nonnegative vector summing to 1")
        if len(self.group_of) != n:
            raise ValueError("need one group label per object")
        if self.answers.shape != (len(self.queries), n):
            raise ValueError("answers must be (n_queries, n_objects)")

    @property
    def groups(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for g in self.group_of:
            seen.setdefault(g)
        return tuple(seen)

    def group_index(self) -> np.ndarray:
        lookup = {g: k for k, g in enumerate(self.groups)}
        return np.array([lookup[g] for g in self.group_of])

    def reweighted(self, priors) -> "DiscreteGroupInstance":
        priors = np.asarray(priors, dtype=float)
        return DiscreteGroupInstance(self.objects, priors / priors.sum(),
                                     self.group_of, self.queries, self.answers)


def load_discrete_instance(path) -> DiscreteGroupInstance:
    payload = json.loads(Path(path).read_text())
    objects = tuple(payload["objects"])
    priors = np.array([float(p) for p in payload["priors"]])
    group_of = tuple(payload["groups"][o] for o in objects)
    queries = tuple(q["name"] for q in payload["queries"])
    answers = np.array([[bool(a) for a in q["answers"]] for q in payload["queries"]])
    return DiscreteGroupInstance(objects, priors, group_of, queries, answers)


def discrete_query_scores(instance: DiscreteGroupInstance,
                          active=None) -> list[QueryScore]:
    """Exact (non-Monte-Carlo) scores of every query on the active objects."""
    n = len(instance.objects)
    active = np.ones(n, dtype=bool) if active is None else np.asarray(active)
    weights = np.where(active, instance.priors, 0.0)
    total = weights.sum()
    if total <= 0:
        raise ValueError("no active prior mass")
    weights = weights / total
    gidx = instance.group_index()
    n_groups = len(instance.groups)
    probs = np.bincount(gidx, weights=weights, minlength=n_groups)
    masses = GroupMasses(probs)
    scores = []
    for q in range(len(instance.queries)):
        yes = instance.answers[q]
        left_total = float(weights[yes].sum())
        left_by = np.bincount(gidx[yes], weights=weights[yes], minlength=n_groups)
        scores.append(score_query((q, -1), left_total, left_by, masses))
    return scores


def select_discrete_query(instance: DiscreteGroupInstance, active=None,
                          available=None) -> tuple[int | None, list[QueryScore]]:
    """Greedy pick among ``available`` query indices (default: all)."""
    scores = discrete_query_scores(instance, active)
    available = range(len(instance.queries)) if available is None else available
    best, best_score = None, np.inf
    for q in available:
        if scores[q].objective < best_score:
            best, best_score = q, scores[q].objective
    return best, scores


@dataclass(frozen=True)
class TreeNode:
    depth: int
    mass: float
    query: int | None = None  # internal nodes
    yes: "TreeNode | None" = None
    no: "TreeNode | None" = None
    group: str | None = None  # resolved leaves
    unresolved: bool = False

    @property
    def is_leaf(self) -> bool:
        return self.query is None


@dataclass(frozen=True)
class DiscreteResult:
    root: TreeNode
    expected_queries: float
    unresolved_mass: float


def discrete_gisa(instance: DiscreteGroupInstance, max_objects: int = 20) -> DiscreteResult:
    """Greedy decision tree over a discrete instance, with exact masses.

    Candidates at each node are the unused queries that actually split the
    node's active set; when groups stay mixed and no such query remains the
    node is reported as an unresolved leaf.
    """
    if len(instance.objects) > max_objects:
        raise ValueError(f"instance too large ({len(instance.objects)} objects)")
    gidx = instance.group_index()

    def build(active: np.ndarray, used: frozenset[int], depth: int) -> TreeNode:
        mass = float(instance.priors[active].sum())
        labels = set(gidx[active].tolist())
        if len(labels) == 1:
            return TreeNode(depth, mass, group=instance.groups[labels.pop()])
        splitting = [q for q in range(len(instance.queries))
                     if q not in used
                     and instance.answers[q][active].any()
                     and not instance.answers[q][active].all()]
        if not splitting:
            return TreeNode(depth, mass, unresolved=True)
        q, _ = select_discrete_query(instance, active, splitting)
        yes_branch = active & instance.answers[q]
        no_branch = active & ~instance.answers[q]
        return TreeNode(depth, mass, query=q,
                        yes=build(yes_branch, used | {q}, depth + 1),
                        no=build(no_branch, used | {q}, depth + 1))

    active0 = instance.priors > 0
    root = build(active0, frozenset(), 0)

    def walk(node: TreeNode):
        if node.is_leaf:
            yield node
        else:
            yield from walk(node.yes)
            yield from walk(node.no)

    expected = sum(leaf.mass * leaf.depth for leaf in walk(root))
    unresolved = sum(leaf.mass for leaf in walk(root) if leaf.unresolved)
    return DiscreteResult(root, float(expected), float(unresolved))


def render_tree(instance: DiscreteGroupInstance, node: TreeNode,
                indent: str = "") -> str:
    """Plain-text rendering of a decision tree for demos and the CLI."""
    if node.is_leaf:
        label = "UNRESOLVED" if node.unresolved else node.group
        return f"{indent}-> {label} (mass {node.mass:g}, depth {node.depth})\n"
    text = f"{indent}{instance.queries[node.query]}\n"
    text += f"{indent}  yes:\n" + render_tree(instance, node.yes, indent + "    ")
    text += f"{indent}  no:\n" + render_tree(instance, node.no, indent + "    ")
    return text


def write_query_scores_csv(path, scores: list[QueryScore]) -> None:
    """Per-round audit table of the scored candidate queries."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["design_i", "design_j", "left_prob",
                         "reduction_factor", "objective"])
        for s in scores:
            writer.writerow([s.query[0], s.query[1], repr(s.left_prob),
                             repr(s.reduction_factor), repr(s.objective)])
