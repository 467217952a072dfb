import numpy as np
import pytest

from acquest.choice import Market
from acquest.datasets import heroes_instance
from acquest.gisa import (DiscreteGroupInstance, GroupMasses, binary_entropy,
                          branch_masses, design_labels, discrete_gisa,
                          discrete_query_scores, estimate_masses,
                          generate_candidates, mass_sorted_pairs, score_query,
                          select_discrete_query, select_query,
                          shannon_entropy_bits)
from acquest.sampler import mh_sample

from conftest import batch_means_sem


class TestBinaryEntropy:
    def test_extremes(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == 1.0

    def test_symmetry(self):
        rng = np.random.default_rng(40)
        p = rng.uniform(size=100)
        np.testing.assert_allclose(binary_entropy(p), binary_entropy(1 - p))


class TestScoreQuery:
    def test_ideal_query_scores_zero(self):
        # halves the space while keeping every group intact
        masses = GroupMasses(np.array([0.5, 0.5]))
        s = score_query((0, 1), 0.5, np.array([0.5, 0.0]), masses)
        assert s.objective == pytest.approx(0.0)
        assert s.reduction_factor == 0.5

    def test_uninformative_query_scores_one(self):
        masses = GroupMasses(np.array([0.3, 0.7]))
        s = score_query((0, 1), 1.0, np.array([0.3, 0.7]), masses)
        assert s.objective == pytest.approx(1.0)

    def test_zero_mass_groups_drop_out(self):
        masses = GroupMasses(np.array([0.5, 0.5, 0.0]))
        s = score_query((0, 1), 0.5, np.array([0.5, 0.0, 0.0]), masses)
        assert s.objective == pytest.approx(0.0)

    def test_monotone_in_reduction_factor(self):
        # same group reductions, a less balanced cut never scores lower
        masses = GroupMasses(np.array([1.0]))
        balanced = score_query((0, 1), 0.5, np.array([0.5]), masses)
        for left in (0.6, 0.75, 0.9, 1.0):
            skewed = score_query((0, 1), left, np.array([left]), masses)
            assert skewed.objective >= balanced.objective

    def test_branch_mass_consistency(self, desk_market):
        rng = np.random.default_rng(41)
        samples = rng.normal(size=(400, desk_market.dim))
        labels = design_labels(samples, desk_market)
        masses = estimate_masses(samples, desk_market)
        bm = branch_masses(samples, labels, desk_market, 3, 11)
        assert bm.left_total + bm.right_total == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(bm.left_by_group + bm.right_by_group,
                                   masses.probs, atol=1e-9)
        assert bm.left_by_group.sum() == pytest.approx(bm.left_total, abs=1e-9)


class TestEstimateMasses:
    def test_single_design_all_mass(self):
        market = Market(np.array([[1.0, 0.0], [0.0, 1.0]]),
                        prices=np.array([9.0, 1.0]), costs=np.array([1.0, 1.0]),
                        competitor=np.array([0.0, 0.0]))
        rng = np.random.default_rng(42)
        samples = rng.normal(size=(200, 2))
        masses = estimate_masses(samples, market)
        assert masses.probs[0] == 1.0
        assert masses.entropy_bits == 0.0

    def test_symmetric_two_design_split(self, two_design_market):
        # boundary w1 = w2 through the origin; symmetric prior puts exactly
        # half the mass on each side, sampled mass matches within MC error
        result = mh_sample(lambda w: -0.5 * float(w @ w), np.empty((0, 2)),
                           np.zeros(2), 8000, seed=43)
        labels = design_labels(result.samples, two_design_market)
        sem = batch_means_sem(labels == 0)
        assert abs((labels == 0).mean() - 0.5) < 3 * sem

    def test_masses_sum_to_one(self, desk_market):
        rng = np.random.default_rng(44)
        masses = estimate_masses(rng.normal(size=(300, desk_market.dim)), desk_market)
        assert masses.probs.sum() == pytest.approx(1.0, abs=1e-9)
        assert 0.0 <= masses.entropy_bits <= np.log2(desk_market.size)


class TestCandidates:
    def test_mass_sorted_pairing_order(self):
        masses = GroupMasses(np.array([0.2, 0.5, 0.3]))
        pairs = mass_sorted_pairs(masses, 3)
        assert pairs == [(1, 2), (1, 0), (2, 0)]

    def test_asked_pairs_skipped(self):
        masses = GroupMasses(np.array([0.2, 0.5, 0.3]))
        pairs = mass_sorted_pairs(masses, 3, asked=[(2, 1)])
        assert pairs == [(1, 0), (2, 0)]

    def test_two_candidate_mode(self, desk_market):
        rng = np.random.default_rng(45)
        samples = rng.normal(size=(200, desk_market.dim))
        masses = estimate_masses(samples, desk_market)
        v = np.zeros(desk_market.dim)
        v[0] = 1.0
        cands = generate_candidates(masses, v, desk_market, 2)
        assert len(cands) == 2
        top_two = np.argsort(-masses.probs, kind="stable")[:2]
        assert cands[0] == (int(top_two[0]), int(top_two[1]))

    def test_exhaustion_returns_remaining(self):
        market = Market(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
                        prices=np.array([4.0, 4.0, 4.0]), costs=np.zeros(3),
                        competitor=np.array([0.0, 0.0]))
        masses = GroupMasses(np.array([0.4, 0.3, 0.3]))
        asked = [(0, 1), (0, 2), (1, 2)]
        assert generate_candidates(masses, np.array([1.0, 0.0]), market, 4,
                                   asked) == []

    def test_no_duplicates(self, desk_market):
        rng = np.random.default_rng(46)
        samples = rng.normal(size=(200, desk_market.dim))
        masses = estimate_masses(samples, desk_market)
        v = rng.normal(size=desk_market.dim)
        cands = generate_candidates(masses, v, desk_market, 20)
        assert len({frozenset(c) for c in cands}) == len(cands) == 20


class TestSelectQuery:
    def test_single_candidate(self, desk_market):
        rng = np.random.default_rng(47)
        samples = rng.normal(size=(100, desk_market.dim))
        labels = design_labels(samples, desk_market)
        masses = estimate_masses(samples, desk_market)
        query, scores = select_query([(0, 5)], samples, labels, masses, desk_market)
        assert query == (0, 5)
        assert len(scores) == 1

    def test_empty_candidates_terminate(self, desk_market):
        rng = np.random.default_rng(48)
        samples = rng.normal(size=(50, desk_market.dim))
        labels = design_labels(samples, desk_market)
        masses = estimate_masses(samples, desk_market)
        query, scores = select_query([], samples, labels, masses, desk_market)
        assert query is None and scores == []

    def test_deterministic_given_samples(self, desk_market):
        rng = np.random.default_rng(49)
        samples = rng.normal(size=(300, desk_market.dim))
        labels = design_labels(samples, desk_market)
        masses = estimate_masses(samples, desk_market)
        cands = [(0, 1), (3, 9), (2, 20), (5, 13)]
        first, _ = select_query(cands, samples, labels, masses, desk_market)
        second, _ = select_query(cands, samples, labels, masses, desk_market)
        assert first == second


class TestDiscreteWorkedExample:
    def test_uniform_prior_scores_and_selection(self):
        instance = heroes_instance()
        chosen, scores = select_discrete_query(instance)
        assert instance.queries[chosen] == "Q1"
        # branch masses of the second query match the documented 0.25 / 0.75
        assert scores[1].left_prob == pytest.approx(0.25)
        assert scores[1].right_prob == pytest.approx(0.75)
        # ranking: Q1 strictly minimal, Q2 and Q3 exactly tied
        assert scores[0].objective < scores[1].objective
        assert scores[1].objective == scores[2].objective
        assert scores[0].objective == pytest.approx(0.0)

    def test_literal_objective_values(self):
        # frozen from the formula: Q1 = 0, Q2 = Q3 = 1 - H(3/4) + 1/2
        instance = heroes_instance()
        _, scores = select_discrete_query(instance)
        expected = 1.0 - binary_entropy(0.75) + 0.5
        assert scores[1].objective == pytest.approx(expected, abs=1e-12)

    def test_joker_excluded_makes_mask_and_female_tie(self):
        # removing the object that answers "no" to everything leaves two
        # queries that split the groups exactly: the first and the third.
        # The second query still splits the Heroes group and scores worse.
        instance = heroes_instance().reweighted([0.25, 0.25, 0.25, 0.0])
        scores = discrete_query_scores(instance)
        objectives = [s.objective for s in scores]
        assert objectives[0] == pytest.approx(objectives[2], abs=1e-12)
        assert objectives[1] > objectives[0]
        expected_best = 1.0 - binary_entropy(2.0 / 3.0)
        assert objectives[0] == pytest.approx(expected_best, abs=1e-12)

    def test_group_relabel_permutation_invariance(self):
        instance = heroes_instance()
        base = [s.objective for s in discrete_query_scores(instance)]
        # swap the two heroes (same group): nothing may change
        swapped = DiscreteGroupInstance(
            objects=("Batman", "Superman", "Catwoman", "Joker"),
            priors=instance.priors,
            group_of=instance.group_of,
            queries=instance.queries,
            answers=instance.answers[:, [1, 0, 2, 3]],
        )
        perm = [s.objective for s in discrete_query_scores(swapped)]
        np.testing.assert_allclose(base, perm)


def optimal_expected_queries(instance: DiscreteGroupInstance) -> float:
    """Exhaustive search over all adaptive strategies (oracle)."""
    gidx = instance.group_index()
    priors = instance.priors

    def solve(active: frozenset, used: frozenset) -> float:
        if len({gidx[i] for i in active}) <= 1:
            return 0.0
        best = np.inf
        mass = sum(priors[i] for i in active)
        for q in range(len(instance.queries)):
            if q in used:
                continue
            yes = frozenset(i for i in active if instance.answers[q][i])
            no = active - yes
            if not yes or not no:
                continue
            m_yes = sum(priors[i] for i in yes)
            cost = 1.0 + (m_yes / mass) * solve(yes, used | {q}) \
                + ((mass - m_yes) / mass) * solve(no, used | {q})
            best = min(best, cost)
        return best

    active0 = frozenset(i for i in range(len(instance.objects)) if priors[i] > 0)
    return solve(active0, frozenset())


class TestDiscreteTree:
    def test_worked_example_tree(self):
        instance = heroes_instance()
        result = discrete_gisa(instance)
        assert instance.queries[result.root.query] == "Q1"
        assert result.expected_queries == pytest.approx(1.0)
        assert result.unresolved_mass == 0.0
        # greedy matches the exhaustive optimum on this instance
        assert result.expected_queries == pytest.approx(
            optimal_expected_queries(instance))

    def test_single_group_needs_no_queries(self):
        instance = DiscreteGroupInstance(
            objects=("a", "b"), priors=np.array([0.5, 0.5]),
            group_of=("G", "G"), queries=("Q1",),
            answers=np.array([[True, False]]))
        result = discrete_gisa(instance)
        assert result.expected_queries == 0.0
        assert result.root.is_leaf and result.root.group == "G"

    def test_singleton_groups_meet_entropy_bound(self):
        priors = np.array([0.4, 0.3, 0.2, 0.1])
        answers = np.array([
            [True, True, False, False],
            [True, False, True, False],
            [True, False, False, True],
        ])
        instance = DiscreteGroupInstance(
            objects=("a", "b", "c", "d"), priors=priors,
            group_of=("A", "B", "C", "D"),
            queries=("q0", "q1", "q2"), answers=answers)
        result = discrete_gisa(instance)
        assert result.unresolved_mass == 0.0
        assert result.expected_queries >= shannon_entropy_bits(priors) - 1e-9

    def test_inseparable_groups_reported(self):
        instance = DiscreteGroupInstance(
            objects=("a", "b"), priors=np.array([0.5, 0.5]),
            group_of=("A", "B"), queries=("useless",),
            answers=np.array([[True, True]]))
        result = discrete_gisa(instance)
        assert result.unresolved_mass == 1.0
