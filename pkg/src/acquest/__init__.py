"""Adaptive pairwise-choice questionnaires for profitable product design.

The package identifies the most profitable design from a finite candidate
set by asking a respondent adaptive pairwise choice questions.  Part-worth
space is segmented by profit argmax; queries are picked either to resolve
the segment directly (greedy group-identification splitting) or to sharpen
the part-worth estimate (utility-balance / minimax-variance baseline).
"""

from .abernethy import BaselineState, build_state, select_query_full, top_alignment_pairs
from .choice import (Market, boundary_bisection, choice_probability,
                     equal_profit_residual, expected_profits, optimal_design,
                     optimal_designs, profit, random_planar_market, segment_map,
                     sigmoid, utility, write_segment_csv)
from .designs import (Attribute, AttributeSchema, CostModel, Design, DesignSpace,
                      DesignSpaceError, design_space_from_dict, full_factorial,
                      load_design_space, load_partworths, make_design)
from .engine import AdaptiveEngine, pair_from_flat
from .estimation import (C_GRID, CVResult, MAPResult, Posterior, Response,
                         ResponseSet, cross_validate, gradient, hessian,
                         map_estimate, neg_log_posterior, projected_hessian)
from .gisa import (BranchMasses, DiscreteGroupInstance, GroupMasses, QueryScore,
                   binary_entropy, branch_masses, discrete_gisa, estimate_masses,
                   generate_candidates, load_discrete_instance, render_tree,
                   score_query, select_discrete_query, select_query,
                   shannon_entropy_bits)
from .sampler import (SampleSet, SamplerError, chebyshev_direction,
                      cone_step_bounds, mh_sample, reduce_contradictions)
from .simulation import (ComparisonResult, RespondentModel, RunMetrics,
                         bootstrap_sem, compare_strategies, narrow_segment_fixture,
                         run_questionnaire, simulate_response,
                         write_aggregate_csv, write_run_metrics_csv)

__version__ = "0.1.0"
