"""tagim: budgeted selection of seed users and campaign tags on social graphs.

The package models campaigns where a marketer picks both the users who start
a cascade and the tags the campaign is annotated with, under one shared
budget.  Edge strengths depend on the chosen tags (independent per-tag
probabilities combined as a noisy-OR), and spread is evaluated on maximum
influence in-arborescences.
"""

from .community import (BudgetPlan, CommunityPartition, community_priority,
                        detect_communities, priority_based_budget,
                        size_based_budget, tag_frequency_matrix)
from .datasets import Dataset, generate_synthetic, ingest, load_dataset, write_dataset
from .diffusion import (DEFAULT_THETA, SpreadEvaluator, activation_probability,
                        build_miia, build_miia_forest, earned_benefit,
                        influence_spread, max_prob_path, tag_influence)
from .graph import (CostedSelection, NodeCosts, TagCatalog, TagGraph,
                    TargetProfile, aggregate_graph, aggregate_probability,
                    load_graph, save_graph)
from .harness import (ALGORITHMS, CampaignSpec, alpha_sweep, prepare_campaign,
                      run_experiment, run_selection)
from .probmodels import (assign_count_probability, assign_trivalency,
                         assign_weighted_cascade)
from .selection import (INFLUENCE, Objective, baseline_hn_ht,
                        baseline_hn_ht_comm, baseline_rn_rt, delta_node,
                        delta_pair, delta_tag, emig_u, emig_u_prunn, emig_ut,
                        objective_value, prune_candidates)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "BudgetPlan", "CampaignSpec", "CommunityPartition",
    "CostedSelection", "Dataset", "DEFAULT_THETA", "INFLUENCE", "NodeCosts",
    "Objective", "SpreadEvaluator", "TagCatalog", "TagGraph", "TargetProfile",
    "activation_probability", "aggregate_graph", "aggregate_probability",
    "alpha_sweep", "assign_count_probability", "assign_trivalency",
    "assign_weighted_cascade", "baseline_hn_ht", "baseline_hn_ht_comm",
    "baseline_rn_rt", "build_miia", "build_miia_forest", "community_priority",
    "delta_node", "delta_pair", "delta_tag", "detect_communities",
    "earned_benefit", "emig_u", "emig_u_prunn", "emig_ut",
    "generate_synthetic", "influence_spread", "ingest", "load_dataset",
    "load_graph", "max_prob_path", "objective_value", "prepare_campaign",
    "priority_based_budget", "prune_candidates", "run_experiment",
    "run_selection", "save_graph", "size_based_budget", "tag_frequency_matrix",
    "tag_influence", "write_dataset",
]
