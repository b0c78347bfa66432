"""Experiment harness: one declarative spec drives a reproducible campaign run.

A CampaignSpec names the dataset, the probability setting, the objective, the
algorithms, the budget grid, and every random seed.  All randomness flows
through those named seeds, so a spec fully determines the selections, their
objective values, and every output byte (wall-clock timings aside, which can
be fixed by injecting a clock).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .community import CommunityPartition, detect_communities
from .datasets import Dataset, load_dataset
from .diffusion import DEFAULT_THETA
from .graph import NodeCosts, TagCatalog, TagGraph, TargetProfile
from .probmodels import (assign_count_probability, assign_trivalency,
                         assign_weighted_cascade)
from .selection import (INFLUENCE, Objective, baseline_hn_ht,
                        baseline_hn_ht_comm, baseline_rn_rt, emig_u,
                        emig_u_prunn, emig_ut, objective_value)

ALGORITHMS = ("emig-ut", "emig-u", "emig-u-prunn", "rn-rt", "hn-ht", "hn-ht-comm")
PROB_SETTINGS = ("trivalency", "count", "wc")
OBJECTIVES = ("influence", "benefit")
DEFAULT_BUDGETS = tuple(float(b) for b in range(1000, 9000, 1000))
DEFAULT_ALPHAS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class CampaignSpec:
    """Everything needed to reproduce one experiment, seeds included."""

    dataset: str
    prob_setting: str = "trivalency"
    objective: str = "influence"
    algos: tuple = ("emig-u",)
    budgets: tuple = DEFAULT_BUDGETS
    theta: float = DEFAULT_THETA
    alpha: float = 0.5
    tag_cap: int = 1000
    target_tags: tuple = ()
    prob_seed: int = 0
    cost_seed: int = 0
    benefit_seed: int = 0
    baseline_seed: int = 0
    community_seed: int | None = None
    prune_k: int = 200
    use_prob_file: bool = False

    def __post_init__(self):
        if self.prob_setting not in PROB_SETTINGS:
            raise ValueError(f"prob_setting must be one of {PROB_SETTINGS}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        for a in self.algos:
            if a not in ALGORITHMS:
                raise ValueError(f"algos contains unknown algorithm {a!r}")
        if not self.budgets:
            raise ValueError("budgets must be non-empty")
        if any(b <= 0 for b in self.budgets):
            raise ValueError("budgets must be positive")
        if list(self.budgets) != sorted(self.budgets):
            raise ValueError("budgets must be ascending")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.tag_cap < 1:
            raise ValueError("tag_cap must be at least 1")
        if self.prune_k < 1:
            raise ValueError("prune_k must be at least 1")
        if self.objective == "benefit" and not self.target_tags:
            raise ValueError("benefit objective needs target_tags")


def reduce_tag_universe(counts: sp.csr_matrix, partition: CommunityPartition,
                        cap: int) -> tuple[sp.csr_matrix, np.ndarray]:
    """Keep the top-``cap`` tags, taken round-robin over the communities'
    frequency ranks; remaining capacity is filled by ascending tag id.

    Returns the reduced count matrix and the kept original tag ids in
    ascending order (the new tag id is the position in that array).
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    tag_count = counts.shape[1]
    if cap >= tag_count:
        return counts.copy(), np.arange(tag_count)
    per_comm = np.zeros((partition.k, tag_count))
    dense = np.asarray(counts.todense(), dtype=np.float64)
    np.add.at(per_comm, partition.assignment, dense)
    tag_ids = np.arange(tag_count)
    orders = [np.lexsort((tag_ids, -per_comm[c])) for c in range(partition.k)]
    kept: list[int] = []
    kept_set: set[int] = set()
    for rank in range(tag_count):
        for c in range(partition.k):
            t = int(orders[c][rank])
            if per_comm[c][t] > 0 and t not in kept_set:
                kept.append(t)
                kept_set.add(t)
                if len(kept) == cap:
                    break
        if len(kept) == cap:
            break
    if len(kept) < cap:
        for t in range(tag_count):
            if t not in kept_set:
                kept.append(t)
                kept_set.add(t)
                if len(kept) == cap:
                    break
    kept_arr = np.array(sorted(kept), dtype=np.int64)
    return counts[:, kept_arr].tocsr(), kept_arr


def generate_costs(n: int, tag_count: int, seed: int) -> tuple[NodeCosts, np.ndarray]:
    """Node costs uniform on [50, 100], tag costs uniform on [25, 50]."""
    rng = np.random.default_rng(seed)
    node = rng.uniform(50.0, 100.0, size=n)
    tag = rng.uniform(25.0, 50.0, size=tag_count)
    return NodeCosts(node), tag


def derive_targets(counts: sp.csr_matrix, target_tags) -> np.ndarray:
    """Users who applied at least one of the targeted tags."""
    target_tags = sorted(set(int(t) for t in target_tags))
    if not target_tags:
        return np.zeros(0, dtype=np.int64)
    sub = counts[:, target_tags]
    return np.flatnonzero(np.asarray((sub > 0).sum(axis=1)).ravel() > 0)


def assign_benefits(graph: TagGraph, counts: sp.csr_matrix, targets: np.ndarray,
                    target_tags, seed: int | None = None) -> TargetProfile:
    """Benefit of each target: targeted-tag usage mass of its out-neighbours,
    min-max scaled into [50, 100].

    A target whose own row and whose out-neighbours' rows have no targeted tag
    gets benefit 0.  When every eligible raw score coincides, all eligible
    targets get the interval midpoint 75.  The recipe is deterministic; the
    seed parameter only keeps the harness signature uniform.
    """
    target_tags = sorted(set(int(t) for t in target_tags))
    dense = np.asarray(counts.todense(), dtype=np.float64)
    tag_mass = dense[:, target_tags].sum(axis=1) if target_tags else np.zeros(graph.n)
    raw = np.zeros(len(targets))
    eligible = np.zeros(len(targets), dtype=bool)
    for i, v in enumerate(targets):
        v = int(v)
        neigh = graph.out_neighbors(v)
        raw[i] = float(tag_mass[neigh].sum()) if neigh.size else 0.0
        eligible[i] = bool(tag_mass[v] > 0 or (neigh.size and np.any(tag_mass[neigh] > 0)))
    benefit = np.zeros(len(targets))
    if np.any(eligible):
        lo, hi = raw[eligible].min(), raw[eligible].max()
        if hi > lo:
            benefit[eligible] = 50.0 + (raw[eligible] - lo) / (hi - lo) * 50.0
        else:
            benefit[eligible] = 75.0
    return TargetProfile(np.asarray(targets, dtype=np.int64), benefit)


@dataclass
class PreparedCampaign:
    """Everything derived from a spec up to (but excluding) selection runs."""

    spec: CampaignSpec
    graph: TagGraph
    catalog: TagCatalog
    costs: NodeCosts
    partition: CommunityPartition
    objective: Objective
    kept_tags: np.ndarray


def prepare_campaign(spec: CampaignSpec, dataset: Dataset | None = None) -> PreparedCampaign:
    """Load, partition, reduce the tag universe, draw probabilities and costs."""
    if dataset is None:
        dataset = load_dataset(spec.dataset)
    graph, counts = dataset.graph, dataset.tag_counts
    partition = detect_communities(graph, spec.community_seed)
    counts, kept = reduce_tag_universe(counts, partition, spec.tag_cap)
    if spec.use_prob_file:
        if graph.tag_count != counts.shape[1]:
            raise ValueError("probability file replay cannot follow tag reduction")
        reduced = graph
    else:
        reduced = TagGraph(graph.n, list(zip(graph.src, graph.dst)), counts.shape[1])
        if spec.prob_setting == "trivalency":
            reduced = assign_trivalency(reduced, spec.prob_seed)
        elif spec.prob_setting == "count":
            reduced = assign_count_probability(reduced, counts)
        else:
            reduced = assign_weighted_cascade(reduced, counts)
    node_costs, tag_costs = generate_costs(graph.n, counts.shape[1], spec.cost_seed)
    catalog = TagCatalog(counts.shape[1], tag_costs, counts)
    if spec.objective == "benefit":
        kept_pos = {int(t): i for i, t in enumerate(kept)}
        mapped = [kept_pos[t] for t in spec.target_tags if int(t) in kept_pos]
        if not mapped:
            raise ValueError("no target tag survived the tag universe reduction")
        targets = derive_targets(counts, mapped)
        if targets.size == 0:
            raise ValueError("target_tags select no users")
        profile = assign_benefits(reduced, counts, targets, mapped, spec.benefit_seed)
        objective = Objective("benefit", profile, spec.alpha)
    else:
        objective = INFLUENCE
    return PreparedCampaign(spec, reduced, catalog, node_costs, partition,
                            objective, kept)


def run_selection(prep: PreparedCampaign, algo: str, budget: float):
    """Run one algorithm at one budget on a prepared campaign.

    Returns ``(selection, trace)``; baselines carry no trace (None).
    """
    spec = prep.spec
    trace = None
    if algo == "emig-ut":
        sel, trace = emig_ut(prep.graph, prep.catalog, prep.costs,
                             prep.partition, budget, prep.objective, spec.theta)
    elif algo == "emig-u":
        sel, trace = emig_u(prep.graph, prep.catalog, prep.costs,
                            prep.partition, budget, prep.objective, spec.theta)
    elif algo == "emig-u-prunn":
        sel, trace = emig_u_prunn(prep.graph, prep.catalog, prep.costs,
                                  prep.partition, budget, prep.objective,
                                  spec.prune_k, spec.theta)
    elif algo == "rn-rt":
        sel = baseline_rn_rt(prep.graph, prep.catalog, prep.costs, budget,
                             spec.baseline_seed)
    elif algo == "hn-ht":
        sel = baseline_hn_ht(prep.graph, prep.catalog, prep.costs, budget)
    elif algo == "hn-ht-comm":
        sel = baseline_hn_ht_comm(prep.graph, prep.catalog, prep.costs,
                                  prep.partition, budget)
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    return sel, trace


@dataclass
class ResultRow:
    """One (algorithm, budget) outcome of an experiment."""

    algo: str
    budget: float
    objective: str
    value: float
    n_seeds: int
    n_tags: int
    spend_seed: float
    spend_tag: float
    seconds: float

    def __post_init__(self):
        if self.spend_seed + self.spend_tag > self.budget + 1e-9:
            raise ValueError("selection spend exceeds the budget")


def run_experiment(spec: CampaignSpec, out_dir=None, clock=time.perf_counter,
                   dataset: Dataset | None = None) -> list[ResultRow]:
    """Run every (algorithm, budget) cell; optionally write reports.

    Rows come back ordered by (algorithm, budget).  With ``out_dir`` set, a
    results CSV, a plot-data TSV, and a rendered figure land there.
    """
    prep = prepare_campaign(spec, dataset)
    rows = []
    for algo in spec.algos:
        for budget in spec.budgets:
            t0 = clock()
            sel, _ = run_selection(prep, algo, budget)
            seconds = clock() - t0
            value = objective_value(prep.graph, sel.seeds, sel.tags,
                                    prep.objective, spec.theta)
            rows.append(ResultRow(algo, float(budget), spec.objective, value,
                                  len(sel.seeds), len(sel.tags),
                                  sel.spend_seed, sel.spend_tag, seconds))
    rows.sort(key=lambda r: (r.algo, r.budget))
    if out_dir is not None:
        from . import reporting
        reporting.write_reports(rows, out_dir, spec.objective)
    return rows


def alpha_sweep(spec: CampaignSpec, alphas=DEFAULT_ALPHAS, out_dir=None,
                clock=time.perf_counter,
                dataset: Dataset | None = None) -> dict[float, list[ResultRow]]:
    """Benefit runs across the alpha grid, all other seeds held fixed."""
    if spec.objective != "benefit":
        spec = replace(spec, objective="benefit")
    results: dict[float, list[ResultRow]] = {}
    for alpha in alphas:
        a_spec = replace(spec, alpha=float(alpha))
        results[float(alpha)] = run_experiment(a_spec, out_dir=None, clock=clock,
                                               dataset=dataset)
    if out_dir is not None:
        from . import reporting
        reporting.write_alpha_reports(results, out_dir)
    return results
