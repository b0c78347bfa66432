"""Joint seed-and-tag selection under a shared budget.

All algorithms spend from per-community budget buckets (half for seed users,
half for tags) and process communities in ascending size order, forwarding
whatever a community could not spend to the largest community, which comes
last.  The greedy family ranks choices by cost-scaled marginal gain of the
campaign objective:

* ``emig_ut``  picks (user, tag) pairs jointly; the tag set changes every
  iteration, so each iteration re-aggregates the graph per candidate tag.
* ``emig_u``   commits to tags first (by community tag frequency), aggregates
  once, then greedily picks users.
* ``emig_u_prunn``  is ``emig_u`` with each round's candidate pool cut to the
  top-k users by a cheap degree/cost score.

Random, degree-based, and community-aware degree-based baselines complete the
line-up.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .community import (BudgetPlan, CommunityPartition, TagFrequencyMatrix,
                        priority_based_budget, size_based_budget,
                        tag_frequency_matrix)
from .diffusion import (DEFAULT_THETA, SpreadEvaluator, earned_benefit,
                        tag_influence)
from .graph import (CostedSelection, NodeCosts, TagCatalog, TagGraph,
                    TargetProfile, aggregate_graph)


@dataclass(eq=False)
class Objective:
    """What a campaign maximises: plain influence spread, or earned benefit
    over a target profile (whose budget split is steered by ``alpha``)."""

    kind: str
    targets: TargetProfile | None = None
    alpha: float = 0.5

    def __post_init__(self):
        if self.kind not in ("influence", "benefit"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.kind == "benefit":
            if self.targets is None or len(self.targets) == 0:
                raise ValueError("benefit objective needs a non-empty target profile")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


INFLUENCE = Objective("influence")


def objective_value(graph: TagGraph, seeds, tags, objective: Objective,
                    theta: float = DEFAULT_THETA) -> float:
    """Objective value of a (seed set, tag set) pair, from scratch."""
    if objective.kind == "influence":
        return tag_influence(graph, seeds, tags, theta)
    return earned_benefit(graph, seeds, tags, objective.targets, theta)


def _make_evaluator(graph: TagGraph, tags, objective: Objective,
                    theta: float) -> SpreadEvaluator:
    wg = aggregate_graph(graph, tags)
    if objective.kind == "influence":
        return SpreadEvaluator(wg, theta)
    return SpreadEvaluator(wg, theta, roots=objective.targets.targets,
                           weights=objective.targets.benefit)


def _budget_plan(objective: Objective, partition: CommunityPartition,
                 costs: NodeCosts, budget: float) -> BudgetPlan:
    if objective.kind == "influence":
        return size_based_budget(partition, budget)
    return priority_based_budget(partition, costs, objective.targets,
                                 objective.alpha, budget)


def delta_node(graph: TagGraph, costs: NodeCosts, v: int, seeds, tags,
               objective: Objective, theta: float = DEFAULT_THETA) -> float:
    """Cost-scaled marginal gain of one extra seed user."""
    seeds = list(seeds)
    if v in seeds:
        raise ValueError(f"node {v} is already a seed")
    before = objective_value(graph, seeds, tags, objective, theta)
    after = objective_value(graph, seeds + [v], tags, objective, theta)
    return max(after - before, 0.0) / costs[v]


def delta_tag(graph: TagGraph, catalog: TagCatalog, t: int, seeds, tags,
              objective: Objective, theta: float = DEFAULT_THETA) -> float:
    """Cost-scaled marginal gain of one extra campaign tag."""
    tags = list(tags)
    if t in tags:
        raise ValueError(f"tag {t} is already selected")
    before = objective_value(graph, seeds, tags, objective, theta)
    after = objective_value(graph, seeds, tags + [t], objective, theta)
    return max(after - before, 0.0) / float(catalog.tag_cost[t])


def delta_pair(graph: TagGraph, catalog: TagCatalog, costs: NodeCosts,
               v: int, t: int, seeds, tags, objective: Objective,
               theta: float = DEFAULT_THETA) -> float:
    """Cost-scaled marginal gain of adding a (user, tag) pair jointly."""
    seeds, tags = list(seeds), list(tags)
    if v in seeds:
        raise ValueError(f"node {v} is already a seed")
    if t in tags:
        raise ValueError(f"tag {t} is already selected")
    before = objective_value(graph, seeds, tags, objective, theta)
    after = objective_value(graph, seeds + [v], tags + [t], objective, theta)
    return max(after - before, 0.0) / (costs[v] + float(catalog.tag_cost[t]))


@dataclass
class TraceRecord:
    """One selection event: a pick, a budget transfer, or a warning."""

    kind: str
    community: int | None = None
    node: int | None = None
    tag: int | None = None
    delta: float | None = None
    seed_budget: float | None = None
    tag_budget: float | None = None
    note: str | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None or k == "kind"}


@dataclass
class SelectionTrace:
    """Audit log of a greedy run plus the number of gain evaluations spent."""

    records: list = field(default_factory=list)
    gain_evaluations: int = 0

    def picks(self) -> list:
        return [r for r in self.records if r.kind in ("pair", "seed", "tag", "initial-tag")]

    def warnings(self) -> list:
        return [r for r in self.records if r.kind == "warning"]


def _seed_initial_tag(catalog: TagCatalog, tfm: TagFrequencyMatrix,
                      partition: CommunityPartition, plan: BudgetPlan,
                      sel: CostedSelection, trace: SelectionTrace) -> None:
    """Seed the tag set with the most frequent affordable tag of the smallest
    community, paying from that community's tag bucket."""
    c = partition.smallest
    for t in tfm.orders[c]:
        t = int(t)
        cost = float(catalog.tag_cost[t])
        if cost <= plan.tag[c]:
            sel.add_tag(t, cost)
            plan.tag[c] -= cost
            trace.records.append(TraceRecord("initial-tag", community=c, tag=t,
                                             tag_budget=float(plan.tag[c])))
            return
    trace.records.append(TraceRecord("warning", community=c,
                                     note="no affordable initial tag"))


def _transfer(plan: BudgetPlan, c: int, largest: int, which: str,
              trace: SelectionTrace) -> None:
    """Forward community c's leftover bucket(s) to the largest community."""
    if c == largest:
        return
    if which in ("seed", "both"):
        plan.seed[largest] += plan.seed[c]
        plan.seed[c] = 0.0
    if which in ("tag", "both"):
        plan.tag[largest] += plan.tag[c]
        plan.tag[c] = 0.0
    trace.records.append(TraceRecord("transfer", community=c,
                                     seed_budget=float(plan.seed[largest]),
                                     tag_budget=float(plan.tag[largest]),
                                     note=which))


def _warn_if_empty(sel: CostedSelection, trace: SelectionTrace) -> None:
    if not sel.seeds and not sel.tags:
        trace.records.append(TraceRecord(
            "warning", note="budget affords no selection at all"))


def emig_ut(graph: TagGraph, catalog: TagCatalog, costs: NodeCosts,
            partition: CommunityPartition, budget: float, objective: Objective,
            theta: float = DEFAULT_THETA) -> tuple[CostedSelection, SelectionTrace]:
    """Joint greedy over (user, tag) pairs.

    Per community, while both buckets are open, pick the affordable pair with
    the highest cost-scaled marginal gain of the objective; the tag comes from
    the global not-yet-chosen pool, the user from the community.
    """
    plan = _budget_plan(objective, partition, costs, budget)
    tfm = tag_frequency_matrix(partition, catalog)
    sel, trace = CostedSelection(), SelectionTrace()
    _seed_initial_tag(catalog, tfm, partition, plan, sel, trace)
    for c in partition.order:
        c = int(c)
        while plan.seed[c] > 0.0 and plan.tag[c] > 0.0:
            cand_nodes = [int(v) for v in partition.members[c]
                          if not sel.has_seed(int(v)) and costs[int(v)] <= plan.seed[c]]
            cand_tags = [t for t in range(catalog.tag_count)
                         if not sel.has_tag(t) and catalog.tag_cost[t] <= plan.tag[c]]
            if not cand_nodes or not cand_tags:
                break
            base = _make_evaluator(graph, sel.tags, objective, theta).state(sel.seeds)
            best = None
            for t in cand_tags:
                ev = _make_evaluator(graph, sel.tags + [t], objective, theta)
                st = ev.state(sel.seeds)
                tag_cost = float(catalog.tag_cost[t])
                for v in cand_nodes:
                    gain = max(st.total + ev.gain(st, v) - base.total, 0.0)
                    trace.gain_evaluations += 1
                    d = gain / (costs[v] + tag_cost)
                    if best is None or d > best[0] or (d == best[0] and (v, t) < best[1:]):
                        best = (d, v, t)
            d, v, t = best
            sel.add_seed(v, costs[v])
            plan.seed[c] -= costs[v]
            sel.add_tag(t, float(catalog.tag_cost[t]))
            plan.tag[c] -= float(catalog.tag_cost[t])
            trace.records.append(TraceRecord("pair", community=c, node=v, tag=t,
                                             delta=d, seed_budget=float(plan.seed[c]),
                                             tag_budget=float(plan.tag[c])))
        _transfer(plan, c, partition.largest, "both", trace)
    _warn_if_empty(sel, trace)
    return sel, trace


def prune_candidates(graph: TagGraph, candidates, seeds, costs: NodeCosts,
                     k: int) -> list[int]:
    """Top-k candidates by (out-degree minus already-seeded in-neighbours) per
    unit cost; ties by ascending node id."""
    if k <= 0:
        raise ValueError("k must be positive")
    seed_set = set(int(s) for s in seeds)
    outdeg = graph.out_degree()
    scored = []
    for u in candidates:
        u = int(u)
        hit = sum(1 for w in graph.in_neighbors(u) if int(w) in seed_set)
        scored.append(((outdeg[u] - hit) / costs[u], u))
    scored.sort(key=lambda su: (-su[0], su[1]))
    return [u for _, u in scored[:k]]


def _emig_u_impl(graph, catalog, costs, partition, budget, objective, theta,
                 prune_k):
    plan = _budget_plan(objective, partition, costs, budget)
    tfm = tag_frequency_matrix(partition, catalog)
    sel, trace = CostedSelection(), SelectionTrace()
    _seed_initial_tag(catalog, tfm, partition, plan, sel, trace)
    # Tag phase: walk each community's frequency-ordered tag list.
    for c in partition.order:
        c = int(c)
        for t in tfm.orders[c]:
            t = int(t)
            cost = float(catalog.tag_cost[t])
            if not sel.has_tag(t) and cost <= plan.tag[c]:
                sel.add_tag(t, cost)
                plan.tag[c] -= cost
                trace.records.append(TraceRecord("tag", community=c, tag=t,
                                                 tag_budget=float(plan.tag[c])))
        _transfer(plan, c, partition.largest, "tag", trace)
    # Aggregate once over the final tag set, then greedy seed phase.
    ev = _make_evaluator(graph, sel.tags, objective, theta)
    state = ev.state([])
    for c in partition.order:
        c = int(c)
        while plan.seed[c] > 0.0:
            pool = [int(v) for v in partition.members[c] if not sel.has_seed(int(v))]
            if prune_k is not None:
                pool = prune_candidates(graph, pool, state.seeds, costs, prune_k)
            cands = [v for v in pool if costs[v] <= plan.seed[c]]
            if not cands:
                break
            best = None
            for v in cands:
                d = ev.gain(state, v) / costs[v]
                trace.gain_evaluations += 1
                if best is None or d > best[0] or (d == best[0] and v < best[1]):
                    best = (d, v)
            d, v = best
            ev.add_seed(state, v)
            sel.add_seed(v, costs[v])
            plan.seed[c] -= costs[v]
            trace.records.append(TraceRecord("seed", community=c, node=v, delta=d,
                                             seed_budget=float(plan.seed[c])))
        _transfer(plan, c, partition.largest, "seed", trace)
    _warn_if_empty(sel, trace)
    return sel, trace


def emig_u(graph: TagGraph, catalog: TagCatalog, costs: NodeCosts,
           partition: CommunityPartition, budget: float, objective: Objective,
           theta: float = DEFAULT_THETA) -> tuple[CostedSelection, SelectionTrace]:
    """Tags by community frequency first, one aggregation, then greedy seeds."""
    return _emig_u_impl(graph, catalog, costs, partition, budget, objective,
                        theta, prune_k=None)


def emig_u_prunn(graph: TagGraph, catalog: TagCatalog, costs: NodeCosts,
                 partition: CommunityPartition, budget: float,
                 objective: Objective, k: int = 200,
                 theta: float = DEFAULT_THETA) -> tuple[CostedSelection, SelectionTrace]:
    """``emig_u`` whose seed rounds only score the top-k degree/cost candidates."""
    return _emig_u_impl(graph, catalog, costs, partition, budget, objective,
                        theta, prune_k=int(k))


def baseline_rn_rt(graph: TagGraph, catalog: TagCatalog, costs: NodeCosts,
                   budget: float, seed: int) -> CostedSelection:
    """Random affordable users and tags, half the budget to each side."""
    rng = np.random.default_rng(seed)
    sel = CostedSelection()
    rem = budget / 2.0
    for u in rng.permutation(graph.n):
        u = int(u)
        if costs[u] <= rem:
            sel.add_seed(u, costs[u])
            rem -= costs[u]
    rem = budget / 2.0
    for t in rng.permutation(catalog.tag_count):
        t = int(t)
        cost = float(catalog.tag_cost[t])
        if cost <= rem:
            sel.add_tag(t, cost)
            rem -= cost
    return sel


def baseline_hn_ht(graph: TagGraph, catalog: TagCatalog, costs: NodeCosts,
                   budget: float) -> CostedSelection:
    """Highest out-degree users and globally most used tags, half budget each."""
    sel = CostedSelection()
    outdeg = graph.out_degree()
    rem = budget / 2.0
    for u in np.lexsort((np.arange(graph.n), -outdeg)):
        u = int(u)
        if costs[u] <= rem:
            sel.add_seed(u, costs[u])
            rem -= costs[u]
    freq = catalog.global_frequency()
    rem = budget / 2.0
    for t in np.lexsort((np.arange(catalog.tag_count), -freq)):
        t = int(t)
        cost = float(catalog.tag_cost[t])
        if cost <= rem:
            sel.add_tag(t, cost)
            rem -= cost
    return sel


def baseline_hn_ht_comm(graph: TagGraph, catalog: TagCatalog, costs: NodeCosts,
                        partition: CommunityPartition,
                        budget: float) -> CostedSelection:
    """Community-aware variant: each half budget is spread over communities by
    size, then spent on locally high-degree users and locally frequent tags."""
    from .community import _capped_shares  # shared drift trimming

    sel = CostedSelection()
    half = budget / 2.0
    node_share = _capped_shares(partition.sizes / partition.n * half, half)
    tag_share = _capped_shares(partition.sizes / partition.n * half, half)
    local_deg = np.zeros(graph.n, dtype=np.int64)
    same = partition.assignment[graph.src] == partition.assignment[graph.dst]
    np.add.at(local_deg, graph.src[same], 1)
    tfm = tag_frequency_matrix(partition, catalog)
    for c in partition.order:
        c = int(c)
        members = partition.members[c]
        rem = float(node_share[c])
        for u in members[np.lexsort((members, -local_deg[members]))]:
            u = int(u)
            if costs[u] <= rem:
                sel.add_seed(u, costs[u])
                rem -= costs[u]
        rem = float(tag_share[c])
        for t in tfm.orders[c]:
            t = int(t)
            cost = float(catalog.tag_cost[t])
            if not sel.has_tag(t) and cost <= rem:
                sel.add_tag(t, cost)
                rem -= cost
    return sel
