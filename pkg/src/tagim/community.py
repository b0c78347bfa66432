"""Community structure, per-community tag frequencies, and budget splitting.

Campaign selection works community by community: the total budget is first
divided across communities (by size, or by a cost/benefit priority when the
objective is earned benefit) and then split evenly between a seed bucket and
a tag bucket inside each community.  Detection runs a deterministic Louvain
style modularity greedy over the undirected projection of the graph, so the
same input always yields the same partition; any other partitioner can be
substituted by constructing a CommunityPartition directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import NodeCosts, TagCatalog, TagGraph, TargetProfile


@dataclass
class CommunityPartition:
    """Node-to-community assignment with size bookkeeping.

    ``order`` lists community indices by ascending size (ties by index), so
    ``order[-1]`` is the largest community, which selection processes last.
    """

    assignment: np.ndarray

    def __post_init__(self):
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        if self.assignment.size == 0:
            raise ValueError("partition of an empty node set")
        self.k = int(self.assignment.max()) + 1
        if sorted(set(self.assignment.tolist())) != list(range(self.k)):
            raise ValueError("community indices must be dense 0..k-1")
        self.members = [np.flatnonzero(self.assignment == c) for c in range(self.k)]
        self.sizes = np.array([len(m) for m in self.members], dtype=np.int64)
        self.order = np.lexsort((np.arange(self.k), self.sizes))

    @property
    def n(self) -> int:
        return self.assignment.size

    @property
    def largest(self) -> int:
        return int(self.order[-1])

    @property
    def smallest(self) -> int:
        return int(self.order[0])


def _undirected_projection(graph: TagGraph) -> list[dict[int, float]]:
    """Symmetric adjacency with one weight unit per edge direction."""
    adj: list[dict[int, float]] = [dict() for _ in range(graph.n)]
    for s, d in zip(graph.src, graph.dst):
        s, d = int(s), int(d)
        adj[s][d] = adj[s].get(d, 0.0) + 1.0
        adj[d][s] = adj[d].get(s, 0.0) + 1.0
    return adj


def _louvain_level(adj: list[dict[int, float]], self_w: np.ndarray,
                   order: np.ndarray) -> tuple[np.ndarray, int]:
    """One local-moving phase; returns (node -> community, number of moves)."""
    n = len(adj)
    degree = np.array([sum(nb.values()) for nb in adj]) + 2.0 * self_w
    two_m = float(degree.sum())
    if two_m == 0.0:
        return np.arange(n), 0
    com = np.arange(n)
    tot = degree.copy()
    total_moves = 0
    while True:
        moves = 0
        for u in order:
            u = int(u)
            cu = int(com[u])
            # Weight from u to each adjacent community.
            link: dict[int, float] = {}
            for v, w in adj[u].items():
                c = int(com[v])
                link[c] = link.get(c, 0.0) + w
            tot[cu] -= degree[u]
            stay = link.get(cu, 0.0) - tot[cu] * degree[u] / two_m
            best_c, best_gain = cu, stay
            for c in sorted(link):
                if c == cu:
                    continue
                gain = link[c] - tot[c] * degree[u] / two_m
                if gain > best_gain + 1e-12:
                    best_c, best_gain = c, gain
            com[u] = best_c
            tot[best_c] += degree[u]
            if best_c != cu:
                moves += 1
        total_moves += moves
        if moves == 0:
            break
    return com, total_moves


def _relabel_dense(labels: np.ndarray) -> np.ndarray:
    """Map arbitrary labels to 0..k-1 in order of first appearance by node id."""
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        lab = int(lab)
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return out


def detect_communities(graph: TagGraph, seed: int | None = None) -> CommunityPartition:
    """Deterministic modularity-greedy partition of the undirected projection.

    With ``seed`` given, the node sweep order of each level is a seeded
    permutation; otherwise nodes are swept in ascending id order.  Either way
    the result is a pure function of the inputs.
    """
    if graph.n == 0:
        raise ValueError("cannot partition an empty graph")
    adj = _undirected_projection(graph)
    self_w = np.zeros(graph.n)
    rng = np.random.default_rng(seed) if seed is not None else None
    node_of = np.arange(graph.n)  # coarse node -> community label per level
    assignment = np.arange(graph.n)
    while True:
        n_level = len(adj)
        order = rng.permutation(n_level) if rng is not None else np.arange(n_level)
        com, moves = _louvain_level(adj, self_w, order)
        if moves == 0:
            break
        com = _relabel_dense(com)
        assignment = com[assignment]
        # Aggregate: communities become nodes, weights summed.
        k = int(com.max()) + 1
        new_adj: list[dict[int, float]] = [dict() for _ in range(k)]
        new_self = np.zeros(k)
        for u, nb in enumerate(adj):
            cu = int(com[u])
            new_self[cu] += self_w[u]
            for v, w in nb.items():
                cv = int(com[v])
                if cu == cv:
                    if u < v:
                        new_self[cu] += w
                else:
                    new_adj[cu][cv] = new_adj[cu].get(cv, 0.0) + w
        adj, self_w = new_adj, new_self
        if len(adj) == n_level:
            break
    return CommunityPartition(_relabel_dense(assignment))


@dataclass
class TagFrequencyMatrix:
    """Per-community tag usage counts with frequency-sorted tag orders.

    ``orders[c]`` lists all tag ids by descending count within community c,
    ties broken by ascending tag id.
    """

    counts: np.ndarray
    orders: np.ndarray

    @classmethod
    def empty(cls, k: int, tag_count: int) -> "TagFrequencyMatrix":
        return cls(np.zeros((k, tag_count)),
                   np.tile(np.arange(tag_count), (k, 1)))


def tag_frequency_matrix(partition: CommunityPartition,
                         catalog: TagCatalog) -> TagFrequencyMatrix:
    """Aggregate user tag counts by community and pre-sort each row."""
    if catalog.n_users != partition.n:
        raise ValueError("catalog and partition disagree on user count")
    counts = np.zeros((partition.k, catalog.tag_count))
    dense = np.asarray(catalog.user_tag_counts.todense(), dtype=np.float64)
    np.add.at(counts, partition.assignment, dense)
    tag_ids = np.arange(catalog.tag_count)
    orders = np.stack([np.lexsort((tag_ids, -counts[c]))
                       for c in range(partition.k)]) if catalog.tag_count else \
        np.zeros((partition.k, 0), dtype=np.int64)
    return TagFrequencyMatrix(counts, orders)


@dataclass
class BudgetPlan:
    """Seed and tag budget per community; buckets never exceed the grand total."""

    seed: np.ndarray
    tag: np.ndarray
    total: float

    def __post_init__(self):
        self.seed = np.asarray(self.seed, dtype=np.float64)
        self.tag = np.asarray(self.tag, dtype=np.float64)
        if self.seed.shape != self.tag.shape:
            raise ValueError("seed and tag buckets must align")
        if self.seed.size and (self.seed.min() < 0 or self.tag.min() < 0):
            raise ValueError("budget buckets must be non-negative")
        if float(self.seed.sum() + self.tag.sum()) > self.total + 1e-6:
            raise ValueError("budget plan exceeds the total budget")


def _capped_shares(raw: np.ndarray, budget: float) -> np.ndarray:
    """Trim float drift so the shares never sum above the budget."""
    shares = raw.copy()
    for _ in range(8):
        excess = float(shares.sum()) - budget
        if excess <= 0.0:
            break
        shares[int(np.argmax(shares))] -= excess
    return shares


def size_based_budget(partition: CommunityPartition, budget: float) -> BudgetPlan:
    """Split the budget across communities by size, then halve into buckets."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    shares = _capped_shares(partition.sizes / partition.n * budget, budget)
    return BudgetPlan(shares / 2.0, shares / 2.0, float(budget))


def community_priority(partition: CommunityPartition, costs: NodeCosts,
                       targets: TargetProfile | None, alpha: float) -> np.ndarray:
    """Cost/benefit mixture priority of each community.

    priority_c = alpha * (community cost share) + (1 - alpha) * (community
    share of total target benefit).  The priorities sum to 1.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if len(costs) != partition.n:
        raise ValueError("cost vector and partition disagree on node count")
    cost_share = np.zeros(partition.k)
    np.add.at(cost_share, partition.assignment, costs.cost)
    cost_share /= cost_share.sum()
    if alpha == 1.0:
        return cost_share
    if targets is None or len(targets) == 0:
        raise ValueError("priority with alpha < 1 needs a non-empty target set")
    total_benefit = targets.total_benefit
    if total_benefit <= 0.0:
        raise ValueError("priority with alpha < 1 needs positive total benefit")
    benefit_share = np.zeros(partition.k)
    np.add.at(benefit_share, partition.assignment[targets.targets], targets.benefit)
    benefit_share /= total_benefit
    return alpha * cost_share + (1.0 - alpha) * benefit_share


def priority_based_budget(partition: CommunityPartition, costs: NodeCosts,
                          targets: TargetProfile | None, alpha: float,
                          budget: float) -> BudgetPlan:
    """Split the budget across communities by priority, then halve into buckets."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    pri = community_priority(partition, costs, targets, alpha)
    shares = _capped_shares(pri / pri.sum() * budget, budget)
    return BudgetPlan(shares / 2.0, shares / 2.0, float(budget))
