"""Influence diffusion under the maximum-influence arborescence approximation.

Influence reaching a node v is approximated on MIIA(v, theta): the union of
maximum-probability paths into v whose probability is at least theta.  On
that in-arborescence the activation probability of v given a seed set has an
exact leaves-to-root recursion:

    ap(u) = 1                                   if u is a seed
    ap(u) = 0                                   if u is a non-seed leaf
    ap(u) = 1 - prod_children (1 - ap(w) p(w,u)) otherwise

Influence spread sums ap(v) over every node's own arborescence; earned
benefit sums benefit-weighted ap over target nodes only.  The evaluator below
caches per-root recursion state so that the marginal effect of one extra seed
only recomputes values along the seed-to-root path of each affected tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csgraph

from .graph import TagGraph, TargetProfile, WeightedDigraph, aggregate_graph

DEFAULT_THETA = 1.0 / 320.0


@dataclass
class MiiaTree:
    """Maximum-influence in-arborescence of one root.

    Positions are a topological order (children before parents; the root is
    the last position), so a single forward sweep evaluates the activation
    recursion.  ``parent[j]`` is the position of j's parent (-1 for the root)
    and ``pprob[j]`` the probability of the edge node[j] -> node[parent[j]].
    """

    root: int
    theta: float
    node: np.ndarray
    parent: np.ndarray
    pprob: np.ndarray
    path_prob: np.ndarray
    child_start: np.ndarray
    child_list: np.ndarray

    def __post_init__(self):
        self.pos = {int(u): j for j, u in enumerate(self.node)}

    @property
    def size(self) -> int:
        return self.node.size

    def contains(self, u: int) -> bool:
        return u in self.pos


def _resolve_path_probs(wg: WeightedDigraph, root: int, drow: np.ndarray,
                        lens: np.ndarray, cand: np.ndarray):
    """Pick parents by (path length, smallest successor id) and take products.

    Returns per-node parent, parent edge probability, exact path probability
    and depth, as dicts over candidate ids.  Probabilities are recomputed as
    products of true edge weights, so the log-space lengths only ever decide
    the tree shape.
    """
    parent: dict[int, int] = {}
    parent_w: dict[int, float] = {}
    for u in cand:
        u = int(u)
        if u == root:
            continue
        sl = wg.out_slice(u)
        heads = wg.dst[sl]
        vals = drow[heads] + lens[sl]
        j = int(np.argmin(vals))  # heads ascend, so the first min is the smallest id
        parent[u] = int(heads[j])
        parent_w[u] = float(wg.weight[sl][j])
    prob = {root: 1.0}
    depth = {root: 0}
    remaining = [int(u) for u in cand if int(u) != root]
    remaining.sort(key=lambda u: (drow[u], u))
    while remaining:
        deferred = []
        for u in remaining:
            p = parent[u]
            if p in prob:
                prob[u] = parent_w[u] * prob[p]
                depth[u] = depth[p] + 1
            else:
                deferred.append(u)
        if len(deferred) == len(remaining):
            # Only reachable through ties of zero-length (unit probability)
            # cycles.  Re-anchor each stuck node on an already resolved
            # alternative of equal path length, dropping it if none exists.
            fixed = False
            for u in list(deferred):
                sl = wg.out_slice(u)
                heads = wg.dst[sl]
                vals = drow[heads] + lens[sl]
                for j in np.flatnonzero(vals == drow[u]):
                    h = int(heads[j])
                    if h in prob:
                        parent[u] = h
                        parent_w[u] = float(wg.weight[sl][j])
                        prob[u] = parent_w[u] * prob[h]
                        depth[u] = depth[h] + 1
                        deferred.remove(u)
                        fixed = True
                        break
            if not fixed:
                break
        remaining = deferred
    return parent, parent_w, prob, depth


def _assemble_tree(root: int, theta: float, parent, parent_w, prob, depth) -> MiiaTree:
    kept = sorted((u for u, p in prob.items() if p >= theta),
                  key=lambda u: (-depth[u], u))
    size = len(kept)
    node = np.asarray(kept, dtype=np.int64)
    pos = {u: j for j, u in enumerate(kept)}
    parent_pos = np.full(size, -1, dtype=np.int64)
    pprob = np.zeros(size)
    path_prob = np.empty(size)
    for j, u in enumerate(kept):
        path_prob[j] = prob[u]
        if u != root:
            parent_pos[j] = pos[parent[u]]
            pprob[j] = parent_w[u]
    child_start = np.zeros(size + 1, dtype=np.int64)
    np.add.at(child_start, parent_pos[parent_pos >= 0] + 1, 1)
    np.cumsum(child_start, out=child_start)
    fill = child_start[:-1].copy()
    child_list = np.zeros(max(size - 1, 0), dtype=np.int64)
    for j in range(size):
        p = parent_pos[j]
        if p >= 0:
            child_list[fill[p]] = j
            fill[p] += 1
    return MiiaTree(root, theta, node, parent_pos, pprob, path_prob,
                    child_start, child_list)


def build_miia_forest(wg: WeightedDigraph, roots: Sequence[int],
                      theta: float) -> list[MiiaTree]:
    """Build MIIA(root, theta) for every requested root in one Dijkstra batch."""
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")
    roots = [int(r) for r in roots]
    for r in roots:
        if not 0 <= r < wg.n:
            raise ValueError(f"root {r} outside [0, {wg.n})")
    cutoff = float(-np.log(theta)) + 1e-9
    if wg.m == 0:
        dist = np.full((len(roots), wg.n), np.inf)
        for i, r in enumerate(roots):
            dist[i, r] = 0.0
    else:
        rev = wg.reverse_lengths_csr()
        dist = csgraph.dijkstra(rev, directed=True, indices=roots, limit=cutoff)
        dist = np.atleast_2d(dist)
    lens = -np.log(np.minimum(wg.weight, 1.0 - 1e-16)) if wg.m else np.zeros(0)
    trees = []
    for i, r in enumerate(roots):
        drow = dist[i]
        cand = np.flatnonzero(np.isfinite(drow))
        parent, parent_w, prob, depth = _resolve_path_probs(wg, r, drow, lens, cand)
        trees.append(_assemble_tree(r, theta, parent, parent_w, prob, depth))
    return trees


def build_miia(wg: WeightedDigraph, root: int, theta: float) -> MiiaTree:
    """Maximum-influence in-arborescence of ``root`` at threshold ``theta``."""
    return build_miia_forest(wg, [root], theta)[0]


def max_prob_path(wg: WeightedDigraph, u: int, v: int) -> tuple[list[int], float]:
    """Maximum-probability path u -> v; ([], 0.0) when unreachable.

    Ties between equal-probability paths are broken hop by hop towards the
    smallest successor node id.
    """
    for x in (u, v):
        if not 0 <= x < wg.n:
            raise ValueError(f"node {x} outside [0, {wg.n})")
    if u == v:
        return [u], 1.0
    if wg.m == 0:
        return [], 0.0
    rev = wg.reverse_lengths_csr()
    drow, pred = csgraph.dijkstra(rev, directed=True, indices=v,
                                  return_predecessors=True)
    if not np.isfinite(drow[u]):
        return [], 0.0
    lens = -np.log(np.minimum(wg.weight, 1.0 - 1e-16))
    path = [u]
    cur, seen = u, {u}
    while cur != v:
        sl = wg.out_slice(cur)
        heads = wg.dst[sl]
        vals = drow[heads] + lens[sl]
        nxt = int(heads[int(np.argmin(vals))])
        if nxt in seen:  # pathological unit-probability tie cycle
            path = [u]
            cur = u
            while cur != v:
                cur = int(pred[cur])
                path.append(cur)
            break
        path.append(nxt)
        seen.add(nxt)
        cur = nxt
    prob = 1.0
    for a, b in zip(reversed(path[:-1]), reversed(path[1:])):
        prob = wg.weight_of(a, b) * prob
    return path, prob


@dataclass
class ActivationMap:
    """Activation probability of every node of one arborescence."""

    tree: MiiaTree
    ap: np.ndarray

    def of(self, u: int) -> float:
        return float(self.ap[self.tree.pos[u]])

    @property
    def root_ap(self) -> float:
        return float(self.ap[-1]) if self.ap.size else 0.0


def _seed_mask(n: int, seeds: Iterable[int]) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    for s in seeds:
        if not 0 <= s < n:
            raise ValueError(f"seed {s} outside [0, {n})")
        mask[s] = True
    return mask


def _evaluate_tree(tree: MiiaTree, seed_mask: np.ndarray, products: bool):
    """Leaves-to-root activation recursion over one arborescence.

    With ``products`` set, also returns for every non-root position j the
    factor f[j] = 1 - ap[j] pprob[j] and the pre/suf products of its siblings'
    factors, which lets a later single-seed update rebuild any ancestor in
    O(1) without dividing.
    """
    size = tree.size
    ap = np.zeros(size)
    f = np.ones(size) if products else None
    pre = np.ones(size) if products else None
    suf = np.ones(size) if products else None
    is_seed = seed_mask[tree.node] if size else np.zeros(0, dtype=bool)
    child_start, child_list, pprob = tree.child_start, tree.child_list, tree.pprob
    for j in range(size):
        if is_seed[j]:
            ap[j] = 1.0
            continue
        s, e = child_start[j], child_start[j + 1]
        if s == e:
            continue
        prod = 1.0
        if products:
            for k in range(s, e):
                c = child_list[k]
                fc = 1.0 - ap[c] * pprob[c]
                f[c] = fc
                pre[c] = prod
                prod = prod * fc
            acc = 1.0
            for k in range(e - 1, s - 1, -1):
                c = child_list[k]
                suf[c] = acc
                acc = acc * f[c]
        else:
            for k in range(s, e):
                c = child_list[k]
                prod = prod * (1.0 - ap[c] * pprob[c])
        ap[j] = 1.0 - prod
    return ap, f, pre, suf


def activation_probability(tree: MiiaTree, seeds: Iterable[int]) -> ActivationMap:
    """Activation probabilities on one arborescence for a seed set."""
    n = int(tree.node.max()) + 1 if tree.size else 1
    mask = np.zeros(n, dtype=bool)
    for s in seeds:
        if 0 <= s < n:
            mask[s] = True
    ap, _, _, _ = _evaluate_tree(tree, mask, products=False)
    return ActivationMap(tree, ap)


@dataclass
class SpreadState:
    """Cached recursion state of an evaluator for one seed set."""

    seeds: set
    seed_mask: np.ndarray
    ap: list
    f: list
    pre: list
    suf: list
    root_vals: np.ndarray
    total: float


class SpreadEvaluator:
    """Weighted activation totals over a fixed aggregated graph.

    With unit weights over all nodes the total is the influence spread; with
    benefit weights over target nodes it is the earned benefit.  Arborescences
    are built once per aggregated graph; adding a seed re-evaluates only the
    trees containing it, and probing a candidate seed walks just its path to
    each affected root.
    """

    def __init__(self, wg: WeightedDigraph, theta: float = DEFAULT_THETA,
                 roots: Sequence[int] | None = None,
                 weights: np.ndarray | None = None):
        self.wg = wg
        self.theta = float(theta)
        if roots is None:
            roots = np.arange(wg.n)
        self.roots = np.asarray(roots, dtype=np.int64)
        if weights is None:
            weights = np.ones(self.roots.size)
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.shape != self.roots.shape:
            raise ValueError("one weight per root required")
        self.forest = build_miia_forest(wg, self.roots, theta)
        self.containing: list[list[int]] = [[] for _ in range(wg.n)]
        for i, tree in enumerate(self.forest):
            for u in tree.node:
                self.containing[int(u)].append(i)

    def state(self, seeds: Iterable[int]) -> SpreadState:
        """Full evaluation of a seed set."""
        seed_set = {int(s) for s in seeds}
        mask = _seed_mask(self.wg.n, seed_set)
        ap_l, f_l, pre_l, suf_l = [], [], [], []
        root_vals = np.zeros(len(self.forest))
        for i, tree in enumerate(self.forest):
            ap, f, pre, suf = _evaluate_tree(tree, mask, products=True)
            ap_l.append(ap)
            f_l.append(f)
            pre_l.append(pre)
            suf_l.append(suf)
            root_vals[i] = ap[-1] if ap.size else 0.0
        total = float(np.sum(self.weights * root_vals))
        return SpreadState(seed_set, mask, ap_l, f_l, pre_l, suf_l, root_vals, total)

    def _tree_gain(self, i: int, state: SpreadState, v: int) -> float:
        tree = self.forest[i]
        ap = state.ap[i]
        cur = tree.pos[v]
        if ap[cur] == 1.0:
            return 0.0
        new_val = 1.0
        parent, pprob = tree.parent, tree.pprob
        pre, suf = state.pre[i], state.suf[i]
        while parent[cur] >= 0:
            par = parent[cur]
            if ap[par] == 1.0:
                return 0.0
            fc = 1.0 - new_val * pprob[cur]
            new_par = 1.0 - pre[cur] * fc * suf[cur]
            if new_par == ap[par]:
                return 0.0
            new_val = new_par
            cur = par
        return new_val - ap[cur]

    def gain(self, state: SpreadState, v: int) -> float:
        """Marginal total of adding seed v to the state's seed set."""
        v = int(v)
        if v in state.seeds:
            raise ValueError(f"node {v} is already a seed")
        acc = 0.0
        for i in self.containing[v]:
            acc += self.weights[i] * self._tree_gain(i, state, v)
        return max(acc, 0.0)

    def add_seed(self, state: SpreadState, v: int) -> None:
        """Commit seed v, re-evaluating every tree that contains it."""
        v = int(v)
        if v in state.seeds:
            raise ValueError(f"node {v} is already a seed")
        state.seeds.add(v)
        state.seed_mask[v] = True
        for i in self.containing[v]:
            ap, f, pre, suf = _evaluate_tree(self.forest[i], state.seed_mask,
                                             products=True)
            state.ap[i], state.f[i], state.pre[i], state.suf[i] = ap, f, pre, suf
            state.root_vals[i] = ap[-1] if ap.size else 0.0
        state.total = float(np.sum(self.weights * state.root_vals))

    def spread(self, seeds: Iterable[int]) -> float:
        return self.state(seeds).total


def influence_spread(wg: WeightedDigraph, seeds: Iterable[int],
                     theta: float = DEFAULT_THETA) -> float:
    """Expected number of activated nodes under the arborescence model."""
    return SpreadEvaluator(wg, theta).spread(seeds)


def tag_influence(graph: TagGraph, seeds: Iterable[int], tags: Iterable[int],
                  theta: float = DEFAULT_THETA) -> float:
    """Influence spread of a seed set under a chosen tag set."""
    return influence_spread(aggregate_graph(graph, tags), seeds, theta)


def earned_benefit(graph: TagGraph, seeds: Iterable[int], tags: Iterable[int],
                   targets: TargetProfile, theta: float = DEFAULT_THETA) -> float:
    """Benefit-weighted activation mass over the target users."""
    wg = aggregate_graph(graph, tags)
    if targets.targets.size and int(targets.targets.max()) >= wg.n:
        raise ValueError("target user outside the graph")
    ev = SpreadEvaluator(wg, theta, roots=targets.targets, weights=targets.benefit)
    return ev.spread(seeds)
