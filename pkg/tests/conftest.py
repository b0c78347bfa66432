"""Shared test builders and independent reference implementations.

The reference implementations here (product-space Dijkstra, live-edge
Monte-Carlo, brute-force path enumeration) deliberately share no code with
the package internals, so agreement between the two routes is meaningful.
"""

import heapq

import numpy as np

from tagim.graph import TagGraph, WeightedDigraph


# ---------------------------------------------------------------------------
# Random instance builders.
# ---------------------------------------------------------------------------

def random_weighted_digraph(rng, n, p_edge, w_low=0.0, w_high=1.0):
    """Erdos-Renyi digraph with uniform edge probabilities."""
    src, dst, weight = [], [], []
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < p_edge:
                src.append(u)
                dst.append(v)
                weight.append(rng.uniform(w_low, w_high))
    return WeightedDigraph(n, np.array(src, dtype=np.int64),
                           np.array(dst, dtype=np.int64),
                           np.array(weight, dtype=np.float64))


def random_tag_graph(rng, n, p_edge, tag_count, p_low=0.0, p_high=1.0):
    """Erdos-Renyi TagGraph with uniform per-tag probabilities."""
    edges = [(u, v) for u in range(n) for v in range(n)
             if u != v and rng.random() < p_edge]
    g = TagGraph(n, edges, tag_count)
    return g.with_probs(rng.uniform(p_low, p_high, size=(g.m, tag_count)))


def random_arborescence(rng, size, p_low=0.1, p_high=0.9):
    """Random in-arborescence toward node 0: each node's single out-edge
    points at an earlier node, so all paths lead to the root."""
    src, dst, weight = [], [], []
    for j in range(1, size):
        src.append(j)
        dst.append(int(rng.integers(0, j)))
        weight.append(rng.uniform(p_low, p_high))
    return WeightedDigraph(size, np.array(src, dtype=np.int64),
                           np.array(dst, dtype=np.int64),
                           np.array(weight, dtype=np.float64))


# ---------------------------------------------------------------------------
# Reference implementations.
# ---------------------------------------------------------------------------

def oracle_max_in_probs(wg, root):
    """Maximum path probability into ``root`` from every node.

    Plain binary-heap Dijkstra run directly in probability space (maximising
    the product of edge weights), no log transform involved.
    """
    radj = [[] for _ in range(wg.n)]
    for i in range(wg.m):
        radj[int(wg.dst[i])].append((int(wg.src[i]), float(wg.weight[i])))
    best = {root: 1.0}
    done = set()
    heap = [(-1.0, root)]
    while heap:
        negp, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        p = -negp
        for w, pw in radj[u]:
            cand = pw * p
            if cand > best.get(w, 0.0):
                best[w] = cand
                heapq.heappush(heap, (-cand, w))
    return best


def oracle_best_path_prob(wg, u, v):
    """Maximum path probability by exhaustive simple-path enumeration."""
    if u == v:
        return 1.0
    best = 0.0

    def walk(cur, prob, visited):
        nonlocal best
        sl = wg.out_slice(cur)
        for j in range(sl.start, sl.stop):
            nxt = int(wg.dst[j])
            p = prob * float(wg.weight[j])
            if nxt == v:
                best = max(best, p)
            elif nxt not in visited:
                visited.add(nxt)
                walk(nxt, p, visited)
                visited.remove(nxt)

    walk(u, 1.0, {u})
    return best


def live_edge_root_ap(tree, seeds, trials, seed):
    """Monte-Carlo estimate of the root's activation probability.

    Each trial draws every tree edge live/blocked independently with its
    probability; the root activates when some seed has an all-live path up
    to it.  Exact in expectation on an arborescence.
    """
    rng = np.random.default_rng(seed)
    size = tree.size
    seed_set = {int(s) for s in seeds}
    is_seed = np.array([int(u) in seed_set for u in tree.node])
    if is_seed[-1]:
        return 1.0
    live = rng.random((trials, size)) < tree.pprob[None, :]
    reach = np.zeros((trials, size), dtype=bool)
    reach[:, size - 1] = True
    for j in range(size - 2, -1, -1):
        reach[:, j] = reach[:, tree.parent[j]] & live[:, j]
    return float((reach & is_seed[None, :]).any(axis=1).mean())


def oracle_prune_scores(graph, candidates, seeds, costs):
    """Degree/cost pruning scores recomputed with plain loops."""
    seed_set = {int(s) for s in seeds}
    scores = {}
    for u in candidates:
        u = int(u)
        out = 0
        for i in range(graph.m):
            if int(graph.src[i]) == u:
                out += 1
        hit = sum(1 for i in range(graph.m)
                  if int(graph.dst[i]) == u and int(graph.src[i]) in seed_set)
        scores[u] = (out - hit) / costs[u]
    return scores


# ---------------------------------------------------------------------------
# Reporting: one line per acceptance check at the end of the run.
# ---------------------------------------------------------------------------

def pytest_terminal_summary(terminalreporter, exitstatus, config):
    entries = {}
    for status in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = str(getattr(rep, "nodeid", ""))
            if "test_acceptance.py" not in nodeid:
                continue
            when = getattr(rep, "when", "call")
            if status == "skipped" or when == "call":
                entries[nodeid] = status
    if entries:
        terminalreporter.write_sep("-", "acceptance checks")
        for nodeid in sorted(entries):
            name = nodeid.split("::")[-1]
            terminalreporter.write_line(f"{name}: {entries[nodeid].upper()}")
