"""Core graph containers for tag-aware influence campaigns.

A campaign graph is a directed social graph whose edges carry one influence
probability per campaign tag.  Selecting a set of tags collapses the per-tag
probabilities of an edge into a single scalar through a noisy-OR combination:
picking more tags can only increase the chance that the edge fires.  The
collapsed scalar graph is what the diffusion machinery consumes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

MANIFEST_FORMAT = "tagim-dataset-v1"


def _as_sorted_tag_array(tags: Iterable[int], tag_count: int) -> np.ndarray:
    """Validate a tag collection and return it as a sorted unique int array."""
    arr = np.unique(np.asarray(list(tags), dtype=np.int64))
    if arr.size and (arr[0] < 0 or arr[-1] >= tag_count):
        raise ValueError(f"tag id out of range [0, {tag_count}): {arr}")
    return arr


class TagGraph:
    """Directed graph with a per-edge probability vector over tags.

    Edges are stored once, ordered by (source, target); the edge id is the
    position in that ordering.  Probabilities live in a dense (m x tag_count)
    float64 matrix; zeros are legal and simply mean the tag never pushes the
    edge.
    """

    def __init__(self, n: int, edges: Sequence[tuple[int, int]], tag_count: int,
                 probs: np.ndarray | None = None):
        if n < 0:
            raise ValueError("node count must be non-negative")
        if tag_count < 0:
            raise ValueError("tag count must be non-negative")
        edge_arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        order = np.lexsort((edge_arr[:, 1], edge_arr[:, 0]))
        edge_arr = edge_arr[order]
        if edge_arr.size:
            if edge_arr.min() < 0 or edge_arr.max() >= n:
                raise ValueError("edge endpoint outside [0, n)")
            if np.any(edge_arr[:, 0] == edge_arr[:, 1]):
                bad = edge_arr[edge_arr[:, 0] == edge_arr[:, 1]][0]
                raise ValueError(f"self-loop rejected: {tuple(bad)}")
            dup = np.all(edge_arr[1:] == edge_arr[:-1], axis=1)
            if np.any(dup):
                bad = edge_arr[1:][dup][0]
                raise ValueError(f"duplicate edge rejected: {tuple(bad)}")
        self.n = int(n)
        self.m = int(edge_arr.shape[0])
        self.tag_count = int(tag_count)
        self.src = edge_arr[:, 0].copy()
        self.dst = edge_arr[:, 1].copy()
        if probs is None:
            probs = np.zeros((self.m, self.tag_count))
        probs = np.asarray(probs, dtype=np.float64)
        if probs.shape != (self.m, self.tag_count):
            raise ValueError(
                f"probability matrix shape {probs.shape} does not match "
                f"(m={self.m}, tags={self.tag_count})")
        probs = probs[order]  # rows follow their edges into (src, dst) order
        if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
            raise ValueError("edge probabilities must lie in [0, 1]")
        self.probs = probs
        self._edge_index = {(int(s), int(t)): i
                            for i, (s, t) in enumerate(zip(self.src, self.dst))}
        # CSR-style adjacency over the (source, target) edge ordering.
        self.out_start = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(self.out_start, self.src + 1, 1)
        np.cumsum(self.out_start, out=self.out_start)
        in_order = np.lexsort((self.src, self.dst))
        self.in_edge = in_order
        self.in_start = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(self.in_start, self.dst + 1, 1)
        np.cumsum(self.in_start, out=self.in_start)

    def edge_id(self, src: int, dst: int) -> int:
        return self._edge_index[(src, dst)]

    def has_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self._edge_index

    def out_edges(self, u: int) -> np.ndarray:
        """Edge ids leaving u."""
        return np.arange(self.out_start[u], self.out_start[u + 1])

    def in_edges(self, u: int) -> np.ndarray:
        """Edge ids entering u."""
        return self.in_edge[self.in_start[u]:self.in_start[u + 1]]

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_start)

    def in_neighbors(self, u: int) -> np.ndarray:
        return self.src[self.in_edges(u)]

    def out_neighbors(self, u: int) -> np.ndarray:
        return self.dst[self.out_edges(u)]

    def with_probs(self, probs: np.ndarray) -> "TagGraph":
        """Copy of this graph with a replacement probability matrix."""
        g = TagGraph.__new__(TagGraph)
        g.__dict__.update(self.__dict__)
        probs = np.asarray(probs, dtype=np.float64)
        if probs.shape != (self.m, self.tag_count):
            raise ValueError("replacement probability matrix has wrong shape")
        if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
            raise ValueError("edge probabilities must lie in [0, 1]")
        g.probs = probs
        return g


@dataclass
class TagCatalog:
    """Campaign tag universe: per-tag costs and per-user usage counts.

    ``user_tag_counts`` is an (n x tag_count) sparse matrix of how often each
    user applied each tag.
    """

    tag_count: int
    tag_cost: np.ndarray
    user_tag_counts: sp.csr_matrix

    def __post_init__(self):
        self.tag_cost = np.asarray(self.tag_cost, dtype=np.float64)
        if self.tag_cost.shape != (self.tag_count,):
            raise ValueError("tag cost vector length must equal tag_count")
        if self.tag_count and self.tag_cost.min() <= 0.0:
            raise ValueError("all tag costs must be positive")
        self.user_tag_counts = sp.csr_matrix(self.user_tag_counts)
        if self.user_tag_counts.shape[1] != self.tag_count:
            raise ValueError("user_tag_counts column count must equal tag_count")
        if self.user_tag_counts.nnz and self.user_tag_counts.data.min() < 0:
            raise ValueError("tag usage counts must be non-negative")

    @property
    def n_users(self) -> int:
        return self.user_tag_counts.shape[0]

    def global_frequency(self) -> np.ndarray:
        """Total usage count of each tag across all users."""
        return np.asarray(self.user_tag_counts.sum(axis=0)).ravel()

    def user_row(self, u: int) -> np.ndarray:
        return np.asarray(self.user_tag_counts.getrow(u).todense()).ravel()


@dataclass
class NodeCosts:
    """Positive activation cost per node."""

    cost: np.ndarray

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=np.float64)
        if self.cost.ndim != 1:
            raise ValueError("node costs must be a flat vector")
        if self.cost.size and self.cost.min() <= 0.0:
            raise ValueError("all node costs must be positive")

    def __getitem__(self, u: int) -> float:
        return float(self.cost[u])

    def __len__(self) -> int:
        return self.cost.size


@dataclass
class TargetProfile:
    """Users a benefit campaign cares about, with their payoff on activation."""

    targets: np.ndarray
    benefit: np.ndarray

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=np.int64)
        self.benefit = np.asarray(self.benefit, dtype=np.float64)
        if self.targets.shape != self.benefit.shape:
            raise ValueError("targets and benefits must align")
        if self.targets.size:
            order = np.argsort(self.targets)
            self.targets = self.targets[order]
            self.benefit = self.benefit[order]
            if np.any(self.targets[1:] == self.targets[:-1]):
                raise ValueError("duplicate target user")
            if self.benefit.min() < 0.0:
                raise ValueError("benefits must be non-negative")

    @property
    def total_benefit(self) -> float:
        return float(np.sum(self.benefit))

    def __len__(self) -> int:
        return self.targets.size


class CostedSelection:
    """Ordered (seed users, tags) pick with running spend bookkeeping."""

    def __init__(self):
        self.seeds: list[int] = []
        self.tags: list[int] = []
        self.spend_seed = 0.0
        self.spend_tag = 0.0
        self._seed_set: set[int] = set()
        self._tag_set: set[int] = set()

    def add_seed(self, u: int, cost: float) -> None:
        if u in self._seed_set:
            raise ValueError(f"seed {u} picked twice")
        self.seeds.append(int(u))
        self._seed_set.add(int(u))
        self.spend_seed += float(cost)

    def add_tag(self, t: int, cost: float) -> None:
        if t in self._tag_set:
            raise ValueError(f"tag {t} picked twice")
        self.tags.append(int(t))
        self._tag_set.add(int(t))
        self.spend_tag += float(cost)

    def has_seed(self, u: int) -> bool:
        return u in self._seed_set

    def has_tag(self, t: int) -> bool:
        return t in self._tag_set

    @property
    def spend(self) -> float:
        return self.spend_seed + self.spend_tag

    def to_dict(self) -> dict:
        return {
            "seeds": list(self.seeds),
            "tags": list(self.tags),
            "spend_seed": self.spend_seed,
            "spend_tag": self.spend_tag,
        }


class WeightedDigraph:
    """Directed graph with one scalar influence probability per edge.

    Zero-probability edges are dropped on construction; they can never carry
    influence, so their absence changes no downstream quantity.
    """

    def __init__(self, n: int, src: np.ndarray, dst: np.ndarray, weight: np.ndarray):
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        weight = np.asarray(weight, dtype=np.float64)
        keep = weight > 0.0
        src, dst, weight = src[keep], dst[keep], weight[keep]
        order = np.lexsort((dst, src))
        self.n = int(n)
        self.src = src[order]
        self.dst = dst[order]
        self.weight = weight[order]
        self.m = self.src.size
        if self.m and (weight.min() <= 0.0 or weight.max() > 1.0):
            raise ValueError("edge weights must lie in (0, 1]")
        self.out_start = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(self.out_start, self.src + 1, 1)
        np.cumsum(self.out_start, out=self.out_start)
        self._index = {(int(s), int(t)): i
                       for i, (s, t) in enumerate(zip(self.src, self.dst))}

    def weight_of(self, u: int, v: int) -> float:
        """Scalar probability of edge u -> v, 0.0 when absent."""
        i = self._index.get((u, v))
        return float(self.weight[i]) if i is not None else 0.0

    def out_slice(self, u: int) -> slice:
        return slice(int(self.out_start[u]), int(self.out_start[u + 1]))

    def reverse_lengths_csr(self) -> sp.csr_matrix:
        """Reversed graph with -ln(p) edge lengths, for max-probability search.

        Unit probabilities are nudged below 1.0 before the log so every length
        is strictly positive; path probabilities are always recomputed from the
        true weights afterwards, so the nudge never leaks into results.
        """
        clipped = np.minimum(self.weight, 1.0 - 1e-16)
        lengths = -np.log(clipped)
        return sp.csr_matrix((lengths, (self.dst, self.src)), shape=(self.n, self.n))


def aggregate_probability(graph: TagGraph, edge_id: int, tags: Iterable[int]) -> float:
    """Noisy-OR combination of an edge's per-tag probabilities.

    The selected tag columns are always combined in ascending tag order, so
    any permutation of ``tags`` produces a bitwise identical result.
    """
    cols = _as_sorted_tag_array(tags, graph.tag_count)
    if cols.size == 0:
        return 0.0
    row = graph.probs[edge_id, cols]
    return float(1.0 - np.prod(1.0 - row))


def aggregate_graph(graph: TagGraph, tags: Iterable[int]) -> WeightedDigraph:
    """Collapse per-tag edge probabilities into a scalar graph for a tag set."""
    cols = _as_sorted_tag_array(tags, graph.tag_count)
    if cols.size == 0 or graph.m == 0:
        w = np.zeros(graph.m)
    else:
        w = 1.0 - np.prod(1.0 - graph.probs[:, cols], axis=1)
    return WeightedDigraph(graph.n, graph.src, graph.dst, w)


# ---------------------------------------------------------------------------
# File formats.  Edge file: "src<TAB>dst" per line.  Tag count file:
# "user<TAB>tag<TAB>count".  Probability file: "src<TAB>dst<TAB>tag<TAB>p".
# A JSON manifest records the external-to-internal id maps and the declared
# node/tag counts, which keeps isolated nodes and unused tags representable.
# ---------------------------------------------------------------------------

def load_edge_file(path) -> list[tuple[int, int]]:
    """Read a tab-separated edge list of internal ids."""
    edges = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            a, b = line.split("\t")[:2]
            edges.append((int(a), int(b)))
    return edges


def load_tag_count_file(path, n: int, tag_count: int) -> sp.csr_matrix:
    """Read user/tag/count triples into an (n x tag_count) sparse matrix."""
    users, tags, counts = [], [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            u, t, c = line.split("\t")[:3]
            users.append(int(u))
            tags.append(int(t))
            counts.append(float(c))
    mat = sp.coo_matrix((counts, (users, tags)), shape=(n, tag_count))
    return mat.tocsr()


def load_probability_file(path) -> list[tuple[int, int, int, float]]:
    """Read explicit per-edge per-tag probabilities (replay of a drawn setting)."""
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            s, d, t, p = line.split("\t")[:4]
            p = float(p)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability outside [0, 1] in {path}: {line!r}")
            records.append((int(s), int(d), int(t), p))
    return records


def load_graph(edges: Iterable[tuple[int, int]], n: int, tag_count: int,
               prob_records: Iterable[tuple[int, int, int, float]] | None = None) -> TagGraph:
    """Build a TagGraph from an edge stream and optional probability records."""
    graph = TagGraph(n, list(edges), tag_count)
    if prob_records is not None:
        probs = np.zeros((graph.m, tag_count))
        for s, d, t, p in prob_records:
            if not graph.has_edge(s, d):
                raise ValueError(f"probability record for missing edge ({s}, {d})")
            if not 0 <= t < tag_count:
                raise ValueError(f"probability record with bad tag {t}")
            probs[graph.edge_id(s, d), t] = p
        graph = graph.with_probs(probs)
    return graph


def write_manifest(path, node_map: dict, tag_map: dict) -> None:
    payload = {
        "format": MANIFEST_FORMAT,
        "node_count": len(node_map),
        "tag_count": len(tag_map),
        "nodes": {str(k): int(v) for k, v in node_map.items()},
        "tags": {str(k): int(v) for k, v in tag_map.items()},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != MANIFEST_FORMAT:
        raise ValueError(f"unrecognised manifest format in {path}")
    return payload


def save_graph(graph: TagGraph, edge_path, prob_path) -> None:
    """Write the edge list and the non-zero probability entries."""
    with open(edge_path, "w") as fh:
        for s, d in zip(graph.src, graph.dst):
            fh.write(f"{s}\t{d}\n")
    with open(prob_path, "w") as fh:
        rows, cols = np.nonzero(graph.probs)
        for e, t in zip(rows, cols):
            fh.write(f"{graph.src[e]}\t{graph.dst[e]}\t{t}\t"
                     f"{float(graph.probs[e, t])!r}\n")
