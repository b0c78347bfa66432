"""Probability settings: ways to endow edges with per-tag influence probabilities.

Three settings are supported.  Trivalency draws every (edge, tag) probability
uniformly from {0.1, 0.01, 0.001}.  The count setting derives probabilities
from how much more often the edge's head uses a tag than its tail does.  The
weighted-cascade setting normalises each node's tag usage by the combined
usage of its in-neighbourhood and puts the same vector on every incoming edge.
"""

from __future__ import annotations

import numpy as np

from .graph import TagGraph

TRIVALENCY_LEVELS = (0.1, 0.01, 0.001)


def assign_trivalency(graph: TagGraph, seed: int) -> TagGraph:
    """Draw each (edge, tag) probability uniformly from the trivalency levels."""
    rng = np.random.default_rng(seed)
    levels = np.asarray(TRIVALENCY_LEVELS)
    probs = rng.choice(levels, size=(graph.m, graph.tag_count))
    return graph.with_probs(probs)


def assign_count_probability(graph: TagGraph, counts) -> TagGraph:
    """Tag-count difference probabilities.

    For an edge (s -> t) the vector is max(M[t] - M[s], 0) / (M[t] + 1),
    element-wise over tags: s influences t on a tag only to the extent that t
    uses the tag more than s does.  Every entry lands in [0, 1).
    """
    mat = np.asarray(counts.todense() if hasattr(counts, "todense") else counts,
                     dtype=np.float64)
    if mat.shape != (graph.n, graph.tag_count):
        raise ValueError("count matrix shape must be (n, tag_count)")
    diff = np.maximum(mat[graph.dst] - mat[graph.src], 0.0)
    probs = diff / (mat[graph.dst] + 1.0)
    return graph.with_probs(probs)


def assign_weighted_cascade(graph: TagGraph, counts) -> TagGraph:
    """In-neighbourhood-normalised probabilities.

    For each node i, its tag-usage row is divided by the column-wise sum of
    its in-neighbours' rows; the resulting vector is placed on every edge
    entering i.  Convention: 0/0 = 0, and any quotient above 1 is clamped
    to 1.  Nodes without in-neighbours have no incoming edges to assign.
    """
    mat = np.asarray(counts.todense() if hasattr(counts, "todense") else counts,
                     dtype=np.float64)
    if mat.shape != (graph.n, graph.tag_count):
        raise ValueError("count matrix shape must be (n, tag_count)")
    neigh_sum = np.zeros_like(mat)
    np.add.at(neigh_sum, graph.dst, mat[graph.src])
    vectors = np.zeros_like(mat)
    nz = neigh_sum > 0.0
    vectors[nz] = mat[nz] / neigh_sum[nz]
    vectors[(~nz) & (mat > 0.0)] = 1.0
    np.minimum(vectors, 1.0, out=vectors)
    return graph.with_probs(vectors[graph.dst])
