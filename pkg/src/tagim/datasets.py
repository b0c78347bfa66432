"""Dataset plumbing: canonical on-disk layout, ingest, and a synthetic generator.

A dataset directory holds ``edges.tsv`` (src<TAB>dst, internal ids),
``tag_counts.tsv`` (user<TAB>tag<TAB>count), ``manifest.json`` (external to
internal id maps plus declared node/tag counts) and optionally ``probs.tsv``
(src<TAB>dst<TAB>tag<TAB>p) replaying explicitly drawn edge probabilities.

The synthetic generator produces a planted-partition friendship graph
(undirected draws, expanded to both directions) with power-law tag usage, at
desk scale, fully determined by one seed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import (TagGraph, load_edge_file, load_graph, load_probability_file,
                    load_tag_count_file, read_manifest, write_manifest)

EDGES_FILE = "edges.tsv"
TAGS_FILE = "tag_counts.tsv"
PROBS_FILE = "probs.tsv"
MANIFEST_FILE = "manifest.json"


@dataclass
class Dataset:
    graph: TagGraph
    tag_counts: sp.csr_matrix
    manifest: dict


def write_dataset(out_dir, edges, tag_counts: sp.csr_matrix, n: int,
                  tag_count: int, node_map=None, tag_map=None) -> None:
    """Write the canonical files; identity id maps unless given."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, EDGES_FILE), "w") as fh:
        for s, d in sorted(edges):
            fh.write(f"{s}\t{d}\n")
    coo = sp.coo_matrix(tag_counts)
    order = np.lexsort((coo.col, coo.row))
    with open(os.path.join(out_dir, TAGS_FILE), "w") as fh:
        for i in order:
            fh.write(f"{coo.row[i]}\t{coo.col[i]}\t{coo.data[i]:g}\n")
    if node_map is None:
        node_map = {i: i for i in range(n)}
    if tag_map is None:
        tag_map = {t: t for t in range(tag_count)}
    write_manifest(os.path.join(out_dir, MANIFEST_FILE), node_map, tag_map)


def load_dataset(path) -> Dataset:
    """Load a canonical dataset directory."""
    manifest = read_manifest(os.path.join(path, MANIFEST_FILE))
    n = manifest["node_count"]
    tag_count = manifest["tag_count"]
    edges = load_edge_file(os.path.join(path, EDGES_FILE))
    probs_path = os.path.join(path, PROBS_FILE)
    prob_records = load_probability_file(probs_path) if os.path.exists(probs_path) else None
    graph = load_graph(edges, n, tag_count, prob_records)
    counts = load_tag_count_file(os.path.join(path, TAGS_FILE), n, tag_count)
    return Dataset(graph, counts, manifest)


def _numeric_rows(path):
    """Yield whitespace-split rows whose first two fields parse as integers,
    silently skipping header lines."""
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if len(parts) < 2:
                continue
            try:
                int(parts[0]), int(parts[1])
            except ValueError:
                continue
            yield parts


def ingest(edges_path, tags_path, out_dir, directed: bool = False,
           tag_field: int = 1) -> dict:
    """Convert raw friendship and tagging files into a canonical dataset.

    Friendship rows are expanded to both directions unless ``directed``.  Tag
    rows use column 0 as the user and column ``tag_field`` as the tag; a third
    column is read as a count when ``tag_field`` is 1, otherwise each row
    counts one tagging event.  Users never seen in the friendship graph are
    dropped from the tag table.  Returns the manifest payload.
    """
    raw_edges = set()
    for parts in _numeric_rows(edges_path):
        a, b = int(parts[0]), int(parts[1])
        if a == b:
            continue
        raw_edges.add((a, b))
        if not directed:
            raw_edges.add((b, a))
    ext_nodes = sorted({a for a, _ in raw_edges} | {b for _, b in raw_edges})
    node_map = {ext: i for i, ext in enumerate(ext_nodes)}
    counts: dict[tuple[int, int], float] = {}
    ext_tags = set()
    for parts in _numeric_rows(tags_path):
        user = int(parts[0])
        if user not in node_map:
            continue
        tag = int(parts[tag_field])
        weight = float(parts[2]) if tag_field == 1 and len(parts) >= 3 else 1.0
        counts[(user, tag)] = counts.get((user, tag), 0.0) + weight
        ext_tags.add(tag)
    tag_map = {ext: i for i, ext in enumerate(sorted(ext_tags))}
    edges = sorted((node_map[a], node_map[b]) for a, b in raw_edges)
    n, tag_count = len(node_map), len(tag_map)
    mat = sp.dok_matrix((n, tag_count))
    for (user, tag), w in counts.items():
        mat[node_map[user], tag_map[tag]] = w
    write_dataset(out_dir, edges, mat.tocsr(), n, tag_count, node_map, tag_map)
    return read_manifest(os.path.join(out_dir, MANIFEST_FILE))


def planted_partition_edges(n: int, communities: int, p_in: float, p_out: float,
                            rng) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Undirected planted-partition draw expanded to directed edge pairs."""
    if communities < 1 or communities > n:
        raise ValueError("community count must lie in [1, n]")
    block = np.repeat(np.arange(communities),
                      np.diff(np.linspace(0, n, communities + 1).astype(int)))
    same = block[:, None] == block[None, :]
    prob = np.where(same, p_in, p_out)
    draw = rng.random((n, n))
    upper = np.triu(draw < prob, k=1)
    edges = []
    for a, b in zip(*np.nonzero(upper)):
        edges.append((int(a), int(b)))
        edges.append((int(b), int(a)))
    return sorted(edges), block


def powerlaw_tag_counts(n: int, tag_count: int, rng, mean_tags: float = 6.0,
                        exponent: float = 1.2) -> sp.csr_matrix:
    """Per-user tag usage with power-law tag popularity and geometric counts."""
    popularity = 1.0 / np.arange(1, tag_count + 1) ** exponent
    popularity /= popularity.sum()
    rows, cols, data = [], [], []
    for u in range(n):
        k = min(tag_count, 1 + rng.poisson(mean_tags))
        chosen = rng.choice(tag_count, size=k, replace=False, p=popularity)
        for t in sorted(int(t) for t in chosen):
            rows.append(u)
            cols.append(t)
            data.append(float(rng.geometric(0.35)))
    return sp.coo_matrix((data, (rows, cols)), shape=(n, tag_count)).tocsr()


def generate_synthetic(out_dir, n: int, communities: int, tag_count: int,
                       p_in: float, p_out: float, seed: int,
                       mean_tags: float = 6.0) -> Dataset:
    """Write a synthetic dataset directory and return it loaded."""
    rng = np.random.default_rng(seed)
    edges, _ = planted_partition_edges(n, communities, p_in, p_out, rng)
    counts = powerlaw_tag_counts(n, tag_count, rng, mean_tags=mean_tags)
    write_dataset(out_dir, edges, counts, n, tag_count)
    return load_dataset(out_dir)
