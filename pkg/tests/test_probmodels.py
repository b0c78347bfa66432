"""The three edge-probability constructions."""

import numpy as np
import pytest

from tagim.graph import TagGraph
from tagim.probmodels import (TRIVALENCY_LEVELS, assign_count_probability,
                              assign_trivalency, assign_weighted_cascade)

from conftest import random_tag_graph


class TestTrivalency:
    def test_values_from_level_set(self):
        rng = np.random.default_rng(0)
        g = random_tag_graph(rng, 15, 0.3, 6)
        g = assign_trivalency(g, seed=42)
        assert set(np.unique(g.probs)) <= set(TRIVALENCY_LEVELS)

    def test_deterministic_under_seed(self):
        rng = np.random.default_rng(1)
        g = random_tag_graph(rng, 10, 0.4, 4)
        a = assign_trivalency(g, seed=7)
        b = assign_trivalency(g, seed=7)
        c = assign_trivalency(g, seed=8)
        assert np.array_equal(a.probs, b.probs)
        assert not np.array_equal(a.probs, c.probs)

    def test_level_frequencies_uniform(self):
        # 10^5+ draws: each level should land within 1/3 +- 0.01.
        g = TagGraph(500, [(u, (u + 1) % 500) for u in range(500)], 250)
        g = assign_trivalency(g, seed=3)
        draws = g.probs.size
        assert draws >= 10**5
        for level in TRIVALENCY_LEVELS:
            freq = float(np.mean(g.probs == level))
            assert abs(freq - 1.0 / 3.0) < 0.01


class TestCountProbability:
    def test_hand_example(self):
        # Head uses the tags (4, 0); tail uses (1, 2).  On the edge
        # tail -> head: max((4,0)-(1,2), 0) / ((4,0)+1) = (3,0)/(5,1) = (0.6, 0).
        g = TagGraph(2, [(0, 1)], 2)
        counts = np.array([[1.0, 2.0], [4.0, 0.0]])
        out = assign_count_probability(g, counts)
        assert out.probs[0].tolist() == [0.6, 0.0]

    def test_equal_rows_give_zero(self):
        g = TagGraph(2, [(0, 1)], 3)
        counts = np.array([[2.0, 5.0, 1.0], [2.0, 5.0, 1.0]])
        out = assign_count_probability(g, counts)
        assert np.all(out.probs == 0.0)

    def test_strictly_below_one(self):
        g = TagGraph(2, [(0, 1)], 1)
        counts = np.array([[0.0], [1000.0]])
        out = assign_count_probability(g, counts)
        assert out.probs[0, 0] == pytest.approx(1000.0 / 1001.0)
        assert out.probs[0, 0] < 1.0

    def test_zero_when_head_does_not_exceed_tail(self):
        rng = np.random.default_rng(21)
        g = random_tag_graph(rng, 12, 0.3, 4)
        counts = rng.integers(0, 6, size=(12, 4)).astype(float)
        out = assign_count_probability(g, counts)
        for e in range(g.m):
            s, d = int(g.src[e]), int(g.dst[e])
            for t in range(4):
                if counts[d, t] <= counts[s, t]:
                    assert out.probs[e, t] == 0.0
                else:
                    assert out.probs[e, t] > 0.0

    def test_bounds(self):
        rng = np.random.default_rng(22)
        g = random_tag_graph(rng, 20, 0.2, 5)
        counts = rng.integers(0, 50, size=(20, 5)).astype(float)
        out = assign_count_probability(g, counts)
        assert out.probs.min() >= 0.0
        assert out.probs.max() < 1.0


class TestWeightedCascade:
    def test_single_in_neighbor_hand_example(self):
        g = TagGraph(2, [(0, 1)], 2)
        counts = np.array([[2.0, 4.0], [1.0, 2.0]])
        out = assign_weighted_cascade(g, counts)
        assert out.probs[0].tolist() == [0.5, 0.5]

    def test_clamped_to_one(self):
        # Head count 5 against an in-neighbourhood column sum of 2: raw 2.5.
        g = TagGraph(2, [(0, 1)], 1)
        counts = np.array([[2.0], [5.0]])
        out = assign_weighted_cascade(g, counts)
        assert out.probs[0, 0] == 1.0

    def test_zero_over_zero_is_zero(self):
        g = TagGraph(2, [(0, 1)], 2)
        counts = np.array([[0.0, 3.0], [0.0, 0.0]])
        out = assign_weighted_cascade(g, counts)
        assert out.probs[0].tolist() == [0.0, 0.0]

    def test_no_in_neighbors_is_noop(self):
        g = TagGraph(3, [(0, 1), (0, 2)], 1)
        counts = np.array([[7.0], [1.0], [1.0]])
        out = assign_weighted_cascade(g, counts)
        # Node 0 has no in-edges, so its (hypothetical) vector never appears.
        assert out.probs.shape == (2, 1)
        assert np.all(out.probs <= 1.0)

    def test_identical_vectors_per_head_node(self):
        rng = np.random.default_rng(30)
        g = random_tag_graph(rng, 15, 0.3, 4)
        counts = rng.integers(0, 8, size=(15, 4)).astype(float)
        out = assign_weighted_cascade(g, counts)
        for v in range(g.n):
            rows = out.probs[g.in_edges(v)]
            if rows.shape[0] > 1:
                assert np.all(rows == rows[0])

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(31)
        g = random_tag_graph(rng, 10, 0.35, 3)
        counts = rng.integers(0, 6, size=(10, 3)).astype(float)
        out = assign_weighted_cascade(g, counts)
        for v in range(g.n):
            col_sum = counts[g.in_neighbors(v)].sum(axis=0)
            for e in g.in_edges(v):
                for t in range(3):
                    if col_sum[t] == 0.0:
                        expect = 0.0 if counts[v, t] == 0.0 else 1.0
                    else:
                        expect = min(counts[v, t] / col_sum[t], 1.0)
                    assert out.probs[e, t] == pytest.approx(expect, abs=1e-15)

    def test_bounds(self):
        rng = np.random.default_rng(32)
        g = random_tag_graph(rng, 20, 0.2, 5)
        counts = rng.integers(0, 20, size=(20, 5)).astype(float)
        out = assign_weighted_cascade(g, counts)
        assert out.probs.min() >= 0.0
        assert out.probs.max() <= 1.0
