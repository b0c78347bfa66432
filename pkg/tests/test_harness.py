"""Campaign harness: spec validation, derived inputs, experiment runs."""

import dataclasses

import numpy as np
import pytest
import scipy.sparse as sp

from tagim.community import CommunityPartition
from tagim.datasets import Dataset, generate_synthetic
from tagim.graph import TagGraph
from tagim.harness import (ALGORITHMS, CampaignSpec, alpha_sweep,
                           assign_benefits, derive_targets, generate_costs,
                           prepare_campaign, reduce_tag_universe,
                           run_experiment, run_selection)


def star_counts():
    """Five users, one consequential tag: usage 0, 2, 3, 0, 5."""
    dense = np.zeros((5, 2))
    dense[1, 0], dense[2, 0], dense[4, 0] = 2.0, 3.0, 5.0
    dense[0, 1] = 1.0
    return sp.csr_matrix(dense)


def toy_dataset(n=36, tags=6, seed=4):
    rng = np.random.default_rng(seed)
    from tagim.datasets import planted_partition_edges, powerlaw_tag_counts
    edges, _ = planted_partition_edges(n, 3, 0.25, 0.02, rng)
    counts = powerlaw_tag_counts(n, tags, rng)
    return Dataset(TagGraph(n, edges, tags), counts, {})


class TestReduceTagUniverse:
    def test_wide_cap_is_identity_copy(self):
        counts = sp.csr_matrix(np.arange(12.0).reshape(4, 3))
        part = CommunityPartition([0, 0, 1, 1])
        reduced, kept = reduce_tag_universe(counts, part, cap=3)
        np.testing.assert_array_equal(kept, [0, 1, 2])
        assert (reduced != counts).nnz == 0
        reduced.data[0] += 99.0
        assert counts.data[0] != reduced.data[0]  # the original is untouched

    def test_round_robin_over_community_ranks(self):
        dense = np.zeros((4, 4))
        dense[0, 2], dense[0, 0] = 5.0, 1.0
        dense[1, 2] = 3.0
        dense[2, 1] = 7.0
        dense[3, 1], dense[3, 3] = 2.0, 1.0
        part = CommunityPartition([0, 0, 1, 1])
        reduced, kept = reduce_tag_universe(sp.csr_matrix(dense), part, cap=2)
        # Community 0's top tag is 2, community 1's is 1.
        np.testing.assert_array_equal(kept, [1, 2])
        np.testing.assert_array_equal(reduced.toarray(), dense[:, [1, 2]])

    def test_unused_capacity_fills_by_ascending_id(self):
        dense = np.zeros((3, 5))
        dense[0, 4], dense[1, 3] = 2.0, 1.0
        part = CommunityPartition([0, 0, 0])
        _, kept = reduce_tag_universe(sp.csr_matrix(dense), part, cap=3)
        # Ranked picks 4 then 3; zero-frequency ranks are skipped, so the
        # last slot falls back to the smallest unused id.
        np.testing.assert_array_equal(kept, [0, 3, 4])

    def test_columns_follow_kept_ids(self):
        rng = np.random.default_rng(12)
        dense = rng.integers(0, 4, size=(20, 9)).astype(float)
        part = CommunityPartition(rng.integers(0, 3, size=20))
        reduced, kept = reduce_tag_universe(sp.csr_matrix(dense), part, cap=5)
        assert len(kept) == 5
        assert sorted(kept.tolist()) == kept.tolist()
        np.testing.assert_array_equal(reduced.toarray(), dense[:, kept])

    def test_cap_validated(self):
        counts = sp.csr_matrix(np.ones((2, 2)))
        with pytest.raises(ValueError):
            reduce_tag_universe(counts, CommunityPartition([0, 0]), 0)


class TestGeneratedInputs:
    def test_cost_intervals(self):
        costs, tag_costs = generate_costs(10000, 10000, seed=0)
        arr = np.array([costs[i] for i in range(0, 10000, 97)])
        assert 50.0 <= arr.min() and arr.max() <= 100.0
        assert 25.0 <= tag_costs.min() and tag_costs.max() <= 50.0
        assert len(costs) == 10000 and tag_costs.shape == (10000,)

    def test_cost_determinism(self):
        a, ta = generate_costs(50, 8, seed=3)
        b, tb = generate_costs(50, 8, seed=3)
        assert all(a[i] == b[i] for i in range(50))
        np.testing.assert_array_equal(ta, tb)

    def test_derive_targets(self):
        counts = star_counts()
        np.testing.assert_array_equal(derive_targets(counts, [0]), [1, 2, 4])
        np.testing.assert_array_equal(derive_targets(counts, [1]), [0])
        np.testing.assert_array_equal(derive_targets(counts, [0, 1]),
                                      [0, 1, 2, 4])
        assert derive_targets(counts, []).size == 0

    def test_benefit_scaling_hand_values(self):
        g = TagGraph(5, [(0, 1), (0, 2), (1, 2), (3, 0)], 2)
        counts = star_counts()
        targets = derive_targets(counts, [0])
        profile = assign_benefits(g, counts, targets, [0])
        # Raw scores are out-neighbour tag mass: 3.0 for user 1 (sees user 2),
        # 0.0 for users 2 and 4; min-max lands on 100 / 50 / 50.
        np.testing.assert_allclose(profile.benefit, [100.0, 50.0, 50.0])
        assert profile.total_benefit == 200.0

    def test_benefit_zero_for_disconnected_target(self):
        g = TagGraph(5, [(0, 1), (0, 2), (1, 2), (3, 0)], 2)
        counts = star_counts()
        profile = assign_benefits(g, counts, np.array([3, 1]), [0])
        # User 3 never used the tag and its only out-neighbour (0) has no
        # mass either: benefit 0.  User 1 stays eligible.
        assert profile.benefit[profile.targets.tolist().index(3)] == 0.0
        assert profile.benefit[profile.targets.tolist().index(1)] > 0.0

    def test_benefit_midpoint_when_scores_tie(self):
        g = TagGraph(5, [(0, 1)], 2)
        counts = star_counts()
        profile = assign_benefits(g, counts, np.array([2, 4]), [0])
        np.testing.assert_allclose(profile.benefit, [75.0, 75.0])


class TestCampaignSpec:
    def test_rejections(self):
        ok = dict(dataset="d")
        cases = [
            (dict(prob_setting="nope"), "prob_setting"),
            (dict(objective="fame"), "objective"),
            (dict(algos=("emig-u", "magic")), "unknown algorithm"),
            (dict(budgets=()), "non-empty"),
            (dict(budgets=(-5.0,)), "positive"),
            (dict(budgets=(2000.0, 1000.0)), "ascending"),
            (dict(theta=0.0), "theta"),
            (dict(theta=1.5), "theta"),
            (dict(alpha=1.5), "alpha"),
            (dict(tag_cap=0), "tag_cap"),
            (dict(prune_k=0), "prune_k"),
            (dict(objective="benefit"), "target_tags"),
        ]
        for overrides, needle in cases:
            with pytest.raises(ValueError, match=needle):
                CampaignSpec(**{**ok, **overrides})

    def test_frozen(self):
        spec = CampaignSpec(dataset="d")
        with pytest.raises(dataclasses.FrozenInstanceError):
            spec.theta = 0.5

    def test_default_budget_grid(self):
        spec = CampaignSpec(dataset="d")
        assert spec.budgets == tuple(float(b) for b in range(1000, 9000, 1000))
        assert spec.alpha == 0.5
        assert set(spec.algos) <= set(ALGORITHMS)


class TestPrepareCampaign:
    def test_trivalency_levels_and_shapes(self):
        ds = toy_dataset()
        spec = CampaignSpec(dataset="mem", prob_setting="trivalency",
                            tag_cap=4, prob_seed=7, cost_seed=8)
        prep = prepare_campaign(spec, ds)
        assert prep.graph.tag_count == 4
        assert prep.catalog.tag_count == 4
        assert len(prep.kept_tags) == 4
        assert set(np.unique(prep.graph.probs)) <= {0.1, 0.01, 0.001}
        assert len(prep.costs) == ds.graph.n
        assert prep.partition.n == ds.graph.n
        np.testing.assert_array_equal(
            prep.catalog.user_tag_counts.toarray(),
            ds.tag_counts.toarray()[:, prep.kept_tags])

    def test_prob_settings_differ(self):
        ds = toy_dataset()
        base = dict(dataset="mem", tag_cap=6)
        a = prepare_campaign(CampaignSpec(prob_setting="trivalency", **base), ds)
        b = prepare_campaign(CampaignSpec(prob_setting="count", **base), ds)
        c = prepare_campaign(CampaignSpec(prob_setting="wc", **base), ds)
        assert not np.array_equal(a.graph.probs, b.graph.probs)
        assert not np.array_equal(b.graph.probs, c.graph.probs)
        assert b.graph.probs.min() >= 0.0 and b.graph.probs.max() <= 1.0

    def test_prob_file_replay_requires_full_tag_universe(self, tmp_path):
        ds = generate_synthetic(tmp_path, 20, 2, 5, 0.3, 0.05, seed=2)
        rng = np.random.default_rng(1)
        g = ds.graph.with_probs(rng.uniform(0, 1, size=(ds.graph.m, 5)))
        from tagim.graph import save_graph
        save_graph(g, tmp_path / "edges.tsv", tmp_path / "probs.tsv")
        ok = CampaignSpec(dataset=str(tmp_path), use_prob_file=True, tag_cap=5)
        prep = prepare_campaign(ok)
        np.testing.assert_array_equal(prep.graph.probs, g.probs)
        bad = CampaignSpec(dataset=str(tmp_path), use_prob_file=True, tag_cap=3)
        with pytest.raises(ValueError, match="tag reduction"):
            prepare_campaign(bad)

    def test_benefit_objective_wiring(self):
        ds = toy_dataset()
        spec = CampaignSpec(dataset="mem", objective="benefit",
                            target_tags=(0, 1), alpha=0.25, tag_cap=6)
        prep = prepare_campaign(spec, ds)
        assert prep.objective.kind == "benefit"
        assert prep.objective.alpha == 0.25
        expect = derive_targets(ds.tag_counts, [0, 1])
        np.testing.assert_array_equal(prep.objective.targets.targets, expect)

    def test_benefit_target_tag_errors(self):
        ds = toy_dataset()
        gone = CampaignSpec(dataset="mem", objective="benefit",
                            target_tags=(5,), tag_cap=2)
        with pytest.raises(ValueError, match="survived"):
            prepare_campaign(gone, ds)
        # An everywhere-unused tag id selects no users.
        n = 6
        g = TagGraph(n, [(0, 1), (1, 2), (3, 4)], 3)
        dense = np.zeros((n, 3))
        dense[:, 1] = 1.0
        dense[0, 2] = 2.0
        ds2 = Dataset(g, sp.csr_matrix(dense), {})
        empty = CampaignSpec(dataset="mem", objective="benefit",
                             target_tags=(0,), tag_cap=3)
        with pytest.raises(ValueError, match="no users"):
            prepare_campaign(empty, ds2)


class TestRunExperiment:
    def spec(self, **overrides):
        base = dict(dataset="mem", algos=("emig-u", "hn-ht"),
                    budgets=(300.0, 700.0), tag_cap=5, theta=0.02)
        return CampaignSpec(**{**base, **overrides})

    def test_grid_shape_and_ordering(self):
        rows = run_experiment(self.spec(), clock=lambda: 0.0,
                              dataset=toy_dataset())
        assert len(rows) == 4
        assert [(r.algo, r.budget) for r in rows] == [
            ("emig-u", 300.0), ("emig-u", 700.0),
            ("hn-ht", 300.0), ("hn-ht", 700.0)]
        for r in rows:
            assert r.spend_seed + r.spend_tag <= r.budget + 1e-9
            assert r.value >= 0.0
            assert r.objective == "influence"
            assert r.seconds == 0.0

    def test_fully_deterministic(self):
        a = run_experiment(self.spec(), clock=lambda: 0.0, dataset=toy_dataset())
        b = run_experiment(self.spec(), clock=lambda: 0.0, dataset=toy_dataset())
        assert [dataclasses.astuple(r) for r in a] == \
            [dataclasses.astuple(r) for r in b]

    def test_budget_monotone_for_greedy(self):
        rows = run_experiment(self.spec(algos=("emig-u",),
                                        budgets=(300.0, 700.0, 1200.0)),
                              clock=lambda: 0.0, dataset=toy_dataset())
        values = [r.value for r in rows]
        assert values == sorted(values)

    def test_baseline_trace_is_absent(self):
        prep = prepare_campaign(self.spec(), toy_dataset())
        _, trace = run_selection(prep, "hn-ht", 500.0)
        assert trace is None
        _, trace = run_selection(prep, "emig-u", 500.0)
        assert trace is not None
        with pytest.raises(ValueError, match="unknown algorithm"):
            run_selection(prep, "bogus", 500.0)


class TestAlphaSweep:
    def test_alpha_grid_runs_benefit_objective(self):
        ds = toy_dataset()
        spec = CampaignSpec(dataset="mem", algos=("emig-u",),
                            budgets=(600.0,), tag_cap=6, theta=0.02,
                            objective="benefit", target_tags=(0,))
        results = alpha_sweep(spec, alphas=(0.0, 1.0), clock=lambda: 0.0,
                              dataset=ds)
        assert sorted(results) == [0.0, 1.0]
        for rows in results.values():
            assert len(rows) == 1
            assert rows[0].objective == "benefit"
            assert rows[0].value >= 0.0

    def test_influence_spec_is_promoted(self):
        ds = toy_dataset()
        spec = CampaignSpec(dataset="mem", algos=("emig-u",),
                            budgets=(600.0,), tag_cap=6, theta=0.02,
                            target_tags=(0,))
        results = alpha_sweep(spec, alphas=(0.5,), clock=lambda: 0.0,
                              dataset=ds)
        assert results[0.5][0].objective == "benefit"
