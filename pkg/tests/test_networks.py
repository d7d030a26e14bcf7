import itertools
import math

import numpy as np
import pytest

from catbida import (
    CptNetwork,
    Dag,
    adjustment_set,
    exact_intervention,
    exact_ipts,
    forward_sample,
    random_network,
    true_effects,
)

from helpers import (
    CONFOUNDER_IPT,
    backdoor_from_joint,
    confounder_network,
    has_causal_path,
    joint_table,
)


class TestCptNetwork:
    def test_row_must_sum_to_one(self):
        with pytest.raises(ValueError):
            CptNetwork(Dag(1, [[]]), (2,), [np.array([[0.5, 0.4]])])

    def test_table_shape_must_match_parents(self):
        dag = Dag(2, [[], [0]])
        cpts = [np.array([[0.5, 0.5]]), np.array([[0.5, 0.5]])]  # needs 2 rows
        with pytest.raises(ValueError):
            CptNetwork(dag, (2, 2), cpts)

    def test_cardinality_floor(self):
        with pytest.raises(ValueError):
            CptNetwork(Dag(1, [[]]), (1,), [np.array([[1.0]])])

    def test_json_round_trip(self, tmp_path):
        bn = confounder_network()
        path = tmp_path / "net.json"
        bn.save(path)
        loaded = CptNetwork.load(path)
        assert loaded.dag == bn.dag and loaded.cards == bn.cards
        for a, b in zip(loaded.cpts, bn.cpts):
            np.testing.assert_allclose(a, b)


class TestRandomNetwork:
    def test_single_node(self):
        bn = random_network(1, 0.0, seed=4)
        assert bn.dag.n == 1 and bn.dag.edges() == []
        np.testing.assert_allclose(bn.cpts[0].sum(), 1.0)

    def test_mean_degree_matches_expectation(self):
        total = 0.0
        for rep in range(500):
            bn = random_network(10, 4.0, seed=rep)
            total += 2 * len(bn.dag.edges()) / 10
        assert abs(total / 500 - 4.0) <= 0.3

    def test_invalid_edge_probability(self):
        with pytest.raises(ValueError):
            random_network(3, 2.5, seed=0)  # edge probability 2.5 / 2 > 1
        with pytest.raises(ValueError):
            random_network(3, -1.0, seed=0)

    def test_mixed_cardinalities(self):
        bn = random_network(4, 2.0, cards=(2, 3, 2, 4), seed=9)
        assert bn.cards == (2, 3, 2, 4)
        for v in range(4):
            rows = bn.cpts[v]
            assert rows.shape[1] == bn.cards[v]
            np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-12)

    def test_deterministic_in_seed(self):
        a = random_network(6, 3.0, seed=123)
        b = random_network(6, 3.0, seed=123)
        assert a.dag == b.dag
        for x, y in zip(a.cpts, b.cpts):
            np.testing.assert_array_equal(x, y)


class TestForwardSample:
    def test_one_hot_rows_force_configuration(self):
        dag = Dag(2, [[], [0]])
        cpts = [np.array([[0.0, 1.0]]), np.array([[1.0, 0.0], [0.0, 1.0]])]
        bn = CptNetwork(dag, (2, 2), cpts)
        data = forward_sample(bn, 50, seed=1)
        np.testing.assert_array_equal(data.codes, np.ones((50, 2), dtype=int))

    def test_zero_samples_keep_metadata(self):
        data = forward_sample(confounder_network(), 0, seed=2)
        assert data.n_samples == 0 and data.cards == (2, 2, 2)

    def test_conditional_frequencies_converge(self):
        dag = Dag(2, [[], [0]])
        cpts = [np.array([[0.3, 0.7]]), np.array([[0.9, 0.1], [0.2, 0.8]])]
        bn = CptNetwork(dag, (2, 2), cpts)
        data = forward_sample(bn, 100_000, seed=3)
        x, y = data.codes[:, 0], data.codes[:, 1]
        for xv in (0, 1):
            rate = y[x == xv].mean()
            assert abs(rate - cpts[1][xv, 1]) <= 0.01

    def test_deterministic_in_seed(self):
        bn = random_network(5, 2.0, seed=7)
        a = forward_sample(bn, 200, seed=42)
        b = forward_sample(bn, 200, seed=42)
        np.testing.assert_array_equal(a.codes, b.codes)


class TestExactIntervention:
    def test_chain_returns_cpt_rows(self):
        dag = Dag(2, [[], [0]])
        cpts = [np.array([[0.4, 0.6]]), np.array([[0.9, 0.1], [0.2, 0.8]])]
        bn = CptNetwork(dag, (2, 2), cpts)
        np.testing.assert_allclose(exact_intervention(bn, 0, 1), cpts[1], atol=1e-12)

    def test_disconnected_pair_gives_marginal_rows(self):
        dag = Dag(2, [[], []])
        cpts = [np.array([[0.4, 0.6]]), np.array([[0.25, 0.75]])]
        bn = CptNetwork(dag, (2, 2), cpts)
        ipt = exact_intervention(bn, 0, 1)
        np.testing.assert_allclose(ipt[0], [0.25, 0.75], atol=1e-12)
        np.testing.assert_allclose(ipt[0], ipt[1], atol=1e-12)

    def test_confounder_hand_values(self):
        ipt = exact_intervention(confounder_network(), 0, 1)
        np.testing.assert_allclose(ipt, CONFOUNDER_IPT, atol=1e-12)

    def test_rows_are_distributions(self):
        bn = random_network(6, 3.0, cards=(2, 3, 2, 2, 3, 2), seed=17)
        for i, j in itertools.permutations(range(6), 2):
            ipt = exact_intervention(bn, i, j)
            assert ipt.shape == (bn.cards[i], bn.cards[j])
            np.testing.assert_allclose(ipt.sum(axis=1), 1.0, atol=1e-10)

    def test_state_space_cap(self):
        bn = random_network(8, 2.0, cards=4, seed=5)
        with pytest.raises(ValueError):
            exact_intervention(bn, 0, 1, cap=1000)

    def test_agrees_with_backdoor_oracle(self):
        # the truncated factorization must match the backdoor formula applied
        # to the exact joint for any valid adjustment set
        for seed in range(8):
            bn = random_network(5, 2.5, seed=seed)
            for i, j in itertools.permutations(range(5), 2):
                if not has_causal_path(bn.dag, i, j):
                    continue
                adj = adjustment_set(bn.dag, i, j, "o-min")
                got = exact_intervention(bn, i, j)
                want = backdoor_from_joint(bn, i, j, adj.nodes)
                np.testing.assert_allclose(got, want, atol=1e-10)

    def test_joint_normalization_sanity(self):
        bn = random_network(5, 2.0, seed=23)
        assert sum(joint_table(bn).values()) == pytest.approx(1.0, abs=1e-12)


class TestTrueEffects:
    def test_no_causal_path_means_zero_jsd(self):
        for seed in range(6):
            bn = random_network(5, 2.0, cards=(2, 3, 2, 3, 2), seed=seed)
            tau = true_effects(bn, "jsd")
            for i, j in itertools.permutations(range(5), 2):
                if not has_causal_path(bn.dag, i, j):
                    assert abs(tau[i, j]) <= 1e-12

    def test_diagonal_is_nan(self):
        tau = true_effects(confounder_network(), "jsd")
        assert all(math.isnan(tau[v, v]) for v in range(3))

    def test_deterministic_bijective_rows_reach_log2(self):
        dag = Dag(2, [[], [0]])
        cpts = [np.array([[0.5, 0.5]]), np.array([[1.0, 0.0], [0.0, 1.0]])]
        bn = CptNetwork(dag, (2, 2), cpts)
        tau = true_effects(bn, "jsd")
        assert tau[0, 1] == pytest.approx(math.log(2), abs=1e-12)

    def test_jsd_bounds(self):
        bn = random_network(6, 3.0, cards=(3, 2, 4, 2, 3, 2), seed=19)
        tau = true_effects(bn, "jsd")
        for i, j in itertools.permutations(range(6), 2):
            assert 0.0 <= tau[i, j] <= math.log(bn.cards[i]) + 1e-12

    def test_confounder_ate(self):
        tau = true_effects(confounder_network(), "ate")
        assert tau[0, 1] == pytest.approx(0.45, abs=1e-12)

    def test_ate_requires_binary(self):
        bn = random_network(3, 1.0, cards=(2, 3, 2), seed=2)
        with pytest.raises(ValueError):
            true_effects(bn, "ate")

    def test_exact_ipts_match_per_pair_calls(self):
        bn = confounder_network()
        ipts = exact_ipts(bn)
        assert set(ipts) == set(itertools.permutations(range(3), 2))
        np.testing.assert_allclose(ipts[(0, 1)], exact_intervention(bn, 0, 1))
