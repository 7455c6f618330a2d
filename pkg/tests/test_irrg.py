"""The ranking-grouping decomposer: gating, absorption, full pipeline."""

import json

import numpy as np
import pytest

import groupcc as g
from groupcc.errors import FeasibilityError
from groupcc.irrg import pack_separable
from conftest import quick_irrg


def _context(inst, seed, n_s=10):
    rng = np.random.default_rng(seed)
    sm = g.build_sample_matrix(inst.lb, inst.ub, n_s, rng)
    x_hq = rng.uniform(inst.lb, inst.ub)
    xbar2 = rng.uniform(inst.lb, inst.ub)
    return rng, sm, x_hq, xbar2


class TestConsiderVariables:
    def test_no_groups_yet_always_true(self):
        inst = g.fully_separable(5, "sphere")
        rng, sm, x_hq, xbar2 = _context(inst, 0)
        assert g.consider_variables([0, 1, 2, 3, 4], [], x_hq, sm, xbar2, inst, 10, rng)

    def test_empty_variables_with_groups_false(self):
        inst = g.fully_separable(5, "sphere")
        rng, sm, x_hq, xbar2 = _context(inst, 0)
        assert not g.consider_variables([], [(0, 1)], x_hq, sm, xbar2, inst, 10, rng)

    def test_separable_sphere_with_planted_group_false_across_seeds(self):
        # no sample ordering inverts under additive shifts, any seed
        inst = g.fully_separable(8, "sphere", seed=1)
        for seed in range(10):
            rng, sm, x_hq, xbar2 = _context(inst, seed)
            loose = [0, 1, 2, 3, 4, 5]
            assert not g.consider_variables(
                loose, [(6, 7)], x_hq, sm, xbar2, inst, 10, rng
            )


class TestInteract:
    def _pair_products_instance(self):
        # the first variable multiplies with the fifth and the ninth only
        def fn(x):
            return float((x[0] + x[4]) ** 2 + (x[0] + x[8]) ** 2 + np.dot(x, x))

        theta = g.InteractionMatrix.identity(12)
        theta.link_clique([0, 4])
        theta.link_clique([0, 8])
        return g.ProblemInstance(
            n=12,
            lb=np.full(12, -5.0),
            ub=np.full(12, 5.0),
            evaluator=fn,
            theta_star=theta,
        )

    def test_no_interaction_returns_input(self):
        inst = g.fully_separable(6, "sphere", seed=0)
        rng, sm, x_hq, xbar2 = _context(inst, 3)
        g1 = [(0,)]
        g2 = [(1,), (2,), (3,)]
        y1, r1 = g.create_first_ranking([0], x_hq, sm, inst)
        assert g.interact(g1, g2, x_hq, sm, xbar2, y1, r1, inst, 10) == g1

    def test_singleton_absorbed(self):
        inst = self._pair_products_instance()
        rng, sm, x_hq, xbar2 = _context(inst, 1)
        g1 = [(0,)]
        y1, r1 = g.create_first_ranking([0], x_hq, sm, inst)
        out = g.interact(g1, [(4,)], x_hq, sm, xbar2, y1, r1, inst, 10)
        assert out == [(0,), (4,)]

    def test_absorbs_exactly_the_interacting_groups(self):
        inst = self._pair_products_instance()
        rng, sm, x_hq, xbar2 = _context(inst, 2)
        candidates = [(1,), (4,), (6,), (8,), (10,), (11,)]
        y1, r1 = g.create_first_ranking([0], x_hq, sm, inst)
        out = g.interact([(0,)], candidates, x_hq, sm, xbar2, y1, r1, inst, 10)
        # oracle: exhaustive pairwise checks over the same context
        expected = [(0,)]
        for cand in candidates:
            if g.is_interaction([0], list(cand), x_hq, sm, xbar2, y1, r1, inst, 10):
                expected.append(cand)
        assert out == expected
        assert set(out) == {(0,), (4,), (8,)}


class TestRrg:
    def test_fully_nonseparable_single_group(self):
        for seed in range(5):
            inst = g.get_fixture("schwefel-32", seed=seed)
            cfg = quick_irrg(seed, bootstrap_global_ffe=1000, bootstrap_local_ffe=2000)
            d = g.irrg(inst, cfg)
            assert [len(x) for x in d.nonseps] == [32]

    def test_fully_separable_empty_nonseps(self):
        for seed in range(5):
            inst = g.get_fixture("sphere-32", seed=seed)
            d = g.irrg(inst, quick_irrg(seed))
            assert d.nonseps == []

    def test_planted_blocks_square_recovered(self):
        for seed in range(5):
            inst = g.planted_blocks(32, 8, transform="square", seed=seed)
            d = g.irrg(inst, quick_irrg(seed, eps_s=10))
            got = sorted(tuple(x) for x in d.nonseps)
            want = [tuple(range(s, s + 8)) for s in range(0, 32, 8)]
            assert got == want

    def test_infeasible_xhq_rejected(self):
        inst = g.fully_separable(4, "sphere")
        rng = np.random.default_rng(0)
        with pytest.raises(FeasibilityError):
            g.rrg(
                np.full(4, 99.0),
                np.zeros(4),
                g.InteractionMatrix.identity(4),
                inst,
                inst.lb,
                inst.ub,
                10,
                rng,
            )


class TestIrrg:
    def test_separable_grouping_arithmetic(self):
        inst = g.get_fixture("sphere-32", seed=0)
        d = g.irrg(inst, quick_irrg(0, eps_s=10))
        assert [len(x) for x in d.seps] == [10, 10, 10, 2]
        assert d.nonseps == []
        assert d.iterations == 1  # stale first pass terminates immediately

    def test_250_loose_variables_pack_to_100s(self):
        inst = g.fully_separable(250, "sphere", seed=0)
        d = g.irrg(
            inst,
            quick_irrg(0, eps_s=100, bootstrap_global_ffe=0, bootstrap_local_ffe=0),
        )
        assert [len(x) for x in d.seps] == [100, 100, 50]

    def test_partition_covers_everything(self):
        inst = g.planted_blocks(32, 8, seed=1, tail=8)
        d = g.irrg(inst, quick_irrg(1, eps_s=5))
        assert d.covered() == set(range(32))
        sizes = [len(x) for x in d.seps]
        assert all(s == 5 for s in sizes[:-1])  # only the last may be short

    def test_transform_insensitivity_exact(self):
        outs = []
        for tf in ("identity", "square", "sqrt"):
            inst = g.planted_blocks(32, 8, transform=tf, seed=6)
            d = g.irrg(inst, quick_irrg(11, eps_s=10))
            outs.append((sorted(d.seps), sorted(d.nonseps), d.iterations, d.ffe_cost))
        assert outs[0] == outs[1] == outs[2]

    def test_zero_budget_warning(self):
        inst = g.get_fixture("blocks-32", seed=0)
        d = g.irrg(
            inst,
            quick_irrg(
                0,
                bootstrap_global_ffe=0,
                bootstrap_local_ffe=0,
                decomposition_ffe=0,
            ),
        )
        assert d.warning is not None
        assert d.nonseps == [] and d.iterations == 0

    def test_termination_bound_on_blocks(self):
        inst = g.get_fixture("blocks-32", seed=4)
        cfg = quick_irrg(4, eps_s=10)
        d = g.irrg(inst, cfg)
        true_links = 4 * (8 * 7 // 2)
        assert 1 <= d.iterations <= 1 + cfg.eps_sti * true_links

    def test_ffe_cost_matches_counter(self):
        inst = g.get_fixture("blocks-32", seed=2)
        before = inst.evals
        d = g.irrg(inst, quick_irrg(2))
        assert d.ffe_cost == inst.evals - before
        assert 0 < d.bootstrap_ffe < d.ffe_cost

    def test_deterministic_under_seed(self):
        a = g.irrg(g.get_fixture("blocks-32", seed=3), quick_irrg(7))
        b = g.irrg(g.get_fixture("blocks-32", seed=3), quick_irrg(7))
        assert a.to_json() == b.to_json()


class TestDecompositionDocument:
    def test_json_roundtrip(self):
        d = g.Decomposition(
            seps=[(0, 1), (2,)],
            nonseps=[(3, 4, 5)],
            ffe_cost=123,
            iterations=4,
            seed=9,
        )
        again = g.Decomposition.from_json(d.to_json())
        assert again.seps == d.seps and again.nonseps == d.nonseps
        assert json.loads(d.to_json()).keys() == {
            "seps",
            "nonseps",
            "ffe_cost",
            "iterations",
            "seed",
        }

    def test_pack_separable(self):
        assert pack_separable(range(7), 3) == [(0, 1, 2), (3, 4, 5), (6,)]
        assert pack_separable(range(6), 3) == [(0, 1, 2), (3, 4, 5)]
        assert pack_separable([], 3) == []

    def test_interaction_matrix_from_groups(self):
        d = g.Decomposition(
            seps=[(0,)], nonseps=[(1, 2)], ffe_cost=0, iterations=0, seed=0
        )
        theta = d.interaction_matrix(3)
        assert theta.bits[1, 2] and not theta.bits[0, 1]
