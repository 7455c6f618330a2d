"""Multi-path routing: decoding, the delay objective, instance generation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import groupcc as g
from groupcc.errors import GenerationError, StructureError, ValidationError
from groupcc.routing import k_shortest_paths


class TestDecodeFractions:
    def test_worked_example(self):
        x = g.decode_fractions(np.array([0.6, 0.3, 0.9]), 4)
        expected = np.array([0.42, 0.3, 0.252, 0.028])
        assert np.abs(x - expected).max() < 1e-12

    def test_all_zero_mass_falls_to_last_path(self):
        x = g.decode_fractions(np.zeros(4), 5)
        assert x.tolist() == [0.0, 0.0, 0.0, 0.0, 1.0]

    def test_single_value_one_claims_everything(self):
        assert g.decode_fractions(np.array([1.0]), 2).tolist() == [1.0, 0.0]

    def test_wrong_length_rejected(self):
        with pytest.raises(ValidationError):
            g.decode_fractions(np.array([0.5]), 3)

    def test_out_of_box_rejected(self):
        with pytest.raises(ValidationError):
            g.decode_fractions(np.array([1.5]), 2)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=0.0, max_value=1.0, width=64), min_size=1, max_size=9
        )
    )
    def test_fractions_form_a_distribution(self, zs):
        x = g.decode_fractions(np.asarray(zs), len(zs) + 1)
        assert (x >= 0.0).all() and (x <= 1.0).all()
        assert math.isclose(float(x.sum()), 1.0, abs_tol=1e-9)


class TestEvaluateDelay:
    def test_zero_volume_network(self):
        inst = g.four_node_example(5000.0)
        demands = tuple(
            g.Demand(src=d.src, dst=d.dst, volume=1e-12, paths=d.paths)
            for d in inst.demands
        )
        tiny = g.RoutingInstance(network=inst.network, demands=demands)
        assert g.evaluate_delay(tiny, np.zeros(2)) == pytest.approx(0.0, abs=1e-9)

    def test_four_node_closed_form(self):
        # direct substitution: both demands fully on their second paths
        inst = g.four_node_example(5000.0)
        expected = 100.0 / 15.0 + 210.0 / 4790.0 + 110.0 / 15.0
        assert g.evaluate_delay(inst, np.zeros(2)) == pytest.approx(expected, rel=1e-12)

    def test_overload_returns_infinity(self):
        inst = g.four_node_example(150.0)  # shared link below joint demand
        assert g.evaluate_delay(inst, np.zeros(2)) == math.inf

    def test_monotone_congestion(self):
        # raising one demand's load on a link strictly raises the delay
        inst = g.four_node_example(5000.0)
        values = [
            g.evaluate_delay(inst, np.array([z1, 0.0]))
            for z1 in np.linspace(0.0, 0.4, 9)
        ]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_dimension_mismatch(self):
        inst = g.four_node_example(5000.0)
        with pytest.raises(ValidationError):
            g.evaluate_delay(inst, np.zeros(3))

    def test_problem_instance_counts_ffes(self):
        prob = g.four_node_example(5000.0).as_problem_instance()
        before = prob.evals
        prob(np.array([0.2, 0.8]))
        assert prob.evals == before + 1


class TestSeparabilitySwitch:
    def test_printed_scenario_shows_no_interaction_at_high_capacity(self):
        # the two extreme contexts for the second demand leave the first
        # demand's ordering untouched when the shared link is ample
        prob = g.four_node_example(5000.0).as_problem_instance()
        rng = np.random.default_rng(0)
        sm = g.build_sample_matrix(prob.lb, prob.ub, 10, rng)
        for z2_base, z2_ctx in ((0.0, 1.0), (1.0, 0.0)):
            x_hq = np.array([0.5, z2_base])
            xbar2 = np.array([0.0, z2_ctx])
            y1, r1 = g.create_first_ranking([0], x_hq, sm, prob)
            assert not g.is_interaction([0], [1], x_hq, sm, xbar2, y1, r1, prob)

    def test_tight_capacity_yields_a_witness(self):
        prob = g.four_node_example(220.0).as_problem_instance()
        found = False
        for seed in range(10):
            rng = np.random.default_rng(seed)
            sm = g.build_sample_matrix(prob.lb, prob.ub, 10, rng)
            x_hq = rng.uniform(prob.lb, prob.ub)
            xbar2 = rng.uniform(prob.lb, prob.ub)
            y1, r1 = g.create_first_ranking([0], x_hq, sm, prob)
            if g.is_interaction([0], [1], x_hq, sm, xbar2, y1, r1, prob):
                found = True
                break
        assert found


class TestGeneration:
    def test_dimension_formula(self):
        inst = g.generate_instance((16, 48), demand_count=63, paths_per_demand=17, seed=0)
        assert inst.dimension == 63 * 16

    def test_two_path_demand_dimension_one(self):
        inst = g.generate_instance(6, demand_count=1, paths_per_demand=2, seed=1)
        assert inst.dimension == 1

    def test_deterministic_under_seed(self):
        a = g.generate_instance(8, demand_count=5, paths_per_demand=3, seed=42)
        b = g.generate_instance(8, demand_count=5, paths_per_demand=3, seed=42)
        assert a.to_json() == b.to_json()

    def test_insufficient_paths_error_names_demand(self):
        # a tree has exactly one simple path per node pair
        links = tuple(
            g.Link(id=i, u=i, v=i + 1, capacity=10.0) for i in range(3)
        )
        net = g.Network(nodes=4, links=links)
        with pytest.raises(GenerationError, match="demand 0"):
            g.generate_instance(net, demand_count=1, paths_per_demand=2, seed=0)

    def test_json_roundtrip(self):
        inst = g.generate_instance(8, demand_count=4, paths_per_demand=3, seed=7)
        again = g.RoutingInstance.from_json(inst.to_json())
        assert again.to_json() == inst.to_json()
        z = np.full(again.dimension, 0.3)
        assert g.evaluate_delay(again, z) == g.evaluate_delay(inst, z)

    def test_k_shortest_ordering(self):
        net = g.four_node_example(5000.0).network
        paths = k_shortest_paths(net.graph(), 0, 3, 4)
        hops = [len(p) - 1 for p in paths]
        assert hops == sorted(hops)
        same_len = [tuple(p) for p in paths if len(p) == len(paths[0])]
        assert same_len == sorted(same_len)

    def test_generated_paths_are_valid(self):
        inst = g.generate_instance(10, demand_count=6, paths_per_demand=4, seed=3)
        by_id = {e.id: e for e in inst.network.links}
        for d in inst.demands:
            for path in d.paths:
                assert len(set(path)) == len(path)
                node = d.src
                for link in path:
                    node = by_id[link].other(node)
                assert node == d.dst


class TestPenaltyRegion:
    def test_full_pipeline_survives_infeasible_landscape(self):
        # tight capacities make most of the unit box evaluate to +inf; the
        # bootstrap, the ranking search and the cooperative driver must all
        # handle the penalty values without poisoning their state
        inst = g.generate_instance(
            (10, 20),
            demand_count=6,
            paths_per_demand=3,
            capacity_range=(40.0, 120.0),
            volume_range=(20.0, 60.0),
            seed=5,
        )
        prob = inst.as_problem_instance()
        zs = np.random.default_rng(0).uniform(0, 1, (50, prob.n))
        assert any(math.isinf(prob(z)) for z in zs)
        d = g.irrg(
            prob,
            g.IrrgConfig(seed=0, bootstrap_global_ffe=500, bootstrap_local_ffe=1000),
        )
        assert d.covered() == set(range(prob.n))
        run = g.cc_run(prob, d, g.CcConfig(total_budget=8000, seed=1))
        assert math.isfinite(run.best_f)


class TestValidation:
    def test_bad_path_rejected(self):
        net = g.four_node_example(5000.0).network
        with pytest.raises(StructureError):
            g.RoutingInstance(
                network=net,
                demands=(
                    g.Demand(src=0, dst=2, volume=1.0, paths=((1,), (0,))),
                ),
            )

    def test_nonpositive_capacity_rejected(self):
        with pytest.raises(StructureError):
            g.Network(nodes=2, links=(g.Link(id=0, u=0, v=1, capacity=0.0),))
