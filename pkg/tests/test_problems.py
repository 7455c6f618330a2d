"""Benchmark construction: base functions, transforms, structure specs."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import groupcc as g
from groupcc._kernels import jit_kernels, numpy_kernels
from groupcc.errors import (
    FeasibilityError,
    GroundTruthError,
    StructureError,
    ValidationError,
)
from groupcc.problems import GroupSpec, OverlapSpec, StructureSpec, TRANSFORMS


class TestKernels:
    def test_sphere_zero(self):
        assert numpy_kernels()["sphere"](np.zeros(5)) == 0.0

    def test_schwefel_12_hand_value(self):
        # prefix sums of (1,2,3) are (1,3,6); squares sum to 46
        assert numpy_kernels()["schwefel_12"](np.array([1.0, 2.0, 3.0])) == 46.0

    def test_rosenbrock_at_ones(self):
        assert numpy_kernels()["rosenbrock"](np.ones(6)) == 0.0

    def test_ackley_at_origin(self):
        assert abs(numpy_kernels()["ackley"](np.zeros(8))) < 1e-12

    def test_elliptic_single_variable(self):
        assert numpy_kernels()["elliptic"](np.array([3.0])) == 9.0

    def test_jit_matches_numpy(self):
        jit = jit_kernels()
        if jit is None:
            pytest.skip("numba disabled")
        rng = np.random.default_rng(0)
        for name, ref in numpy_kernels().items():
            for _ in range(20):
                z = rng.uniform(-4, 4, size=rng.integers(2, 12))
                assert math.isclose(jit[name](z), ref(z), rel_tol=1e-12, abs_tol=1e-12)

    def test_nonnegative_at_random_points(self, rng):
        for name, fn in numpy_kernels().items():
            for _ in range(50):
                z = rng.uniform(-5, 5, size=6)
                assert fn(z) >= 0.0


class TestBuildInstance:
    def test_single_sphere_group_optimum(self):
        spec = StructureSpec(n=4, groups=(GroupSpec(indices=(0, 1, 2, 3)),))
        inst = g.build_instance(spec, shift=np.zeros(4))
        assert inst(np.zeros(4)) == 0.0

    def test_custom_closed_form_worked_example(self):
        spec = StructureSpec(
            n=4, groups=(GroupSpec(indices=(0, 1, 2, 3), function="custom:fbar_c3"),)
        )
        inst = g.build_instance(spec, bounds=(-3.0, 3.0), shift=np.zeros(4))
        assert inst(np.array([-3.0, 1.0, 3.0, 2.0])) == 14.0

    def test_square_transform_squares_value(self):
        spec = StructureSpec(n=2, groups=(), separable_tail=2)
        inst = g.build_instance(spec, transform="square", shift=np.zeros(2))
        x = np.array([1.0, math.sqrt(2.0)])  # untransformed sphere value is 3
        assert math.isclose(inst(x), 9.0, rel_tol=1e-12)

    def test_index_coverage_violation(self):
        spec = StructureSpec(n=4, groups=(GroupSpec(indices=(0, 1)),))
        with pytest.raises(StructureError):
            g.build_instance(spec)

    def test_negative_weight_rejected(self):
        spec = StructureSpec(n=2, groups=(GroupSpec(indices=(0, 1), weight=-1.0),))
        with pytest.raises(ValidationError):
            g.build_instance(spec)

    def test_shift_outside_bounds_rejected(self):
        spec = StructureSpec(n=2, groups=(GroupSpec(indices=(0, 1)),))
        with pytest.raises(ValidationError):
            g.build_instance(spec, shift=np.array([9.0, 0.0]))

    def test_undeclared_overlap_rejected(self):
        spec = StructureSpec(
            n=3,
            groups=(GroupSpec(indices=(0, 1)), GroupSpec(indices=(1, 2))),
        )
        with pytest.raises(StructureError):
            g.build_instance(spec)

    def test_declared_overlap_accepted(self):
        spec = StructureSpec(
            n=3,
            groups=(GroupSpec(indices=(0, 1)), GroupSpec(indices=(1, 2))),
            overlap=(OverlapSpec(group_a=0, group_b=1, shared=(1,)),),
        )
        inst = g.build_instance(spec)
        assert inst.theta_star.bits[0, 1] and inst.theta_star.bits[1, 2]
        assert not inst.theta_star.bits[0, 2]  # indirect only

    def test_default_shift_within_quarter_half_range(self):
        inst = g.fully_separable(16, "sphere", seed=7)
        # optimum of the shifted sphere must be inside the central half box
        run = g.mts_ls1(inst, inst.lb, inst.ub, np.zeros(16), 4000)
        assert (np.abs(run.best_x) <= 2.5 + 1e-6).all()


class TestEvaluate:
    def test_ackley_instance_at_origin(self):
        spec = StructureSpec(n=4, groups=(), separable_tail=4, tail_function="ackley")
        inst = g.build_instance(spec, shift=np.zeros(4))
        assert abs(inst(np.zeros(4))) < 1e-12

    def test_fbar_c1_golden(self):
        inst = g.get_fixture("fbar_c1")
        assert inst(np.array([1.0, 2.0])) == 9.0

    def test_fbar_c4_golden(self):
        inst = g.get_fixture("fbar_c4")
        assert inst(np.array([3.0, 4.0, 0.0, 0.0])) == 5.0

    def test_counter_counts_every_call(self):
        inst = g.get_fixture("fbar_c1")
        start = inst.evals
        for k in range(5):
            g.evaluate(inst, np.array([0.5, 0.5]))
        assert inst.evals == start + 5

    def test_out_of_bounds_rejected_without_counting(self):
        inst = g.get_fixture("fbar_c1")
        start = inst.evals
        with pytest.raises(FeasibilityError):
            g.evaluate(inst, np.array([6.0, 0.0]))
        assert inst.evals == start

    def test_non_finite_rejected(self):
        inst = g.get_fixture("fbar_c1")
        with pytest.raises(ValidationError):
            g.evaluate(inst, np.array([math.nan, 0.0]))

    def test_evaluator_is_pure(self):
        inst = g.fully_separable(8, "rastrigin", seed=3)
        x = np.linspace(-4, 4, 8)
        assert inst(x) == inst(x)

    def test_counter_tolerates_concurrent_increments(self):
        from concurrent.futures import ThreadPoolExecutor

        inst = g.get_fixture("fbar_c1")
        start = inst.evals
        x = np.array([0.25, 0.25])
        with ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(lambda _: g.evaluate(inst, x), range(400)))
        assert inst.evals == start + 400


class TestGroundTruth:
    def test_fully_separable_is_identity(self):
        inst = g.fully_separable(5, "sphere")
        assert g.ground_truth_matrix(inst) == g.InteractionMatrix.identity(5)

    def test_two_disjoint_groups_block_diagonal(self):
        spec = StructureSpec(
            n=4,
            groups=(
                GroupSpec(indices=(0, 1), function="schwefel_12"),
                GroupSpec(indices=(2, 3), function="schwefel_12"),
            ),
        )
        inst = g.build_instance(spec)
        expected = np.eye(4, dtype=bool)
        expected[0, 1] = expected[1, 0] = True
        expected[2, 3] = expected[3, 2] = True
        assert (g.ground_truth_matrix(inst).bits == expected).all()

    def test_fbar_c4_identity_despite_nonadditive_form(self):
        inst = g.get_fixture("fbar_c4")
        assert g.ground_truth_matrix(inst) == g.InteractionMatrix.identity(4)

    def test_opaque_instance_has_no_ground_truth(self):
        inst = g.ProblemInstance(
            n=2,
            lb=np.array([-1.0, -1.0]),
            ub=np.array([1.0, 1.0]),
            evaluator=lambda x: float(x[0]),
        )
        with pytest.raises(GroundTruthError):
            g.ground_truth_matrix(inst)

    def test_transform_does_not_change_ground_truth(self):
        a = g.planted_blocks(16, 4, seed=5)
        b = g.planted_blocks(16, 4, transform="square", seed=5)
        assert a.theta_star == b.theta_star

    def test_chain_shares_boundary_variables(self):
        inst = g.get_fixture("chain-31x4")
        comps = inst.theta_star.transitive_closure().components()
        assert len(comps) == 1  # one chained component


class TestTransformProperties:
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 1000))
    def test_order_preserved_under_transforms(self, seed):
        rng = np.random.default_rng(seed)
        base = g.planted_blocks(8, 4, seed=0)
        squared = g.planted_blocks(8, 4, transform="square", seed=0)
        rooted = g.planted_blocks(8, 4, transform="sqrt", seed=0)
        x1 = rng.uniform(base.lb, base.ub)
        x2 = rng.uniform(base.lb, base.ub)
        f1, f2 = base(x1), base(x2)
        for inst in (squared, rooted):
            h1, h2 = inst(x1), inst(x2)
            assert (f1 < f2) == (h1 < h2)

    def test_sqrt_rejects_negative_total(self):
        with pytest.raises(ValidationError):
            TRANSFORMS["sqrt"](-1.0)


class TestAdditiveDgDeltaEquality:
    def test_cross_group_deltas_agree(self, rng):
        # additive separability: second mixed differences vanish numerically
        inst = g.planted_blocks(8, 4, seed=2)
        for _ in range(200):
            base = rng.uniform(inst.lb, inst.ub)
            p = int(rng.integers(0, 4))  # block one
            q = int(rng.integers(4, 8))  # block two
            a = rng.uniform(inst.lb[p], inst.ub[p] - 0.5)
            delta = float(rng.uniform(0.1, 0.5))
            b1, b2 = rng.uniform(inst.lb[q], inst.ub[q], size=2)
            vals = {}
            for xp, xq, tag in (
                (a, b1, "y1"),
                (a + delta, b1, "y2"),
                (a, b2, "y3"),
                (a + delta, b2, "y4"),
            ):
                x = base.copy()
                x[p], x[q] = xp, xq
                vals[tag] = inst(x)
            d1 = vals["y2"] - vals["y1"]
            d2 = vals["y4"] - vals["y3"]
            scale = sum(abs(v) for v in vals.values()) + 1.0
            assert abs(d1 - d2) < 1e-9 * scale


class TestConfigLoading:
    def test_structured_roundtrip(self, tmp_path):
        cfg = {
            "kind": "structured",
            "n": 6,
            "bounds": [-2.0, 2.0],
            "transform": "sqrt",
            "seed": 11,
            "groups": [
                {"indices": [0, 1, 2], "function": "schwefel_12"},
                {"indices": [3, 4], "function": "schwefel_12", "weight": 2.0},
            ],
            "separable_tail": 1,
        }
        path = tmp_path / "prob.json"
        path.write_text(__import__("json").dumps(cfg))
        a = g.load_problem(str(path))
        b = g.load_problem(cfg)
        x = np.linspace(-1, 1, 6)
        assert a(x) == b(x)
        assert a.theta_star == b.theta_star

    def test_fixture_suffix_selects_transform(self):
        plain = g.get_fixture("blocks-32", seed=4)
        squared = g.get_fixture("blocks-32-sq", seed=4)
        x = np.full(32, 0.25)
        assert math.isclose(squared(x), plain(x) ** 2, rel_tol=1e-12)

    def test_unknown_fixture(self):
        with pytest.raises(ValidationError):
            g.get_fixture("nope")
