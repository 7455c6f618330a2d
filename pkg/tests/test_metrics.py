"""Accuracy scores against ground truth."""

import numpy as np
import pytest

import groupcc as g
from groupcc.errors import ValidationError


def matrix(n, pairs):
    theta = g.InteractionMatrix.identity(n)
    for i, j in pairs:
        theta.link_clique([i, j])
    return theta


class TestScore:
    def test_perfect_match(self):
        star = matrix(5, [(0, 1), (2, 3)])
        sc = g.score(star.copy(), star)
        assert (sc.rho1, sc.rho2, sc.rho3) == (100.0, 100.0, 100.0)

    def test_identity_pair_undefined_recall(self):
        sc = g.score(g.InteractionMatrix.identity(6), g.InteractionMatrix.identity(6))
        assert sc.rho1 is None
        assert (sc.rho2, sc.rho3) == (100.0, 100.0)

    def test_all_true_ideal_undefined_rho2(self):
        star = matrix(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
        sc = g.score(star.copy(), star)
        assert sc.rho2 is None and sc.rho1 == 100.0

    def test_missed_single_pair(self):
        star = matrix(4, [(0, 1)])
        sc = g.score(g.InteractionMatrix.identity(4), star)
        assert sc.rho1 == 0.0
        assert sc.rho2 == 100.0
        assert sc.rho3 == pytest.approx(100.0 * 5.0 / 6.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            g.score(g.InteractionMatrix.identity(3), g.InteractionMatrix.identity(4))

    def test_permutation_invariance(self, rng):
        star = matrix(8, [(0, 1), (1, 2), (4, 5)])
        got = matrix(8, [(0, 1), (4, 5), (6, 7)])
        base = g.score(got, star)
        for _ in range(10):
            perm = rng.permutation(8)
            star_p = g.InteractionMatrix(star.bits[np.ix_(perm, perm)])
            got_p = g.InteractionMatrix(got.bits[np.ix_(perm, perm)])
            sc = g.score(got_p, star_p)
            assert sc.as_dict() == base.as_dict()

    def test_rho3_against_direct_pair_enumeration(self, rng):
        # independent oracle: plain double loop over unordered pairs
        for trial in range(20):
            n = int(rng.integers(2, 9))
            star = g.InteractionMatrix.identity(n)
            got = g.InteractionMatrix.identity(n)
            for theta in (star, got):
                for _ in range(int(rng.integers(0, 5))):
                    i, j = rng.choice(n, 2, replace=False)
                    theta.link_clique([int(i), int(j)])
            agree = 0
            total = 0
            for i in range(n):
                for j in range(i + 1, n):
                    total += 1
                    agree += got.bits[i, j] == star.bits[i, j]
            assert g.score(got, star).rho3 == pytest.approx(100.0 * agree / total)
