"""Binomial generators, residuals, membership, and the exponent rank."""

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from bmtree.covariance import is_positive_definite, sigma_from_theta, tree_metric
from bmtree.pcoords import p_adjoint_from_theta, pair_indices
from bmtree.toric import (
    Binomial,
    exponent_matrix_rank,
    generators,
    residuals,
    semialgebraic_membership,
)
from bmtree.trees import parse_tree, tree_shapes


def one_contraction_tree():
    """The four-leaf tree with the {3,4} cherry collapsed: |V| = 6."""
    tree, _ = parse_tree("((1:1,2:1):1,3:1,4:1):1;")
    assert tree.nv == 6
    return tree


class TestGenerators:
    def test_four_leaf_list(self, fig1):
        got = {str(g) for g in generators(fig1)}
        assert got == {
            "p01*p23 - p02*p13",
            "p01*p24 - p02*p14",
            "p03*p14 - p04*p13",
            "p03*p24 - p04*p23",
            "p13*p24 - p14*p23",
        }

    def test_star_has_ten(self, star5):
        assert len(generators(star5)) == 10

    def test_one_contraction_has_seven(self):
        assert len(generators(one_contraction_tree())) == 7

    def test_binomial_canonical_dedup(self):
        a = Binomial.of(((0, 1), (2, 3)), ((0, 2), (1, 3)))
        b = Binomial.of(((1, 3), (0, 2)), ((2, 3), (1, 0)))
        assert a == b
        with pytest.raises(ValueError):
            Binomial.of(((0, 1), (2, 3)), ((2, 3), (0, 1)))

    def test_nonbinary_generators_union_of_refinements(self):
        # collapsing edges only adds constraints: the ideal of a non-binary
        # tree is the sum of the ideals of its binary refinements; compare
        # after closing each quadruple's equalities pairwise, since any two
        # of a star quartet's three differences generate the third
        def closure(gens):
            by_quadruple = {}
            for g in gens:
                labels = frozenset(i for pair in g.plus + g.minus for i in pair)
                by_quadruple.setdefault(labels, set()).update({g.plus, g.minus})
            closed = set()
            for monomials in by_quadruple.values():
                for m1, m2 in itertools.combinations(sorted(monomials), 2):
                    closed.add(Binomial.of(m1, m2))
            return closed

        for n in (4, 5):
            for tree in tree_shapes(n):
                if tree.is_binary():
                    continue
                union = set()
                for refined in tree.binary_refinements():
                    union.update(generators(refined))
                assert closure(generators(tree)) == closure(union)


class TestResiduals:
    def test_model_points_exactly_zero(self):
        rng = random.Random(0)
        for n in range(2, 6):
            for tree in tree_shapes(n):
                gens = generators(tree)
                for _ in range(5):
                    theta = {
                        v: Fraction(rng.randint(1, 30), rng.randint(1, 6))
                        for v in tree.vertices()
                    }
                    assert residuals(gens, p_adjoint_from_theta(tree, theta)) == 0

    def test_constant_vector_is_in_every_variety(self, fig1):
        p = {pair: Fraction(1) for pair in pair_indices(4)}
        assert residuals(generators(fig1), p) == 0

    def test_generic_point_has_nonzero_residual(self, fig1):
        p = {pair: Fraction(idx + 1) for idx, pair in enumerate(pair_indices(4))}
        gens = generators(fig1)
        r = residuals(gens, p)
        # hand evaluation of p01*p23 - p02*p13: indices 1,8,2,6 in the
        # lexicographic order of pairs
        assert r >= abs(Fraction(1) * Fraction(8) - Fraction(2) * Fraction(6))
        assert r > 0

    def test_tropical_exponential_link(self):
        # exp(-distance) satisfies every generator within float tolerance
        rng = np.random.default_rng(1)
        for n in range(3, 7):
            for tree in tree_shapes(n):
                theta = {v: float(rng.uniform(0.05, 1.0)) for v in tree.vertices()}
                d = tree_metric(tree, theta)
                p = {pair: math.exp(-d[pair]) for pair in pair_indices(n)}
                worst = residuals(generators(tree), p)
                assert worst <= 1e-9


class TestMembership:
    def test_model_points_accepted(self, fig1):
        rng = np.random.default_rng(2)
        for _ in range(20):
            theta = {v: float(rng.uniform(0.2, 3.0)) for v in fig1.vertices()}
            k = np.linalg.inv(np.array(sigma_from_theta(fig1, theta)))
            report = semialgebraic_membership(fig1, k)
            assert report.verdict, report

    def test_pd_counterexample_rejected(self, fig1):
        theta = {1: 5.0, 2: 5.0, 3: 5.0, 4: 5.0, 5: 0.0, 6: 0.0, 7: -1.0}
        sigma = np.array(sigma_from_theta(fig1, theta))
        assert is_positive_definite(sigma)
        report = semialgebraic_membership(fig1, np.linalg.inv(sigma))
        assert not report.verdict
        assert report.pd_ok

    def test_identity_accepted(self, fig1):
        report = semialgebraic_membership(fig1, np.eye(4))
        assert report.verdict

    def test_non_pd_rejected(self, fig1):
        report = semialgebraic_membership(fig1, -np.eye(4))
        assert not report.verdict and not report.pd_ok

    def test_exact_backend(self, fig1):
        theta = {v: Fraction(v + 1) for v in fig1.vertices()}
        adj = p_adjoint_from_theta(fig1, theta)
        from bmtree.pcoords import k_from_p

        report = semialgebraic_membership(fig1, k_from_p(adj))
        assert report.verdict
        assert report.equality_residual == 0

    def test_single_negative_internal_weight_rejected(self):
        # exactness of the characterization: one slightly negative internal
        # weight keeps the matrix positive definite but must be rejected
        rng = np.random.default_rng(3)
        count = 0
        for tree in tree_shapes(5):
            internals = [v for v in tree.vertices() if not tree.is_leaf(v)]
            if len(internals) < 2:
                continue
            for _ in range(10):
                theta = {v: float(rng.uniform(0.5, 2.0)) for v in tree.vertices()}
                bad = internals[int(rng.integers(len(internals)))]
                theta[bad] = -float(rng.uniform(0.05, 0.3))
                sigma = np.array(sigma_from_theta(tree, theta))
                if not is_positive_definite(sigma):
                    continue
                report = semialgebraic_membership(tree, np.linalg.inv(sigma))
                assert not report.verdict, (tree, theta)
                count += 1
        assert count > 30


class TestExponentRank:
    def test_reference_values(self, fig1, star5):
        assert exponent_matrix_rank(fig1) == 7
        assert math.comb(5, 2) - exponent_matrix_rank(fig1) == 3
        assert exponent_matrix_rank(star5) == 5
        assert math.comb(5, 2) - exponent_matrix_rank(star5) == 5
        contraction = one_contraction_tree()
        assert math.comb(5, 2) - exponent_matrix_rank(contraction) == 4

    def test_rank_equals_vertex_count(self):
        for n in range(2, 7):
            for tree in tree_shapes(n):
                assert exponent_matrix_rank(tree) == tree.nv
