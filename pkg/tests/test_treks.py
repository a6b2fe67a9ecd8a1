"""Trek enumeration, exact polynomial identities, and factorizations."""

import itertools
import random
from fractions import Fraction

import pytest

from bmtree.covariance import sigma_from_theta
from bmtree.pcoords import p_adjoint_from_theta, p_from_k
from bmtree.polynomials import Poly, det_dp, fraction_inverse_det
from bmtree.treks import (
    adjugate_polynomials,
    binomial_positivity_certificate,
    certificate_reduced,
    dk_poly,
    euv_poly,
    factorization_factors,
    symbolic_sigma,
    theta_to_t_polys,
    trek_polynomial,
    trek_systems,
    verify_factorization,
)
from bmtree.trees import TreeError, binary_tree_shapes, parse_tree, tree_shapes


def supports(poly):
    return {tuple(sorted(m)) for m in poly.monomials()}


class TestTrekSystems:
    def test_cherry_pair_has_eight(self, fig1):
        systems = trek_systems(fig1, 1, 2)
        assert len(systems) == 8
        weights = {tuple(sorted(s.weight_support())) for s in systems}
        assert weights == {
            (3, 4, 5), (4, 5, 6), (3, 5, 6), (4, 5, 7),
            (3, 4, 7), (4, 6, 7), (3, 6, 7), (3, 5, 7),
        }

    def test_systems_are_vertex_disjoint(self, fig1):
        for i, j in itertools.combinations(range(0, 5), 2):
            for system in trek_systems(fig1, i, j):
                seen = set()
                for trek in system.treks:
                    verts = trek.vertex_set()
                    assert not seen & verts
                    seen |= verts

    def test_two_leaf_tree(self):
        tree, _ = parse_tree("(1:1,2:1):1;")
        systems = trek_systems(tree, 1, 2)
        assert len(systems) == 1
        assert systems[0].weight_support() == (3,)

    def test_root_trek_has_weight_one(self, fig1):
        for system in trek_systems(fig1, 0, 3):
            main = next(t for t in system.treks if t.source == 0)
            assert main.weight_vertex is None
            assert main.top == 0
        # weight support therefore comes only from the identity treks
        poly = trek_polynomial(fig1, 0, 3)
        assert poly.total_degree() == 3

    def test_bad_pair_rejected(self, fig1):
        with pytest.raises(TreeError):
            trek_systems(fig1, 2, 1)
        with pytest.raises(TreeError):
            trek_systems(fig1, 0, 9)


class TestTrekPolynomials:
    def test_cherry_pair_monomials(self, fig1):
        assert supports(trek_polynomial(fig1, 1, 2)) == {
            (3, 4, 5), (4, 5, 6), (3, 5, 6), (4, 5, 7),
            (3, 4, 7), (4, 6, 7), (3, 6, 7), (3, 5, 7),
        }

    def test_cross_pair_single_monomial(self, fig1):
        assert supports(trek_polynomial(fig1, 1, 3)) == {(2, 4, 7)}

    def test_root_pair_factorized_form(self, fig1):
        assert supports(trek_polynomial(fig1, 0, 1)) == {(2, 3, 4), (2, 3, 6), (2, 4, 6)}

    def test_all_coefficients_one(self):
        for n in (3, 4, 5):
            for tree in tree_shapes(n):
                for i, j in itertools.combinations(range(0, n + 1), 2):
                    poly = trek_polynomial(tree, i, j)
                    assert all(c == 1 for c in poly.terms.values())
                    assert poly.is_squarefree()


class TestAdjugatePolynomials:
    def test_matches_trek_route_everywhere(self):
        # the central identity: elimination and enumeration agree exactly
        for n in range(2, 6):
            for tree in tree_shapes(n):
                polys, _det = adjugate_polynomials(tree)
                for (i, j), poly in polys.items():
                    assert poly == trek_polynomial(tree, i, j), (n, i, j)

    def test_three_leaf_values(self, clade3):
        polys, det = adjugate_polynomials(clade3)
        assert supports(polys[(0, 3)]) == {(1, 2), (1, 4), (2, 4)}
        assert supports(polys[(1, 3)]) == {(2, 5)}
        assert supports(polys[(2, 3)]) == {(1, 5)}

    def test_two_leaf_determinant(self):
        tree, _ = parse_tree("(1:1,2:1):1;")
        polys, det = adjugate_polynomials(tree)
        assert supports(det) == {(1, 2), (1, 3), (2, 3)}
        assert all(c == 1 for c in det.terms.values())
        # the single off-diagonal coordinate is the root-edge weight
        assert polys[(1, 2)] == Poly.variable(3)

    def test_agrees_with_numeric_adjugate(self, fig1):
        theta = {v: Fraction(v + 1, 2) for v in fig1.vertices()}
        polys, det = adjugate_polynomials(fig1)
        values = {v: theta[v] for v in fig1.vertices()}
        numeric = p_adjoint_from_theta(fig1, theta)
        for pair, poly in polys.items():
            assert poly.evaluate(values) == numeric[pair]
        sigma = sigma_from_theta(fig1, theta)
        _inv, det_numeric = fraction_inverse_det(sigma)
        assert det.evaluate(values) == det_numeric

    def test_size_bound(self):
        big, _ = parse_tree(
            "(" + ",".join(f"{i}:1" for i in range(1, 9)) + "):1;"
        )
        with pytest.raises(TreeError, match="limited"):
            adjugate_polynomials(big)


class TestCertificates:
    def test_inner_quartet(self, fig1):
        reduced = certificate_reduced(fig1, [1, 2, 3, 4])
        assert supports(reduced) == {(5, 6), (5, 7), (6, 7)}
        assert all(c == 1 for c in reduced.terms.values())

    def test_root_quartets(self, fig1):
        assert supports(certificate_reduced(fig1, [0, 1, 2, 3])) == {(4, 5)}
        assert supports(certificate_reduced(fig1, [0, 1, 2, 4])) == {(3, 5)}
        assert supports(certificate_reduced(fig1, [0, 1, 3, 4])) == {(2, 6)}
        assert supports(certificate_reduced(fig1, [0, 2, 3, 4])) == {(1, 6)}

    def test_three_leaf_certificate(self, clade3):
        assert certificate_reduced(clade3, [0, 1, 2, 3]) == Poly.variable(4)

    def test_full_certificate_is_reduced_times_det(self, fig1):
        _polys, det = adjugate_polynomials(fig1)
        full = binomial_positivity_certificate(fig1, [1, 2, 3, 4])
        assert full == certificate_reduced(fig1, [1, 2, 3, 4]) * det

    def test_nonnegative_for_all_trivalent_quartets(self):
        for n in (4, 5):
            for tree in tree_shapes(n):
                for q in itertools.combinations(range(n + 1), 4):
                    if tree.quartet_topology(q).is_star:
                        continue
                    cert = binomial_positivity_certificate(tree, q)
                    assert all(c > 0 for c in cert.terms.values())

    def test_star_quartet_rejected(self, star5):
        with pytest.raises(TreeError, match="star"):
            binomial_positivity_certificate(star5, [1, 2, 3, 4])

    def test_equality_pairings_vanish(self):
        for n in (4, 5):
            for tree in tree_shapes(n):
                polys, _det = adjugate_polynomials(tree)

                def P(a, b):
                    return polys[(min(a, b), max(a, b))]

                for q in itertools.combinations(range(n + 1), 4):
                    topo = tree.quartet_topology(q)
                    a, b, c, d = q
                    if topo.is_star:
                        prods = {
                            P(a, b) * P(c, d),
                            P(a, c) * P(b, d),
                            P(a, d) * P(b, c),
                        }
                        assert len(prods) == 1
                    else:
                        (i, j), (k, l) = topo.split_pairs()
                        assert P(i, k) * P(j, l) == P(i, l) * P(j, k)


class TestPathDeterminants:
    def test_cherry_bordered_determinants(self, fig1):
        assert euv_poly(fig1, 5, 1) == Poly.from_vars({2: 1, 5: -1})
        assert euv_poly(fig1, 5, 2) == Poly.from_vars({1: 1, 5: -1})
        assert euv_poly(fig1, 6, 3) == Poly.from_vars({4: 1, 6: -1})
        assert euv_poly(fig1, 6, 4) == Poly.from_vars({3: 1, 6: -1})

    def test_deep_bordered_determinant(self, fig1):
        # E for the edge into the {1,2} cherry: bordered determinant with
        # rows for leaves 1 and 2 and a reference column below vertex 6
        t = Poly.variable
        m = [
            [Poly.const(1), Poly.const(1), Poly.const(1)],
            [t(7), t(1), t(5)],
            [t(7), t(5), t(2)],
        ]
        assert euv_poly(fig1, 7, 6) == det_dp(m)

    def test_root_edge_is_one(self, fig1):
        assert euv_poly(fig1, 0, 7) == Poly.const(1)

    def test_non_edge_rejected(self, fig1):
        with pytest.raises(TreeError, match="not a directed edge"):
            euv_poly(fig1, 7, 1)

    def test_truncated_determinants(self, fig1):
        assert dk_poly(fig1, 7) == Poly.variable(7)
        t = Poly.variable
        # truncating below the {1,2} cherry leaves leaves {3, 4, 5}
        m = [
            [t(3), t(6), t(7)],
            [t(6), t(4), t(7)],
            [t(7), t(7), t(5)],
        ]
        assert dk_poly(fig1, 5) == det_dp(m)

    def test_dk_needs_internal_vertex(self, fig1):
        with pytest.raises(TreeError, match="internal"):
            dk_poly(fig1, 2)

    def test_binary_only(self, star5):
        with pytest.raises(TreeError, match="binary"):
            dk_poly(star5, 5)
        with pytest.raises(TreeError, match="binary"):
            verify_factorization(star5)


class TestFactorization:
    def test_worked_example_pairs(self, fig1):
        polys, _det = adjugate_polynomials(fig1)
        subs = theta_to_t_polys(fig1)
        assert polys[(1, 2)].substitute(subs) == dk_poly(fig1, 5)
        assert polys[(3, 4)].substitute(subs) == dk_poly(fig1, 6)
        assert polys[(1, 3)].substitute(subs) == (
            euv_poly(fig1, 5, 1) * dk_poly(fig1, 7) * euv_poly(fig1, 6, 3)
        )
        assert polys[(0, 1)].substitute(subs) == (
            euv_poly(fig1, 7, 5) * euv_poly(fig1, 5, 1)
        )

    def test_two_leaf_single_factor(self):
        tree, _ = parse_tree("(1:1,2:1):1;")
        polys, _det = adjugate_polynomials(tree)
        subs = theta_to_t_polys(tree)
        assert polys[(1, 2)].substitute(subs) == dk_poly(tree, 3)
        assert verify_factorization(tree)

    def test_all_binary_shapes(self):
        for n in range(2, 6):
            for tree in binary_tree_shapes(n):
                assert verify_factorization(tree)

    def test_factor_lists_cover_path(self, fig1):
        factors = factorization_factors(fig1, 1, 3)
        assert len(factors) == 3  # D at the top plus one E per side


class TestInitialMonomials:
    def test_leading_monomials_of_adjugate_coordinates(self):
        # under graded reverse lex with low vertices large, the leading
        # monomial in cumulative coordinates is the product of all leaf
        # variables times the lca variable over the endpoint variables
        for n in range(2, 6):
            for tree in binary_tree_shapes(n):
                polys, _det = adjugate_polynomials(tree)
                subs = theta_to_t_polys(tree)
                for (i, j), poly in polys.items():
                    lead = poly.substitute(subs).initial_monomial_degrevlex()
                    want = {leaf: 1 for leaf in range(1, n + 1)}
                    if i == 0:
                        want[j] -= 1
                    else:
                        w = tree.lca(i, j)
                        want[w] = want.get(w, 0) + 1
                        want[i] -= 1
                        want[j] -= 1
                    want = {v: e for v, e in want.items() if e}
                    assert lead == want, (n, i, j)


class TestStructuralEquations:
    def test_full_system_covariance_restricts_to_leaves(self):
        # the covariance of the all-vertex system, built from the adjacency
        # structure, restricts to the leaf block
        rng = random.Random(7)
        for n in (3, 4, 5):
            for tree in tree_shapes(n):
                theta = {
                    v: Fraction(rng.randint(1, 9), rng.randint(1, 3))
                    for v in tree.vertices()
                }
                nv = tree.nv
                lam = [[Fraction(0)] * nv for _ in range(nv)]
                for v in tree.vertices():
                    p = tree.parents[v - 1]
                    if p != 0:
                        lam[p - 1][v - 1] = Fraction(1)
                eye = [[Fraction(int(a == b)) for b in range(nv)] for a in range(nv)]
                m = [[eye[a][b] - lam[a][b] for b in range(nv)] for a in range(nv)]
                minv, _ = fraction_inverse_det(m)
                d_theta = [[Fraction(0)] * nv for _ in range(nv)]
                for v in tree.vertices():
                    d_theta[v - 1][v - 1] = theta[v]

                def matmul(a, b):
                    return [
                        [sum(a[i][k] * b[k][j] for k in range(nv)) for j in range(nv)]
                        for i in range(nv)
                    ]

                minv_t = [list(row) for row in zip(*minv)]
                xi = matmul(matmul(minv_t, d_theta), minv)
                sigma = sigma_from_theta(tree, theta)
                for i in range(n):
                    for j in range(n):
                        assert xi[i][j] == sigma[i][j]

    def test_schur_complement_marginalization(self):
        # dropping the last leaf updates the edge coordinates by the
        # rank-one Schur correction through kappa_nn
        rng = random.Random(8)
        for n in (3, 4, 5):
            for tree in tree_shapes(n):
                theta = {
                    v: Fraction(rng.randint(1, 9), rng.randint(1, 3))
                    for v in tree.vertices()
                }
                sigma = sigma_from_theta(tree, theta)
                k_full, _ = fraction_inverse_det(sigma)
                p = p_from_k(k_full)
                sub = [row[: n - 1] for row in sigma[: n - 1]]
                k_sub, _ = fraction_inverse_det(sub)
                p_sub = p_from_k(k_sub)
                knn = k_full[n - 1][n - 1]
                for i in range(1, n):
                    assert p_sub[(0, i)] == p[(0, i)] + p[(0, n)] * p[(i, n)] / knn
                    for j in range(i + 1, n):
                        assert p_sub[(i, j)] == p[(i, j)] + p[(i, n)] * p[(j, n)] / knn


class TestSymbolicSigma:
    def test_entries_are_root_path_sums(self, fig1):
        rows = symbolic_sigma(fig1)
        assert rows[0][1] == Poly.from_vars({5: 1, 7: 1})
        assert rows[0][0] == Poly.from_vars({1: 1, 5: 1, 7: 1})
        assert rows[2][3] == Poly.from_vars({6: 1, 7: 1})
