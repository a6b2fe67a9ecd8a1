"""Binomial generators of the model variety and semialgebraic membership.

Every quadruple of labels in {0..n} contributes quadratic binomials in the
edge coordinates: one for a trivalent quartet (the two cross products of
the cherry split agree) and two for a star quartet (all three pairings
agree; that is two independent equalities).  Membership in the model cone
additionally requires positive definiteness, nonnegative edge coordinates,
and the cross products of every trivalent quartet to stay below the split
product; the membership check verifies all three star pairings
symmetrically even though two generate the ideal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .covariance import is_exact, is_positive_definite
from .pcoords import p_from_k
from .polynomials import matrix_rank_exact
from .trees import RootedTree

DEFAULT_TOL = 1e-9

Monomial = tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True, order=True)
class Binomial:
    """Quadratic difference  p_ab * p_cd  -  p_ef * p_gh.

    Both monomials are stored with sorted pairs in sorted order, and the
    lexicographically smaller monomial comes first, so equal generators from
    different quadruples collapse under set deduplication.
    """

    plus: Monomial
    minus: Monomial

    @staticmethod
    def of(m1: Monomial, m2: Monomial) -> "Binomial":
        m1 = tuple(sorted(tuple(sorted(p)) for p in m1))
        m2 = tuple(sorted(tuple(sorted(p)) for p in m2))
        if m1 == m2:
            raise ValueError("binomial with identical monomials is zero")
        lo, hi = sorted((m1, m2))
        return Binomial(lo, hi)

    def evaluate(self, p: dict):
        (a, b), (c, d) = self.plus
        (e, f), (g, h) = self.minus
        return p[(a, b)] * p[(c, d)] - p[(e, f)] * p[(g, h)]

    def __str__(self) -> str:
        def mono(m: Monomial) -> str:
            return "*".join(f"p{_pair_name(i, j)}" for i, j in m)

        return f"{mono(self.plus)} - {mono(self.minus)}"


def _pair_name(i: int, j: int) -> str:
    return f"{i}{j}" if j <= 9 else f"{i},{j}"


def _pairing_products(q: tuple[int, int, int, int]) -> list[Monomial]:
    a, b, c, d = q
    return [
        ((a, b), (c, d)),
        ((a, c), (b, d)),
        ((a, d), (b, c)),
    ]


@lru_cache(maxsize=256)
def generators(tree: RootedTree) -> tuple[Binomial, ...]:
    """Deduplicated quadratic generators, one batch per quartet of {0..n}.

    A trivalent quartet with split ij|kl contributes the single binomial
    p_ik p_jl - p_il p_jk; a star quartet contributes two of the three
    pairwise differences of its pair products (the third is their sum, so
    two generate the same ideal and the counts match the known minimal
    generating sets: 5 for the four-leaf binary tree, 10 for the star).
    """
    gens: set[Binomial] = set()
    for q in itertools.combinations(range(tree.n + 1), 4):
        topo = tree.quartet_topology(q)
        if topo.is_star:
            m1, m2, m3 = _pairing_products(q)
            gens.add(Binomial.of(m1, m2))
            gens.add(Binomial.of(m1, m3))
        else:
            (i, j), (k, l) = topo.split_pairs()
            cross1 = tuple(sorted((tuple(sorted((i, k))), tuple(sorted((j, l))))))
            cross2 = tuple(sorted((tuple(sorted((i, l))), tuple(sorted((j, k))))))
            gens.add(Binomial.of(cross1, cross2))
    return tuple(sorted(gens))


def residuals(gens, p: dict):
    """Largest absolute value of any generator at the given p-vector.

    Exactly zero (as a Fraction) on model points in the exact backend.
    """
    worst = 0
    for g in gens:
        worst = max(worst, abs(g.evaluate(p)))
    return worst


@dataclass
class MembershipReport:
    """Outcome of the semialgebraic membership test.

    ``equality_residual`` is the worst relative residual among the quartet
    equalities; the violation lists name the offending pairs/quartets.  The
    verdict is true iff the matrix is positive definite and no list is
    populated with ``equality_residual`` within tolerance.
    """

    verdict: bool
    pd_ok: bool
    sign_violations: list = field(default_factory=list)
    equality_residual: float = 0.0
    inequality_violations: list = field(default_factory=list)
    tol: float = DEFAULT_TOL


def semialgebraic_membership(
    tree: RootedTree, k_matrix, tol: float = DEFAULT_TOL
) -> MembershipReport:
    """Decide whether K is the concentration matrix of a model point.

    Checks, with relative tolerances in the float backend and exactly for
    int/Fraction input: (a) positive definiteness, (b) nonnegativity of all
    edge coordinates, (c) equality of all three pair products on star
    quartets, (d) equality of the two cross products and the cross <= split
    inequality on trivalent quartets.
    """
    if isinstance(k_matrix, np.ndarray):
        exact = False
    else:
        exact = all(is_exact(x) for r in k_matrix for x in r)
    pd_ok = is_positive_definite(k_matrix)
    p = p_from_k(k_matrix)
    scale_p = max((abs(x) for x in p.values()), default=0)
    slack_sign = 0 if exact else tol * max(scale_p, 1e-300)
    report = MembershipReport(verdict=True, pd_ok=pd_ok, tol=tol)
    report.sign_violations = [pair for pair, val in sorted(p.items()) if val < -slack_sign]

    quartets = []
    scale = 0
    for q in itertools.combinations(range(tree.n + 1), 4):
        prods = []
        for m in _pairing_products(q):
            (a, b), (c, d) = m
            prods.append(p[(a, b)] * p[(c, d)])
        scale = max(scale, max(abs(x) for x in prods))
        quartets.append((q, prods))
    # tolerances are relative to the largest product anywhere: a quartet
    # whose products all vanish (a boundary stratum) must not blow up a
    # 0-versus-0 comparison
    slack = 0 if exact else tol * max(float(scale), 1e-300)

    worst = 0
    for q, prods in quartets:
        topo = tree.quartet_topology(q)
        if topo.is_star:
            worst = max(worst, max(prods) - min(prods))
        else:
            (i, j), (k, l) = topo.split_pairs()

            def prod(a, b, c, d):
                return p[(min(a, b), max(a, b))] * p[(min(c, d), max(c, d))]

            big = prod(i, j, k, l)
            cross1 = prod(i, k, j, l)
            cross2 = prod(i, l, j, k)
            worst = max(worst, abs(cross1 - cross2))
            excess = max(cross1, cross2) - big
            if excess > slack:
                report.inequality_violations.append((q, (i, j, k, l), float(excess)))
    report.equality_residual = float(worst) / float(scale) if scale else 0.0
    equality_ok = worst <= slack
    report.verdict = bool(
        pd_ok
        and not report.sign_violations
        and equality_ok
        and not report.inequality_violations
    )
    return report


def exponent_matrix_rank(tree: RootedTree) -> int:
    """Rank of the exponent matrix of the monomial parametrization.

    One row per pair over {0..n} with +1 at the lca and -1 at each leaf
    (just -1 at i for the pairs (0, i)); columns indexed by the vertices.
    Equals the vertex count, so the variety has codimension
    C(n+1, 2) - rank.
    """
    rows = []
    for i in range(1, tree.n + 1):
        row = [0] * tree.nv
        row[i - 1] = -1
        rows.append(row)
        for j in range(i + 1, tree.n + 1):
            row = [0] * tree.nv
            row[tree.lca(i, j) - 1] += 1
            row[i - 1] -= 1
            row[j - 1] -= 1
            rows.append(row)
    return matrix_rank_exact(rows)
