"""Exact trek combinatorics and determinant factorizations.

A trek between leaves is a pair of downward paths from a common top vertex;
its weight is the edge parameter of the top (or 1 when the trek starts at
the root leaf 0).  The edge coordinates of the adjugate concentration
matrix expand as sums over vertex-disjoint trek systems, with every
monomial appearing exactly once; this module enumerates those systems,
builds the corresponding exact polynomials, computes the same polynomials
independently by fraction-free elimination, and certifies the quartet
inequalities and the path factorization of the adjugate entries into the
small determinants D_k and E_uv.

Symbolic polynomials live in :class:`bmtree.polynomials.Poly` with one
variable per vertex; whether the variable letter means an edge weight
(theta) or a cumulative root-path weight (t) is a per-function convention
noted in each docstring.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .polynomials import Poly, det_dp, ff_adjugate
from .trees import RootedTree, TreeError

SYMBOLIC_SIZE_BOUND = 7


class TrekIdentityError(ArithmeticError):
    """An exact identity that the theory guarantees failed to hold.

    Raised when a trek monomial repeats, a positivity certificate has a
    negative coefficient, or a factorization identity fails; all of these
    indicate an enumeration or elimination bug, never bad data.
    """


@dataclass(frozen=True)
class Trek:
    """Pair of downward paths from ``top`` to the two endpoint leaves.

    ``weight_vertex`` is the vertex whose parameter weighs the trek, or
    None for the weight-1 trek out of the root leaf.
    """

    top: int
    left: tuple[int, ...]
    right: tuple[int, ...]

    @property
    def weight_vertex(self) -> int | None:
        return self.top if self.top != 0 else None

    @property
    def source(self) -> int:
        return self.left[-1]

    @property
    def target(self) -> int:
        return self.right[-1]

    def vertex_set(self) -> frozenset:
        return frozenset(self.left) | frozenset(self.right)


@dataclass(frozen=True)
class TrekSystem:
    """Vertex-disjoint treks whose endpoints exhaust sources and targets."""

    treks: tuple[Trek, ...]
    sources: tuple[int, ...]
    targets: tuple[int, ...]

    def weight_support(self) -> tuple[int, ...]:
        return tuple(sorted(t.weight_vertex for t in self.treks if t.weight_vertex))


def _downward_path(tree: RootedTree, top: int, leaf: int) -> tuple[int, ...]:
    path = tree.root_path(leaf)
    if top == 0:
        return (0,) + path
    return path[path.index(top) :]


def trek_systems(tree: RootedTree, i: int, j: int) -> list[TrekSystem]:
    """All vertex-disjoint trek systems realizing the (i, j) coordinate.

    For leaves 1 <= i < j <= n the systems route one trek from i to j (top
    anywhere on the root path of lca(i,j)) plus an identity trek on every
    other leaf; for i = 0 the 0-to-j trek runs down the whole root path of j
    with weight 1.  Enumeration backtracks over top choices with a bitmask
    occupancy check.
    """
    n = tree.n
    if not 0 <= i < j <= n:
        raise TreeError(f"need 0 <= i < j <= {n}, got ({i}, {j})")

    vert_bit = {v: 1 << v for v in range(0, tree.nv + 1)}

    def mask_of(path) -> int:
        m = 0
        for v in path:
            m |= vert_bit[v]
        return m

    if i == 0:
        main_paths = [Trek(0, (0,), _downward_path(tree, 0, j))]
        others = [k for k in range(1, n + 1) if k != j]
        sources = tuple([0] + others)
        targets = tuple(range(1, n + 1))
    else:
        w = tree.lca(i, j)
        main_paths = [
            Trek(top, _downward_path(tree, top, i), _downward_path(tree, top, j))
            for top in tree.root_path(w)
        ]
        others = [k for k in range(1, n + 1) if k not in (i, j)]
        sources = tuple(sorted([i] + others))
        targets = tuple(sorted([j] + others))

    identity_options = {
        k: [Trek(top, _downward_path(tree, top, k), _downward_path(tree, top, k))
            for top in tree.root_path(k)]
        for k in others
    }

    systems: list[TrekSystem] = []

    def extend(idx: int, used: int, chosen: list[Trek]):
        if idx == len(others):
            systems.append(TrekSystem(tuple(chosen), sources, targets))
            return
        k = others[idx]
        for trek in identity_options[k]:
            m = mask_of(trek.left)
            if used & m:
                continue
            chosen.append(trek)
            extend(idx + 1, used | m, chosen)
            chosen.pop()

    for main in main_paths:
        m = mask_of(main.left) | mask_of(main.right)
        extend(0, m, [main])
    return systems


def trek_polynomial(tree: RootedTree, i: int, j: int) -> Poly:
    """Sum of trek-system weights for the pair (i, j): an exact multilinear
    polynomial in the edge parameters with every coefficient equal to 1.

    A repeated monomial would contradict the uniqueness of trek-system
    weights and raises TrekIdentityError.
    """
    terms: dict[int, int] = {}
    for system in trek_systems(tree, i, j):
        key = 0
        for v in system.weight_support():
            key += 1 << ((v - 1) << 2)
        if key in terms:
            raise TrekIdentityError(
                f"duplicate trek monomial for pair ({i},{j}): {sorted(Poly({key: 1}).monomials()[0])}"
            )
        terms[key] = 1
    return Poly(terms)


def symbolic_sigma(tree: RootedTree) -> list[list[Poly]]:
    """Model covariance with symbolic edge weights (variables = vertices)."""
    n = tree.n
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            path = tree.root_path(tree.lca(i, j))
            row.append(Poly.from_vars({v: 1 for v in path}))
        rows.append(row)
    return rows


@lru_cache(maxsize=128)
def adjugate_polynomials(
    tree: RootedTree, size_bound: int = SYMBOLIC_SIZE_BOUND
) -> tuple[dict, Poly]:
    """Edge coordinates of the symbolic adjugate, plus det(Sigma).

    Returns ``({(i, j): P_ij for 0 <= i < j <= n}, det)`` where P_ij is
    p_ij * det(Sigma) as an exact polynomial in the edge parameters,
    computed by fraction-free Gauss-Jordan elimination on the symbolic
    covariance matrix, a route fully independent of the trek enumeration.
    """
    if tree.n > size_bound:
        raise TreeError(
            f"symbolic adjugate limited to n <= {size_bound} leaves (got {tree.n})"
        )
    adj, det = ff_adjugate(symbolic_sigma(tree))
    n = tree.n
    p: dict[tuple[int, int], Poly] = {}
    for i in range(1, n + 1):
        total = Poly.zero()
        for j in range(n):
            total = total + adj[i - 1][j]
        p[(0, i)] = total
        for j in range(i + 1, n + 1):
            p[(i, j)] = -adj[i - 1][j - 1]
    return p, det


def binomial_positivity_certificate(tree: RootedTree, quartet) -> Poly:
    """Expanded (p_ij p_kl - p_il p_jk) * det(Sigma)^2 for a trivalent
    quartet with split ij|kl, certified coefficient-nonnegative.

    The certificate is a polynomial identity, so nonnegativity of all
    coefficients proves the inequality on the whole parameter orthant.  A
    negative coefficient would break the coefficientwise proof and raises
    TrekIdentityError.
    """
    topo = tree.quartet_topology(quartet)
    if topo.is_star:
        raise TreeError(f"quartet {tuple(quartet)} is a star; no inequality to certify")
    (i, j), (k, l) = topo.split_pairs()
    p, _det = adjugate_polynomials(tree)

    def P(a, b):
        return p[(min(a, b), max(a, b))]

    cert = P(i, j) * P(k, l) - P(i, l) * P(j, k)
    neg = [m for key, c in cert.terms.items() if c < 0 for m in [key]]
    if neg:
        raise TrekIdentityError(
            f"negative certificate coefficient for quartet {tuple(quartet)}"
        )
    return cert


def certificate_reduced(tree: RootedTree, quartet) -> Poly:
    """The certificate divided by det(Sigma):  (p_ij p_kl - p_il p_jk) * det.

    This is the form the worked examples print (degree n-1 instead of
    2(n-1)); the division is exact because each p * det is polynomial.
    """
    _p, det = adjugate_polynomials(tree)
    return binomial_positivity_certificate(tree, quartet).exact_div(det)


# ---------------------------------------------------------------------------
# Determinant factorization in cumulative (t) coordinates
# ---------------------------------------------------------------------------


def theta_to_t_polys(tree: RootedTree) -> dict[int, Poly]:
    """Substitution theta_v -> t_v - t_parent(v) (t_0 = 0), as polynomials."""
    subs = {}
    for v in tree.vertices():
        p = tree.parents[v - 1]
        subs[v] = Poly.from_vars({v: 1} if p == 0 else {v: 1, p: -1})
    return subs


def dk_poly(tree: RootedTree, k: int) -> Poly:
    """Determinant D_k of the covariance of the tree truncated below k.

    Variables are cumulative root-path weights t; the truncated tree keeps
    leaf set {k} plus the leaves outside de(k), with entries t_lca(x,y) and
    t_k on the new diagonal entry.  Binary trees only; k internal.
    """
    if not tree.is_binary():
        raise TreeError("determinant factorization requires a binary tree")
    if not tree.n + 1 <= k <= tree.nv:
        raise TreeError(f"vertex {k} is not internal")
    below = set(tree.de_leaves(k))
    leaves = sorted(set(range(1, tree.n + 1)) - below) + [k]
    rows = [
        [Poly.variable(tree.lca(x, y)) for y in leaves]
        for x in leaves
    ]
    return det_dp(rows)


def euv_poly(tree: RootedTree, u: int, v: int) -> Poly:
    """Bordered determinant E_uv for the directed edge u -> v, in t.

    Rows: all-ones, then the leaves of de(u) \\ de(v) ascending; columns: a
    reference leaf below v first (the entries do not depend on which), then
    the row leaves.  The reference-first order pins the sign so that the
    leading coefficient is +1.  E_0v = 1 for the root edge.
    """
    if not tree.is_binary():
        raise TreeError("determinant factorization requires a binary tree")
    if v == 0 or tree.parents[v - 1] != u:
        raise TreeError(f"{u} -> {v} is not a directed edge")
    if u == 0:
        return Poly.const(1)
    row_leaves = sorted(set(tree.de_leaves(u)) - set(tree.de_leaves(v)))
    ref = min(tree.de_leaves(v))
    cols = [ref] + row_leaves
    rows = [[Poly.const(1)] * len(cols)]
    for x in row_leaves:
        rows.append([Poly.variable(tree.lca(x, y)) for y in cols])
    return det_dp(rows)


def factorization_factors(tree: RootedTree, i: int, j: int) -> list[Poly]:
    """The D/E factors whose product is P_ij expressed in t coordinates.

    For (0, i): the E factors along the root path of i.  For a leaf pair:
    D at the lca times, for every other interior vertex u of the unrooted
    i-j path, the factor E_{u, c} with c the path child of u.
    """
    if i == 0:
        path = (0,) + tree.root_path(j)
        return [euv_poly(tree, path[s], path[s + 1]) for s in range(len(path) - 1)]
    w = tree.lca(i, j)
    factors = [dk_poly(tree, w)]
    for leaf in (i, j):
        path = tree.root_path(leaf)
        seg = path[path.index(w) :]
        for s in range(1, len(seg) - 1):
            factors.append(euv_poly(tree, seg[s], seg[s + 1]))
    return factors


def verify_factorization(tree: RootedTree) -> bool:
    """Check P_0i = prod E and P_ij = D_lca * prod E exactly, all pairs.

    P is the adjugate polynomial rewritten in t coordinates via
    theta_v = t_v - t_parent(v).  Raises TrekIdentityError naming the first
    failing pair together with the difference polynomial.
    """
    if not tree.is_binary():
        raise TreeError("determinant factorization requires a binary tree")
    p_theta, _det = adjugate_polynomials(tree)
    subs = theta_to_t_polys(tree)
    for (i, j), poly in sorted(p_theta.items()):
        lhs = poly.substitute(subs)
        rhs = Poly.const(1)
        for factor in factorization_factors(tree, i, j):
            rhs = rhs * factor
        if lhs != rhs:
            raise TrekIdentityError(
                f"factorization fails for pair ({i},{j}); difference "
                f"{(lhs - rhs).to_str('t')}"
            )
    return True
