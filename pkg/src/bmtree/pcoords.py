"""Laplacian edge coordinates on concentration matrices.

A symmetric n x n concentration matrix K is rewritten as the reduced
Laplacian of the complete graph on {0..n} with edge weights p_ij:

    p_ij = -k_ij                 (1 <= i < j <= n)
    p_0i = sum_j k_ij            (row sums)

P-vectors are dicts keyed by sorted index pairs over {0..n}.  They are
projective objects: compare them after ``normalize`` (which rescales by the
largest-magnitude entry), never entry by entry across different scalings
such as inverse versus adjugate.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .covariance import is_exact, sigma_from_theta
from .polynomials import adjugate_exact
from .trees import RootedTree


def pair_indices(n: int) -> list[tuple[int, int]]:
    """All sorted pairs over {0..n}: the index set of a p-vector."""
    return list(itertools.combinations(range(n + 1), 2))


def _dimension(p: dict) -> int:
    n = max(j for _i, j in p)
    if set(p) != set(pair_indices(n)):
        raise ValueError("p-vector must be keyed by all sorted pairs over 0..n")
    return n


def p_from_k(k_matrix) -> dict:
    """Edge coordinates of a symmetric matrix (row sums fill the 0 column)."""
    if isinstance(k_matrix, np.ndarray):
        rows = k_matrix.tolist()
    else:
        rows = [list(r) for r in k_matrix]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("matrix must be square")
    p = {}
    for i in range(1, n + 1):
        p[(0, i)] = sum(rows[i - 1])
        for j in range(i + 1, n + 1):
            p[(i, j)] = -rows[i - 1][j - 1]
    return p


def k_from_p(p: dict):
    """Reduced Laplacian with the given edge weights; inverse of p_from_k."""
    n = _dimension(p)
    exact = all(is_exact(x) for x in p.values())
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            if i == j:
                diag = p[(0, i)]
                for l in range(1, n + 1):
                    if l != i:
                        diag = diag + p[(min(i, l), max(i, l))]
                row.append(diag)
            else:
                row.append(-p[(min(i, j), max(i, j))])
        rows.append(row)
    return rows if exact else np.array(rows, dtype=float)


def toric_param_t(tree: RootedTree, t: dict) -> dict:
    """Monomial parametrization of the model variety.

    p_ij = t_lca(i,j) / (t_i t_j) and p_0i = 1 / t_i, evaluated exactly for
    nonzero rational t indexed by the vertices.
    """
    for v in tree.vertices():
        if not t.get(v):
            raise ValueError(f"t must be nonzero at every vertex; offending vertex {v}")
    p = {}
    for i in range(1, tree.n + 1):
        p[(0, i)] = Fraction(1) / Fraction(t[i])
        for j in range(i + 1, tree.n + 1):
            p[(i, j)] = Fraction(t[tree.lca(i, j)]) / (Fraction(t[i]) * Fraction(t[j]))
    return p


def p_adjoint_from_theta(tree: RootedTree, theta: dict) -> dict:
    """Exact edge coordinates of the adjugate of the model covariance.

    Each entry equals det(Sigma) times the corresponding coordinate of the
    inverse; computed by fraction-free elimination so everything stays in
    exact arithmetic.  Raises on singular Sigma.
    """
    if not all(is_exact(x) for x in theta.values()):
        raise ValueError("exact (int or Fraction) weights required")
    rows = sigma_from_theta(tree, theta)
    adj, det = adjugate_exact(rows)
    if det == 0:
        raise ZeroDivisionError("covariance matrix is singular")
    return p_from_k(adj)


def normalize(p: dict) -> dict:
    """Projective representative: rescale so the largest-|entry| equals 1."""
    pivot = max(p.values(), key=abs)
    if not pivot:
        raise ZeroDivisionError("cannot normalize the zero p-vector")
    if all(is_exact(x) for x in p.values()):
        return {key: Fraction(val) / Fraction(pivot) for key, val in p.items()}
    return {key: val / pivot for key, val in p.items()}
