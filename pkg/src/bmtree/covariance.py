"""The model in covariance coordinates.

Matrices come in two backends: numpy float64 arrays for numerics and nested
lists of int/Fraction for exact work.  Functions return the backend they
were given; building from exact edge weights gives exact output.

Leaf i of the tree corresponds to matrix row/column i-1.  Metrics on the
unrooted leaf set {0..n} are plain dicts keyed by sorted index pairs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .trees import RootedTree, TreeError


class PatternError(ValueError):
    """A matrix does not have the equal-entries pattern of the tree."""

    def __init__(self, message, pair=None, deviation=None):
        super().__init__(message)
        self.pair = pair
        self.deviation = deviation


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def _theta_values(tree: RootedTree, theta: dict) -> list:
    try:
        return [theta[v] for v in tree.vertices()]
    except KeyError as exc:
        raise TreeError(f"theta is missing vertex {exc.args[0]}") from exc


def sigma_from_theta(tree: RootedTree, theta: dict):
    """Covariance matrix of the model: sigma_ij sums the weights on the
    root path of lca(i,j).

    Exact weights give a nested-list matrix; float weights give an ndarray.
    """
    values = _theta_values(tree, theta)
    exact = all(is_exact(x) for x in values)
    n = tree.n
    # per-vertex cumulative weight from the root down
    t = [None] * (tree.nv + 1)
    for v in range(tree.nv, 0, -1):
        p = tree.parents[v - 1]
        t[v] = theta[v] + (t[p] if p else 0)
    rows = [[t[tree.lca(i, j)] for j in range(1, n + 1)] for i in range(1, n + 1)]
    if exact:
        return rows
    return np.array(rows, dtype=float)


def basis_matrix(tree: RootedTree, v: int):
    """Rank-one 0/1 matrix supported on the descendant leaves of v."""
    mask = tree.de_mask(v)
    bits = [(mask >> i) & 1 for i in range(tree.n)]
    return [[bi * bj for bj in bits] for bi in bits]


def _as_rows(sigma):
    if isinstance(sigma, np.ndarray):
        return sigma.tolist(), False
    return [list(r) for r in sigma], all(is_exact(x) for r in sigma for x in r)


def _check_symmetric(sigma, tol=1e-12):
    rows, exact = _as_rows(sigma)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("matrix must be square")
    scale = max((abs(x) for r in rows for x in r), default=0)
    for i in range(n):
        for j in range(i + 1, n):
            diff = abs(rows[i][j] - rows[j][i])
            if (exact and diff != 0) or (not exact and diff > tol * max(scale, 1.0)):
                raise ValueError(f"matrix is not symmetric at ({i + 1},{j + 1})")
    return rows, exact


def lca_classes(tree: RootedTree) -> dict[int, list[tuple[int, int]]]:
    """Vertex -> the leaf pairs (i <= j) whose lca it is."""
    classes: dict[int, list[tuple[int, int]]] = {v: [] for v in tree.vertices()}
    for i, j in itertools.combinations_with_replacement(range(1, tree.n + 1), 2):
        classes[tree.lca(i, j)].append((i, j))
    return {v: ps for v, ps in classes.items() if ps}


def theta_from_sigma(tree: RootedTree, sigma, tol: float = 1e-8) -> dict:
    """Invert sigma_from_theta.

    Entries with a common lca must agree: exactly in the exact backend,
    within ``tol`` relative to the largest entry magnitude in float.  The
    error for an off-pattern matrix names the worst-violating entry.
    """
    rows, exact = _check_symmetric(sigma)
    if len(rows) != tree.n:
        raise ValueError(f"matrix is {len(rows)}x{len(rows)}, tree has {tree.n} leaves")
    scale = max((abs(x) for r in rows for x in r), default=0)
    t = {}
    worst = (0, None)
    for v, pairs in lca_classes(tree).items():
        vals = [rows[i - 1][j - 1] for i, j in pairs]
        if exact:
            rep = vals[0]
            for (i, j), val in zip(pairs, vals):
                if val != rep:
                    raise PatternError(
                        f"entry ({i},{j}) breaks the lca pattern at vertex {v}",
                        pair=(i, j),
                        deviation=val - rep,
                    )
            t[v] = rep
        else:
            mean = sum(vals) / len(vals)
            for (i, j), val in zip(pairs, vals):
                dev = abs(val - mean)
                if dev > worst[0]:
                    worst = (dev, (i, j))
            t[v] = mean
    if not exact and worst[0] > tol * max(scale, 1e-300):
        raise PatternError(
            f"matrix is not in the tree pattern: entry {worst[1]} deviates by {worst[0]:.3g}",
            pair=worst[1],
            deviation=worst[0],
        )
    theta = {}
    for v in tree.vertices():
        p = tree.parents[v - 1]
        theta[v] = t[v] - (t[p] if p else 0)
    return theta


@dataclass(frozen=True)
class ConeLocation:
    """Where a matrix sits relative to the closed model cone.

    ``kind`` is "inside", "boundary", or "outside"; for a boundary point
    ``active_set`` lists the vanishing coordinates, which identify the face
    of the simplicial cone.  ``theta`` is None when the matrix is not even
    in the tree's linear pattern.
    """

    kind: str
    active_set: tuple[int, ...] = ()
    theta: dict | None = None
    detail: str = ""

    @property
    def face_codim(self) -> int:
        return len(self.active_set)


def cone_membership(tree: RootedTree, sigma, tol: float = 1e-9) -> ConeLocation:
    """Locate sigma relative to the simplicial cone of the model."""
    try:
        theta = theta_from_sigma(tree, sigma)
    except PatternError as exc:
        return ConeLocation("outside", detail=str(exc))
    neg = [v for v in tree.vertices() if theta[v] < -tol]
    if neg:
        return ConeLocation(
            "outside", theta=theta, detail=f"negative weights at {neg}"
        )
    active = tuple(v for v in tree.vertices() if theta[v] <= tol)
    if active:
        return ConeLocation("boundary", active_set=active, theta=theta)
    return ConeLocation("inside", theta=theta)


def is_positive_definite(sigma, tol: float = 1e-12) -> bool:
    """Cholesky test: every pivot must exceed tol times the diagonal scale.

    Exact input is tested exactly via Sylvester's criterion.
    """
    rows, exact = _check_symmetric(sigma)
    n = len(rows)
    if exact:
        from .polynomials import bareiss_det

        return all(
            bareiss_det([r[: k + 1] for r in rows[: k + 1]]) > 0 for k in range(n)
        )
    a = [row[:] for row in rows]
    scale = max([abs(a[i][i]) for i in range(n)] + [1.0])
    for k in range(n):
        piv = a[k][k]
        if piv <= tol * scale:
            return False
        for i in range(k + 1, n):
            f = a[i][k] / piv
            for j in range(k + 1, i + 1):
                # the active submatrix lives in the lower triangle, so the
                # pivot-row entry (k, j) is read from its mirror (j, k)
                a[i][j] -= f * a[j][k]
    return True


# ---------------------------------------------------------------------------
# Farris transform and metric checks
# ---------------------------------------------------------------------------


def _metric_points(d: dict) -> int:
    pts = {i for pair in d for i in pair}
    if not pts:
        raise ValueError("empty metric")
    n = max(pts)
    expected = {(i, j) for i in range(n + 1) for j in range(i + 1, n + 1)}
    if set(d) != expected:
        raise ValueError("metric must be keyed by all sorted pairs over 0..n")
    return n


def farris_forward(d: dict):
    """Tree metric on {0..n}  ->  covariance pattern matrix (n x n)."""
    n = _metric_points(d)
    exact = all(is_exact(x) for x in d.values())

    def half(x):
        return Fraction(x) / 2 if exact else x / 2.0

    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            if i == j:
                row.append(Fraction(d[(0, i)]) if exact else float(d[(0, i)]))
            else:
                a, b = min(i, j), max(i, j)
                row.append(half(d[(0, i)] + d[(0, j)] - d[(a, b)]))
        rows.append(row)
    return rows if exact else np.array(rows, dtype=float)


def farris_inverse(sigma) -> dict:
    """Covariance matrix  ->  metric on {0..n}; inverse of farris_forward."""
    rows, exact = _check_symmetric(sigma)
    n = len(rows)
    d = {}
    for i in range(1, n + 1):
        d[(0, i)] = rows[i - 1][i - 1]
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            d[(i, j)] = rows[i - 1][i - 1] + rows[j - 1][j - 1] - 2 * rows[i - 1][j - 1]
    return d


def tree_metric(tree: RootedTree, theta: dict) -> dict:
    """Path-length metric on {0..n}: sum of edge weights between leaves.

    Computed by walking root paths, independently of the covariance route.
    """
    d = {}
    cum = {0: 0}
    for v in range(tree.nv, 0, -1):
        cum[v] = cum[tree.parents[v - 1]] + theta[v]
    for i in range(0, tree.n + 1):
        for j in range(i + 1, tree.n + 1):
            w = tree.lca(i, j)
            d[(i, j)] = cum[i] + cum[j] - 2 * cum[w]
    return d


def is_ultrametric(sigma, tol: float = 1e-9) -> bool:
    """Entrywise nonnegative with sigma_ij >= min(sigma_ik, sigma_jk) for
    all triples (diagonal maximality is the i == j case)."""
    rows, exact = _check_symmetric(sigma)
    n = len(rows)
    slack = 0 if exact else tol * max((abs(x) for r in rows for x in r), default=1.0)
    for i in range(n):
        for j in range(n):
            if rows[i][j] < -slack:
                return False
            for k in range(n):
                if rows[i][j] < min(rows[i][k], rows[j][k]) - slack:
                    return False
    return True


def four_point_check(d: dict, tol: float = 1e-9) -> bool:
    """Buneman's condition over every quadruple of metric points.

    Vacuously true for fewer than four points.
    """
    n = _metric_points(d)
    if n + 1 < 4:
        return True
    exact = all(is_exact(x) for x in d.values())
    slack = 0 if exact else tol * max(max(d.values()), 1e-300)

    def dist(i, j):
        return d[(min(i, j), max(i, j))]

    for q in itertools.combinations(range(n + 1), 4):
        i, j, k, l = q
        s1 = dist(i, j) + dist(k, l)
        s2 = dist(i, k) + dist(j, l)
        s3 = dist(i, l) + dist(j, k)
        for a, b, c in ((s1, s2, s3), (s2, s1, s3), (s3, s1, s2)):
            if a > max(b, c) + slack:
                return False
    return True


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def simulate_sample_cov(
    tree: RootedTree,
    theta: dict,
    num_samples: int,
    seed,
    center: bool = False,
) -> np.ndarray:
    """Sample covariance S = X X^T / N from the structural equations.

    Each vertex adds an independent N(0, theta_v) innovation to its parent's
    value; leaves are observed.  One Gaussian stream is drawn in the fixed
    vertex order, so results are reproducible bit for bit given the seed.
    ``center`` subtracts the empirical mean before forming S (off by
    default: the model fixes the root value, hence mean zero).
    """
    values = _theta_values(tree, theta)
    if any(x < 0 for x in values):
        bad = next(v for v in tree.vertices() if theta[v] < 0)
        raise ValueError(f"negative variance at vertex {bad}")
    if num_samples < 1:
        raise ValueError("need at least one sample")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    nv, n = tree.nv, tree.n
    eps = rng.standard_normal((nv, num_samples))
    scale = np.sqrt(np.array(values, dtype=float))
    eps *= scale[:, None]
    y = np.zeros((nv + 1, num_samples))
    for v in range(nv, 0, -1):  # parents before children
        y[v] = y[tree.parents[v - 1]] + eps[v - 1]
    x = y[1 : n + 1]
    if center:
        x = x - x.mean(axis=1, keepdims=True)
    s = x @ x.T / num_samples
    return (s + s.T) / 2.0


def project_to_lt(tree: RootedTree, sigma) -> np.ndarray:
    """Orthogonal projection onto the tree's equal-entries subspace:
    average each lca class of entries."""
    rows, _ = _check_symmetric(sigma)
    if len(rows) != tree.n:
        raise ValueError("dimension mismatch")
    out = np.zeros((tree.n, tree.n))
    for _, pairs in lca_classes(tree).items():
        vals = [rows[i - 1][j - 1] for i, j in pairs]
        mean = float(sum(vals)) / len(vals)
        for i, j in pairs:
            out[i - 1][j - 1] = mean
            out[j - 1][i - 1] = mean
    return out
