"""Maximum likelihood estimation over the model cone.

The optimization variable is the vector of edge weights: the feasible set
is the nonnegative orthant, so projection is a clip, and every iterate with
positive leaf weights stays positive definite.  ``fit`` runs a projected
Newton ascent with gradient fallback and multiplicative log-normal
multi-start; ``cone=False`` switches off the nonnegativity constraint and
optimizes over the whole equal-entries subspace (the Zariski closure of the
model), which is where the classical rational formulas for two and three
leaves live.

The ML degrees of these models are known constants; they are recorded here
for reference and deliberately not recomputed (that takes symbolic
elimination outside this package's scope):

    binary trees, n = 2..8:   1, 1, 5, 17, 61, 233, 917
    star trees,   n = 2..9:   1, 7, 21, 51, 113, 239, 493, 1003
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .covariance import project_to_lt, simulate_sample_cov, theta_from_sigma
from .trees import RootedTree, parse_tree

ML_DEGREE_BINARY = {2: 1, 3: 1, 4: 5, 5: 17, 6: 61, 7: 233, 8: 917}
ML_DEGREE_STAR = {2: 1, 3: 7, 4: 21, 5: 51, 6: 113, 7: 239, 8: 493, 9: 1003}

DIVERGENCE_BOUND = 1e12


def _as_sym_array(S, tol: float = 1e-10) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("sample covariance must be a square matrix")
    scale = max(np.max(np.abs(S)), 1e-300)
    if np.max(np.abs(S - S.T)) > tol * scale:
        raise ValueError("sample covariance must be symmetric")
    return (S + S.T) / 2.0


def _chol_or_none(sigma: np.ndarray):
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        return None


def loglik_sigma(sigma, S) -> float:
    """Gaussian log-likelihood  -log det(Sigma) - trace(S Sigma^-1)."""
    sigma = _as_sym_array(sigma)
    S = _as_sym_array(S)
    state = _likelihood_state(sigma, S)
    if state is None:
        raise ValueError("covariance matrix is not positive definite")
    return state[1]


def loglik_k(k_matrix, S) -> float:
    """Concentration form  log det(K) - trace(S K); concave in K."""
    k_matrix = _as_sym_array(k_matrix)
    S = _as_sym_array(S)
    L = _chol_or_none(k_matrix)
    if L is None:
        raise ValueError("concentration matrix is not positive definite")
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    return logdet - float(np.sum(k_matrix * S))


def _leaf_masks(tree: RootedTree) -> np.ndarray:
    """n x nv 0/1 matrix whose column v-1 indicates the leaves below v."""
    g = np.zeros((tree.n, tree.nv))
    for v in tree.vertices():
        mask = tree.de_mask(v)
        for i in range(tree.n):
            if mask >> i & 1:
                g[i, v - 1] = 1.0
    return g


def _theta_array(tree: RootedTree, theta: dict) -> np.ndarray:
    return np.array([float(theta[v]) for v in tree.vertices()])


def grad_theta(tree: RootedTree, theta: dict, S) -> dict:
    """Gradient of the log-likelihood in the edge weights.

    d l / d theta_v = g_v^T (W S W - W) g_v  with W the inverse covariance
    and g_v the leaf indicator of v.
    """
    S = _as_sym_array(S)
    g = _leaf_masks(tree)
    th = _theta_array(tree, theta)
    state = _likelihood_state((g * th) @ g.T, S)
    if state is None:
        raise ValueError("covariance is not positive definite at this theta")
    w, _ll = state
    m = w @ S @ w - w
    vals = np.einsum("iv,ij,jv->v", g, m, g)
    return {v: float(vals[v - 1]) for v in tree.vertices()}


@dataclass
class MleResult:
    """Fitted model: weights, matrices, optimality and face diagnostics.

    ``active_set`` lists the edges whose fitted weight sits at the boundary
    (relative threshold ``active_rel_tol`` of the largest weight);
    ``face_codim`` is its size, identifying the face of the simplicial cone
    containing the estimate.  ``in_cone`` records nonnegativity of the
    weights, which can fail only for cone=False fits and the closed forms.
    """

    theta: dict
    sigma: np.ndarray
    k: np.ndarray
    loglik: float
    kkt_residual: float
    active_set: tuple
    face_codim: int
    converged: bool
    iterations: int
    restarts_used: int
    in_cone: bool


def _finish(tree, theta_arr, g, S, resid, converged, iters, restarts_used,
            active_rel_tol, cone) -> MleResult:
    sigma = (g * theta_arr) @ g.T
    k = np.linalg.inv(sigma)
    ll = loglik_sigma(sigma, S)
    scale = float(np.max(np.abs(theta_arr))) or 1.0
    if cone:
        active = tuple(
            v for v in tree.vertices() if theta_arr[v - 1] <= active_rel_tol * scale
        )
    else:
        active = tuple(
            v for v in tree.vertices() if abs(theta_arr[v - 1]) <= active_rel_tol * scale
        )
    theta = {v: float(theta_arr[v - 1]) for v in tree.vertices()}
    return MleResult(
        theta=theta,
        sigma=sigma,
        k=k,
        loglik=ll,
        kkt_residual=resid,
        active_set=active,
        face_codim=len(active),
        converged=converged,
        iterations=iters,
        restarts_used=restarts_used,
        in_cone=bool(np.all(theta_arr >= -active_rel_tol * scale)),
    )


def _likelihood_state(sigma: np.ndarray, S: np.ndarray):
    """(inverse, loglik) via Cholesky, or None when sigma is unusable."""
    L = _chol_or_none(sigma)
    if L is None:
        return None
    diag = np.diag(L)
    if np.any(diag <= 0.0) or not np.all(np.isfinite(L)):
        return None
    try:
        linv = np.linalg.solve(L, np.eye(len(diag)))
    except np.linalg.LinAlgError:
        return None
    w = linv.T @ linv
    ll = -2.0 * float(np.sum(np.log(diag))) - float(np.sum(w * S))
    if not np.isfinite(ll):
        return None
    return w, ll


def _ascend(g, S, theta0, cone, tol, max_iter):
    """Projected Newton ascent from one start; returns (theta, resid, iters,
    converged)."""
    _n, nv = g.shape
    theta = theta0.copy()
    state = _likelihood_state((g * theta) @ g.T, S)
    if state is None:  # rescue an infeasible start
        theta = np.maximum(theta, 1e-6 * max(float(np.mean(np.diag(S))), 1e-6))
        state = _likelihood_state((g * theta) @ g.T, S)
        if state is None:
            return theta, np.inf, 0, False
    w, ll = state
    iters = 0
    resid = np.inf
    for iters in range(1, max_iter + 1):
        wsw = w @ S @ w
        m = wsw - w
        grad = np.einsum("iv,ij,jv->v", g, m, g)
        if cone:
            at_bound = theta <= 0.0
            free = ~at_bound | (grad > 0.0)
            resid = max(
                float(np.max(np.abs(grad[free]), initial=0.0)),
                float(np.max(grad[at_bound], initial=0.0)),
            )
        else:
            free = np.ones(nv, dtype=bool)
            resid = float(np.max(np.abs(grad)))
        if resid <= tol:
            return theta, resid, iters, True
        if float(np.max(np.abs(theta))) > DIVERGENCE_BOUND:
            return theta, resid, iters, False

        a = g.T @ w @ g
        b = g.T @ wsw @ g
        hess = a * a - 2.0 * a * b
        step = _newton_direction(hess, grad, free)
        moved = False
        for direction in (step, grad * free):
            slope = float(direction @ grad)
            if slope <= 0.0:
                continue
            alpha = 1.0
            while alpha > 1e-18:
                cand = theta + alpha * direction
                if cone:
                    cand = np.maximum(cand, 0.0)
                cand_state = _likelihood_state((g * cand) @ g.T, S)
                if cand_state is not None:
                    cand_w, cand_ll = cand_state
                    gain = float(grad @ (cand - theta))
                    if cand_ll >= ll + 1e-4 * gain - 1e-13 * max(1.0, abs(ll)):
                        theta, w, ll = cand, cand_w, cand_ll
                        moved = True
                        break
                alpha *= 0.5
            if moved:
                break
        if not moved:
            return theta, resid, iters, resid <= tol
    return theta, resid, iters, False


def _newton_direction(hess, grad, free):
    nv = len(grad)
    step = np.zeros(nv)
    idx = np.where(free)[0]
    if len(idx) == 0:
        return step
    h = -hess[np.ix_(idx, idx)]
    rhs = grad[idx]
    ridge = 0.0
    scale = max(float(np.max(np.abs(h))), 1.0)
    for _ in range(12):
        try:
            c = np.linalg.cholesky(h + ridge * np.eye(len(idx)))
            y = np.linalg.solve(c, rhs)
            step[idx] = np.linalg.solve(c.T, y)
            return step
        except np.linalg.LinAlgError:
            ridge = max(2.0 * ridge, 1e-10 * scale)
    step[idx] = rhs  # hopeless curvature: fall back to the gradient
    return step


def _initial_theta(tree: RootedTree, S: np.ndarray, cone: bool) -> np.ndarray:
    proj = project_to_lt(tree, S)
    theta = theta_from_sigma(tree, proj)
    arr = np.array([theta[v] for v in tree.vertices()])
    floor = max(1e-3 * float(np.mean(np.diag(S))), 1e-9)
    if not cone:
        # keep the signed projection when it is already usable
        g = _leaf_masks(tree)
        if _chol_or_none((g * arr) @ g.T) is not None:
            return arr
    return np.maximum(arr, floor)


def fit(
    tree: RootedTree,
    S,
    *,
    tol: float = 1e-9,
    max_iter: int = 500,
    restarts: int = 8,
    seed: int | np.random.Generator = 0,
    cone: bool = True,
    active_rel_tol: float = 1e-6,
) -> MleResult:
    """Maximize the likelihood over the model.

    With ``cone=True`` (the model itself) the weights are kept nonnegative
    by projection; with ``cone=False`` they range over the whole pattern
    subspace, subject only to positive definiteness.  Multi-start: the
    deterministic projection-based initializer plus ``restarts - 1``
    log-normally perturbed copies; the best local optimum wins.  KKT
    residual at the reported point: sup-norm of the gradient over free
    coordinates, and positive gradient components on active ones.

    Singular S is accepted (the likelihood may then be unbounded); runs
    whose weights pass 1e12 are reported as not converged.
    """
    S = _as_sym_array(S)
    if S.shape[0] != tree.n:
        raise ValueError(f"sample covariance is {S.shape[0]}x{S.shape[0]}, tree has {tree.n} leaves")
    eigs = np.linalg.eigvalsh(S)
    if eigs[0] < -1e-9 * max(eigs[-1], 1.0):
        raise ValueError("sample covariance must be positive semidefinite")
    if eigs[0] <= 1e-12 * max(eigs[-1], 1.0):
        warnings.warn(
            "sample covariance is singular; the likelihood may be unbounded",
            stacklevel=2,
        )
    g = _leaf_masks(tree)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    base = _initial_theta(tree, S, cone)
    starts = [base]
    for _ in range(max(0, restarts - 1)):
        bump = np.exp(0.5 * rng.standard_normal(tree.nv))
        starts.append(np.maximum(base, 1e-6 * np.mean(np.diag(S))) * bump)
    best = None
    for start in starts:
        theta, resid, iters, ok = _ascend(g, S, start, cone, tol, max_iter)
        sigma = (g * theta) @ g.T
        if _chol_or_none(sigma) is None:
            continue
        ll = loglik_sigma(sigma, S)
        cand = (ll, ok, theta, resid, iters)
        if best is None or (cand[0], cand[1]) > (best[0], best[1]):
            best = cand
    if best is None:
        raise ValueError("no feasible starting point produced a positive definite fit")
    ll, ok, theta, resid, iters = best
    return _finish(
        tree, theta, g, S, resid, ok, iters, len(starts), active_rel_tol, cone
    )


# ---------------------------------------------------------------------------
# Closed forms for two and three leaves (ML degree one cases)
# ---------------------------------------------------------------------------

_TREE2 = parse_tree("(1:1,2:1):1;")[0]
_TREE3 = parse_tree("((1:1,2:1):1,3:1):1;")[0]


def closed_form_n2(S) -> MleResult:
    """Two leaves: the model imposes no equality constraints, so the MLE is
    the sample covariance itself; it yields cone-valid weights iff
    min(s11, s22) >= s12 >= 0."""
    S = _as_sym_array(S)
    if S.shape != (2, 2):
        raise ValueError("closed_form_n2 expects a 2x2 matrix")
    if _chol_or_none(S) is None:
        raise ValueError("sample covariance must be positive definite")
    g = _leaf_masks(_TREE2)
    theta = np.array([S[0, 0] - S[0, 1], S[1, 1] - S[0, 1], S[0, 1]])
    grad = grad_theta(_TREE2, {1: theta[0], 2: theta[1], 3: theta[2]}, S)
    resid = max(abs(x) for x in grad.values())
    return _finish(_TREE2, theta, g, S, resid, True, 0, 0, 1e-6, cone=False)


def closed_form_n3(S) -> MleResult:
    """Three leaves with {1,2} a clade: the rational MLE formulas.

    The only model equality is sigma_13 = sigma_23; the estimate preserves
    s33 and s11 - 2 s12 + s22.  Degenerate data (c = 0) falls back to the
    numerical fit.  Cone validity of the weights is reported via
    ``in_cone``, not enforced.
    """
    S = _as_sym_array(S)
    if S.shape != (3, 3):
        raise ValueError("closed_form_n3 expects a 3x3 matrix")
    if _chol_or_none(S) is None:
        raise ValueError("sample covariance must be positive definite")
    s11, s12, s13 = S[0, 0], S[0, 1], S[0, 2]
    s22, s23, s33 = S[1, 1], S[1, 2], S[2, 2]
    c = (s11 - 2 * s12 + s22) * s33 - (s13 - s23) ** 2
    if c == 0.0:
        return fit(_TREE3, S, cone=False)
    q = s11 * s23 - s12 * s13 - s12 * s23 + s13 * s22
    sh11 = s11 - 2 * (s13 - s23) * (s11 * s33 - s12 * s33 - s13**2 + s13 * s23) * q / c**2
    sh12 = s12 - (s13 - s23) * (s11 * s33 - s13**2 - s22 * s33 + s23**2) * q / c**2
    sh22 = s22 - 2 * (s13 - s23) * (s12 * s33 - s13 * s23 - s22 * s33 + s23**2) * q / c**2
    sh13 = s13 - (s13 - s23) * (s11 * s33 - s13**2 - s12 * s33 + s13 * s23) / c
    sh33 = s33
    g = _leaf_masks(_TREE3)
    # weights from the fitted pattern matrix: t4 = sigma_12, t5 = sigma_13
    theta = np.array([sh11 - sh12, sh22 - sh12, sh33 - sh13, sh12 - sh13, sh13])
    grad = grad_theta(_TREE3, {v: theta[v - 1] for v in _TREE3.vertices()}, S)
    resid = max(abs(x) for x in grad.values())
    return _finish(_TREE3, theta, g, S, resid, True, 0, 0, 1e-6, cone=False)


# ---------------------------------------------------------------------------
# Boundary-face experiment
# ---------------------------------------------------------------------------


@dataclass
class ExperimentTable:
    """Counts of fitted face codimension by sample size.

    ``counts[N]`` is [codim 0, 1, 2, 3, >3] over the converged replicates;
    non-converged replicates are tallied separately so each row plus its
    non-converged count sums to ``reps``.
    """

    sample_sizes: list
    reps: int
    seed: int
    counts: dict = field(default_factory=dict)
    nonconverged: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["N,codim0,codim1,codim2,codim3,codim_gt3,nonconverged"]
        for n_samp in self.sample_sizes:
            row = self.counts[n_samp]
            lines.append(
                f"{n_samp},{row[0]},{row[1]},{row[2]},{row[3]},{row[4]},"
                f"{self.nonconverged[n_samp]}"
            )
        return "\n".join(lines) + "\n"


def experiment(
    tree: RootedTree,
    theta_star: dict,
    sample_sizes,
    reps: int,
    seed: int = 0,
    **fit_options,
) -> ExperimentTable:
    """Simulate, fit, and tabulate the face codimension of the estimate.

    Each (sample size, replicate) pair gets its own random stream derived
    from (seed, N, replicate), so the table does not depend on execution
    order.  KKT failures (per ``fit``) count as non-converged.
    """
    if reps < 1:
        raise ValueError("need at least one replicate")
    if any(theta_star[v] < 0 for v in tree.vertices()):
        raise ValueError("theta_star must be nonnegative")
    table = ExperimentTable(sample_sizes=list(sample_sizes), reps=reps, seed=seed)
    for n_samp in table.sample_sizes:
        tally = [0, 0, 0, 0, 0]
        bad = 0
        for rep in range(reps):
            rng = np.random.default_rng(np.random.SeedSequence([seed, n_samp, rep]))
            S = simulate_sample_cov(tree, theta_star, n_samp, rng)
            result = fit(tree, S, seed=rng, **fit_options)
            if not result.converged:
                bad += 1
                continue
            tally[min(result.face_codim, 4)] += 1
        table.counts[n_samp] = tally
        table.nonconverged[n_samp] = bad
    return table
