"""File formats: matrices as JSON/CSV, trees and metrics as JSON.

Output is deterministic: keys are sorted and floats are written with
round-trip precision (at most 17 significant digits), so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .trees import RootedTree


def fmt_float(x) -> str:
    return f"{float(x):.17g}"


def _clean(x):
    """Round-trip floats through the 17-digit format for stable JSON."""
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return float(fmt_float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


# -- matrices ----------------------------------------------------------------


def matrix_to_json(matrix) -> str:
    rows = matrix.tolist() if isinstance(matrix, np.ndarray) else [list(r) for r in matrix]
    return dumps(rows)


def matrix_from_json(text: str) -> np.ndarray:
    rows = json.loads(text)
    arr = np.array(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("matrix JSON must be a square array of arrays")
    return arr


def matrix_to_csv(matrix) -> str:
    rows = matrix.tolist() if isinstance(matrix, np.ndarray) else matrix
    return "\n".join(",".join(fmt_float(x) for x in row) for row in rows) + "\n"


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [
        [float(cell) for cell in line.split(",")]
        for line in text.strip().splitlines()
        if line.strip()
    ]
    arr = np.array(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("matrix CSV must be square")
    return arr


def load_matrix(path: str) -> np.ndarray:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".csv"):
        return matrix_from_csv(text)
    return matrix_from_json(text)


# -- trees -------------------------------------------------------------------


def tree_to_json(tree: RootedTree, theta: dict) -> str:
    obj = {
        "n": tree.n,
        "parents": list(tree.parents),
        "theta": [theta[v] for v in tree.vertices()],
    }
    return dumps(obj)


def tree_from_json(text: str) -> tuple[RootedTree, dict]:
    obj = json.loads(text)
    tree = RootedTree(obj["n"], obj["parents"])
    theta_list = obj["theta"]
    if len(theta_list) != tree.nv:
        raise ValueError("theta length must match the vertex count")
    # exact weights serialize as strings like "1/3"; bring them back
    values = [Fraction(x) if isinstance(x, str) else x for x in theta_list]
    return tree, {v: values[v - 1] for v in tree.vertices()}


# -- pair-keyed maps (metrics and p-vectors) ----------------------------------


def _pair_key(i: int, j: int) -> str:
    return f"{i}{j}" if j <= 9 else f"{i},{j}"


def _parse_pair_key(key: str) -> tuple[int, int]:
    if "," in key:
        a, b = key.split(",")
    elif len(key) == 2:
        a, b = key[0], key[1]
    else:
        raise ValueError(f"cannot parse pair key '{key}'")
    i, j = int(a), int(b)
    if not i < j:
        raise ValueError(f"pair key '{key}' is not sorted")
    return i, j


def pairmap_to_json(values: dict) -> str:
    return dumps({_pair_key(i, j): values[(i, j)] for i, j in sorted(values)})


def pairmap_from_json(text: str) -> dict:
    obj = json.loads(text)
    return {_parse_pair_key(k): float(v) for k, v in obj.items()}


# -- polynomials ---------------------------------------------------------------


def poly_to_json(poly) -> str:
    """Exact polynomial as {monomial: coefficient} with keys like "5,7"
    (an exponent above one renders as "5^2")."""
    from .polynomials import decode_key

    obj = {}
    for packed, coeff in poly.terms.items():
        powers = sorted(decode_key(packed).items())
        key = ",".join(f"{v}^{e}" if e > 1 else str(v) for v, e in powers) or "1"
        obj[key] = coeff
    return dumps(obj)


# -- result objects ------------------------------------------------------------


def mle_result_to_json(result) -> str:
    obj = {
        "theta": [result.theta[v] for v in sorted(result.theta)],
        "sigma": result.sigma,
        "k": result.k,
        "loglik": result.loglik,
        "kkt_residual": result.kkt_residual,
        "active_set": list(result.active_set),
        "face_codim": result.face_codim,
        "converged": result.converged,
        "iterations": result.iterations,
        "restarts_used": result.restarts_used,
        "in_cone": result.in_cone,
    }
    return dumps(obj)


def membership_to_json(report) -> str:
    obj = {
        "verdict": report.verdict,
        "pd_ok": report.pd_ok,
        "sign_violations": [list(p) for p in report.sign_violations],
        "equality_residual": report.equality_residual,
        "inequality_violations": [
            {"quartet": list(q), "split": list(split), "excess": excess}
            for q, split, excess in report.inequality_violations
        ],
        "tol": report.tol,
    }
    return dumps(obj)
