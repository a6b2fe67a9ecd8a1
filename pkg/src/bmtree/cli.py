"""Command-line front end.

Subcommands: simulate, fit, membership, toric-gens, treks, certify,
factorize, farris, experiment, verify.  Matrices travel as JSON or CSV
files, trees as Newick-like text; all randomness is explicitly seeded and
the seed in effect is echoed to stderr.  Exit codes: 0 success, 1 domain
error (one-line diagnostic on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import covariance, mle, serialize, toric, treks
from .identities import run_identity_suite
from .trees import TreeError, parse_tree


def _read_tree(path: str, exact: bool = False):
    with open(path) as fh:
        return parse_tree(fh.read(), exact=exact)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _cmd_simulate(args) -> int:
    tree, theta = _read_tree(args.tree)
    s_matrix = covariance.simulate_sample_cov(
        tree, theta, args.samples, args.seed, center=args.center
    )
    _note(f"seed: {args.seed}")
    if args.format == "csv":
        _emit(serialize.matrix_to_csv(s_matrix), args.out)
    else:
        _emit(serialize.matrix_to_json(s_matrix), args.out)
    return 0


def _cmd_fit(args) -> int:
    tree, _ = _read_tree(args.tree)
    s_matrix = serialize.load_matrix(args.data)
    result = mle.fit(
        tree,
        s_matrix,
        tol=args.tol,
        max_iter=args.max_iter,
        restarts=args.restarts,
        seed=args.seed,
        cone=not args.no_cone,
    )
    _note(f"seed: {args.seed}")
    _emit(serialize.mle_result_to_json(result), args.out)
    return 0


def _cmd_membership(args) -> int:
    tree, _ = _read_tree(args.tree)
    k_matrix = serialize.load_matrix(args.data)
    report = toric.semialgebraic_membership(tree, k_matrix, tol=args.tol)
    _emit(serialize.membership_to_json(report), args.out)
    return 0


def _cmd_toric_gens(args) -> int:
    tree, _ = _read_tree(args.tree)
    gens = toric.generators(tree)
    if args.format == "json":
        _emit(serialize.dumps([str(g) for g in gens]), args.out)
    else:
        _emit("".join(f"{g}\n" for g in gens), args.out)
    return 0


def _cmd_treks(args) -> int:
    tree, _ = _read_tree(args.tree)
    i, j = _parse_ints(args.pair, 2)
    poly = treks.trek_polynomial(tree, i, j)
    systems = treks.trek_systems(tree, i, j)
    _note(f"trek systems: {len(systems)}")
    _emit(poly.to_str("θ") + "\n", args.out)
    return 0


def _cmd_certify(args) -> int:
    tree, _ = _read_tree(args.tree)
    quartet = _parse_ints(args.quartet, 4)
    poly = treks.certificate_reduced(tree, quartet)
    if args.format == "json":
        _emit(serialize.poly_to_json(poly), args.out)
    else:
        _emit(poly.to_str("θ") + "\n", args.out)
    return 0


def _cmd_factorize(args) -> int:
    tree, _ = _read_tree(args.tree)
    lines = []
    for (i, j), factors in _factorization_names(tree):
        lines.append(f"p{i}{j} = {' * '.join(factors) if factors else '1'}")
    treks.verify_factorization(tree)
    lines.append("ok")
    _emit("".join(f"{x}\n" for x in lines), args.out)
    return 0


def _factorization_names(tree):
    for i in range(0, tree.n + 1):
        for j in range(i + 1, tree.n + 1):
            names = []
            if i == 0:
                path = (0,) + tree.root_path(j)
                for s in range(len(path) - 1):
                    if path[s] != 0:
                        names.append(f"E{path[s]}{path[s + 1]}")
            else:
                w = tree.lca(i, j)
                names.append(f"D{w}")
                for leaf in (i, j):
                    seg = tree.root_path(leaf)
                    seg = seg[seg.index(w) :]
                    for s in range(1, len(seg) - 1):
                        names.append(f"E{seg[s]}{seg[s + 1]}")
            yield (i, j), names


def _cmd_farris(args) -> int:
    if args.sigma:
        sigma = serialize.load_matrix(args.sigma)
        metric = covariance.farris_inverse(sigma)
        _emit(serialize.pairmap_to_json(metric), args.out)
    else:
        with open(args.metric) as fh:
            metric = serialize.pairmap_from_json(fh.read())
        sigma = covariance.farris_forward(metric)
        _emit(serialize.matrix_to_json(np.asarray(sigma, dtype=float)), args.out)
    return 0


def _cmd_experiment(args) -> int:
    tree, _ = _read_tree(args.tree)
    theta_star = {v: args.theta for v in tree.vertices()}
    sizes = _parse_ints(args.samples, None)
    table = mle.experiment(
        tree,
        theta_star,
        sizes,
        reps=args.reps,
        seed=args.seed,
        restarts=args.restarts,
    )
    _note(f"seed: {args.seed}")
    csv_text = table.to_csv()
    if args.out:
        with open(args.out + ".csv", "w") as fh:
            fh.write(csv_text)
        from .report import save_experiment_figure

        save_experiment_figure(table, args.out + ".png")
        _note(f"wrote {args.out}.csv and {args.out}.png")
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_verify(args) -> int:
    results = run_identity_suite(args.max_n)
    for res in results:
        print(res.summary())
        for failure in res.failures[:20]:
            print(f"  {failure}")
    return 0 if all(r.passed for r in results) else 1


def _parse_ints(text: str, count: int | None) -> list[int]:
    try:
        values = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise ValueError(f"expected comma-separated integers, got '{text}'") from exc
    if count is not None and len(values) != count:
        raise ValueError(f"expected {count} comma-separated integers, got '{text}'")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmtree",
        description="Brownian motion tree models: simulation, toric structure, and MLE.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out", help="write primary output to this path")
        return p

    p = add("simulate", _cmd_simulate, "sample a covariance matrix from the model")
    p.add_argument("--tree", required=True, help="Newick-like tree file")
    p.add_argument("--samples", type=int, required=True, help="sample count N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--center", action="store_true", help="subtract the empirical mean")
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = add("fit", _cmd_fit, "maximum likelihood fit of the edge weights")
    p.add_argument("--tree", required=True)
    p.add_argument("--data", required=True, help="sample covariance (JSON or CSV)")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--no-cone",
        action="store_true",
        help="drop the nonnegativity constraints (fit over the Zariski closure)",
    )

    p = add("membership", _cmd_membership, "semialgebraic membership of a concentration matrix")
    p.add_argument("--tree", required=True)
    p.add_argument("--data", required=True, help="concentration matrix (JSON or CSV)")
    p.add_argument("--tol", type=float, default=toric.DEFAULT_TOL)

    p = add("toric-gens", _cmd_toric_gens, "quadratic generators of the model ideal")
    p.add_argument("--tree", required=True)
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = add("treks", _cmd_treks, "trek polynomial of a leaf pair")
    p.add_argument("--tree", required=True)
    p.add_argument("--pair", required=True, help="e.g. 1,2 (0 denotes the root leaf)")

    p = add("certify", _cmd_certify, "positivity certificate of a quartet inequality")
    p.add_argument("--tree", required=True)
    p.add_argument("--quartet", required=True, help="four labels, e.g. 1,2,3,4")
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = add("factorize", _cmd_factorize, "check the determinant factorization (binary trees)")
    p.add_argument("--tree", required=True)

    p = add("farris", _cmd_farris, "convert between covariance matrices and tree metrics")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--sigma", help="covariance matrix file -> metric")
    group.add_argument("--metric", help="metric pair-map file -> covariance matrix")

    p = add("experiment", _cmd_experiment, "boundary-face experiment over simulated data")
    p.add_argument("--tree", required=True)
    p.add_argument("--theta", type=float, default=1.0, help="common edge weight")
    p.add_argument("--samples", required=True, help="comma-separated sample sizes, e.g. 5,20")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=8)

    p = add("verify", _cmd_verify, "run the exact identity suites over all tree shapes")
    p.add_argument("--max-n", type=int, default=5)

    return parser


def run(argv) -> int:
    """Parse and dispatch; returns the process exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TreeError, covariance.PatternError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
