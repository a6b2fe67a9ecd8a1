"""Exact identity suites over enumerated tree shapes.

Backs the ``verify`` command: every check here is an exact statement
(polynomial equality, coefficient signs, factorizations) evaluated over one
representative tree per shape, so a pass is a machine verification of the
combinatorial identities at that size.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .treks import (
    TrekIdentityError,
    adjugate_polynomials,
    binomial_positivity_certificate,
    trek_polynomial,
    verify_factorization,
)
from .trees import binary_tree_shapes, tree_shapes

FACTORIZATION_MAX_N = 5  # symbolic t-substitution grows quickly past this


@dataclass
class SuiteResult:
    """Outcome of one named suite: counts plus failure descriptions."""

    name: str
    checks: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        status = "ok" if self.passed else f"FAILED ({len(self.failures)})"
        return f"{self.name}: {self.checks} checks, {status}"


def trek_identity_suite(max_n: int) -> SuiteResult:
    """Trek sums equal adjugate coordinates, with all coefficients one."""
    result = SuiteResult("trek-identity")
    for n in range(2, max_n + 1):
        for idx, tree in enumerate(tree_shapes(n)):
            polys, _det = adjugate_polynomials(tree)
            for (i, j), expected in sorted(polys.items()):
                result.checks += 1
                try:
                    tp = trek_polynomial(tree, i, j)
                except TrekIdentityError as exc:
                    result.failures.append(f"n={n} shape#{idx} ({i},{j}): {exc}")
                    continue
                if tp != expected:
                    result.failures.append(
                        f"n={n} shape#{idx} ({i},{j}): trek sum != adjugate"
                    )
                elif any(c != 1 for c in tp.terms.values()):
                    result.failures.append(
                        f"n={n} shape#{idx} ({i},{j}): coefficient != 1"
                    )
    return result


def certificate_suite(max_n: int) -> SuiteResult:
    """Quartet inequalities certified coefficientwise; equalities vanish."""
    result = SuiteResult("quartet-certificates")
    for n in range(2, max_n + 1):
        for idx, tree in enumerate(tree_shapes(n)):
            polys, _det = adjugate_polynomials(tree)

            def P(a, b):
                return polys[(min(a, b), max(a, b))]

            for q in itertools.combinations(range(n + 1), 4):
                topo = tree.quartet_topology(q)
                a, b, c, d = q
                prods = [
                    P(a, b) * P(c, d),
                    P(a, c) * P(b, d),
                    P(a, d) * P(b, c),
                ]
                result.checks += 1
                if topo.is_star:
                    if not (prods[0] == prods[1] == prods[2]):
                        result.failures.append(
                            f"n={n} shape#{idx} star {q}: pairings differ"
                        )
                    continue
                (i, j), (k, l) = topo.split_pairs()
                if P(i, k) * P(j, l) != P(i, l) * P(j, k):
                    result.failures.append(
                        f"n={n} shape#{idx} quartet {q}: cross products differ"
                    )
                    continue
                try:
                    binomial_positivity_certificate(tree, q)
                except TrekIdentityError as exc:
                    result.failures.append(f"n={n} shape#{idx} quartet {q}: {exc}")
    return result


def factorization_suite(max_n: int) -> SuiteResult:
    """Adjugate coordinates factor into the path determinants D and E."""
    result = SuiteResult("factorization")
    for n in range(2, min(max_n, FACTORIZATION_MAX_N) + 1):
        for idx, tree in enumerate(binary_tree_shapes(n)):
            result.checks += 1
            try:
                verify_factorization(tree)
            except TrekIdentityError as exc:
                result.failures.append(f"n={n} binary shape#{idx}: {exc}")
    return result


def run_identity_suite(max_n: int = 5) -> list[SuiteResult]:
    """All exact suites up to the given leaf count."""
    return [
        trek_identity_suite(max_n),
        certificate_suite(max_n),
        factorization_suite(max_n),
    ]
