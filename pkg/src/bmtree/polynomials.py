"""Sparse exact multivariate polynomials and fraction-free linear algebra.

Monomials are packed into a single Python int, 4 bits of exponent per
variable (variables are 1-based vertex ids).  Monomial multiplication is
then integer addition of keys, which keeps the dict-based arithmetic in
``Poly`` fast enough for the symbolic adjugates used elsewhere.

Coefficients are exact: ``int`` or ``fractions.Fraction``.  Nothing in this
module touches floats.

The per-variable exponent cap is 15.  Every polynomial produced in this
package is a product of at most four multilinear factors, so the cap is
never approached; ``Poly.variable`` and ``exact_div`` guard the encoding.
"""

from __future__ import annotations

from fractions import Fraction

_EXP_BITS = 4
_EXP_MASK = (1 << _EXP_BITS) - 1


class ExactDivisionError(ArithmeticError):
    """A division that was expected to be exact left a remainder."""


def _slot(var: int) -> int:
    if var < 1:
        raise ValueError(f"variable ids are 1-based, got {var}")
    return (var - 1) << 2


def monomial_key(powers: dict[int, int]) -> int:
    """Pack ``{variable: exponent}`` into an int key."""
    key = 0
    for var, exp in powers.items():
        if not 0 <= exp <= _EXP_MASK:
            raise ValueError(f"exponent {exp} of variable {var} out of range")
        key |= exp << _slot(var)
    return key


def decode_key(key: int) -> dict[int, int]:
    """Inverse of :func:`monomial_key`; omits zero exponents."""
    powers = {}
    var = 1
    while key:
        exp = key & _EXP_MASK
        if exp:
            powers[var] = exp
        key >>= _EXP_BITS
        var += 1
    return powers


def key_degree(key: int) -> int:
    deg = 0
    while key:
        deg += key & _EXP_MASK
        key >>= _EXP_BITS
    return deg


def key_is_squarefree(key: int) -> bool:
    while key:
        if key & _EXP_MASK > 1:
            return False
        key >>= _EXP_BITS
    return True


def _key_divides(den: int, num: int) -> bool:
    """Nibble-wise den <= num, i.e. the monomial quotient exists."""
    while den:
        if den & _EXP_MASK > num & _EXP_MASK:
            return False
        den >>= _EXP_BITS
        num >>= _EXP_BITS
    return True


class Poly:
    """Sparse exact polynomial in variables x_1, x_2, ...

    ``terms`` maps packed monomial keys to nonzero int/Fraction
    coefficients; the empty dict is the zero polynomial.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[int, object] | None = None):
        self.terms = terms if terms is not None else {}

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls) -> "Poly":
        return cls({})

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({0: c}) if c else cls({})

    @classmethod
    def variable(cls, var: int, coeff=1) -> "Poly":
        return cls({1 << _slot(var): coeff}) if coeff else cls({})

    @classmethod
    def from_vars(cls, coeffs: dict[int, object], constant=0) -> "Poly":
        """Linear form  constant + sum(coeffs[v] * x_v)."""
        terms = {}
        for var, c in coeffs.items():
            if c:
                terms[1 << _slot(var)] = c
        if constant:
            terms[0] = constant
        return cls(terms)

    # -- predicates and views -------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_squarefree(self) -> bool:
        return all(key_is_squarefree(k) for k in self.terms)

    def total_degree(self) -> int:
        return max((key_degree(k) for k in self.terms), default=0)

    def monomials(self) -> list[dict[int, int]]:
        return [decode_key(k) for k in self.terms]

    def coefficient(self, powers: dict[int, int]):
        return self.terms.get(monomial_key(powers), 0)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == ({0: other} if other else {})
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- ring operations -------------------------------------------------

    def __add__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0) - c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Poly(out)

    def __rsub__(self, other) -> "Poly":
        return Poly.const(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            if not other:
                return Poly.zero()
            return Poly({k: c * other for k, c in self.terms.items()})
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out: dict[int, object] = {}
        get = out.get
        for ka, ca in a.items():
            for kb, cb in b.items():
                k = ka + kb
                s = get(k, 0) + ca * cb
                if s:
                    out[k] = s
                else:
                    del out[k]
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def exact_div(self, other: "Poly") -> "Poly":
        """Exact polynomial division; raises if the remainder is nonzero.

        Leading terms are taken under the packed-key order (lexicographic
        with the highest variable id most significant), which is a valid
        monomial order, so the standard division loop terminates.
        """
        if not isinstance(other, Poly):
            other = Poly.const(other)
        if not other.terms:
            raise ZeroDivisionError("polynomial division by zero")
        if not self.terms:
            return Poly.zero()
        den = other.terms
        dk = max(den)
        dc = den[dk]
        rem = dict(self.terms)
        quo: dict[int, object] = {}
        while rem:
            nk = max(rem)
            if not _key_divides(dk, nk):
                raise ExactDivisionError("leading monomial does not divide")
            qk = nk - dk
            qc = _coeff_div(rem[nk], dc)
            quo[qk] = qc
            for k, c in den.items():
                kk = qk + k
                s = rem.get(kk, 0) - qc * c
                if s:
                    rem[kk] = s
                else:
                    rem.pop(kk, None)
        return Poly(quo)

    def __truediv__(self, other):
        if isinstance(other, Poly):
            return self.exact_div(other)
        return Poly({k: _coeff_div(c, other) for k, c in self.terms.items()})

    # -- evaluation and substitution --------------------------------------

    def evaluate(self, values: dict[int, object]):
        """Evaluate at ``{variable: value}``; every variable must be given."""
        total = 0
        for key, coeff in self.terms.items():
            term = coeff
            for var, exp in decode_key(key).items():
                term *= values[var] ** exp
            total += term
        return total

    def substitute(self, subs: dict[int, "Poly"]) -> "Poly":
        """Replace variables by polynomials; unmapped variables persist."""
        out = Poly.zero()
        for key, coeff in self.terms.items():
            term = Poly.const(coeff)
            for var, exp in decode_key(key).items():
                rep = subs.get(var)
                if rep is None:
                    term = term * Poly({exp << _slot(var): 1})
                else:
                    term = term * rep**exp
            out = out + term
        return out

    def initial_monomial_degrevlex(self) -> dict[int, int]:
        """Leading monomial under graded reverse lex with x_1 > x_2 > ...

        Ties within a degree are broken reverse-lexicographically: the
        monomial whose exponent vector has the smaller entry at the last
        position where they differ wins.
        """
        if not self.terms:
            raise ValueError("zero polynomial has no initial monomial")
        nvars = 0
        for k in self.terms:
            nvars = max(nvars, k.bit_length())
        nvars = (nvars + _EXP_BITS - 1) // _EXP_BITS

        def rank(key: int):
            exps = [(key >> _slot(v)) & _EXP_MASK for v in range(1, nvars + 1)]
            return (sum(exps), tuple(-e for e in reversed(exps)))

        return decode_key(max(self.terms, key=rank))

    # -- printing ---------------------------------------------------------

    def to_str(self, prefix: str = "x") -> str:
        if not self.terms:
            return "0"
        items = sorted(
            (tuple(sorted(decode_key(k).items())), c) for k, c in self.terms.items()
        )
        parts = []
        for powers, coeff in items:
            factors = []
            for var, exp in powers:
                factors.append(f"{prefix}{var}" + (f"^{exp}" if exp > 1 else ""))
            mono = "*".join(factors)
            mag = abs(coeff)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if not parts:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(("+ " if coeff > 0 else "- ") + body)
        return " ".join(parts)

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"Poly({self.to_str()})"


def _coeff_div(a, b):
    """Exact scalar division for int/Fraction coefficients."""
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        if r:
            return Fraction(a, b)
        return q
    return Fraction(a) / b


# ---------------------------------------------------------------------------
# Fraction-free linear algebra, generic over int / Fraction / Poly entries.
# ---------------------------------------------------------------------------


def _exact_div(a, b):
    if isinstance(a, Poly):
        return a.exact_div(b)
    if isinstance(b, Poly):
        raise TypeError("cannot divide scalar by polynomial")
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        if r:
            raise ExactDivisionError(f"{a} not divisible by {b}")
        return q
    return Fraction(a) / Fraction(b)


def _one_like(sample):
    return Poly.const(1) if isinstance(sample, Poly) else 1


def _zero_like(sample):
    return Poly.zero() if isinstance(sample, Poly) else 0


def bareiss_det(rows):
    """Determinant by Bareiss fraction-free elimination with row pivoting.

    Entries may be ints, Fractions, or Poly; all intermediate divisions are
    exact.  Row swaps only happen when a pivot vanishes, which cannot occur
    for the positive-definite or generic symbolic matrices this package
    feeds in, but is handled for arbitrary exact input.
    """
    n = len(rows)
    if n == 0:
        return 1
    m = [list(r) for r in rows]
    if any(len(r) != n for r in m):
        raise ValueError("matrix must be square")
    sign = 1
    prev = _one_like(m[0][0])
    for k in range(n - 1):
        if not m[k][k]:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return _zero_like(m[0][0])
        piv = m[k][k]
        for i in range(k + 1, n):
            fac = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, n):
                row_i[j] = _exact_div(piv * row_i[j] - fac * row_k[j], prev)
            row_i[k] = _zero_like(piv)
        prev = piv
    det = m[n - 1][n - 1]
    return -det if sign < 0 else det


def ff_adjugate(rows):
    """Adjugate and determinant via fraction-free Gauss-Jordan elimination.

    Returns ``(adj, det)`` with ``A @ adj == det * I`` exactly.  Requires
    every pivot (i.e. every leading principal minor) to be nonzero; raises
    ``ZeroDivisionError`` otherwise; callers with arbitrary exact numeric
    input should fall back to :func:`fraction_inverse_det`.
    """
    n = len(rows)
    if n == 0:
        return [], 1
    if any(len(r) != n for r in rows):
        raise ValueError("matrix must be square")
    one = _one_like(rows[0][0])
    zero = _zero_like(rows[0][0])
    m = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(rows)]
    prev = None  # divide by the ring one on the first step
    for k in range(n):
        piv = m[k][k]
        if not piv:
            raise ZeroDivisionError(f"zero pivot at step {k} in fraction-free elimination")
        row_k = m[k]
        for i in range(n):
            if i == k:
                continue
            row_i = m[i]
            fac = row_i[k]
            if prev is None:
                for j in range(k + 1, 2 * n):
                    row_i[j] = piv * row_i[j] - fac * row_k[j]
            else:
                for j in range(k + 1, 2 * n):
                    row_i[j] = _exact_div(piv * row_i[j] - fac * row_k[j], prev)
            row_i[k] = zero
        prev = piv
    det = m[n - 1][n - 1]
    adj = [row[n:] for row in m]
    return adj, det


def det_dp(rows):
    """Division-free determinant by Laplace expansion with subset reuse.

    Intended for small symbolic matrices whose entries are Poly; avoids the
    polynomial divisions of Bareiss at the cost of O(n * 2^n) entry products.
    """
    n = len(rows)
    if n == 0:
        return 1
    if any(len(r) != n for r in rows):
        raise ValueError("matrix must be square")
    states = {0: _one_like(rows[0][0])}
    for r in range(n):
        nxt: dict[int, object] = {}
        row = rows[r]
        for mask, val in states.items():
            if not val:
                continue
            for j in range(n):
                bit = 1 << j
                if mask & bit:
                    continue
                entry = row[j]
                if not entry:
                    continue
                below = (mask & (bit - 1)).bit_count()
                term = val * entry
                if (r + below) & 1:
                    term = -term
                new_mask = mask | bit
                if new_mask in nxt:
                    nxt[new_mask] = nxt[new_mask] + term
                else:
                    nxt[new_mask] = term
        states = nxt
    return states.get((1 << n) - 1, _zero_like(rows[0][0]))


def fraction_inverse_det(rows):
    """Exact inverse and determinant over Fractions, with partial pivoting.

    Accepts int/Fraction entries; returns (inverse rows, det) or raises
    ``ZeroDivisionError`` for a singular matrix.
    """
    n = len(rows)
    a = [[Fraction(x) for x in r] for r in rows]
    if any(len(r) != n for r in a):
        raise ValueError("matrix must be square")
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    det = Fraction(1)
    for k in range(n):
        piv_row = next((i for i in range(k, n) if a[i][k]), None)
        if piv_row is None:
            raise ZeroDivisionError("matrix is singular")
        if piv_row != k:
            a[k], a[piv_row] = a[piv_row], a[k]
            inv[k], inv[piv_row] = inv[piv_row], inv[k]
            det = -det
        piv = a[k][k]
        det *= piv
        a[k] = [x / piv for x in a[k]]
        inv[k] = [x / piv for x in inv[k]]
        for i in range(n):
            if i == k or not a[i][k]:
                continue
            f = a[i][k]
            a[i] = [x - f * y for x, y in zip(a[i], a[k])]
            inv[i] = [x - f * y for x, y in zip(inv[i], inv[k])]
    return inv, det


def adjugate_exact(rows):
    """Adjugate/determinant of an exact numeric matrix.

    Tries the pivot-free fraction-free route first (fast for the
    positive-definite matrices that dominate usage) and falls back to
    Fraction Gauss-Jordan when a leading minor vanishes.
    """
    try:
        return ff_adjugate(rows)
    except ZeroDivisionError:
        inv, det = fraction_inverse_det(rows)
        adj = [[det * x for x in row] for row in inv]
        return adj, det


def matrix_rank_exact(rows) -> int:
    """Rank of an int/Fraction matrix by exact Gaussian elimination."""
    if not rows:
        return 0
    a = [[Fraction(x) for x in r] for r in rows]
    nrows, ncols = len(a), len(a[0])
    rank = 0
    col = 0
    while rank < nrows and col < ncols:
        piv = next((i for i in range(rank, nrows) if a[i][col]), None)
        if piv is None:
            col += 1
            continue
        a[rank], a[piv] = a[piv], a[rank]
        pr = a[rank]
        for i in range(rank + 1, nrows):
            if a[i][col]:
                f = a[i][col] / pr[col]
                a[i] = [x - f * y for x, y in zip(a[i], pr)]
        rank += 1
        col += 1
    return rank
