"""Truncated multivariate polynomials in the normal coordinates x.

Coefficients can be any exact ring element supporting ``+``, ``-``, ``*``
(Fractions for metric data, Gaussian rationals or p x p matrices of them
for connection data). Every product is truncated at ``maxdeg``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Callable

__all__ = ["TPoly", "mat_mul", "mat_add", "mat_scale", "mat_identity", "mat_series", "monomials"]


def monomials(n: int, degree: int):
    """All exponent tuples of total degree ``degree`` in ``n`` variables."""
    out = []
    for combo in combinations_with_replacement(range(n), degree):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


class TPoly:
    __slots__ = ("n", "maxdeg", "c")

    def __init__(self, n: int, maxdeg: int, coeffs: dict | None = None):
        self.n = n
        self.maxdeg = maxdeg
        self.c = {e: v for e, v in (coeffs or {}).items() if sum(e) <= maxdeg and v}

    @classmethod
    def const(cls, n, maxdeg, value):
        return cls(n, maxdeg, {(0,) * n: value})

    @classmethod
    def var(cls, n, maxdeg, i, value=1):
        return cls(n, maxdeg, {tuple(1 if j == i else 0 for j in range(n)): value})

    def __add__(self, other):
        if not isinstance(other, TPoly):
            other = TPoly.const(self.n, self.maxdeg, other)
        out = dict(self.c)
        for e, v in other.c.items():
            out[e] = out[e] + v if e in out else v
        return TPoly(self.n, min(self.maxdeg, other.maxdeg), out)

    __radd__ = __add__

    def __neg__(self):
        return TPoly(self.n, self.maxdeg, {e: -v for e, v in self.c.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TPoly):
            return TPoly(self.n, self.maxdeg, {e: v * other for e, v in self.c.items()})
        maxdeg = min(self.maxdeg, other.maxdeg)
        out: dict = {}
        for e1, v1 in self.c.items():
            d1 = sum(e1)
            for e2, v2 in other.c.items():
                if d1 + sum(e2) > maxdeg:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                v = v1 * v2
                out[e] = out[e] + v if e in out else v
        return TPoly(self.n, maxdeg, out)

    def __rmul__(self, other):
        return TPoly(self.n, self.maxdeg, {e: other * v for e, v in self.c.items()})

    def deriv(self, i: int) -> "TPoly":
        out = {}
        for e, v in self.c.items():
            if e[i]:
                ne = tuple(a - 1 if j == i else a for j, a in enumerate(e))
                out[ne] = v * e[i]
        # one order of accuracy is lost
        return TPoly(self.n, self.maxdeg - 1, out)

    def part(self, degree: int) -> "TPoly":
        return TPoly(self.n, self.maxdeg, {e: v for e, v in self.c.items() if sum(e) == degree})

    def truncate(self, maxdeg: int) -> "TPoly":
        return TPoly(self.n, min(maxdeg, self.maxdeg), self.c)

    def map(self, f: Callable) -> "TPoly":
        return TPoly(self.n, self.maxdeg, {e: f(v) for e, v in self.c.items()})

    def coeff(self, exps, default=0):
        return self.c.get(tuple(exps), default)

    def constant(self, default=0):
        return self.c.get((0,) * self.n, default)

    def is_zero(self) -> bool:
        return not self.c

    def __eq__(self, other):
        if not isinstance(other, TPoly):
            return NotImplemented
        return self.n == other.n and self.c == other.c

    __hash__ = None

    def __repr__(self):
        return f"TPoly(n={self.n}, maxdeg={self.maxdeg}, {self.c!r})"


# small dense-matrix helpers over TPoly entries ------------------------------


def mat_identity(n: int, maxdeg: int, dim: int | None = None, one=Fraction(1)):
    dim = n if dim is None else dim
    return [[TPoly.const(n, maxdeg, one) if i == j else TPoly(n, maxdeg) for j in range(dim)] for i in range(dim)]


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, s):
    return [[x * s for x in row] for row in a]


def mat_mul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0])
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = a[i][0] * b[0][j]
            for k in range(1, inner):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def mat_series(g_minus_identity, coefficients, n, maxdeg):
    """``sum_k coefficients[k] * G^k`` for a matrix ``G`` with no constant term."""
    dim = len(g_minus_identity)
    result = mat_identity(n, maxdeg, dim)
    result = mat_scale(result, coefficients[0])
    power = mat_identity(n, maxdeg, dim)
    for c in coefficients[1:]:
        power = mat_mul(power, g_minus_identity)
        if all(p.is_zero() for row in power for p in row):
            break
        result = mat_add(result, mat_scale(power, c))
    return result
