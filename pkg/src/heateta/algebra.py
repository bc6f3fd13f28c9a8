"""Exterior and Clifford coefficient algebras over Q(i), tensored with p x p matrices.

Both algebras share one data layout: a sparse map from
``(blade, row, col)`` to a Gaussian rational, where ``blade`` is a bitmask
over the coordinate covectors (bit ``i`` stands for ``dx^{i+1}``). On the
orthonormal basis the quantization map sends the form ``dx^I`` to the
Clifford word ``c(dx^{i_1})...c(dx^{i_k})`` with increasing indices, so
:func:`quantize` and :func:`symbolize` only change how products are taken.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .scalar import ONE, ZERO, GaussianRational, as_scalar

__all__ = [
    "AlgebraShapeError",
    "FormCoefficient",
    "CliffordCoefficient",
    "wedge",
    "clifford_mul",
    "quantize",
    "symbolize",
    "spinor_trace",
    "trace_constants",
    "blade_indices",
    "indices_blade",
]


class AlgebraShapeError(ValueError):
    """Operands live in algebras of different dimension or auxiliary rank."""


def blade_indices(blade: int) -> tuple[int, ...]:
    """1-based increasing multi-index of a bitmask blade."""
    out = []
    i = 0
    while blade:
        if blade & 1:
            out.append(i + 1)
        blade >>= 1
        i += 1
    return tuple(out)


def indices_blade(indices: Iterable[int]) -> tuple[int, int]:
    """Bitmask and reordering sign of a Clifford/exterior word given by 1-based indices.

    Repeated indices are not allowed here; use products for that.
    """
    idx = list(indices)
    if len(set(idx)) != len(idx):
        raise ValueError(f"repeated index in {idx}")
    sign = 1
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] > idx[b]:
                sign = -sign
    blade = 0
    for i in idx:
        if i < 1:
            raise ValueError("indices are 1-based")
        blade |= 1 << (i - 1)
    return blade, sign


def _reorder_sign(b1: int, b2: int) -> int:
    # parity of pairs (i in b1, j in b2) with i > j
    swaps = 0
    b1 >>= 1
    while b1:
        swaps += bin(b1 & b2).count("1")
        b1 >>= 1
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def _product_table(n: int, clifford: bool) -> tuple[tuple[tuple[int, int], ...], ...]:
    size = 1 << n
    rows = []
    for b1 in range(size):
        row = []
        for b2 in range(size):
            common = b1 & b2
            if common and not clifford:
                row.append((0, 0))
                continue
            sign = _reorder_sign(b1, b2)
            if bin(common).count("1") & 1:
                # c(dx^i)^2 = -1 for an orthonormal coframe
                sign = -sign
            row.append((sign, b1 ^ b2))
        rows.append(tuple(row))
    return tuple(rows)


class _GradedCoefficient:
    __slots__ = ("n", "p", "entries")
    _clifford = False

    def __init__(self, n: int, p: int, entries: Mapping[tuple[int, int, int], GaussianRational] | None = None):
        if n < 1 or p < 1:
            raise AlgebraShapeError("dimension and auxiliary rank must be positive")
        self.n = n
        self.p = p
        clean = {}
        if entries:
            top = 1 << n
            for key, value in entries.items():
                blade, r, c = key
                if not 0 <= blade < top or not (0 <= r < p and 0 <= c < p):
                    raise AlgebraShapeError(f"entry {key} outside Λ({n}) ⊗ M_{p}")
                value = as_scalar(value)
                if value:
                    clean[key] = value
        self.entries = clean

    @classmethod
    def _wrap(cls, n, p, entries):
        obj = object.__new__(cls)
        obj.n = n
        obj.p = p
        obj.entries = entries
        return obj

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n: int, p: int = 1):
        return cls(n, p)

    @classmethod
    def scalar(cls, n: int, p: int = 1, value=1):
        value = as_scalar(value)
        return cls._wrap(n, p, {(0, r, r): value for r in range(p)} if value else {})

    @classmethod
    def one(cls, n: int, p: int = 1):
        return cls.scalar(n, p, ONE)

    @classmethod
    def basis(cls, n: int, p: int, indices: Sequence[int], matrix=None, value=1):
        """Word ``dx^{i_1}...dx^{i_k}`` (1-based, any order of distinct indices) times ``matrix``.

        ``matrix`` defaults to the identity; ``value`` scales the result.
        """
        blade, sign = indices_blade(indices)
        if blade >= 1 << n:
            raise AlgebraShapeError(f"index out of range for n={n}: {tuple(indices)}")
        value = as_scalar(value) * sign
        if matrix is None:
            return cls._wrap(n, p, {(blade, r, r): value for r in range(p)} if value else {})
        if len(matrix) != p or any(len(row) != p for row in matrix):
            raise AlgebraShapeError(f"matrix is not {p}x{p}")
        entries = {}
        for r in range(p):
            for c in range(p):
                v = as_scalar(matrix[r][c]) * value
                if v:
                    entries[(blade, r, c)] = v
        return cls._wrap(n, p, entries)

    # arithmetic --------------------------------------------------------
    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.n != self.n or other.p != self.p:
            raise AlgebraShapeError(
                f"shape mismatch: (n={self.n}, p={self.p}) vs (n={other.n}, p={other.p})"
            )

    def __add__(self, other):
        self._check(other)
        out = dict(self.entries)
        for key, value in other.entries.items():
            v = out.get(key)
            v = value if v is None else v + value
            if v:
                out[key] = v
            else:
                out.pop(key, None)
        return self._wrap(self.n, self.p, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self._wrap(self.n, self.p, {k: -v for k, v in self.entries.items()})

    def scale(self, factor):
        factor = as_scalar(factor)
        if not factor:
            return self._wrap(self.n, self.p, {})
        return self._wrap(self.n, self.p, {k: v * factor for k, v in self.entries.items()})

    def __mul__(self, other):
        if isinstance(other, _GradedCoefficient):
            self._check(other)
            return _multiply(self, other, _product_table(self.n, self._clifford))
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __eq__(self, other) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self.n == other.n and self.p == other.p and self.entries == other.entries

    def __hash__(self):
        return hash((type(self).__name__, self.n, self.p, frozenset(self.entries.items())))

    # structure ---------------------------------------------------------
    def degrees(self) -> set[int]:
        return {bin(b).count("1") for b, _, _ in self.entries}

    def part(self, degree: int):
        """Homogeneous component of the given form degree / word length."""
        return self._wrap(
            self.n, self.p, {k: v for k, v in self.entries.items() if bin(k[0]).count("1") == degree}
        )

    def even_part(self):
        return self._wrap(self.n, self.p, {k: v for k, v in self.entries.items() if not bin(k[0]).count("1") & 1})

    def odd_part(self):
        return self._wrap(self.n, self.p, {k: v for k, v in self.entries.items() if bin(k[0]).count("1") & 1})

    def max_degree(self) -> int:
        return max(self.degrees(), default=-1)

    def blade_matrix(self, blade: int) -> list[list[GaussianRational]]:
        m = [[ZERO] * self.p for _ in range(self.p)]
        for (b, r, c), v in self.entries.items():
            if b == blade:
                m[r][c] = v
        return m

    def top_form_matrix(self) -> list[list[GaussianRational]]:
        """Matrix coefficient of ``dx^1...dx^n``."""
        return self.blade_matrix((1 << self.n) - 1)

    def matrix_trace(self):
        """Trace over C^p, giving an element of the same algebra with p = 1."""
        out = {}
        for (b, r, c), v in self.entries.items():
            if r == c:
                out[(b, 0, 0)] = out.get((b, 0, 0), ZERO) + v
        return type(self)._wrap(self.n, 1, {k: v for k, v in out.items() if v})

    def sorted_items(self):
        """Entries in canonical order: lexicographic multi-index, then matrix position."""
        return sorted(self.entries.items(), key=lambda kv: (blade_indices(kv[0][0]), kv[0][1], kv[0][2]))

    def is_scalar_identity(self) -> bool:
        if any(b or r != c for b, r, c in self.entries):
            return False
        vals = {self.entries.get((0, r, r), ZERO) for r in range(self.p)}
        return len(vals) == 1

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, p={self.p}, {format_coefficient(self)!r})"

    def __str__(self):
        return format_coefficient(self)


def _multiply(a, b, table):
    by_row: dict[int, list] = {}
    for (b2, r2, c2), v2 in b.entries.items():
        by_row.setdefault(r2, []).append((b2, c2, v2))
    acc: dict = {}
    get = acc.get
    for (b1, r1, c1), v1 in a.entries.items():
        row = by_row.get(c1)
        if not row:
            continue
        trow = table[b1]
        for b2, c2, v2 in row:
            sign, blade = trow[b2]
            if not sign:
                continue
            prod = v1 * v2
            if sign < 0:
                prod = -prod
            key = (blade, r1, c2)
            cur = get(key)
            acc[key] = prod if cur is None else cur + prod
    return type(a)._wrap(a.n, a.p, {k: v for k, v in acc.items() if v})


class FormCoefficient(_GradedCoefficient):
    """Element of Λ(n) ⊗ End(C^p); the product is the wedge product."""

    __slots__ = ()
    _clifford = False


class CliffordCoefficient(_GradedCoefficient):
    """Element of Cl(n) ⊗ End(C^p) in the increasing-word basis; ``c(e)^2 = -|e|^2``."""

    __slots__ = ()
    _clifford = True


def wedge(a: FormCoefficient, b: FormCoefficient) -> FormCoefficient:
    if not isinstance(a, FormCoefficient) or not isinstance(b, FormCoefficient):
        raise TypeError("wedge expects FormCoefficient operands")
    return a * b


def clifford_mul(a: CliffordCoefficient, b: CliffordCoefficient) -> CliffordCoefficient:
    if not isinstance(a, CliffordCoefficient) or not isinstance(b, CliffordCoefficient):
        raise TypeError("clifford_mul expects CliffordCoefficient operands")
    return a * b


def quantize(a: FormCoefficient) -> CliffordCoefficient:
    if not isinstance(a, FormCoefficient):
        raise TypeError("quantize expects a FormCoefficient")
    return CliffordCoefficient._wrap(a.n, a.p, dict(a.entries))


def symbolize(u: CliffordCoefficient) -> FormCoefficient:
    if not isinstance(u, CliffordCoefficient):
        raise TypeError("symbolize expects a CliffordCoefficient")
    return FormCoefficient._wrap(u.n, u.p, dict(u.entries))


def trace_constants(n: int) -> tuple[GaussianRational, GaussianRational]:
    """Spinor traces of the empty word and of the full word ``c(dx^1)...c(dx^n)``."""
    if n % 2 == 0:
        raise ValueError(f"spinor trace identity requires odd dimension, got n={n}")
    half = n // 2
    base = as_scalar(2**half)
    minus_i = GaussianRational(0, -1)
    return base, (minus_i ** (half + 1)) * base


def spinor_trace(u: CliffordCoefficient) -> GaussianRational:
    """Trace over S_n ⊗ C^p of a Clifford coefficient (odd n only).

    Words of length strictly between 0 and n have zero trace.
    """
    if not isinstance(u, CliffordCoefficient):
        raise TypeError("spinor_trace expects a CliffordCoefficient; quantize forms first")
    empty, full = trace_constants(u.n)
    top = (1 << u.n) - 1
    total = ZERO
    for (b, r, c), v in u.entries.items():
        if r != c:
            continue
        if b == 0:
            total = total + v * empty
        elif b == top:
            total = total + v * full
    return total


def _blade_label(blade: int) -> str:
    return "" if blade == 0 else "c{" + ",".join(str(i) for i in blade_indices(blade)) + "}"


def format_coefficient(coef: _GradedCoefficient) -> str:
    """Deterministic human-readable rendering.

    Scalar multiples of the identity matrix print as the scalar; other
    matrices print row-major as ``[[a,b],[c,d]]``. Form coefficients use
    ``dx{...}`` labels, Clifford coefficients ``c{...}``.
    """
    if not coef.entries:
        return "0"
    blades = sorted({b for b, _, _ in coef.entries}, key=blade_indices)
    parts = []
    for blade in blades:
        m = coef.blade_matrix(blade)
        diag = {m[r][r] for r in range(coef.p)}
        off = any(m[r][c] for r in range(coef.p) for c in range(coef.p) if r != c)
        if not off and len(diag) == 1:
            value = str(next(iter(diag)))
            if blade and any(ch in value[1:] for ch in "+-"):
                value = f"({value})"
        else:
            value = "[" + ",".join("[" + ",".join(str(x) for x in row) + "]" for row in m) + "]"
        label = _blade_label(blade)
        if isinstance(coef, FormCoefficient):
            label = label.replace("c{", "dx{")
        if not label:
            parts.append(value)
        elif value == "1":
            parts.append(label)
        elif value == "-1":
            parts.append("-" + label)
        else:
            parts.append(f"{value}*{label}")
    text = " + ".join(parts)
    return text.replace("+ -", "- ")
