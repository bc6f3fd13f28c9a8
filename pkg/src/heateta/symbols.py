"""Volterra symbol calculus on finite sums of resolvent monomials.

A symbol term is ``coef * x^alpha * xi^beta * (i tau)^tau * R^k`` with
``R = (|xi|^2 + i tau)^{-1}`` the flat resolvent. ``tau`` is nonzero only
for the heat operator's own ``i tau`` term; it is rewritten through
``i tau R^k = R^{k-1} - |xi|^2 R^k`` whenever it meets a resolvent, so
canonical terms never carry both.

Two gradings are used:

* parabolic degree ``|beta| + 2 tau - 2k`` (the homogeneity under
  ``(xi, tau) -> (lam xi, lam^2 tau)``);
* weight = parabolic degree - ``|alpha|``. The composition ``#`` is
  exactly additive in the weight, so truncating at a lowest retained
  weight (the *floor*) is closed under every operation. At ``x = 0`` the
  weight is the parabolic degree, which is all the diagonal kernel needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from math import comb, factorial
from typing import Iterable, Iterator, Mapping

from .algebra import (
    CliffordCoefficient,
    FormCoefficient,
    _GradedCoefficient,
    _multiply,
    _product_table,
    quantize,
    symbolize,
)
from .scalar import ONE, ZERO, GaussianRational, as_scalar

__all__ = [
    "BudgetError",
    "SymbolTerm",
    "SymbolExpansion",
    "DiagValue",
    "DiagKernelExpansion",
    "parabolic_scale_check",
    "deriv_xi",
    "deriv_x",
    "compose",
    "parametrix",
    "inverse_fourier_diag",
    "diag_value_at",
    "diag_kernel_expansion",
    "gaussian_moment",
]


class BudgetError(RuntimeError):
    """A requested degree lies below what the truncated inputs determine."""

    def __init__(self, message: str, first_dropped: int | None = None):
        super().__init__(message)
        self.first_dropped = first_dropped


_MINUS_I_POW = (ONE, GaussianRational(0, -1), GaussianRational(-1, 0), GaussianRational(0, 1))


@dataclass(frozen=True)
class SymbolTerm:
    coef: _GradedCoefficient
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    k: int = 0
    tau: int = 0

    @property
    def parabolic_degree(self) -> int:
        return sum(self.beta) + 2 * self.tau - 2 * self.k

    @property
    def weight(self) -> int:
        return self.parabolic_degree - sum(self.alpha)

    @property
    def key(self):
        return (self.alpha, self.beta, self.k, self.tau)

    def scalar_value(self, x, xi, tau) -> GaussianRational:
        """Value of ``x^alpha xi^beta (i tau)^tau R^k`` at an exact point (coefficient excluded)."""
        return _monomial_value(self.key, x, xi, tau)


def _monomial_value(key, x, xi, tau) -> GaussianRational:
    alpha, beta, k, t = key
    val = ONE
    for xa, a in zip(x, alpha):
        val = val * as_scalar(xa) ** a
    for xb, b in zip(xi, beta):
        val = val * as_scalar(xb) ** b
    itau = GaussianRational(0, as_scalar(tau).re)
    if t:
        val = val * itau**t
    if k:
        res = sum((as_scalar(v) * as_scalar(v) for v in xi), ZERO) + itau
        val = val * res ** (-k)
    return val


def _weight(key) -> int:
    alpha, beta, k, t = key
    return sum(beta) + 2 * t - 2 * k - sum(alpha)


def _degree(key) -> int:
    _, beta, k, t = key
    return sum(beta) + 2 * t - 2 * k


def _unit(n: int, i: int) -> tuple[int, ...]:
    return tuple(1 if j == i else 0 for j in range(n))


def _add_idx(a, b):
    return tuple(x + y for x, y in zip(a, b))


@lru_cache(maxsize=None)
def _tau_normal(key) -> tuple[tuple[Fraction, tuple], ...]:
    """Rewrite ``i tau * R^k`` (k > 0) as ``R^{k-1} - |xi|^2 R^k`` until canonical."""
    alpha, beta, k, t = key
    if not t or not k:
        return ((Fraction(1), key),)
    out: dict = {}
    first = (alpha, beta, k - 1, t - 1)
    for c, kk in _tau_normal(first):
        out[kk] = out.get(kk, 0) + c
    n = len(beta)
    for i in range(n):
        nb = tuple(b + (2 if j == i else 0) for j, b in enumerate(beta))
        for c, kk in _tau_normal((alpha, nb, k, t - 1)):
            out[kk] = out.get(kk, 0) - c
    return tuple((c, kk) for kk, c in out.items() if c)


@lru_cache(maxsize=None)
def _xi_derivative(beta: tuple[int, ...], k: int, gamma: tuple[int, ...]):
    """``d_xi^gamma (xi^beta R^k)`` as a tuple of ``(coef, beta', k')``."""
    terms = {(beta, k): Fraction(1)}
    for axis, g in enumerate(gamma):
        for _ in range(g):
            nxt: dict = {}
            for (b, kk), c in terms.items():
                if b[axis]:
                    nb = tuple(v - 1 if j == axis else v for j, v in enumerate(b))
                    nxt[(nb, kk)] = nxt.get((nb, kk), 0) + c * b[axis]
                if kk:
                    # d/dxi_i R^k = -2k xi_i R^{k+1}
                    nb = tuple(v + 1 if j == axis else v for j, v in enumerate(b))
                    nxt[(nb, kk + 1)] = nxt.get((nb, kk + 1), 0) - 2 * kk * c
            terms = {key: c for key, c in nxt.items() if c}
    return tuple((c, b, kk) for (b, kk), c in terms.items())


@lru_cache(maxsize=None)
def _gammas(alpha: tuple[int, ...]):
    """Multi-indices ``gamma <= alpha`` with the factor ``prod binom(alpha, gamma)``."""
    out = []
    for gamma in iproduct(*(range(a + 1) for a in alpha)):
        f = 1
        for a, g in zip(alpha, gamma):
            f *= comb(a, g)
        out.append((gamma, f, sum(gamma)))
    return tuple(out)


def _coef_type(kind: str):
    if kind == "clifford":
        return CliffordCoefficient
    if kind == "form":
        return FormCoefficient
    raise ValueError(f"unknown coefficient kind {kind!r}")


class SymbolExpansion:
    """Finite sum of symbol terms, exact in every weight ``>= floor``.

    ``floor=None`` marks an exact (untruncated) symbol such as a
    differential operator with polynomial coefficients.
    """

    __slots__ = ("n", "p", "kind", "terms", "floor")

    def __init__(
        self,
        n: int,
        p: int = 1,
        kind: str = "clifford",
        terms: Mapping[tuple, _GradedCoefficient] | None = None,
        floor: int | None = None,
    ):
        self.n = n
        self.p = p
        self.kind = kind
        ctype = _coef_type(kind)
        self.floor = floor
        clean = {}
        for key, coef in (terms or {}).items():
            alpha, beta, k, t = key
            if len(alpha) != n or len(beta) != n:
                raise ValueError(f"multi-index length differs from n={n}: {key}")
            if min(alpha + beta + (k, t), default=0) < 0:
                raise ValueError(f"negative exponent in {key}")
            if type(coef) is not ctype:
                raise TypeError(f"{kind} expansion got a {type(coef).__name__}")
            if coef.n != n or coef.p != p:
                raise ValueError("coefficient shape mismatch")
            if floor is not None and _weight(key) < floor:
                continue
            for c, kk in _tau_normal(key):
                scaled = coef.scale(c)
                prev = clean.get(kk)
                clean[kk] = scaled if prev is None else prev + scaled
        self.terms = {k: v for k, v in clean.items() if v}

    @classmethod
    def _wrap(cls, n, p, kind, terms, floor):
        obj = object.__new__(cls)
        obj.n, obj.p, obj.kind, obj.terms, obj.floor = n, p, kind, terms, floor
        return obj

    # constructors ------------------------------------------------------
    @classmethod
    def from_terms(cls, n, p, kind, terms: Iterable[SymbolTerm], floor=None):
        acc: dict = {}
        for t in terms:
            prev = acc.get(t.key)
            acc[t.key] = t.coef if prev is None else prev + t.coef
        return cls(n, p, kind, acc, floor)

    @classmethod
    def zero(cls, n, p=1, kind="clifford", floor=None):
        return cls._wrap(n, p, kind, {}, floor)

    @classmethod
    def constant(cls, coef: _GradedCoefficient, floor=None):
        kind = "clifford" if isinstance(coef, CliffordCoefficient) else "form"
        z = (0,) * coef.n
        return cls(coef.n, coef.p, kind, {(z, z, 0, 0): coef}, floor)

    @classmethod
    def one(cls, n, p=1, kind="clifford"):
        return cls.constant(_coef_type(kind).one(n, p))

    @classmethod
    def monomial(cls, coef, alpha=None, beta=None, k=0, tau=0, floor=None):
        n = coef.n
        z = (0,) * n
        kind = "clifford" if isinstance(coef, CliffordCoefficient) else "form"
        key = (tuple(alpha) if alpha is not None else z, tuple(beta) if beta is not None else z, k, tau)
        return cls(n, coef.p, kind, {key: coef}, floor)

    @classmethod
    def resolvent(cls, n, p=1, kind="clifford", k=1):
        """``(|xi|^2 + i tau)^{-k}`` times the identity."""
        return cls.monomial(_coef_type(kind).one(n, p), k=k)

    @classmethod
    def heat_top(cls, n, p=1, kind="clifford"):
        """Flat heat symbol ``|xi|^2 + i tau``."""
        one = _coef_type(kind).one(n, p)
        z = (0,) * n
        terms = {(z, tuple(2 if j == i else 0 for j in range(n)), 0, 0): one for i in range(n)}
        terms[(z, z, 0, 1)] = one
        return cls(n, p, kind, terms)

    # grading -----------------------------------------------------------
    def iter_terms(self) -> Iterator[SymbolTerm]:
        for key in sorted(self.terms):
            alpha, beta, k, t = key
            yield SymbolTerm(self.terms[key], alpha, beta, k, t)

    def weights(self) -> list[int]:
        return sorted({_weight(k) for k in self.terms}, reverse=True)

    @property
    def top_weight(self) -> int | None:
        return max((_weight(k) for k in self.terms), default=None)

    @property
    def order(self) -> int | None:
        """Largest parabolic degree present."""
        return max((_degree(k) for k in self.terms), default=None)

    def _bound(self):
        if self.terms:
            return self.top_weight
        if self.floor is None:
            return None
        return self.floor - 1

    def level(self, weight: int) -> "SymbolExpansion":
        """Terms of one weight, as an exact symbol."""
        return self._wrap(self.n, self.p, self.kind, {k: v for k, v in self.terms.items() if _weight(k) == weight}, None)

    def degree_component(self, degree: int) -> "SymbolExpansion":
        """Terms of one parabolic degree (x-dependence kept)."""
        return self._wrap(self.n, self.p, self.kind, {k: v for k, v in self.terms.items() if _degree(k) == degree}, None)

    def components(self) -> dict[int, "SymbolExpansion"]:
        """Terms grouped by parabolic degree, highest first."""
        degs = sorted({_degree(k) for k in self.terms}, reverse=True)
        return {d: self.degree_component(d) for d in degs}

    def at_origin(self) -> "SymbolExpansion":
        """The x-independent terms, i.e. the symbol frozen at ``x = 0``."""
        return self._wrap(
            self.n, self.p, self.kind, {k: v for k, v in self.terms.items() if not any(k[0])}, self.floor
        )

    def x_prefixed(self) -> "SymbolExpansion":
        return self._wrap(self.n, self.p, self.kind, {k: v for k, v in self.terms.items() if any(k[0])}, self.floor)

    def truncate(self, floor: int) -> "SymbolExpansion":
        if self.floor is not None and floor < self.floor:
            raise BudgetError(
                f"cannot lower floor {self.floor} to {floor}", first_dropped=self.floor - 1
            )
        return self._wrap(self.n, self.p, self.kind, {k: v for k, v in self.terms.items() if _weight(k) >= floor}, floor)

    def max_x_degree(self, degree: int) -> int | None:
        """x-degree budget of the parabolic-degree component: everything up to it is exact."""
        if self.floor is None:
            return None
        return degree - self.floor

    # algebra -----------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, SymbolExpansion):
            raise TypeError("expected a SymbolExpansion")
        if (self.n, self.p, self.kind) != (other.n, other.p, other.kind):
            raise ValueError(
                f"incompatible symbols: {(self.n, self.p, self.kind)} vs {(other.n, other.p, other.kind)}"
            )

    def __add__(self, other):
        self._check(other)
        floor = _max_floor(self.floor, other.floor)
        out = dict(self.terms)
        for key, c in other.terms.items():
            prev = out.get(key)
            v = c if prev is None else prev + c
            if v:
                out[key] = v
            else:
                out.pop(key, None)
        if floor is not None:
            out = {k: v for k, v in out.items() if _weight(k) >= floor}
        return self._wrap(self.n, self.p, self.kind, out, floor)

    def __neg__(self):
        return self._wrap(self.n, self.p, self.kind, {k: -v for k, v in self.terms.items()}, self.floor)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "SymbolExpansion":
        factor = as_scalar(factor)
        if not factor:
            return self._wrap(self.n, self.p, self.kind, {}, self.floor)
        return self._wrap(self.n, self.p, self.kind, {k: v.scale(factor) for k, v in self.terms.items()}, self.floor)

    def left_mul(self, coef: _GradedCoefficient) -> "SymbolExpansion":
        """Multiply every coefficient on the left by a constant algebra element."""
        terms = {}
        for k, v in self.terms.items():
            w = coef * v
            if w:
                terms[k] = w
        return self._wrap(self.n, self.p, self.kind, terms, self.floor)

    def times_resolvent(self, power: int = 1) -> "SymbolExpansion":
        """Pointwise product with ``R^power``; equals ``self # R^power``."""
        out = {}
        for (alpha, beta, k, t), v in self.terms.items():
            for c, kk in _tau_normal((alpha, beta, k + power, t)):
                w = v.scale(c)
                prev = out.get(kk)
                out[kk] = w if prev is None else prev + w
        floor = None if self.floor is None else self.floor - 2 * power
        return self._wrap(self.n, self.p, self.kind, {k: v for k, v in out.items() if v}, floor)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolExpansion):
            return NotImplemented
        return (
            (self.n, self.p, self.kind, self.floor) == (other.n, other.p, other.kind, other.floor)
            and self.terms == other.terms
        )

    __hash__ = None

    def to_form(self) -> "SymbolExpansion":
        if self.kind == "form":
            return self
        return self._wrap(self.n, self.p, "form", {k: symbolize(v) for k, v in self.terms.items()}, self.floor)

    def to_clifford(self) -> "SymbolExpansion":
        if self.kind == "clifford":
            return self
        return self._wrap(self.n, self.p, "clifford", {k: quantize(v) for k, v in self.terms.items()}, self.floor)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"SymbolExpansion(n={self.n}, p={self.p}, kind={self.kind!r}, terms={len(self.terms)}, floor={self.floor})"

    def __str__(self):
        return format_symbol(self)


def _max_floor(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


# ---------------------------------------------------------------------------
# term-level operations


def parabolic_scale_check(term: SymbolTerm, lam) -> bool:
    """Check ``q(x, lam xi, lam^2 tau) == lam^deg q(x, xi, tau)`` at exact sample points."""
    lam = Fraction(lam)
    if not lam:
        raise ValueError("lambda must be nonzero")
    n = len(term.beta)
    deg = term.parabolic_degree
    x = [Fraction(j + 2, 3) for j in range(n)]
    samples = [
        ([Fraction(j + 1, 2) for j in range(n)], Fraction(3, 5)),
        ([Fraction((-1) ** j * (2 * j + 1), 7) for j in range(n)], Fraction(-5, 2)),
        ([Fraction(1)] + [Fraction(0)] * (n - 1), Fraction(1)),
    ]
    for xi, tau in samples:
        base = term.scalar_value(x, xi, tau)
        scaled = term.scalar_value(x, [lam * v for v in xi], lam * lam * tau)
        if scaled != base * as_scalar(lam) ** deg:
            return False
    return True


def deriv_xi(s: SymbolExpansion, i: int) -> SymbolExpansion:
    """``d/d xi_i`` term by term (0-based axis)."""
    if not 0 <= i < s.n:
        raise ValueError(f"axis {i} out of range for n={s.n}")
    gamma = _unit(s.n, i)
    out: dict = {}
    for (alpha, beta, k, t), v in s.terms.items():
        for c, nb, nk in _xi_derivative(beta, k, gamma):
            key = (alpha, nb, nk, t)
            w = v.scale(c)
            prev = out.get(key)
            out[key] = w if prev is None else prev + w
    floor = None if s.floor is None else s.floor - 1
    return SymbolExpansion._wrap(s.n, s.p, s.kind, {k: v for k, v in out.items() if v}, floor)


def deriv_x(s: SymbolExpansion, i: int) -> SymbolExpansion:
    """``D_{x_i} = -i d/dx_i`` term by term (0-based axis)."""
    if not 0 <= i < s.n:
        raise ValueError(f"axis {i} out of range for n={s.n}")
    out: dict = {}
    factor = _MINUS_I_POW[1]
    for (alpha, beta, k, t), v in s.terms.items():
        a = alpha[i]
        if not a:
            continue
        na = tuple(x - 1 if j == i else x for j, x in enumerate(alpha))
        out[(na, beta, k, t)] = v.scale(factor * a)
    floor = None if s.floor is None else s.floor + 1
    return SymbolExpansion._wrap(s.n, s.p, s.kind, out, floor)


# ---------------------------------------------------------------------------
# composition


def _compose_terms(n, p, kind, terms1, terms2, min_weight=None, origin_only=False):
    """Raw ``#`` product of two term maps; returns a term map.

    Only output weights ``>= min_weight`` are formed; with ``origin_only``
    only x-free output terms are formed.
    """
    table = _product_table(n, kind == "clifford")
    ctype = _coef_type(kind)
    by_weight: dict[int, list] = {}
    for key, c in terms2.items():
        by_weight.setdefault(_weight(key), []).append((key, c))
    acc: dict = {}
    for key1, c1 in terms1.items():
        alpha1, beta1, k1, t1 = key1
        if origin_only and any(alpha1):
            continue
        e1 = _weight(key1)
        for e2, group in by_weight.items():
            if min_weight is not None and e1 + e2 < min_weight:
                continue
            for key2, c2 in group:
                alpha2, beta2, k2, t2 = key2
                prod = None
                local: dict = {}
                if origin_only:
                    gammas = ((alpha2, 1, sum(alpha2)),)
                else:
                    gammas = _gammas(alpha2)
                for gamma, f, g in gammas:
                    dterms = _xi_derivative(beta1, k1, gamma)
                    if not dterms:
                        continue
                    na = tuple(a1 + a2 - gg for a1, a2, gg in zip(alpha1, alpha2, gamma))
                    for c, nb, nk in dterms:
                        raw = (na, _add_idx(nb, beta2), nk + k2, t1 + t2)
                        for c2n, kk in _tau_normal(raw):
                            scal = c * f * c2n
                            m = g & 3
                            cur = local.get((kk, m))
                            local[(kk, m)] = scal if cur is None else cur + scal
                if not local:
                    continue
                prod = _multiply(c1, c2, table).entries
                if not prod:
                    continue
                for (kk, m), scal in local.items():
                    if not scal:
                        continue
                    s = _MINUS_I_POW[m] * scal
                    slot = acc.get(kk)
                    if slot is None:
                        slot = acc[kk] = {}
                    for ek, ev in prod.items():
                        v = ev * s
                        cur = slot.get(ek)
                        slot[ek] = v if cur is None else cur + v
    out = {}
    for kk, slot in acc.items():
        entries = {ek: ev for ek, ev in slot.items() if ev}
        if entries:
            out[kk] = ctype._wrap(n, p, entries)
    return out


def _natural_floor(q1: SymbolExpansion, q2: SymbolExpansion):
    b1, b2 = q1._bound(), q2._bound()
    cands = []
    if q1.floor is not None and b2 is not None:
        cands.append(q1.floor + b2)
    if q2.floor is not None and b1 is not None:
        cands.append(q2.floor + b1)
    if (q1.floor is not None and b2 is None) or (q2.floor is not None and b1 is None):
        # one factor is the exact zero
        return None
    return max(cands) if cands else None


def compose(q1: SymbolExpansion, q2: SymbolExpansion, floor: int | None = None, origin_only: bool = False) -> SymbolExpansion:
    """Symbol of the composition, ``sum_gamma (1/gamma!) d_xi^gamma q1 D_x^gamma q2``.

    Coefficients multiply as ``q1 * q2`` in the coefficient algebra. The
    result is exact in every weight at or above the larger of the inputs'
    determined range and ``floor``; asking for a lower ``floor`` than the
    inputs support raises :class:`BudgetError`.
    """
    q1._check(q2)
    natural = _natural_floor(q1, q2)
    if floor is not None and natural is not None and floor < natural:
        raise BudgetError(
            f"requested floor {floor} below the determined range (first dropped weight {natural - 1})",
            first_dropped=natural - 1,
        )
    out_floor = _max_floor(natural, floor)
    terms = _compose_terms(q1.n, q1.p, q1.kind, q1.terms, q2.terms, out_floor, origin_only)
    return SymbolExpansion._wrap(q1.n, q1.p, q1.kind, terms, out_floor)


def parametrix(a: SymbolExpansion, depth: int) -> SymbolExpansion:
    """Formal left inverse of a heat symbol ``a = |xi|^2 + i tau + (lower weights)``.

    Returns ``q`` with weights ``-2, ..., -2 - depth`` such that
    ``q # a - 1`` and ``a # q - 1`` vanish in weights ``0, ..., -depth``.
    Built level by level: ``q_{L-2} = -(sum q_{L-e} # a_e) R`` over the
    non-leading weights ``e`` of ``a``.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    top = SymbolExpansion.heat_top(a.n, a.p, a.kind)
    lead = a.level(2)
    if lead != top:
        raise ValueError(
            "parametrix needs a leading part |xi|^2 + i tau times the identity; "
            "the given principal part is non-scalar or not normalized at the base point"
        )
    if a.top_weight is not None and a.top_weight > 2:
        raise ValueError(f"heat symbol has weight {a.top_weight} above 2")
    need = 2 - depth
    if depth > 0 and a.floor is not None and a.floor > need:
        raise BudgetError(
            f"heat symbol known down to weight {a.floor}; depth {depth} needs weight {need}",
            first_dropped=a.floor - 1,
        )
    rest = {k: v for k, v in a.terms.items() if _weight(k) < 2}
    rest_levels: dict[int, dict] = {}
    for k, v in rest.items():
        rest_levels.setdefault(_weight(k), {})[k] = v
    levels: dict[int, dict] = {-2: SymbolExpansion.resolvent(a.n, a.p, a.kind).terms}
    for j in range(1, depth + 1):
        target = -j  # weight of q # a being cancelled
        acc = SymbolExpansion.zero(a.n, a.p, a.kind)
        for e2, terms2 in sorted(rest_levels.items(), reverse=True):
            e1 = target - e2
            if e1 > -2 or e1 not in levels:
                continue
            part = _compose_terms(a.n, a.p, a.kind, levels[e1], terms2)
            acc = acc + SymbolExpansion._wrap(a.n, a.p, a.kind, part, None)
        levels[-2 - j] = (-acc).times_resolvent(1).terms
    merged = {}
    for terms in levels.values():
        merged.update(terms)
    return SymbolExpansion._wrap(a.n, a.p, a.kind, merged, -2 - depth)


# ---------------------------------------------------------------------------
# diagonal inverse Fourier transform


def _double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


@lru_cache(maxsize=None)
def gaussian_moment(beta: tuple[int, ...]) -> Fraction:
    """``(2 pi)^{-n} int xi^beta e^{-|xi|^2} d xi`` divided by ``(4 pi)^{-n/2}``."""
    val = Fraction(1)
    for b in beta:
        if b & 1:
            return Fraction(0)
        val *= Fraction(_double_factorial(b - 1), 2 ** (b // 2))
    return val


@dataclass(frozen=True)
class DiagValue:
    """``coefficient x (4 pi)^{-n/2}``, the normalization kept as a token."""

    coefficient: _GradedCoefficient
    n: int

    def __add__(self, other: "DiagValue") -> "DiagValue":
        return DiagValue(self.coefficient + other.coefficient, self.n)

    def is_zero(self) -> bool:
        return not self.coefficient

    @property
    def normalization(self) -> str:
        return f"(4π)^{{-{self.n}/2}}"

    def __str__(self):
        c = str(self.coefficient)
        if " " in c:
            c = f"({c})"
        return f"{c} × {self.normalization}"

    def __float__(self):
        raise TypeError("DiagValue is exact; convert coefficient entries explicitly")


def _diag_scalar(key, sqrt_t: Fraction) -> Fraction:
    alpha, beta, k, t = key
    if any(alpha) or t or k == 0:
        return Fraction(0)
    mom = gaussian_moment(beta)
    if not mom:
        return mom
    # tau-inversion: t^{k-1} e^{-t|xi|^2}/(k-1)!, then xi-moment at y = 0
    power = 2 * k - 2 - len(beta) - sum(beta)
    return mom / factorial(k - 1) * sqrt_t**power


def diag_value_at(s: SymbolExpansion, degree: int, sqrt_t=1) -> DiagValue:
    """``q_degree^vee(0, 0, t)`` for ``t = sqrt_t^2``, as a multiple of ``(4 pi)^{-n/2}``."""
    sqrt_t = Fraction(sqrt_t)
    if sqrt_t <= 0:
        raise ValueError("t must be positive")
    if s.n % 2 == 0:
        raise ValueError(f"even dimension n={s.n} is not supported")
    if s.floor is not None and degree < s.floor:
        raise BudgetError(f"degree {degree} lies below the symbol floor {s.floor}", first_dropped=s.floor - 1)
    ctype = _coef_type(s.kind)
    total = ctype.zero(s.n, s.p)
    for key, c in s.terms.items():
        if _degree(key) != degree:
            continue
        # polynomial terms (k = 0) have kernels supported at t = 0
        f = _diag_scalar(key, sqrt_t)
        if f:
            total = total + c.scale(f)
    return DiagValue(total, s.n)


def inverse_fourier_diag(s: SymbolExpansion, degree: int) -> DiagValue:
    """Value at ``x = 0, y = 0, t = 1`` of the inverse Fourier transform of the degree component."""
    return diag_value_at(s, degree, 1)


@dataclass(frozen=True)
class DiagKernelExpansion:
    """Ordered ``(t exponent, value)`` pairs of a diagonal kernel expansion."""

    n: int
    entries: tuple[tuple[Fraction, DiagValue], ...]
    degrees: tuple[int, ...] = ()

    def __post_init__(self):
        exps = [e for e, _ in self.entries]
        if any(b <= a for a, b in zip(exps, exps[1:])):
            raise ValueError("exponents must be strictly increasing")
        if any((2 * e).denominator != 1 for e in exps):
            raise ValueError("exponents must be half-integers")

    def coefficient(self, exponent) -> DiagValue:
        exponent = Fraction(exponent)
        for e, v in self.entries:
            if e == exponent:
                return v
        raise KeyError(exponent)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def diag_kernel_expansion(q: SymbolExpansion, l_max: int | None = None, order: int | None = None) -> DiagKernelExpansion:
    """Small-time expansion of ``K_Q(0, 0, t)``.

    The degree ``d`` component contributes ``t^{-(d+n+2)/2}`` times its
    value at ``t = 1``; odd degrees are computed like the others and come
    out zero. ``order`` defaults to the largest degree present; with
    ``l_max`` the expansion runs down to degree ``2[order/2] - 2 l_max``,
    otherwise down to the floor.
    """
    m = q.order if order is None else order
    if m is None:
        m = q.floor if q.floor is not None else 0
    if l_max is not None:
        lowest = 2 * (m // 2) - 2 * l_max
    elif q.floor is not None:
        lowest = q.floor
    else:
        lowest = min((_degree(k) for k in q.terms), default=m)
    if q.floor is not None and lowest < q.floor:
        raise BudgetError(
            f"l_max={l_max} needs degree {lowest}, symbol is exact only down to {q.floor}",
            first_dropped=q.floor - 1,
        )
    origin = q.at_origin()
    entries = []
    degrees = []
    for d in range(m, lowest - 1, -1):
        entries.append((Fraction(-(d + q.n + 2), 2), inverse_fourier_diag(origin, d)))
        degrees.append(d)
    return DiagKernelExpansion(q.n, tuple(entries), tuple(degrees))


# ---------------------------------------------------------------------------
# formatting


def _mono_label(key) -> str:
    alpha, beta, k, t = key
    parts = []
    for i, a in enumerate(alpha):
        if a:
            parts.append(f"x{i + 1}" + (f"^{a}" if a > 1 else ""))
    for i, b in enumerate(beta):
        if b:
            parts.append(f"ξ{i + 1}" + (f"^{b}" if b > 1 else ""))
    if t:
        parts.append("iτ" + (f"^{t}" if t > 1 else ""))
    if k:
        parts.append("R" + (f"^{k}" if k > 1 else ""))
    return "*".join(parts)


def format_symbol(s: SymbolExpansion) -> str:
    """Deterministic text form; ``R`` is the flat resolvent ``(|ξ|²+iτ)^{-1}``."""
    if not s.terms:
        return "0"
    out = []
    for key in sorted(s.terms, key=lambda k: (-_weight(k), k)):
        c = str(s.terms[key])
        label = _mono_label(key)
        if not label:
            out.append(f"({c})")
        else:
            out.append(f"({c})*{label}")
    return " + ".join(out)
