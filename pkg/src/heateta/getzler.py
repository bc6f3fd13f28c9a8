"""Getzler filtration of symbols with exterior-algebra coefficients.

Degrees: ``xi_j`` and ``dx^j`` count 1, ``i tau`` counts 2, ``x^j`` counts
-1 and ``(|xi|^2 + i tau)^{-1}`` counts -2. A symbol exact in weights
``>= floor`` determines its Getzler bucket ``G`` completely once
``G - n >= floor``, since form degrees never exceed ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import FormCoefficient
from .geometry import GeometryJet
from .scalar import GaussianRational, as_scalar
from .symbols import (
    BudgetError,
    DiagValue,
    SymbolExpansion,
    SymbolTerm,
    compose,
    diag_value_at,
)

__all__ = [
    "getzler_degree",
    "GetzlerGraded",
    "getzler_decompose",
    "model_operator",
    "TopFormReport",
    "leading_top_form",
    "GetzlerProduct",
    "compose_getzler",
    "curvature_two_forms",
    "model_connection",
    "model_dirac",
    "model_heat_operator",
    "model_parametrix",
]


def _key_weight(key) -> int:
    alpha, beta, k, t = key
    return sum(beta) + 2 * t - 2 * k - sum(alpha)


def getzler_degree(term: SymbolTerm) -> int:
    """Getzler degree of a single term with a homogeneous form coefficient.

    >>> from heateta.algebra import FormCoefficient
    >>> c = FormCoefficient.basis(3, 1, [1])
    >>> getzler_degree(SymbolTerm(c, (0, 0, 0), (1, 0, 0), 0, 0))
    2
    """
    coef = term.coef
    if not isinstance(coef, FormCoefficient):
        raise TypeError("Getzler degrees are defined on exterior coefficients; symbolize first")
    degs = coef.degrees()
    if len(degs) != 1:
        raise ValueError(f"coefficient is not homogeneous in form degree: {sorted(degs)}")
    return term.weight + degs.pop()


@dataclass
class GetzlerGraded:
    """Buckets of a form-coefficient symbol by Getzler degree.

    ``floor`` is the weight floor of the source symbol (``None`` if exact).
    """

    n: int
    p: int
    parts: dict
    floor: int | None = None

    @property
    def order(self) -> int | None:
        return max(self.parts, default=None)

    def is_complete(self, degree: int) -> bool:
        return self.floor is None or degree - self.n >= self.floor

    @property
    def complete_floor(self) -> int | None:
        """Lowest fully determined Getzler degree."""
        return None if self.floor is None else self.floor + self.n

    def part(self, degree: int) -> SymbolExpansion:
        if not self.is_complete(degree):
            raise BudgetError(
                f"Getzler degree {degree} needs weights down to {degree - self.n}; symbol floor is {self.floor}",
                first_dropped=self.floor - 1,
            )
        return self.parts.get(degree, SymbolExpansion.zero(self.n, self.p, "form"))

    def total(self) -> SymbolExpansion:
        out = SymbolExpansion.zero(self.n, self.p, "form")
        for part in self.parts.values():
            out = out + part
        return SymbolExpansion._wrap(self.n, self.p, "form", out.terms, self.floor)

    def degrees(self) -> list[int]:
        return sorted(self.parts, reverse=True)


def getzler_decompose(q: SymbolExpansion) -> GetzlerGraded:
    """Split ``q`` (Clifford coefficients are symbolized first) into Getzler buckets."""
    f = q.to_form()
    buckets: dict = {}
    for key, coef in f.terms.items():
        w = _key_weight(key)
        for d in coef.degrees():
            buckets.setdefault(w + d, {})[key] = coef.part(d)
    parts = {
        g: SymbolExpansion._wrap(f.n, f.p, "form", terms, None) for g, terms in buckets.items()
    }
    return GetzlerGraded(f.n, f.p, parts, f.floor)


def model_operator(g: GetzlerGraded) -> SymbolExpansion:
    """Top Getzler-homogeneous part, an exact form-coefficient symbol."""
    if not g.parts:
        raise ValueError("the zero symbol has no model operator")
    return g.part(g.order)


# ---------------------------------------------------------------------------
# leading top-form kernel value


@dataclass
class TopFormReport:
    """Top-form diagonal data of a symbol of Getzler order ``order``.

    ``model_value`` is ``K_{Q_(m)}(0, 0, 1)^{(n)}`` as a p x p matrix times
    ``(4 pi)^{-n/2}``; ``full_value`` is the same top-form value read off the
    whole symbol, which must agree. ``remainder_exponent`` bounds the next
    power of ``t``.
    """

    order: int
    n: int
    model_value: DiagValue
    full_value: DiagValue
    parity_zero: bool
    below_order_zero: bool
    next_degree_zero: bool | None
    remainder_exponent: Fraction
    leading_exponent: Fraction

    @property
    def consistent(self) -> bool:
        ok = self.model_value.coefficient == self.full_value.coefficient and self.below_order_zero
        if self.order % 2 == 0:
            ok = ok and self.parity_zero
        if self.next_degree_zero is not None and self.order % 2:
            ok = ok and self.next_degree_zero
        return ok


def _top_form_only(s: SymbolExpansion) -> SymbolExpansion:
    n = s.n
    terms = {}
    for key, coef in s.terms.items():
        top = coef.part(n)
        if top:
            terms[key] = top
    return SymbolExpansion._wrap(n, s.p, "form", terms, s.floor)


def leading_top_form(q: SymbolExpansion, m: int | None = None) -> TopFormReport:
    """Top-form part of the model kernel at the diagonal, with the parity checks.

    For odd ``m`` the value is generally nonzero; for even ``m`` it
    vanishes because it is the inverse Fourier transform of a component of
    odd parabolic degree ``m - n``.
    """
    n = q.n
    if n % 2 == 0:
        raise ValueError("top-form parity requires odd n")
    g = getzler_decompose(q)
    if m is None:
        m = g.order
        if m is None:
            raise ValueError("zero symbol")
    elif g.order is not None and g.order > m:
        raise ValueError(f"symbol has Getzler order {g.order} > {m}")
    f = q.to_form()
    if f.floor is not None and m - n - 1 < f.floor:
        raise BudgetError(
            f"top-form checks need weights down to {m - n - 1}; symbol floor is {f.floor}",
            first_dropped=f.floor - 1,
        )
    model = _top_form_only(g.part(m)) if m in g.parts else SymbolExpansion.zero(n, q.p, "form")
    model_value = diag_value_at(model.at_origin(), m - n)
    top = _top_form_only(f).at_origin()
    full_value = diag_value_at(top, m - n)
    # x-free top-form terms of weight j need Getzler degree j + n <= m
    below = all(_key_weight(k) + n <= m for k in top.terms)
    next_zero = diag_value_at(top, m - n - 1).is_zero()
    return TopFormReport(
        order=m,
        n=n,
        model_value=model_value,
        full_value=full_value,
        parity_zero=model_value.is_zero(),
        below_order_zero=below,
        next_degree_zero=next_zero,
        remainder_exponent=Fraction(-m, 2),
        leading_exponent=Fraction(-(m + 2), 2),
    )


# ---------------------------------------------------------------------------
# products


@dataclass
class GetzlerProduct:
    graded: GetzlerGraded
    order_bound: int
    model_product: SymbolExpansion

    @property
    def top_matches(self) -> bool:
        top = self.graded.parts.get(self.order_bound, SymbolExpansion.zero(self.graded.n, self.graded.p, "form"))
        return top.terms == self.model_product.terms

    @property
    def order_ok(self) -> bool:
        return self.graded.order is None or self.graded.order <= self.order_bound


def _as_clifford(g: GetzlerGraded) -> SymbolExpansion:
    return g.total().to_clifford()


def compose_getzler(g1: GetzlerGraded, g2: GetzlerGraded) -> GetzlerProduct:
    """Compose in the Clifford calculus and compare with the exterior product of the models."""
    q = compose(_as_clifford(g1), _as_clifford(g2))
    graded = getzler_decompose(q)
    m1, m2 = g1.order, g2.order
    if m1 is None or m2 is None:
        z = SymbolExpansion.zero(g1.n, g1.p, "form")
        return GetzlerProduct(graded, 0, z)
    bound = m1 + m2
    if not graded.is_complete(bound):
        raise BudgetError(
            f"product determined only down to weight {graded.floor}; Getzler degree {bound} needs {bound - g1.n}",
            first_dropped=graded.floor - 1,
        )
    model = compose(model_operator(g1), model_operator(g2))
    return GetzlerProduct(graded, bound, model)


# ---------------------------------------------------------------------------
# model operators built directly from curvature at the base point


def curvature_two_forms(jet: GeometryJet) -> list[list[FormCoefficient]]:
    """``R_ij = sum_{k<l} R_ijkl dx^k ^ dx^l`` (scalar identity in the bundle factor)."""
    n, p = jet.n, jet.p
    out = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            acc = FormCoefficient.zero(n, p)
            for k in range(1, n + 1):
                for l in range(k + 1, n + 1):
                    v = jet.R(i, j, k, l)
                    if v:
                        acc = acc + FormCoefficient.basis(n, p, [k, l], value=v)
            row.append(acc)
        out.append(row)
    return out


def _twisting_form(jet: GeometryJet) -> FormCoefficient:
    n, p = jet.n, jet.p
    acc = FormCoefficient.zero(n, p)
    for k in range(1, n + 1):
        for l in range(k + 1, n + 1):
            m = jet.F(k, l)
            if any(v for row in m for v in row):
                acc = acc + FormCoefficient.basis(n, p, [k, l], matrix=m)
    return acc


def _unit(n, i, power=1):
    return tuple(power if j == i else 0 for j in range(n))


def _b_fields(jet: GeometryJet) -> list[SymbolExpansion]:
    """``B_i = -1/4 R_ij x^j`` as exact form symbols."""
    n, p = jet.n, jet.p
    Rf = curvature_two_forms(jet)
    quarter = as_scalar(Fraction(-1, 4))
    out = []
    for i in range(n):
        terms = {}
        for j in range(n):
            c = Rf[i][j]
            if c:
                terms[(_unit(n, j), (0,) * n, 0, 0)] = c.scale(quarter)
        out.append(SymbolExpansion(n, p, "form", terms))
    return out


def model_connection(jet: GeometryJet, i: int) -> SymbolExpansion:
    """Symbol of ``d_i - 1/4 R_ij x^j`` (``i`` 0-based)."""
    n, p = jet.n, jet.p
    one = FormCoefficient.one(n, p)
    xi = SymbolExpansion(n, p, "form", {((0,) * n, _unit(n, i), 0, 0): one.scale(GaussianRational(0, 1))})
    return xi + _b_fields(jet)[i]


def model_dirac(jet: GeometryJet) -> SymbolExpansion:
    """Symbol of ``sum_i dx^i ^ (d_i - 1/4 R_ij x^j)``."""
    n, p = jet.n, jet.p
    out = SymbolExpansion.zero(n, p, "form")
    for i in range(n):
        out = out + model_connection(jet, i).left_mul(FormCoefficient.basis(n, p, [i + 1]))
    return out


def model_heat_operator(jet: GeometryJet, with_tau: bool = True) -> SymbolExpansion:
    """Symbol of ``H_R + F(0)`` (plus ``i tau`` when ``with_tau``).

    ``H_R = -sum_i (d_i + B_i)^2`` has symbol
    ``|xi|^2 - 2 sum_i B_i i xi_i - sum_i B_i ^ B_i``; ``d_i B_i = 0`` by the
    antisymmetry of ``R_ij``.
    """
    n, p = jet.n, jet.p
    one = FormCoefficient.one(n, p)
    z = (0,) * n
    terms = {(z, _unit(n, i, 2), 0, 0): one for i in range(n)}
    if with_tau:
        terms[(z, z, 0, 1)] = one
    out = SymbolExpansion(n, p, "form", terms)
    minus_2i = GaussianRational(0, -2)
    for i, b in enumerate(_b_fields(jet)):
        for (alpha, _, _, _), c in b.terms.items():
            out = out + SymbolExpansion(n, p, "form", {(alpha, _unit(n, i), 0, 0): c.scale(minus_2i)})
        out = out - compose(b, b)
    tw = _twisting_form(jet)
    if tw:
        out = out + SymbolExpansion.constant(tw)
    return out


def model_parametrix(jet: GeometryJet) -> SymbolExpansion:
    """Exact inverse of the model heat symbol, ``sum_k (-R # M')^k # R``.

    ``M'`` is the part of ``H_R + F(0)`` beyond ``|xi|^2``; it carries forms of
    degree >= 2, so the series stops once the form degree exceeds ``n``.
    """
    n, p = jet.n, jet.p
    heat = model_heat_operator(jet)
    rest = heat - SymbolExpansion.heat_top(n, p, "form")
    R = SymbolExpansion.resolvent(n, p, "form")
    step = compose(R, -rest)
    total = R
    power = R
    for _ in range(n // 2 + 1):
        power = compose(step, power)
        if power.is_zero():
            break
        total = total + power
    return total
