"""Heat coefficients, the odd-dimensional trace cancellation, and local eta poles.

For an operator ``P`` of order ``m`` and a heat symbol ``Delta + d_t`` the
diagonal of ``P exp(-t Delta)`` has the expansion
``t^{-n/2 - [m/2]} sum_l t^l b_l`` with ``b_l`` the diagonal inverse
Fourier value of the degree ``2[m/2] - 2 - 2l`` component of
``P # (Delta + d_t)^{-1}``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import CliffordCoefficient, symbolize, spinor_trace, trace_constants
from .geometry import GeometryJet, OperatorSpec, build_dirac, dirac_floor_for
from .getzler import (
    TopFormReport,
    getzler_decompose,
    leading_top_form,
    model_operator,
    model_parametrix,
)
from .scalar import ZERO, GaussianRational
from .symbols import (
    BudgetError,
    DiagKernelExpansion,
    DiagValue,
    SymbolExpansion,
    compose,
    diag_value_at,
    parametrix,
)

__all__ = [
    "MAX_LMAX",
    "worker_count",
    "HeatPlan",
    "heat_plan",
    "heat_coefficients",
    "jet_heat_coefficients",
    "trace_expansion",
    "sigma_route_trace",
    "BFReport",
    "bismut_freed_check",
    "EtaSingularity",
    "EtaReport",
    "eta_singularities",
]

# documented ceiling on l_max for desk-scale runs
MAX_LMAX = 2


def worker_count() -> int:
    """Thread cap from ``HEATETA_THREADS`` (default 1)."""
    raw = os.environ.get("HEATETA_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    workers = min(worker_count(), len(items)) or 1
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map keeps input order, so results are independent of scheduling
        return list(pool.map(fn, items))


def _half_floor(m: int) -> int:
    return m // 2


@dataclass(frozen=True)
class HeatPlan:
    """Weight floors needed for ``b_0 .. b_{l_max}`` of ``P`` with top weight ``m``."""

    m: int
    l_max: int
    q_floor: int  # floor of P # Q
    depth: int  # parametrix depth
    heat_floor: int  # floor needed on Delta + d_t
    dirac_floor: int | None  # floor of D when it builds the heat operator


def heat_plan(m: int, l_max: int) -> HeatPlan:
    if l_max < 0:
        raise ValueError("l_max must be nonnegative")
    q_floor = 2 * _half_floor(m - 2) - 2 * l_max
    # P # Q with P exact: the floor comes from Q, shifted by P's top weight
    q_needed = q_floor - m
    depth = -2 - q_needed
    heat_floor = 2 - depth
    return HeatPlan(m, l_max, q_floor, depth, heat_floor, heat_floor - 1)


def heat_coefficients(
    P: SymbolExpansion | None, heat, l_max: int, depth: int | None = None
) -> DiagKernelExpansion:
    """``b_0 .. b_{l_max}`` of ``P exp(-t Delta)`` at the base point.

    ``heat`` is the symbol of ``Delta + d_t`` or an :class:`OperatorSpec`
    (then ``Delta = D^2``); ``P=None`` means the identity. Entries are
    indexed by the exponent ``l - n/2 - [m/2]``. ``depth`` overrides the
    parametrix depth; a value below the required one raises
    :class:`BudgetError`.
    """
    if isinstance(heat, OperatorSpec):
        heat = heat.heat_operator
    n = heat.n
    if P is None:
        P = SymbolExpansion.one(n, heat.p, heat.kind)
    m = P.top_weight if P.top_weight is not None else 0
    plan = heat_plan(m, l_max)
    if P.floor is not None and P.floor > plan.q_floor + 2:
        raise BudgetError(
            f"operator known down to weight {P.floor}; b_{l_max} needs {plan.q_floor + 2}",
            first_dropped=P.floor - 1,
        )
    if depth is not None and depth < plan.depth:
        raise BudgetError(
            f"parametrix depth {depth} is too shallow for l_max={l_max} (needs {plan.depth})",
            first_dropped=-3 - depth,
        )
    Q = parametrix(heat, plan.depth if depth is None else depth)
    q = compose(P, Q, floor=plan.q_floor)
    origin = q.at_origin()
    degrees = [2 * _half_floor(m - 2) - 2 * l for l in range(l_max + 1)]
    values = _pmap(lambda d: diag_value_at(origin, d), degrees)
    entries = tuple(
        (Fraction(-(d + n + 2), 2), v) for d, v in zip(degrees, values)
    )
    return DiagKernelExpansion(n, entries, tuple(degrees))


def jet_heat_coefficients(
    jet: GeometryJet,
    l_max: int,
    op: str = "dirac",
    strict: bool = False,
    depth: int | None = None,
    traced: bool = False,
):
    """Heat coefficients of ``D exp(-t D^2)`` (``op="dirac"``) or ``exp(-t D^2)``.

    Returns ``(expansion, operator_spec)``. Jet warnings cover the untraced
    coefficients unless ``traced`` is set; in odd dimension the traces for
    ``op="dirac"`` do not see the extra derivative order.
    """
    floor = dirac_floor_for(l_max, op)
    if depth is not None:
        floor = min(floor, 1 - depth)
    extra = 1 if op == "dirac" and not traced else 0
    spec = build_dirac(jet, floor, strict=strict, l_max=l_max, extra_order=extra)
    P = spec.dirac if op == "dirac" else None
    return heat_coefficients(P, spec, l_max, depth=depth), spec


def trace_expansion(d: DiagKernelExpansion) -> list[tuple[Fraction, GaussianRational]]:
    """Spinor-and-bundle traces of every coefficient (still times ``(4 pi)^{-n/2}``)."""
    out = []
    for e, v in d:
        c = v.coefficient
        if not isinstance(c, CliffordCoefficient):
            raise TypeError("traces need Clifford coefficients")
        out.append((e, spinor_trace(c)))
    return out


def sigma_route_trace(u: CliffordCoefficient) -> GaussianRational:
    """Trace computed from the symbol: scalar and top-form parts of ``symbolize(u)``."""
    n = u.n
    scalar_const, top_const = trace_constants(n)
    f = symbolize(u)
    total = ZERO
    for (blade, r, c), v in f.entries.items():
        if r != c:
            continue
        if blade == 0:
            total = total + scalar_const * v
        elif blade == (1 << n) - 1:
            total = total + top_const * v
    return total


# ---------------------------------------------------------------------------
# the trace cancellation


@dataclass
class BFTrace:
    l: int
    exponent: Fraction
    value: DiagValue
    trace: GaussianRational
    sigma_trace: GaussianRational

    @property
    def passed(self) -> bool:
        return not self.trace and self.trace == self.sigma_trace


@dataclass
class BFReport:
    n: int
    p: int
    l_max: int
    traces: list
    parametrix_order: int | None
    parametrix_model_matches: bool
    dq_order: int | None
    top_form: TopFormReport
    remainder_x_free_order: int | None  # informational; can reach -1 when the curvature varies
    remainder_top_form_zero: bool
    x_prefixed_terms: int
    first_nonzero_exponent: Fraction
    coverage_complete: bool
    warnings: list = field(default_factory=list)

    @property
    def violations(self) -> list[str]:
        out = []
        for t in self.traces:
            if t.trace:
                out.append(f"tr b_{t.l} (t^{t.exponent}) = {t.trace}, expected 0")
            elif t.trace != t.sigma_trace:
                out.append(f"tr b_{t.l}: trace identity gives {t.trace}, symbol route gives {t.sigma_trace}")
        return out

    @property
    def evidence_ok(self) -> bool:
        return (
            self.parametrix_order == -2
            and self.parametrix_model_matches
            and (self.dq_order is None or self.dq_order <= 0)
            and self.top_form.parity_zero
            and self.top_form.consistent
            and self.remainder_top_form_zero
        )

    @property
    def passed(self) -> bool:
        return not self.violations and self.evidence_ok


def bismut_freed_check(
    jet: GeometryJet, l_max: int = 1, strict: bool = False, depth: int | None = None
) -> BFReport:
    """Check ``tr b_l = 0`` for ``D exp(-t D^2)`` at every ``l <= l_max`` with exponent below 1/2.

    Also records the Getzler bookkeeping behind the cancellation: the
    parametrix has order -2 with the harmonic-oscillator model, ``D # Q``
    has order <= 0, its even-order model has no top-form diagonal value,
    and the x-free top-form terms one Getzler degree lower (which feed
    ``t^{-1/2}``) have zero diagonal value. Those terms need not be absent:
    with varying twisting curvature they appear and cancel in the moments.
    """
    n, p = jet.n, jet.p
    if n % 2 == 0:
        raise ValueError("the trace cancellation is an odd-dimensional statement")
    if not 0 <= l_max <= MAX_LMAX:
        raise ValueError(f"l_max must lie in 0..{MAX_LMAX}")
    checked = [l for l in range(l_max + 1) if Fraction(2 * l - n, 2) < Fraction(1, 2)]
    plan = heat_plan(1, l_max)
    # the Getzler evidence needs the parametrix through weight -2 - n
    if depth is not None and depth < plan.depth:
        raise BudgetError(
            f"parametrix depth {depth} is too shallow for l_max={l_max} (needs {plan.depth})",
            first_dropped=-3 - depth,
        )
    depth = max(plan.depth, n, depth or 0)
    d, spec = jet_heat_coefficients(jet, l_max, "dirac", strict=strict, depth=depth, traced=True)
    Q = parametrix(spec.heat_operator, depth)
    gQ = getzler_decompose(Q)
    model_ok = gQ.is_complete(-2) and model_operator(gQ).terms == model_parametrix(jet).terms
    DQ = compose(spec.dirac, Q, floor=min(plan.q_floor, -1 - n))
    gDQ = getzler_decompose(DQ)
    top = leading_top_form(DQ, max(gDQ.order if gDQ.order is not None else 0, 0))
    # x-free remainder below the model
    xfree = getzler_decompose(DQ.at_origin())
    below = [g for g in xfree.parts if g < (gDQ.order if gDQ.order is not None else 0) and xfree.parts[g].terms]
    # among the fully determined buckets, the largest with x-free top-form terms
    rem_order = None
    for g in sorted(below, reverse=True):
        part = xfree.parts[g]
        if any(c.part(n) for c in part.terms.values()):
            rem_order = g
            break
    traces = []
    for l, (e, v) in enumerate(d):
        if l not in checked:
            continue
        traces.append(BFTrace(l, e, v, spinor_trace(v.coefficient), sigma_route_trace(v.coefficient)))
    return BFReport(
        n=n,
        p=p,
        l_max=l_max,
        traces=traces,
        parametrix_order=gQ.order,
        parametrix_model_matches=model_ok,
        dq_order=gDQ.order,
        top_form=top,
        remainder_x_free_order=rem_order,
        remainder_top_form_zero=bool(top.next_degree_zero),
        x_prefixed_terms=len(DQ.x_prefixed()),
        first_nonzero_exponent=Fraction(1, 2),
        coverage_complete=max(checked, default=-1) >= (n - 1) // 2,
        warnings=list(spec.warnings),
    )


# ---------------------------------------------------------------------------
# local eta function


@dataclass(frozen=True)
class EtaSingularity:
    """Simple pole of the local eta density; ``residue`` multiplies ``(4 pi)^{-n/2} / Gamma((s+1)/2)``."""

    pole: Fraction
    residue: GaussianRational
    n: int
    exponent: Fraction

    def __str__(self):
        return f"s = {self.pole}: residue {self.residue} × (4π)^{{-{self.n}/2}} / Γ((s+1)/2)"


@dataclass
class EtaReport:
    singularities: list
    cutoff_exponent: Fraction | None
    holomorphic_beyond: Fraction | None

    def __iter__(self):
        return iter(self.singularities)

    def __len__(self):
        return len(self.singularities)


def eta_singularities(d: DiagKernelExpansion) -> EtaReport:
    """Poles of ``Gamma((s+1)/2)^{-1} int_0^1 t^{(s-1)/2} tr h_t dt`` from the computed terms.

    A term ``c t^e`` gives a pole at ``s = -2e - 1`` with residue ``2c``.
    Nothing is claimed beyond the last computed exponent: the density is
    holomorphic for ``Re s`` above ``holomorphic_beyond``.
    """
    traces = trace_expansion(d)
    out = []
    for e, c in traces:
        if c:
            out.append(EtaSingularity(Fraction(-2 * e - 1), c * 2, d.n, e))
    out.sort(key=lambda s: -s.pole)
    cutoff = max((e for e, _ in traces), default=None)
    if cutoff is None:
        bound = None
    elif out:
        bound = out[0].pole
    else:
        bound = Fraction(-2 * (cutoff + 1) - 1)
    return EtaReport(out, cutoff, bound)
