"""Quick invariant suites behind ``heateta selftest``."""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .algebra import (
    CliffordCoefficient,
    quantize,
    spinor_trace,
    symbolize,
    trace_constants,
)
from .geometry import build_dirac, flat_jet, lichnerowicz_rhs, random_jet, single_plane_jet
from .getzler import getzler_decompose, leading_top_form, model_operator, model_parametrix
from .heat_eta import bismut_freed_check, eta_singularities, jet_heat_coefficients, sigma_route_trace
from .oracle import circle_heat_fit, gaussian_moment_numeric
from .scalar import GaussianRational
from .symbols import (
    SymbolExpansion,
    compose,
    gaussian_moment,
    inverse_fourier_diag,
    parametrix,
)

__all__ = ["SUITES", "run_selftest", "random_clifford"]


def random_clifford(n: int, p: int, rng: random.Random, terms: int = 4) -> CliffordCoefficient:
    out = CliffordCoefficient.zero(n, p)
    for _ in range(terms):
        blade = [i + 1 for i in range(n) if rng.random() < 0.5]
        m = [
            [GaussianRational(rng.randint(-3, 3), rng.randint(-2, 2)) for _ in range(p)] for _ in range(p)
        ]
        out = out + CliffordCoefficient.basis(n, p, blade, matrix=m)
    return out


def _algebra():
    rng = random.Random(1)
    ok = True
    for n in (3, 5):
        for _ in range(10):
            a, b = random_clifford(n, 2, rng), random_clifford(n, 2, rng)
            ok &= quantize(symbolize(a)) == a
            ok &= spinor_trace(a * b) == spinor_trace(b * a)
            ok &= sigma_route_trace(a) == spinor_trace(a)
    return ok, "quantization inverse pair, trace cyclicity, symbol-route trace"


def _trace_table():
    ok = True
    for n in (3, 5):
        scalar, top = trace_constants(n)
        h = n // 2
        ok &= scalar == 2**h and top == GaussianRational(0, -1) ** (h + 1) * 2**h
        for k in range(n + 1):
            word = CliffordCoefficient.basis(n, 1, list(range(1, k + 1)))
            expected = scalar if k == 0 else (top if k == n else 0)
            ok &= spinor_trace(word) == expected
    return ok, "spinor trace table for n=3 and n=5"


def _lichnerowicz():
    ok = True
    for seed in range(2):
        jet = random_jet(3, 2, seed)
        spec = build_dirac(jet, -1)
        ok &= (spec.dirac_squared - lichnerowicz_rhs(jet, 0)).is_zero()
    return ok, "D#D equals the Lichnerowicz symbol on random jets"


def _parametrix():
    ok = True
    for jet in (single_plane_jet(3, 1), flat_jet(3, 2, {(1, 2): [["i", "1"], ["-1", "0"]]})):
        spec = build_dirac(jet, -3)
        Q = parametrix(spec.heat_operator, 4)
        res = compose(spec.heat_operator, Q) - SymbolExpansion.one(3, jet.p)
        ok &= res.is_zero() and res.floor == -4
        g = getzler_decompose(Q)
        ok &= g.order == -2 and model_operator(g).terms == model_parametrix(jet).terms
    return ok, "parametrix residual and its Getzler model"


def _parity():
    rng = random.Random(7)
    ok = True
    one = CliffordCoefficient.one(3, 1)
    for _ in range(20):
        beta = tuple(rng.randint(0, 3) for _ in range(3))
        k = rng.randint(1, 4)
        if (sum(beta) - 2 * k) % 2 == 0:
            beta = (beta[0] + 1,) + beta[1:]
        s = SymbolExpansion.monomial(one, beta=beta, k=k)
        ok &= inverse_fourier_diag(s, sum(beta) - 2 * k).is_zero()
    spec = build_dirac(single_plane_jet(3, 1), -3)
    ok &= leading_top_form(spec.dirac_squared).parity_zero
    return ok, "odd-degree diagonal values and even-order top-form values vanish"


def _oracle():
    ok = True
    for beta in ((0,), (2,), (2, 2), (4, 0, 2)):
        exact = float(gaussian_moment(beta)) * (4 * math.pi) ** (-len(beta) / 2)
        ok &= abs(exact - gaussian_moment_numeric(beta)) <= 1e-10
    fit = circle_heat_fit(Fraction(5, 2))
    b0 = (4 * math.pi) ** -0.5
    ok &= abs(fit.coefficients[0] - b0) <= 1e-8 and abs(fit.coefficients[1] + 2.5 * b0) <= 1e-4
    return ok, "Gaussian moments and circle heat-trace fit"


def _bismut_freed():
    ok = True
    cases = [
        flat_jet(3, 1),
        single_plane_jet(3, 1),
        flat_jet(3, 2, {(1, 2): [["i", "1"], ["-1", "0"]]}),
    ]
    for jet in cases:
        ok &= bismut_freed_check(jet, 1).passed
    d, _ = jet_heat_coefficients(flat_jet(3, 1), 1)
    ok &= len(eta_singularities(d)) == 0
    return ok, "trace cancellation through t^{-1/2} and empty eta pole list"


SUITES = {
    "algebra": _algebra,
    "trace-table": _trace_table,
    "lichnerowicz": _lichnerowicz,
    "parametrix": _parametrix,
    "parity": _parity,
    "oracle": _oracle,
    "bismut-freed": _bismut_freed,
}


def run_selftest():
    """``[(name, passed, description)]`` in a fixed order."""
    out = []
    for name, fn in SUITES.items():
        try:
            passed, desc = fn()
        except Exception as exc:  # a crash is a failed suite
            passed, desc = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(passed), desc))
    return out
