"""Dirac operators in normal coordinates from curvature data at one point.

Index conventions follow the usual tensor notation: 1-based indices in
:class:`GeometryJet`, and ``R_ijkl = <R(d_i, d_j) d_k, d_l>`` with
``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`` (so a round sphere has
``R_1221 > 0``).

The metric used is the polynomial ``g_ij = delta_ij + (1/3) R_ikjl x^k x^l``
plus any supplied higher jets. It satisfies ``g_ij(x) x^j = x^i`` exactly,
so ``x`` are normal coordinates. The orthonormal frame is ``g^{-1/2}``,
whose connection coefficients start as ``-(1/2) R_ijkl x^j``, and the
twisting connection is taken in the radial gauge
``A_i = -(1/2) F_ij(0) x^j + ...``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .algebra import CliffordCoefficient
from .polynomial import TPoly, mat_identity, mat_mul, mat_series
from .scalar import ONE, ZERO, GaussianRational, as_scalar
from .symbols import BudgetError, SymbolExpansion, compose

__all__ = [
    "GeometryError",
    "GeometryJet",
    "OperatorSpec",
    "SynchronousJets",
    "validate",
    "complete_symmetries",
    "synchronous_jets",
    "build_dirac",
    "build_connection",
    "lichnerowicz_rhs",
    "flat_jet",
    "single_plane_jet",
    "random_jet",
    "dirac_floor_for",
]


class GeometryError(ValueError):
    """Invalid curvature data; ``violations`` lists every failed identity."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) if self.violations else "invalid geometry")


Matrix = tuple[tuple[GaussianRational, ...], ...]


def _zero_matrix(p: int) -> Matrix:
    return tuple(tuple(ZERO for _ in range(p)) for _ in range(p))


def _as_matrix(m, p: int) -> Matrix:
    if len(m) != p or any(len(row) != p for row in m):
        raise GeometryError([f"matrix is not {p}x{p}"])
    return tuple(tuple(as_scalar(v) for v in row) for row in m)


def _mneg(m: Matrix) -> Matrix:
    return tuple(tuple(-v for v in row) for row in m)


@dataclass(frozen=True)
class GeometryJet:
    """Pointwise curvature data at the base point (1-based indices).

    ``metric_jets`` maps ``(i, j, exponents)`` to the coefficient of
    ``x^exponents`` (total degree >= 3) in ``g_ij``; ``connection_jets``
    maps ``(i, exponents)`` to a p x p matrix added to ``A_i`` (degree >= 2).
    """

    n: int
    p: int = 1
    riemann: Mapping[tuple[int, int, int, int], GaussianRational] = field(default_factory=dict)
    twisting_curvature: Mapping[tuple[int, int], Matrix] = field(default_factory=dict)
    metric_jets: Mapping[tuple, GaussianRational] = field(default_factory=dict)
    connection_jets: Mapping[tuple, Matrix] = field(default_factory=dict)

    def R(self, i, j, k, l) -> GaussianRational:
        return self.riemann.get((i, j, k, l), ZERO)

    def F(self, i, j) -> Matrix:
        return self.twisting_curvature.get((i, j), _zero_matrix(self.p))

    def is_flat(self) -> bool:
        return not any(self.riemann.values()) and not any(
            v for m in self.twisting_curvature.values() for row in m for v in row
        )

    def scalar_curvature(self) -> GaussianRational:
        """``kappa(0) = sum_ij R_ijji``; positive on spheres."""
        total = ZERO
        for i in range(1, self.n + 1):
            for j in range(1, self.n + 1):
                total = total + self.R(i, j, j, i)
        return total


def _riemann_orbit(i, j, k, l):
    return [
        ((i, j, k, l), 1),
        ((j, i, k, l), -1),
        ((i, j, l, k), -1),
        ((j, i, l, k), 1),
        ((k, l, i, j), 1),
        ((l, k, i, j), -1),
        ((k, l, j, i), -1),
        ((l, k, j, i), 1),
    ]


def complete_symmetries(n: int, p: int, riemann_entries, twisting_entries):
    """Fill in symmetry-related components of R and F.

    ``riemann_entries`` is an iterable of ``((i, j, k, l), value)``,
    ``twisting_entries`` of ``((i, j), matrix)``. Returns the completed maps;
    raises :class:`GeometryError` on contradictory entries.
    """
    problems = []
    riemann: dict = {}
    for idx, value in riemann_entries:
        value = as_scalar(value)
        if any(not 1 <= v <= n for v in idx):
            problems.append(f"riemann index {list(idx)} out of range 1..{n}")
            continue
        for key, sign in _riemann_orbit(*idx):
            v = value if sign > 0 else -value
            if key in riemann and riemann[key] != v:
                problems.append(f"riemann entry {list(idx)} contradicts R{list(key)}={riemann[key]}")
                break
            riemann[key] = v
    twisting: dict = {}
    for idx, m in twisting_entries:
        i, j = idx
        if not (1 <= i <= n and 1 <= j <= n):
            problems.append(f"twisting index {list(idx)} out of range 1..{n}")
            continue
        try:
            m = _as_matrix(m, p)
        except GeometryError as exc:
            problems.extend(f"twisting {list(idx)}: {v}" for v in exc.violations)
            continue
        for key, mat in (((i, j), m), ((j, i), _mneg(m))):
            if key in twisting and twisting[key] != mat:
                problems.append(f"twisting entry {list(idx)} contradicts F{list(key)}")
                break
            twisting[key] = mat
    if problems:
        raise GeometryError(problems)
    riemann = {k: v for k, v in riemann.items() if v}
    return riemann, twisting


def validate(jet: GeometryJet) -> list[str]:
    """Every violated identity, with indices; an empty list means the jet is valid."""
    out = []
    n, p = jet.n, jet.p
    if n < 1:
        out.append(f"dimension must be positive, got {n}")
        return out
    if n % 2 == 0:
        out.append(f"even dimension n={n} unsupported (odd dimension required)")
    if p < 1:
        out.append(f"aux_rank must be positive, got {p}")
        return out
    for key, v in jet.riemann.items():
        if any(not 1 <= i <= n for i in key):
            out.append(f"R{list(key)}: index out of range")
        elif as_scalar(v).im:
            out.append(f"R{list(key)}: curvature of a real metric must be real")
    rng = range(1, n + 1)
    R = jet.R
    for i in rng:
        for j in rng:
            for k in rng:
                for l in rng:
                    r = R(i, j, k, l)
                    if r + R(j, i, k, l):
                        out.append(f"antisymmetry R_ijkl = -R_jikl fails at {[i, j, k, l]}")
                    if r + R(i, j, l, k):
                        out.append(f"antisymmetry R_ijkl = -R_ijlk fails at {[i, j, k, l]}")
                    if r != R(k, l, i, j):
                        out.append(f"pair symmetry R_ijkl = R_klij fails at {[i, j, k, l]}")
                    if r + R(j, k, i, l) + R(k, i, j, l):
                        out.append(f"first Bianchi identity fails at {[i, j, k, l]}")
    for key, m in jet.twisting_curvature.items():
        i, j = key
        if not (1 <= i <= n and 1 <= j <= n):
            out.append(f"F{list(key)}: index out of range")
            continue
        if len(m) != p or any(len(row) != p for row in m):
            out.append(f"F{list(key)}: matrix is not {p}x{p}")
            continue
        other = jet.F(j, i)
        for r in range(p):
            for c in range(p):
                if m[r][c] + other[r][c]:
                    out.append(f"antisymmetry F_ij = -F_ji fails at {[i, j]} entry {(r + 1, c + 1)}")
                if m[r][c] + as_scalar(m[c][r]).conjugate():
                    out.append(f"F{[i, j]} is not skew-Hermitian at entry {(r + 1, c + 1)}")
    for key in jet.metric_jets:
        i, j, exps = key
        if sum(exps) < 3 or len(exps) != n:
            out.append(f"metric jet {key}: monomial must have n entries and degree >= 3")
        if jet.metric_jets[key] != jet.metric_jets.get((j, i, exps), ZERO):
            out.append(f"metric jet {key}: g_ij must be symmetric")
    for key, m in jet.connection_jets.items():
        i, exps = key
        if sum(exps) < 2 or len(exps) != n:
            out.append(f"connection jet {key}: monomial must have n entries and degree >= 2")
        if any(m[r][c] + as_scalar(m[c][r]).conjugate() for r in range(p) for c in range(p)):
            out.append(f"connection jet {key}: matrix must be skew-Hermitian")
    out.extend(_gauge_violations(jet))
    return out


def _radial_contraction(entries, n):
    """``{(row, monomial): value}`` of ``sum_j T_j(x) x^j`` from ``(row, j, exps, value)``."""
    acc = {}
    for row, j, exps, v in entries:
        if len(exps) != n or not 0 <= j < n:
            continue
        key = (row, tuple(e + (1 if t == j else 0) for t, e in enumerate(exps)))
        acc[key] = acc.get(key, ZERO) + as_scalar(v)
    return sorted(k for k, v in acc.items() if v)


def _gauge_violations(jet: GeometryJet) -> list[str]:
    # normal coordinates force g_ij x^j = x^i; synchronous gauge forces A_i x^i = 0
    n, p = jet.n, jet.p
    out = []
    metric = [(i, j - 1, exps, v) for (i, j, exps), v in jet.metric_jets.items()]
    for i, mono in _radial_contraction(metric, n):
        out.append(f"metric jets break normal coordinates: sum_j g_{i}j x^j has a {list(mono)} term")
    for r in range(p):
        for c in range(p):
            conn = [((r, c), i - 1, exps, m[r][c]) for (i, exps), m in jet.connection_jets.items()]
            for _, mono in _radial_contraction(conn, n):
                out.append(
                    f"connection jets break synchronous gauge: sum_i A_i x^i has a {list(mono)} term"
                    f" at entry {(r + 1, c + 1)}"
                )
    return out


# ---------------------------------------------------------------------------
# example jets


def flat_jet(n: int = 3, p: int = 1, twisting: Mapping | None = None) -> GeometryJet:
    entries = list((twisting or {}).items())
    _, tw = complete_symmetries(n, p, [], entries)
    return GeometryJet(n, p, {}, tw)


def single_plane_jet(n: int = 3, curvature=1, p: int = 1, plane=(1, 2)) -> GeometryJet:
    """Constant sectional curvature ``K`` in one coordinate plane: ``R_ijji = K``."""
    i, j = plane
    riemann, _ = complete_symmetries(n, p, [((i, j, j, i), curvature)], [])
    return GeometryJet(n, p, riemann, {})


def random_jet(n: int, p: int, seed: int, curvature: bool = True, twisting: bool = True) -> GeometryJet:
    """Random valid jet: R is a sum of Gauss-equation terms, F random skew-Hermitian."""
    rng = random.Random(seed)
    riemann = {}
    if curvature:
        for _ in range(2):
            a = [[Fraction(0)] * n for _ in range(n)]
            for r in range(n):
                for c in range(r, n):
                    a[r][c] = a[c][r] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        for l in range(n):
                            v = a[i][l] * a[j][k] - a[i][k] * a[j][l]
                            key = (i + 1, j + 1, k + 1, l + 1)
                            riemann[key] = riemann.get(key, Fraction(0)) + v
        riemann = {k: as_scalar(v) for k, v in riemann.items() if v}
    tw = {}
    if twisting:
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                m = [[ZERO] * p for _ in range(p)]
                for r in range(p):
                    m[r][r] = GaussianRational(0, Fraction(rng.randint(-2, 2), rng.randint(1, 2)))
                    for c in range(r + 1, p):
                        z = GaussianRational(Fraction(rng.randint(-2, 2), 2), Fraction(rng.randint(-2, 2), 3))
                        m[r][c] = z
                        m[c][r] = -z.conjugate()
                tw[(i, j)] = m
    _, twc = complete_symmetries(n, p, [], list(tw.items()))
    return GeometryJet(n, p, riemann, twc)


# ---------------------------------------------------------------------------
# jets in normal coordinates


@dataclass
class SynchronousJets:
    """Taylor polynomials (0-based tensor indices) exact through x-degree ``depth``."""

    n: int
    p: int
    depth: int
    metric: list
    inverse_metric: list
    frame: list  # frame[a][j]: component of e_a along d_j
    christoffel: list  # christoffel[k][i][j] = Gamma^k_ij
    omega: list  # omega[j][a][b] = <nabla_j e_a, e_b>
    connection: list  # connection[j]: p x p matrix of TPoly
    curvature: list  # curvature[i][j]: p x p matrix of TPoly, F(d_i, d_j)
    scalar_curvature: TPoly
    riemann_origin: dict
    warnings: list = field(default_factory=list)


def _binom_half(k: int, sign: int) -> Fraction:
    # binomial(sign/2, k)
    a = Fraction(sign, 2)
    out = Fraction(1)
    for t in range(k):
        out = out * (a - t) / (t + 1)
    return out


def synchronous_jets(
    jet: GeometryJet, depth: int, strict: bool = False, relevant_order: int | None = None
) -> SynchronousJets:
    """Metric, frame, Levi-Civita and twisting connection jets through x-degree ``depth``.

    Jets above what the input supplies default to zero; each such default
    that reaches ``depth`` is recorded in ``warnings`` (or raised with
    ``strict=True``).
    """
    problems = validate(jet)
    if problems:
        raise GeometryError(problems)
    n, p = jet.n, jet.p
    depth = max(depth, 0)
    M = depth + 2  # two orders are lost to derivatives of the metric
    warnings = []
    # b_l involves metric jets through order 2l and connection jets through 2l - 1
    relevant = depth + 1 if relevant_order is None else relevant_order
    metric_orders = {sum(e) for (_, _, e) in jet.metric_jets}
    missing_metric = [d for d in range(3, min(relevant, M) + 1) if d not in metric_orders]
    if missing_metric:
        warnings.append(f"metric jets of order {missing_metric} not supplied; taken as zero")
    conn_orders = {sum(e) for (_, e) in jet.connection_jets}
    missing_conn = [d for d in range(2, min(relevant - 1, depth) + 1) if d not in conn_orders]
    if missing_conn:
        warnings.append(f"twisting connection jets of order {missing_conn} not supplied; taken as zero")
    if strict and warnings:
        raise BudgetError("; ".join(warnings))

    def R(i, j, k, l):
        return jet.R(i + 1, j + 1, k + 1, l + 1).re

    # g_ij = delta_ij + 1/3 R_ikjl x^k x^l + supplied jets
    g = mat_identity(n, M)
    for i in range(n):
        for j in range(n):
            quad = {}
            for k in range(n):
                for l in range(n):
                    v = R(i, k, j, l) / 3
                    if v:
                        e = [0] * n
                        e[k] += 1
                        e[l] += 1
                        e = tuple(e)
                        quad[e] = quad.get(e, 0) + v
            g[i][j] = g[i][j] + TPoly(n, M, quad)
    for (i, j, exps), v in jet.metric_jets.items():
        g[i - 1][j - 1] = g[i - 1][j - 1] + TPoly(n, M, {tuple(exps): as_scalar(v).re})
    G = [[g[i][j] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    series_len = M // 2 + 2
    ginv = mat_series(G, [(-1) ** k * Fraction(1) for k in range(series_len)], n, M)
    h = mat_series(G, [_binom_half(k, -1) for k in range(series_len)], n, M)

    dg = [[[g[i][j].deriv(k) for k in range(n)] for j in range(n)] for i in range(n)]
    # Gamma_{ijl} (lowered) then raised with g^{kl}
    gam_low = [
        [[(dg[j][l][i] + dg[i][l][j] - dg[i][j][l]) * Fraction(1, 2) for l in range(n)] for j in range(n)]
        for i in range(n)
    ]
    chris = [[[None] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                acc = TPoly(n, M)
                for l in range(n):
                    acc = acc + ginv[k][l] * gam_low[i][j][l]
                chris[k][i][j] = acc

    # omega_{j a b} = g(nabla_j e_a, e_b), nabla_j e_a = (d_j h_am + h_aq Gamma^m_jq) d_m
    omega = [[[None] * n for _ in range(n)] for _ in range(n)]
    for j in range(n):
        dcomp = [[None] * n for _ in range(n)]
        for a in range(n):
            for m in range(n):
                acc = h[a][m].deriv(j)
                for q in range(n):
                    acc = acc + h[a][q] * chris[m][j][q]
                dcomp[a][m] = acc
        lowered = mat_mul(dcomp, g)  # (nabla_j e_a)_q lowered
        for a in range(n):
            for b in range(n):
                acc = TPoly(n, M)
                for q in range(n):
                    acc = acc + lowered[a][q] * h[b][q]
                omega[j][a][b] = acc

    # Riemann tensor and scalar curvature of the polynomial metric
    def riem_up(l, i, j, k):
        acc = chris[l][j][k].deriv(i) - chris[l][i][k].deriv(j)
        for m in range(n):
            acc = acc + chris[l][i][m] * chris[m][j][k] - chris[l][j][m] * chris[m][i][k]
        return acc

    ric = [[None] * n for _ in range(n)]
    riemann_origin = {}
    for j in range(n):
        for k in range(n):
            acc = TPoly(n, M)
            for i in range(n):
                rl = [riem_up(l, i, j, k) for l in range(n)]
                acc = acc + rl[i]
                for l in range(n):
                    v = rl[l].constant()
                    if v:
                        riemann_origin[(i + 1, j + 1, k + 1, l + 1)] = as_scalar(v)
            ric[j][k] = acc
    kappa = TPoly(n, M)
    for j in range(n):
        for k in range(n):
            kappa = kappa + ginv[j][k] * ric[j][k]

    # twisting connection in radial gauge, then its curvature
    A = []
    for i in range(n):
        Ai = [[TPoly(n, M) for _ in range(p)] for _ in range(p)]
        for j in range(n):
            Fij = jet.F(i + 1, j + 1)
            for r in range(p):
                for c in range(p):
                    if Fij[r][c]:
                        Ai[r][c] = Ai[r][c] + TPoly.var(n, M, j, Fij[r][c] * Fraction(-1, 2))
        A.append(Ai)
    for (i, exps), m in jet.connection_jets.items():
        for r in range(p):
            for c in range(p):
                v = as_scalar(m[r][c])
                if v:
                    A[i - 1][r][c] = A[i - 1][r][c] + TPoly(n, M, {tuple(exps): v})
    F = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            AiAj = mat_mul(A[i], A[j])
            AjAi = mat_mul(A[j], A[i])
            F[i][j] = [
                [A[j][r][c].deriv(i) - A[i][r][c].deriv(j) + AiAj[r][c] - AjAi[r][c] for c in range(p)]
                for r in range(p)
            ]
    return SynchronousJets(
        n=n,
        p=p,
        depth=depth,
        metric=g,
        inverse_metric=ginv,
        frame=h,
        christoffel=chris,
        omega=omega,
        connection=A,
        curvature=F,
        scalar_curvature=kappa,
        riemann_origin=riemann_origin,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# symbols


class _TermAcc:
    """Accumulates ``poly(x) * coefficient * xi^beta`` contributions into a term map."""

    def __init__(self, n, p, floor):
        self.n, self.p, self.floor = n, p, floor
        self.terms: dict = {}

    def add(self, poly: TPoly, coef: CliffordCoefficient, beta=None, extra=ONE):
        n = self.n
        beta = beta or (0,) * n
        top = sum(beta)
        for exps, v in poly.c.items():
            if top - sum(exps) < self.floor:
                continue
            key = (exps, beta, 0, 0)
            c = coef.scale(as_scalar(v) * extra)
            prev = self.terms.get(key)
            self.terms[key] = c if prev is None else prev + c

    def add_matrix(self, mpoly, blade_word, beta=None, extra=ONE):
        p = self.p
        for r in range(p):
            for c in range(p):
                poly = mpoly[r][c]
                if poly.is_zero():
                    continue
                unit = [[ZERO] * p for _ in range(p)]
                unit[r][c] = ONE
                coef = CliffordCoefficient.basis(self.n, p, blade_word, matrix=unit)
                self.add(poly, coef, beta, extra)

    def symbol(self) -> SymbolExpansion:
        return SymbolExpansion(self.n, self.p, "clifford", {k: v for k, v in self.terms.items() if v}, self.floor)


def _unit(n, i):
    return tuple(1 if j == i else 0 for j in range(n))


def _cl(n, p, *word):
    out = CliffordCoefficient.one(n, p)
    for w in word:
        out = out * CliffordCoefficient.basis(n, p, [w + 1])
    return out


@dataclass
class OperatorSpec:
    """Dirac operator, its square and provenance for one jet."""

    jet: GeometryJet
    dirac: SymbolExpansion
    dirac_squared: SymbolExpansion
    scalar_curvature: GaussianRational
    jets: SynchronousJets
    warnings: list

    @property
    def heat_operator(self) -> SymbolExpansion:
        """Symbol of ``D^2 + d_t``."""
        return self.dirac_squared + SymbolExpansion.monomial(CliffordCoefficient.one(self.jet.n, self.jet.p), tau=1)


def build_connection(jets: SynchronousJets, i: int, floor: int) -> SymbolExpansion:
    """Symbol of ``nabla_i = d_i + 1/4 omega_ikl c_k c_l + A_i`` (0-based ``i``)."""
    n, p = jets.n, jets.p
    acc = _TermAcc(n, p, floor)
    acc.add(TPoly.const(n, jets.depth, 1), CliffordCoefficient.one(n, p), beta=_unit(n, i), extra=GaussianRational(0, 1))
    for k in range(n):
        for l in range(n):
            if k == l:
                continue
            acc.add(jets.omega[i][k][l], _cl(n, p, k, l), extra=as_scalar(Fraction(1, 4)))
    acc.add_matrix(jets.connection[i], [])
    return acc.symbol()


def dirac_floor_for(l_max: int, op: str = "dirac") -> int:
    """Lowest weight of D needed for coefficients ``b_0 .. b_{l_max}``."""
    if op == "dirac":
        return -2 * l_max
    if op == "identity":
        return 1 - 2 * l_max
    raise ValueError(f"unknown operator {op!r}")


def build_dirac(
    jet: GeometryJet, floor: int, strict: bool = False, l_max: int | None = None, extra_order: int = 0
) -> OperatorSpec:
    """``D = c(e^a) nabla_{e_a}`` as a Clifford symbol exact in weights ``>= floor``.

    ``dirac_squared`` is ``D # D``, exact in weights ``>= floor + 1``.
    With ``l_max`` given, missing jets are reported only if they can reach
    ``b_0 .. b_{l_max}`` of ``exp(-t D^2)``; ``extra_order`` adds derivative
    orders carried by a prefactor (1 for ``D exp(-t D^2)``).
    """
    if floor > 1:
        raise ValueError("the Dirac symbol has weight 1; floor must be <= 1")
    n, p = jet.n, jet.p
    depth = 1 - floor
    relevant = None if l_max is None else 2 * l_max + extra_order
    jets = synchronous_jets(jet, depth, strict=strict, relevant_order=relevant)
    h = jets.frame
    acc = _TermAcc(n, p, floor)
    iunit = GaussianRational(0, 1)
    quarter = as_scalar(Fraction(1, 4))
    for a in range(n):
        ca = _cl(n, p, a)
        for j in range(n):
            acc.add(h[a][j], ca, beta=_unit(n, j), extra=iunit)
        for k in range(n):
            for l in range(n):
                if k == l:
                    continue
                s = TPoly(n, jets.metric[0][0].maxdeg)
                for j in range(n):
                    s = s + h[a][j] * jets.omega[j][k][l]
                acc.add(s, _cl(n, p, a, k, l), extra=quarter)
        for j in range(n):
            Aj = jets.connection[j]
            acc.add_matrix([[h[a][j] * Aj[r][c] for c in range(p)] for r in range(p)], [a + 1])
    dirac = acc.symbol()
    dsq = compose(dirac, dirac)
    return OperatorSpec(
        jet=jet,
        dirac=dirac,
        dirac_squared=dsq,
        scalar_curvature=as_scalar(jets.scalar_curvature.constant(Fraction(0))),
        jets=jets,
        warnings=list(jets.warnings),
    )


def _function_symbol(n, p, poly: TPoly, floor) -> SymbolExpansion:
    acc = _TermAcc(n, p, floor)
    acc.add(poly, CliffordCoefficient.one(n, p))
    return acc.symbol()


def lichnerowicz_rhs(jet: GeometryJet, floor: int, jets: SynchronousJets | None = None) -> SymbolExpansion:
    """``-g^ij (nabla_i nabla_j - Gamma^k_ij nabla_k) + 1/2 c(e^a) c(e^b) F(e_a, e_b) + kappa/4``.

    Assembled from the jets alone, independent of ``D # D``; exact in
    weights ``>= floor``.
    """
    n, p = jet.n, jet.p
    depth = 2 - floor
    if jets is None or jets.depth < depth:
        jets = synchronous_jets(jet, depth)
    nab = [build_connection(jets, i, floor - 1) for i in range(n)]
    total = SymbolExpansion.zero(n, p, "clifford", floor)
    for i in range(n):
        for j in range(n):
            ginv = jets.inverse_metric[i][j]
            if ginv.is_zero():
                continue
            inner = compose(nab[i], nab[j], floor=floor)
            for k in range(n):
                gam = jets.christoffel[k][i][j]
                if gam.is_zero():
                    continue
                inner = inner - compose(_function_symbol(n, p, gam, floor - 1), nab[k], floor=floor)
            total = total - compose(_function_symbol(n, p, ginv, floor - 2), inner, floor=floor)
    h = jets.frame
    half = as_scalar(Fraction(1, 2))
    acc = _TermAcc(n, p, floor)
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            mat = [[TPoly(n, jets.depth + 2) for _ in range(p)] for _ in range(p)]
            for i in range(n):
                for j in range(n):
                    hh = h[a][i] * h[b][j]
                    if hh.is_zero():
                        continue
                    Fij = jets.curvature[i][j]
                    for r in range(p):
                        for c in range(p):
                            mat[r][c] = mat[r][c] + hh * Fij[r][c]
            acc.add_matrix(mat, [a + 1, b + 1], extra=half)
    # F(e_a, e_a) = 0, and c(e^a)^2 = -1 only multiplies it
    total = total + acc.symbol()
    total = total + _function_symbol(n, p, jets.scalar_curvature * Fraction(1, 4), floor)
    return total.truncate(floor) if total.floor is None or total.floor < floor else total
