import random
from fractions import Fraction

import pytest

from heateta.algebra import CliffordCoefficient, spinor_trace
from heateta.geometry import GeometryJet, flat_jet, random_jet, single_plane_jet, validate
from heateta.heat_eta import (
    MAX_LMAX,
    bismut_freed_check,
    eta_singularities,
    heat_coefficients,
    heat_plan,
    jet_heat_coefficients,
    sigma_route_trace,
    trace_expansion,
    worker_count,
)
from heateta.scalar import ZERO, GaussianRational
from heateta.selftest import random_clifford
from heateta.symbols import BudgetError, DiagKernelExpansion, DiagValue, SymbolExpansion

TWIST = {(1, 2): [["i", "1"], ["-1", "0"]]}


def spec_cases():
    return [
        pytest.param(flat_jet(3, 1), id="flat-p1"),
        pytest.param(flat_jet(3, 2), id="flat-p2"),
        pytest.param(single_plane_jet(3, 1), id="plane-p1"),
        pytest.param(single_plane_jet(3, 1, p=2), id="plane-p2"),
        pytest.param(flat_jet(3, 1, {(1, 3): [["i/2"]]}), id="twisted-p1"),
        pytest.param(flat_jet(3, 2, TWIST), id="twisted-p2"),
    ]


def divergence_connection(a, p=1):
    """Radial-gauge ``A`` with ``d_1 F_12 = a``: ``A_1 = -a/3 x1 x2``, ``A_2 = a/3 x1^2``."""
    def m(v):
        return [[GaussianRational(0, v) if r == c else GaussianRational(0) for c in range(p)] for r in range(p)]

    return {(1, (1, 1, 0)): m(-Fraction(a) / 3), (2, (2, 0, 0)): m(Fraction(a) / 3)}


def divergence_jet(a, p=1):
    return GeometryJet(3, p, {}, {}, {}, divergence_connection(a, p))


def potential_heat(n, V):
    return SymbolExpansion.heat_top(n) + SymbolExpansion.constant(CliffordCoefficient.scalar(n, 1, V))


class TestPlan:
    def test_dirac_plan(self):
        plan = heat_plan(1, 1)
        assert (plan.q_floor, plan.depth, plan.heat_floor, plan.dirac_floor) == (-4, 3, -1, -2)

    def test_identity_plan(self):
        plan = heat_plan(0, 1)
        assert plan.q_floor == -4 and plan.depth == 2

    def test_negative_lmax(self):
        with pytest.raises(ValueError):
            heat_plan(1, -1)

    def test_shallow_depth(self):
        with pytest.raises(BudgetError):
            heat_coefficients(None, SymbolExpansion.heat_top(3), 2, depth=1)


class TestHeatCoefficients:
    def test_flat_identity(self):
        d = heat_coefficients(None, SymbolExpansion.heat_top(3), 2)
        assert [e for e, _ in d] == [Fraction(-3, 2), Fraction(-1, 2), Fraction(1, 2)]
        assert d.entries[0][1].coefficient == CliffordCoefficient.one(3, 1)
        assert all(v.is_zero() for _, v in d.entries[1:])

    @pytest.mark.parametrize("V", [Fraction(0), Fraction(1), Fraction(5, 2), Fraction(-3, 7)])
    def test_constant_potential(self, V):
        d = heat_coefficients(None, potential_heat(1, V), 2)
        values = [v.coefficient for _, v in d]
        one = CliffordCoefficient.one(1, 1)
        assert values == [one, one.scale(-V), one.scale(V * V / 2)]

    def test_scalar_curvature_term(self):
        # untraced b_1 of exp(-t D^2) is -kappa/12
        K = Fraction(3, 5)
        d, _ = jet_heat_coefficients(single_plane_jet(3, K), 1, op="identity")
        assert d.entries[1][1].coefficient == CliffordCoefficient.scalar(3, 1, -2 * K / 12)

    def test_constant_twisting(self):
        # b_1 of exp(-t D^2) with constant F is -(c^1 c^2 F_12)
        F = [["i", "1"], ["-1", "0"]]
        d, _ = jet_heat_coefficients(flat_jet(3, 2, {(1, 2): F}), 1, op="identity")
        assert d.entries[1][1].coefficient == -CliffordCoefficient.basis(3, 2, [1, 2], matrix=F)

    @pytest.mark.parametrize("jet", [single_plane_jet(3, 1), flat_jet(3, 2, TWIST), random_jet(3, 1, 4)])
    def test_even_jets_give_zero_kernel(self, jet):
        # x -> -x preserves these jets and flips D, so even the untraced values vanish
        d, _ = jet_heat_coefficients(jet, 1)
        assert all(v.is_zero() for _, v in d)

    @pytest.mark.parametrize("a", [Fraction(1), Fraction(-3, 4)])
    def test_divergence_of_twisting_curvature(self, a):
        d, spec = jet_heat_coefficients(divergence_jet(a), 1)
        assert spec.warnings == ["metric jets of order [3] not supplied; taken as zero"]
        b1 = d.entries[1][1].coefficient
        assert b1 and all(blade in (0b010,) for blade, _, _ in b1.entries)
        assert spinor_trace(b1) == 0

    @pytest.mark.parametrize("jet", [single_plane_jet(3, 1), flat_jet(3, 2, TWIST)])
    def test_kernel_is_odd(self, jet):
        # with odd jets supplied the kernel coefficients stay odd Clifford elements
        odd = GeometryJet(jet.n, jet.p, jet.riemann, jet.twisting_curvature, {}, divergence_connection(1, jet.p))
        d, _ = jet_heat_coefficients(odd, 1)
        assert not d.entries[1][1].is_zero()
        for _, v in d:
            for blade, _, _ in v.coefficient.entries:
                assert bin(blade).count("1") % 2 == 1

    def test_dirac_needs_one_more_jet_order(self):
        _, spec = jet_heat_coefficients(single_plane_jet(3, 1), 1)
        assert len(spec.warnings) == 2
        _, spec = jet_heat_coefficients(single_plane_jet(3, 1), 1, op="identity")
        assert spec.warnings == []
        _, spec = jet_heat_coefficients(single_plane_jet(3, 1), 1, traced=True)
        assert spec.warnings == []

    def test_exponents(self):
        d, _ = jet_heat_coefficients(single_plane_jet(3, 1), 2)
        assert [e for e, _ in d] == [Fraction(-3, 2), Fraction(-1, 2), Fraction(1, 2)]

    def test_strict_raises_above_lmax_one(self):
        with pytest.raises(BudgetError):
            jet_heat_coefficients(single_plane_jet(3, 1), 2, strict=True)


class TestBismutFreed:
    @pytest.mark.parametrize("jet", spec_cases())
    def test_vanishing(self, jet):
        rep = bismut_freed_check(jet, 1)
        assert [t.trace for t in rep.traces] == [ZERO, ZERO]
        assert rep.violations == []
        assert rep.evidence_ok and rep.passed
        assert rep.coverage_complete

    def test_evidence_fields(self):
        rep = bismut_freed_check(single_plane_jet(3, 1), 1)
        assert rep.parametrix_order == -2
        assert rep.parametrix_model_matches
        assert rep.dq_order <= 0
        assert rep.top_form.parity_zero
        assert rep.first_nonzero_exponent == Fraction(1, 2)

    @pytest.mark.parametrize("a", [Fraction(1), Fraction(2, 3)])
    def test_varying_twisting_curvature(self, a):
        jet = divergence_jet(a, 2)
        assert validate(jet) == []
        rep = bismut_freed_check(jet, 1)
        assert rep.passed
        # x-free terms reach Getzler order -1 but their diagonal value cancels
        assert rep.remainder_x_free_order == -1
        assert rep.remainder_top_form_zero

    def test_random_jet(self):
        assert bismut_freed_check(random_jet(3, 1, 7), 1).passed

    def test_lmax_zero(self):
        rep = bismut_freed_check(single_plane_jet(3, 1), 0)
        assert rep.passed and not rep.coverage_complete

    def test_even_dimension(self):
        with pytest.raises(ValueError):
            bismut_freed_check(flat_jet(4, 1), 1)

    def test_lmax_bound(self):
        with pytest.raises(ValueError):
            bismut_freed_check(flat_jet(3, 1), MAX_LMAX + 1)

    def test_violation_reported(self):
        rep = bismut_freed_check(flat_jet(3, 1), 1)
        fake = CliffordCoefficient.basis(3, 1, [1, 2, 3])
        t = rep.traces[0]
        t.trace = spinor_trace(fake)
        t.sigma_trace = sigma_route_trace(fake)
        assert not rep.passed
        assert "expected 0" in rep.violations[0]


class TestTraces:
    @pytest.mark.parametrize("seed", range(10))
    def test_sigma_route(self, seed):
        rng = random.Random(seed)
        n = rng.choice([3, 5])
        u = random_clifford(n, rng.randint(1, 2), rng, terms=5)
        assert sigma_route_trace(u) == spinor_trace(u)

    def test_trace_expansion(self):
        d, _ = jet_heat_coefficients(single_plane_jet(3, 1), 1, op="identity")
        assert trace_expansion(d) == [(Fraction(-3, 2), GaussianRational(2)), (Fraction(-1, 2), GaussianRational(Fraction(-1, 3)))]


class TestEta:
    def test_flat_dirac_empty(self):
        d, _ = jet_heat_coefficients(flat_jet(3, 1), 1)
        rep = eta_singularities(d)
        assert len(rep) == 0
        assert rep.holomorphic_beyond == -2

    def test_pole_positions(self):
        d, _ = jet_heat_coefficients(single_plane_jet(3, 1), 1, op="identity")
        rep = eta_singularities(d)
        assert [(s.pole, s.residue) for s in rep] == [(2, GaussianRational(4)), (0, GaussianRational(Fraction(-2, 3)))]
        assert rep.holomorphic_beyond == 2

    def test_pole_formula(self):
        c = CliffordCoefficient.scalar(3, 1, 1)
        d = DiagKernelExpansion(3, ((Fraction(-5, 2), DiagValue(c, 3)),), (-4,))
        (s,) = eta_singularities(d)
        assert s.pole == 4 and s.residue == 4


class TestThreads:
    def test_worker_count(self, monkeypatch):
        monkeypatch.setenv("HEATETA_THREADS", "3")
        assert worker_count() == 3
        monkeypatch.setenv("HEATETA_THREADS", "junk")
        assert worker_count() == 1

    def test_deterministic(self, monkeypatch):
        jet = random_jet(3, 1, 2)
        out = []
        for threads in ("1", "4"):
            monkeypatch.setenv("HEATETA_THREADS", threads)
            out.append([(e, v.coefficient) for e, v in jet_heat_coefficients(jet, 1, op="identity")[0]])
        assert out[0] == out[1]
