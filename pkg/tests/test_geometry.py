from fractions import Fraction

import pytest

from heateta.algebra import CliffordCoefficient
from heateta.geometry import (
    GeometryError,
    GeometryJet,
    build_dirac,
    complete_symmetries,
    flat_jet,
    lichnerowicz_rhs,
    random_jet,
    single_plane_jet,
    synchronous_jets,
    validate,
)
from heateta.scalar import GaussianRational, ONE
from heateta.symbols import BudgetError, SymbolExpansion

Z = (0, 0, 0)


def e(i, power=1, n=3):
    return tuple(power if j == i else 0 for j in range(n))


def flat_laplacian(n=3, p=1):
    one = CliffordCoefficient.one(n, p)
    z = (0,) * n
    return SymbolExpansion(n, p, "clifford", {(z, e(i, 2, n), 0, 0): one for i in range(n)})


class TestValidate:
    def test_single_plane_ok(self):
        r = {(1, 2, 1, 2): 1, (2, 1, 2, 1): 1, (2, 1, 1, 2): -1, (1, 2, 2, 1): -1}
        jet = GeometryJet(3, 1, {k: GaussianRational(v) for k, v in r.items()})
        assert validate(jet) == []

    def test_antisymmetry_violation(self):
        jet = GeometryJet(3, 1, {(1, 2, 1, 2): ONE, (2, 1, 1, 2): ONE})
        problems = validate(jet)
        assert any("antisymmetry" in p for p in problems)
        assert any("[1, 2, 1, 2]" in p for p in problems)

    def test_flat_ok(self):
        assert validate(GeometryJet(3, 1)) == []

    def test_bianchi_violation(self):
        # pair-symmetric and antisymmetric but not Bianchi: R_1234 alone
        riemann, _ = complete_symmetries(5, 1, [((1, 2, 3, 4), 1)], [])
        problems = validate(GeometryJet(5, 1, riemann))
        assert any("Bianchi" in p for p in problems)

    def test_even_dimension(self):
        assert any("even dimension" in p for p in validate(GeometryJet(4, 1)))

    def test_twisting_must_be_skew_hermitian(self):
        _, tw = complete_symmetries(3, 2, [], [((1, 2), [[1, 0], [0, 0]])])
        assert any("skew-Hermitian" in p for p in validate(GeometryJet(3, 2, {}, tw)))

    def test_contradictory_completion(self):
        with pytest.raises(GeometryError):
            complete_symmetries(3, 1, [((1, 2, 1, 2), 1), ((2, 1, 1, 2), 1)], [])

    @pytest.mark.parametrize("seed", range(5))
    def test_random_jets_valid(self, seed):
        assert validate(random_jet(3, 2, seed)) == []
        assert validate(random_jet(5, 1, seed)) == []


class TestSynchronousJets:
    def test_flat(self):
        sj = synchronous_jets(flat_jet(3), 4)
        for i in range(3):
            for j in range(3):
                assert sj.metric[i][j].c == ({Z: 1} if i == j else {})
                for k in range(3):
                    assert sj.omega[i][j][k].is_zero()
            assert all(x.is_zero() for row in sj.connection[i] for x in row)

    def test_omega_single_plane(self):
        jet = single_plane_jet(3, 1)
        sj = synchronous_jets(jet, 3)
        # omega_{112}: coefficient of x^2 is -1/2 R_{1212}
        assert sj.omega[0][0][1].part(1).c == {e(1): -jet.R(1, 2, 1, 2).re / 2}

    @pytest.mark.parametrize("seed", range(3))
    def test_omega_linear_part(self, seed):
        jet = random_jet(3, 1, seed)
        sj = synchronous_jets(jet, 2)
        for i in range(3):
            for k in range(3):
                for l in range(3):
                    expected = {
                        e(j): -jet.R(i + 1, j + 1, k + 1, l + 1).re / 2
                        for j in range(3)
                        if jet.R(i + 1, j + 1, k + 1, l + 1)
                    }
                    assert sj.omega[i][k][l].part(1).c == expected

    @pytest.mark.parametrize("seed", range(3))
    def test_metric_reproduces_curvature(self, seed):
        jet = random_jet(3, 1, seed)
        sj = synchronous_jets(jet, 2)
        assert sj.riemann_origin == dict(jet.riemann)
        assert sj.scalar_curvature.constant() == jet.scalar_curvature().re

    def test_normal_coordinates(self):
        # g_ij(x) x^j = x^i exactly
        jet = random_jet(3, 1, 11)
        sj = synchronous_jets(jet, 2)
        for i in range(3):
            total = {}
            for j in range(3):
                for exps, v in sj.metric[i][j].c.items():
                    key = tuple(a + (1 if t == j else 0) for t, a in enumerate(exps))
                    total[key] = total.get(key, 0) + v
            assert {k: v for k, v in total.items() if v} == {e(i): 1}

    def test_sphere_scalar_curvature(self):
        riemann = {}
        for i in range(1, 4):
            for j in range(1, 4):
                if i != j:
                    riemann[(i, j, j, i)] = ONE
                    riemann[(i, j, i, j)] = -ONE
        jet = GeometryJet(3, 1, riemann)
        assert validate(jet) == []
        assert jet.scalar_curvature() == 6

    def test_twisting_linear(self):
        F = [["i", 1], [-1, 0]]
        jet = flat_jet(3, 2, {(1, 2): F})
        sj = synchronous_jets(jet, 2)
        assert sj.connection[0][0][1].c == {e(1): Fraction(-1, 2)}
        assert sj.connection[1][0][1].c == {e(0): Fraction(1, 2)}
        assert sj.curvature[0][1][0][0].c == {Z: GaussianRational(0, 1)}

    def test_strict_mode(self):
        with pytest.raises(BudgetError):
            synchronous_jets(single_plane_jet(3, 1), 4, strict=True)
        assert synchronous_jets(single_plane_jet(3, 1), 4).warnings


class TestBuildDirac:
    def test_flat_symbol(self):
        spec = build_dirac(flat_jet(3), -2)
        expected = {
            (Z, e(i), 0, 0): CliffordCoefficient.basis(3, 1, [i + 1], value=GaussianRational(0, 1)) for i in range(3)
        }
        assert spec.dirac.terms == expected

    def test_flat_square(self):
        spec = build_dirac(flat_jet(3), -2)
        assert spec.dirac_squared.terms == flat_laplacian().terms

    def test_square_floor(self):
        spec = build_dirac(single_plane_jet(3, 1), -2)
        assert spec.dirac.floor == -2
        assert spec.dirac_squared.floor == -1

    def test_scalar_curvature(self):
        assert build_dirac(single_plane_jet(3, 3), 0).scalar_curvature == 6


class TestLichnerowicz:
    def test_flat(self):
        assert lichnerowicz_rhs(flat_jet(3), -1).terms == flat_laplacian().terms

    def test_constant_twisting(self):
        F = [["i/2", "1/3"], ["-1/3", 0]]
        jet = flat_jet(3, 2, {(1, 3): F})
        rhs = lichnerowicz_rhs(jet, -1)
        half_ccF = CliffordCoefficient.basis(3, 2, [1, 3], matrix=F)
        assert rhs.at_origin().terms == (flat_laplacian(3, 2) + SymbolExpansion.constant(half_ccF)).terms

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_dirac_square(self, seed):
        jet = random_jet(3, 2, seed)
        spec = build_dirac(jet, -2)
        assert (spec.dirac_squared - lichnerowicz_rhs(jet, -1)).is_zero()

    def test_with_supplied_jets(self):
        base = random_jet(3, 1, 3, twisting=False)
        jet = GeometryJet(3, 1, base.riemann, {}, radial_metric_jets(Fraction(1, 5)), radial_connection_jets(Fraction(1, 3)))
        assert validate(jet) == []
        spec = build_dirac(jet, -2)
        assert (spec.dirac_squared - lichnerowicz_rhs(jet, -1)).is_zero()
        assert synchronous_jets(jet, 1).riemann_origin == dict(base.riemann)


def radial_metric_jets(c):
    """Cubic metric jet ``c x^3 (x2^2, x1^2, -x1 x2)`` in the (1,2) block; satisfies ``g_ij x^j = x^i``."""
    c = GaussianRational(c)
    return {(1, 1, (0, 2, 1)): c, (2, 2, (2, 0, 1)): c, (1, 2, (1, 1, 1)): -c, (2, 1, (1, 1, 1)): -c}


def radial_connection_jets(b, p=1):
    """Quadratic ``A_1 = b x2 x3``, ``A_2 = -b x1 x3`` (times ``i``); satisfies ``A_i x^i = 0``."""
    ib = GaussianRational(0, b)
    m = [[ib if r == c else GaussianRational(0) for c in range(p)] for r in range(p)]
    neg = [[-x for x in row] for row in m]
    return {(1, (0, 1, 1)): m, (2, (1, 0, 1)): neg}


class TestGauge:
    def test_radial_jets_accepted(self):
        jet = GeometryJet(3, 2, {}, {}, radial_metric_jets(2), radial_connection_jets(1, 2))
        assert validate(jet) == []

    def test_metric_jet_outside_normal_coordinates(self):
        bad = {(1, 2, (1, 1, 1)): GaussianRational(1), (2, 1, (1, 1, 1)): GaussianRational(1)}
        problems = validate(GeometryJet(3, 1, {}, {}, bad))
        assert any("normal coordinates" in p for p in problems)

    def test_connection_jet_outside_gauge(self):
        bad = {(2, (2, 0, 0)): [[GaussianRational(0, 1)]]}
        problems = validate(GeometryJet(3, 1, {}, {}, {}, bad))
        assert any("synchronous gauge" in p and "[2, 1, 0]" in p for p in problems)

    def test_synchronous_jets_rejects(self):
        bad = {(1, (1, 0, 0)): [[GaussianRational(0, 1)]]}
        with pytest.raises(GeometryError):
            synchronous_jets(GeometryJet(3, 1, {}, {}, {}, bad), 2)
