import random

import pytest

from heateta.algebra import CliffordCoefficient, FormCoefficient
from heateta.geometry import build_connection, build_dirac, flat_jet, random_jet, single_plane_jet
from heateta.getzler import (
    compose_getzler,
    getzler_decompose,
    getzler_degree,
    leading_top_form,
    model_connection,
    model_dirac,
    model_heat_operator,
    model_operator,
    model_parametrix,
)
from heateta.scalar import GaussianRational
from heateta.symbols import SymbolExpansion, SymbolTerm, compose, inverse_fourier_diag, parametrix

N = 3
Z = (0, 0, 0)


def e(i, power=1, n=N):
    return tuple(power if j == i else 0 for j in range(n))


def random_graded_symbol(rng: random.Random, order: int, n: int = N, p: int = 1, terms: int = 6, floor=None):
    """Random form-coefficient symbol of Getzler order exactly ``order``.

    Includes an x-free top-form term in the top degree so the model has a
    diagonal top-form component whenever parity allows.
    """
    out = {}
    for t in range(terms):
        form_deg = n if t == 0 else rng.randint(0, n)
        G = order if t < 2 else order - rng.randint(0, 2)
        x_deg = 0 if t == 0 else rng.randint(0, 1)
        weight = G - form_deg
        # weight = |beta| - 2k - |alpha|, pick k to make |beta| >= 0
        k = rng.randint(1, 2)
        b = weight + 2 * k + x_deg
        if b < 0:
            k += (-b + 1) // 2
            b = weight + 2 * k + x_deg
        beta = [0] * n
        for _ in range(b):
            beta[rng.randrange(n)] += 1
        alpha = [0] * n
        for _ in range(x_deg):
            alpha[rng.randrange(n)] += 1
        blade = sorted(rng.sample(range(1, n + 1), form_deg))
        m = [[GaussianRational(rng.randint(-3, 3), rng.randint(-1, 1)) or 1 for _ in range(p)] for _ in range(p)]
        c = FormCoefficient.basis(n, p, blade, matrix=m)
        key = (tuple(alpha), tuple(beta), k, 0)
        out[key] = out[key] + c if key in out else c
    return SymbolExpansion(n, p, "form", out, floor)


class TestDegree:
    def test_xi_times_dx(self):
        c = FormCoefficient.basis(N, 1, [1], value=GaussianRational(0, 1))
        assert getzler_degree(SymbolTerm(c, Z, e(0), 0, 0)) == 2

    def test_x_times_resolvent(self):
        assert getzler_degree(SymbolTerm(FormCoefficient.one(N, 1), e(0), Z, 1, 0)) == -3

    def test_connection_order_one(self):
        jet = single_plane_jet(N, 1)
        spec = build_dirac(jet, -3)
        for i in range(N):
            g = getzler_decompose(build_connection(spec.jets, i, -3))
            assert g.order == 1

    def test_rejects_clifford(self):
        with pytest.raises(TypeError):
            getzler_degree(SymbolTerm(CliffordCoefficient.one(N, 1), Z, Z, 0, 0))


class TestDecompose:
    def test_sum_of_parts(self):
        spec = build_dirac(random_jet(N, 2, 1), -2)
        g = getzler_decompose(spec.dirac_squared)
        assert g.total().terms == spec.dirac_squared.to_form().terms

    def test_dirac_order_and_model(self):
        jet = random_jet(N, 2, 2)
        g = getzler_decompose(build_dirac(jet, -2).dirac)
        assert g.order == 2
        assert model_operator(g).terms == model_dirac(jet).terms

    def test_dirac_square_model(self):
        jet = random_jet(N, 2, 3)
        g = getzler_decompose(build_dirac(jet, -2).dirac_squared)
        assert g.order == 2
        assert model_operator(g).terms == model_heat_operator(jet, with_tau=False).terms

    def test_zero(self):
        g = getzler_decompose(SymbolExpansion.zero(N))
        assert g.parts == {} and g.order is None
        with pytest.raises(ValueError):
            model_operator(g)

    def test_incomplete_bucket(self):
        g = getzler_decompose(build_dirac(single_plane_jet(N, 1), 0).dirac)
        assert not g.is_complete(0)


class TestModels:
    @pytest.mark.parametrize("i", range(N))
    def test_connection_model(self, i):
        jet = random_jet(N, 1, 4)
        spec = build_dirac(jet, -3)
        g = getzler_decompose(build_connection(spec.jets, i, -3))
        assert model_operator(g).terms == model_connection(jet, i).terms

    def test_flat_square_model_has_no_oscillator(self):
        g = getzler_decompose(build_dirac(flat_jet(N), -2).dirac_squared)
        flat = SymbolExpansion(N, 1, "form", {(Z, e(i, 2), 0, 0): FormCoefficient.one(N, 1) for i in range(N)})
        assert model_operator(g).terms == flat.terms

    @pytest.mark.parametrize(
        "jet",
        [single_plane_jet(N, 1), random_jet(N, 2, 5), flat_jet(N, 2, {(2, 3): [["i", "1/2"], ["-1/2", 0]]})],
        ids=["plane", "random", "twisted"],
    )
    def test_parametrix_model(self, jet):
        spec = build_dirac(jet, -2)
        Q = parametrix(spec.heat_operator, 3)
        g = getzler_decompose(Q)
        assert g.order == -2 and g.is_complete(-2)
        assert model_operator(g).terms == model_parametrix(jet).terms

    def test_model_parametrix_inverts(self):
        jet = random_jet(N, 2, 6)
        q = model_parametrix(jet)
        a = model_heat_operator(jet)
        one = SymbolExpansion.one(N, 2, "form")
        assert (compose(a, q) - one).is_zero()
        assert (compose(q, a) - one).is_zero()


class TestTopForm:
    @pytest.mark.parametrize("seed", range(10))
    def test_even_order_vanishes(self, seed):
        rng = random.Random(seed)
        m = rng.choice([-2, 0, 2])
        q = random_graded_symbol(rng, m, p=rng.randint(1, 2))
        rep = leading_top_form(q, m)
        assert rep.parity_zero
        assert rep.model_value.is_zero()
        assert rep.consistent

    @pytest.mark.parametrize("seed", range(6))
    def test_odd_order(self, seed):
        rng = random.Random(50 + seed)
        m = rng.choice([-1, 1])
        q = random_graded_symbol(rng, m)
        rep = leading_top_form(q, m)
        assert rep.below_order_zero
        assert rep.next_degree_zero
        assert rep.model_value.coefficient == rep.full_value.coefficient

    def test_odd_order_nonzero_example(self):
        # dx^{123} R at Getzler order 1: top form x-free, weight -2
        c = FormCoefficient.basis(N, 1, [1, 2, 3])
        q = SymbolExpansion(N, 1, "form", {(Z, Z, 1, 0): c})
        rep = leading_top_form(q)
        assert rep.order == 1
        assert rep.model_value.coefficient == c
        assert rep.leading_exponent == -1.5

    def test_dirac_parametrix_product(self):
        jet = single_plane_jet(N, 1)
        spec = build_dirac(jet, -2)
        DQ = compose(spec.dirac, parametrix(spec.heat_operator, 3))
        rep = leading_top_form(DQ)
        assert rep.order <= 0
        assert rep.parity_zero and rep.consistent

    def test_x_prefixed_diagonal_zero(self):
        rng = random.Random(3)
        q = random_graded_symbol(rng, 0, terms=8)
        xp = q.x_prefixed()
        for d in range(-6, 3):
            assert inverse_fourier_diag(xp, d).is_zero()


class TestComposeGetzler:
    @pytest.mark.parametrize("ij", [(0, 0), (0, 1), (2, 1)])
    def test_connection_product(self, ij):
        i, j = ij
        jet = random_jet(N, 1, 8)
        spec = build_dirac(jet, -4)
        gi = getzler_decompose(build_connection(spec.jets, i, -4))
        gj = getzler_decompose(build_connection(spec.jets, j, -4))
        prod = compose_getzler(gi, gj)
        assert prod.order_ok and prod.top_matches
        expected = compose(model_connection(jet, i), model_connection(jet, j))
        assert prod.model_product.terms == expected.terms

    @pytest.mark.parametrize("seed", range(5))
    def test_order_additive(self, seed):
        rng = random.Random(200 + seed)
        m1, m2 = rng.randint(-2, 2), rng.randint(-2, 2)
        a = random_graded_symbol(rng, m1, terms=4)
        b = random_graded_symbol(rng, m2, terms=4)
        prod = compose_getzler(getzler_decompose(a), getzler_decompose(b))
        assert prod.order_ok
        assert prod.top_matches

    @pytest.mark.parametrize("seed", range(3))
    def test_x_multiplication(self, seed):
        rng = random.Random(300 + seed)
        q = random_graded_symbol(rng, 1, terms=5)
        x = SymbolExpansion(N, 1, "form", {(e(seed % N), Z, 0, 0): FormCoefficient.one(N, 1)})
        order = getzler_decompose(q).order
        assert getzler_decompose(compose(x, q.to_clifford().to_form())).order <= order
