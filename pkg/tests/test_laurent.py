"""
BFMLIFT — Laurent polynomials, Novikov coefficients, text grammar
Run: pytest tests/test_laurent.py -v
"""
import cmath
import random
from fractions import Fraction

import pytest

from bfmlift.core.exceptions import IncompatibleRingError, PolynomialParseError, VariableKindError
from bfmlift.services.laurent import (
    LaurentPoly,
    MonomialMap,
    VariableSpace,
    poisson,
    pullback,
    rational_kernel_basis,
)
from bfmlift.services.mirror import image_space
from bfmlift.services.novikov import GaussianRational, NovCoeff
from bfmlift.services.rootdata import preset

W = VariableSpace.standard(base=1)
WH = VariableSpace.standard(base=1, rank=1, fiber=True)
ZH = image_space(1)
ZH2 = image_space(2)


def P(text, space=W):
    return LaurentPoly.parse(text, space)


def random_poly(rng: random.Random, space: VariableSpace, terms: int = 4, spread: int = 2) -> LaurentPoly:
    out = {}
    for _ in range(terms):
        exps = tuple(
            rng.randint(-spread, spread) if flag else rng.randint(0, spread)
            for flag in space.laurent
        )
        out[exps] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
    return LaurentPoly(space, out)


class TestNovikov:

    def test_valuation_and_specialization(self):
        c = NovCoeff.build([(Fraction(1, 2), 3), (Fraction(2), -1)])
        assert c.valuation() == Fraction(1, 2)
        assert c.at_unit() == 2
        assert abs(c.at(0.25) - (3 * 0.5 - 1 / 16)) < 1e-12

    def test_gaussian_arithmetic(self):
        i = GaussianRational(Fraction(0), Fraction(1))
        assert i * i == -1
        assert (GaussianRational(Fraction(3), Fraction(4))).norm() == 25
        assert complex(i.inverse()) == -1j


class TestGrammar:

    @pytest.mark.parametrize("text", [
        "w + w^-1",
        "2*w",
        "q^(1/2)*w",
        "q*w - q^(-1)*w^-2",
        "I*w + 1/2",
        "-w^3 + 3",
    ])
    def test_canonical_round_trip(self, text):
        p = P(text)
        assert str(p) == text
        assert P(str(p)) == p

    def test_terms_print_in_descending_order(self):
        assert str(P("1 + w^-1 + w^2")) == "w^2 + 1 + w^-1"

    def test_parentheses(self):
        assert P("(w + 1)*(w - 1)") == P("w^2 - 1")

    def test_mixed_variables(self):
        p = LaurentPoly.parse("z^2 - z*h - 1", ZH)
        assert str(p) == "z^2 - z*h - 1"

    def test_random_round_trip(self):
        rng = random.Random(3)
        space = VariableSpace.standard(base=2, rank=1, fiber=True)
        for _ in range(25):
            p = random_poly(rng, space)
            assert LaurentPoly.parse(str(p), space) == p

    def test_unknown_variable(self):
        with pytest.raises(PolynomialParseError):
            P("x + 1")

    def test_negative_power_of_fiber_variable(self):
        with pytest.raises(PolynomialParseError):
            LaurentPoly.parse("h^-1", WH)

    def test_dangling_operator(self):
        with pytest.raises(PolynomialParseError) as exc:
            P("w +")
        assert exc.value.position == 3


class TestRing:

    def test_product(self):
        assert P("w + 1") * P("w - 1") == P("w^2 - 1")

    def test_monomial_inverse(self):
        assert P("2*w^3") ** -1 == P("1/2*w^-3")

    def test_non_monomial_inverse_rejected(self):
        with pytest.raises(VariableKindError):
            P("w + 1") ** -1

    def test_different_universes(self):
        with pytest.raises(IncompatibleRingError):
            P("w") + LaurentPoly.parse("h", WH)

    def test_embed_and_substitute(self):
        p = P("w + w^-1").embed(WH) * LaurentPoly.parse("h", WH)
        assert p.substitute({"w": 2}) == LaurentPoly.parse("5/2*h", WH)

    def test_evaluate_with_novikov(self):
        assert P("q*w").evaluate([1.0], q_value=0.5) == pytest.approx(0.5)
        assert P("w + w^-1").evaluate({"w": 2.0}) == pytest.approx(2.5)

    def test_evaluate_is_multiplicative(self):
        rng = random.Random(41)
        for _ in range(20):
            p = random_poly(rng, ZH2, terms=3)
            point = [cmath.rect(rng.uniform(0.5, 2.0), rng.uniform(-3, 3)) for _ in range(2)]
            point += [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(2)]
            assert (p * p).evaluate(point) == pytest.approx(p.evaluate(point) ** 2, rel=1e-9, abs=1e-9)


class TestCalculus:

    def test_log_derivative(self):
        assert P("w + w^-1").log_derivative("w") == P("w - w^-1")

    def test_log_derivative_rejects_fiber_variables(self):
        with pytest.raises(VariableKindError):
            LaurentPoly.variable(WH, "h").log_derivative("h")

    def test_leibniz_on_random_pairs(self):
        rng = random.Random(17)
        space = VariableSpace.standard(base=2, rank=1, fiber=True)
        for _ in range(100):
            p, q = random_poly(rng, space), random_poly(rng, space)
            for name in ("w1", "w2"):
                assert (p * q).log_derivative(name) == p.log_derivative(name) * q + p * q.log_derivative(name)
            assert (p * q).derivative("h") == p.derivative("h") * q + p * q.derivative("h")

    def test_log_derivative_matches_finite_differences(self):
        rng = random.Random(37)
        space = VariableSpace.standard(base=2, rank=1, fiber=True)
        eps = 1e-6
        for _ in range(20):
            p = random_poly(rng, space)
            point = {
                "w1": cmath.rect(rng.uniform(0.5, 2.0), rng.uniform(-3, 3)),
                "w2": cmath.rect(rng.uniform(0.5, 2.0), rng.uniform(-3, 3)),
                "h": complex(rng.uniform(-1, 1), rng.uniform(-1, 1)),
            }
            for name in ("w1", "w2"):
                up, down = dict(point), dict(point)
                up[name] += eps
                down[name] -= eps
                numeric = point[name] * (p.evaluate(up) - p.evaluate(down)) / (2 * eps)
                exact = p.log_derivative(name).evaluate(point)
                assert abs(exact - numeric) < 1e-5 * max(1.0, abs(exact))


class TestMonomialMap:

    def test_pullback_of_root_character(self):
        m = MonomialMap(((2,),))
        assert str(pullback(m, LaurentPoly.parse("z - 1", ZH))) == "w^2 - 1"

    def test_pullback_is_a_ring_homomorphism(self):
        rng = random.Random(23)
        m = MonomialMap(((-2, -1), (1, -1)))
        for _ in range(100):
            p, q = random_poly(rng, ZH2, terms=3), random_poly(rng, ZH2, terms=3)
            assert pullback(m, p * q) == pullback(m, p) * pullback(m, q)
            assert pullback(m, p + q) == pullback(m, p) + pullback(m, q)

    def test_pullback_agrees_with_evaluation(self):
        rng = random.Random(43)
        m = MonomialMap(((-2, -1), (1, -1)))
        for _ in range(10):
            p = random_poly(rng, ZH2, terms=3)
            w = [cmath.rect(rng.uniform(0.5, 2.0), rng.uniform(-3, 3)) for _ in range(2)]
            h = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(2)]
            z = m.apply(w)
            pulled = pullback(m, p).evaluate({"w1": w[0], "w2": w[1], "h1": h[0], "h2": h[1]})
            direct = p.evaluate({"z1": z[0], "z2": z[1], "h1": h[0], "h2": h[1]})
            assert pulled == pytest.approx(direct, rel=1e-9, abs=1e-9)

    def test_kernel_basis(self):
        m = MonomialMap(((1, 1),))
        (v,) = m.kernel_basis()
        assert v[0] + v[1] == 0 and v != (0, 0)
        assert MonomialMap(((2,),)).kernel_basis() == []

    def test_kernel_of_empty_system_is_everything(self):
        assert rational_kernel_basis([], 2) == [(1, 0), (0, 1)]


class TestPoisson:

    def test_basic_bracket(self):
        su2 = preset("SU2")
        z, h = LaurentPoly.variable(ZH, "z"), LaurentPoly.variable(ZH, "h")
        assert poisson(z, h, su2) == z
        assert poisson(h, z, su2) == -z
        assert poisson(z, z, su2).is_zero()

    def test_jacobi_on_random_triples(self):
        rng = random.Random(29)
        su3 = preset("SU3")
        for _ in range(20):
            a, b, c = (random_poly(rng, ZH2, terms=3, spread=1) for _ in range(3))
            total = (
                poisson(a, poisson(b, c, su3), su3)
                + poisson(b, poisson(c, a, su3), su3)
                + poisson(c, poisson(a, b, su3), su3)
            )
            assert total.is_zero()

    def test_leibniz(self):
        rng = random.Random(31)
        su3 = preset("SU3")
        for _ in range(20):
            a, b, c = (random_poly(rng, ZH2, terms=3, spread=1) for _ in range(3))
            assert poisson(a, b * c, su3) == poisson(a, b, su3) * c + b * poisson(a, c, su3)
