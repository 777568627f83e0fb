"""
BFMLIFT — Groebner engine: membership, elimination, dimension, cofactors
Run: pytest tests/test_ideals.py -v
"""
import cmath
import random
from fractions import Fraction

import pytest

from bfmlift.core.exceptions import GroebnerBudgetExceeded
from bfmlift.services.ideals import EMPTY, MonomialOrder, PolyIdeal, cofactor, eliminate, normalize_generator
from bfmlift.services.laurent import LaurentPoly, VariableSpace
from bfmlift.services.mirror import image_space

ZH = image_space(1)
WH = VariableSpace.standard(base=1, rank=1, fiber=True)


def P(text, space=ZH):
    return LaurentPoly.parse(text, space)


def ideal(*texts, space=ZH, **kwargs):
    return PolyIdeal.of([P(t, space) for t in texts], space, **kwargs)


class TestMembership:

    def test_multiple_of_generator(self):
        I = ideal("h - z + 2")
        assert I.contains(P("h^2 - h*z + 2*h"))
        assert not I.contains(P("h"))

    def test_laurent_units(self):
        assert ideal("z").is_unit()
        assert not ideal("h").is_unit()

    def test_inverse_powers(self):
        # z - z^-1 = z^-1 (z - 1)(z + 1)
        I = ideal("z - 1")
        assert I.contains(P("z - z^-1"))

    def test_radical(self):
        I = ideal("h^2")
        assert not I.contains(P("h"))
        assert I.radical_contains(P("h"))
        assert not I.radical_contains(P("z - 1"))

    def test_basis_certificate(self):
        G = ideal("z^2 - z*h - 1", "h^2 - 4").groebner()
        cert = G.certificate()
        assert cert["pairwise_nondivisible"] and cert["monic"] and cert["tails_reduced"]
        assert cert["order"] == "grevlex"

    def test_order_independence_on_random_queries(self):
        rng = random.Random(41)
        space = VariableSpace.standard(base=2, rank=1, fiber=True)
        gens = [LaurentPoly.parse(t, space) for t in ("w1 - w2 - h", "w1*w2 - 1 - h^2")]
        forward = PolyIdeal.of(gens, space)
        backward = PolyIdeal.of(list(reversed(gens)), space)
        lex = forward.with_order(MonomialOrder("lex"))
        for _ in range(20):
            a = LaurentPoly(space, {(rng.randint(-1, 1), rng.randint(-1, 1), rng.randint(0, 1)): rng.randint(1, 4)})
            b = LaurentPoly(space, {(rng.randint(-1, 1), 0, rng.randint(0, 2)): rng.randint(-3, 3) or 1})
            member = a * gens[0] + b * gens[1]
            assert forward.contains(member)
            assert backward.contains(member)
            assert lex.contains(member)
            outsider = member + LaurentPoly.variable(space, "h")
            expected = forward.contains(outsider)
            assert backward.contains(outsider) == expected
            assert lex.contains(outsider) == expected

    def test_normal_form_remainders_vanish_on_the_variety(self):
        rng = random.Random(47)
        G = ideal("z^2 - z*h - 1").groebner()
        points = []
        for _ in range(10):
            h = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            z = (h + rng.choice((1, -1)) * cmath.sqrt(h * h + 4)) / 2
            points.append({"z": z, "h": h})
        for _ in range(10):
            p = LaurentPoly(ZH, {
                (rng.randint(-2, 2), rng.randint(0, 2)): Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 3))
                for _ in range(4)
            })
            r = G.normal_form(p)
            member = p - r
            assert G.normal_form(member).is_zero()
            for point in points:
                scale = max(1.0, abs(p.evaluate(point)) + abs(r.evaluate(point)))
                assert abs(member.evaluate(point)) < 1e-8 * scale


    def test_reduced_basis_is_order_of_input_free(self):
        a = ideal("z^2 - z*h - 1", "h^3 - h")
        b = ideal("h^3 - h", "z^2 - z*h - 1")
        assert {str(g) for g in a.groebner().to_laurent()} == {str(g) for g in b.groebner().to_laurent()}

    def test_budget(self):
        space = VariableSpace.standard(base=2, rank=2, torus=True, fiber=True)
        gens = [LaurentPoly.parse(t, space) for t in (
            "z1 - w1^-2*w2^-1", "z2 - w1*w2^-1", "w1 - w1^-1*w2^-1 + 2*h1 - h2", "w2 - w1^-1*w2^-1 + h1 + h2",
        )]
        with pytest.raises(GroebnerBudgetExceeded) as exc:
            PolyIdeal.of(gens, space).groebner(budget=3)
        assert exc.value.bound == 3


class TestBasisExamples:

    def test_conic_in_w_and_h(self):
        I = ideal("h - w + w^-1", space=WH)
        basis = I.groebner().to_laurent()
        assert P("w^2 - w*h - 1", WH) in basis
        polynomial = ideal("h*w - w^2 + 1", space=WH)
        assert all(polynomial.contains(g) for g in basis)
        assert all(I.contains(g) for g in polynomial.generators)

    def test_unit_ideal(self):
        G = ideal("1").groebner()
        assert G.is_unit()
        assert [str(g) for g in G.to_laurent()] == ["1"]

    def test_redundant_generator_collapses(self):
        I = ideal("w^2 - 1", "w - 1", space=WH)
        basis = I.groebner().to_laurent()
        assert P("w - 1", WH) in basis
        assert all(ideal("w - 1", space=WH).contains(g) for g in basis)
        assert I.contains(P("w - 1", WH))


class TestDimension:

    def test_curve(self):
        assert ideal("h - z + 2").dimension() == 1

    def test_points(self):
        assert ideal("z - 1", "h").dimension() == 0

    def test_whole_space_and_empty(self):
        assert PolyIdeal((), ZH).dimension() == 2
        assert ideal("z - z", "1").dimension() == EMPTY

    def test_formal_parameter_not_counted(self):
        I = ideal("h - q*z + 2", novikov="formal")
        assert I.dimension() == 1


class TestElimination:

    def test_example_one_image(self):
        space = VariableSpace.standard(base=1, rank=1, torus=True, fiber=True)
        P_ = PolyIdeal.of([LaurentPoly.parse(t, space) for t in ("z - w", "w - w^-1 - h")], space)
        image = eliminate(P_, ["z", "h"])
        expected = PolyIdeal.of([P("z^2 - z*h - 1")], ZH)
        assert all(expected.contains(g) for g in image.generators)
        assert all(image.contains(g) for g in expected.generators)

    def test_example_two_image(self):
        space = VariableSpace.standard(base=1, rank=1, torus=True, fiber=True)
        P_ = PolyIdeal.of([LaurentPoly.parse(t, space) for t in ("z - w^2", "w - w^-1 - 2*h")], space)
        image = eliminate(P_, ["z", "h"])
        expected = PolyIdeal.of([P("4*z*h^2 - z^2 + 2*z - 1")], ZH)
        assert all(expected.contains(g) for g in image.generators)
        assert all(image.contains(g) for g in expected.generators)

    def test_normalized_generator(self):
        g = normalize_generator(P("-1/2*z^-1 + 1/2*z"))
        assert g == P("z^2 - 1")


class TestCofactor:

    def test_cofactor_identity(self):
        space = VariableSpace.standard(base=1, rank=1, torus=True, fiber=True)
        I = PolyIdeal.of([LaurentPoly.parse(t, space) for t in ("z - w", "w - w^-1 - h")], space)
        G = I.groebner()
        p, d = LaurentPoly.parse("z^2 - 1", space), LaurentPoly.parse("h", space)
        x = cofactor(p, d, G)
        assert x is not None
        assert G.contains(x * d - p)
        assert str(x) == "z"

    def test_no_cofactor_outside_sum(self):
        I = ideal("h - z + 2")
        assert cofactor(P("z^2 - 1"), P("h"), I.groebner()) is None

    def test_scaled_divisor(self):
        I = ideal("h - z + 1")
        x = cofactor(P("z - 1"), P("2*h"), I.groebner())
        assert x is not None
        assert I.contains(x * P("2*h") - P("z - 1"))
        assert x == LaurentPoly.constant(ZH, Fraction(1, 2))

    @pytest.mark.parametrize("text", ["h", "z - 1", "z^2 + h", "3*h*z"])
    def test_divisor_divides_itself(self, text):
        G = ideal("z^2 - z*h - 1").groebner()
        assert cofactor(P(text), P(text), G) == LaurentPoly.constant(ZH, 1)
