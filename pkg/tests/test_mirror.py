"""
BFMLIFT — Hori-Vafa potentials, Teleman map, Lagrangian and image ideals
Run: pytest tests/test_mirror.py -v
"""
import random
from fractions import Fraction

import pytest

from bfmlift.core.exceptions import DimensionMismatchError, IncompatibleRingError
from bfmlift.services.laurent import LaurentPoly, MonomialMap, VariableSpace, poisson
from bfmlift.services.mirror import (
    ToricInput,
    ToricInputError,
    build_mirror,
    explicit_image_ideal,
    graph_of_df_check,
    hori_vafa,
    image_space,
    lagrangian_ideal,
    weyl_action_on_image,
)
from bfmlift.services.novikov import GaussianRational
from bfmlift.services.rootdata import preset, simple_reflections, weyl_enumerate


ZH = image_space(1)
ZH2 = image_space(2)


def random_image_poly(rng, space, terms=3):
    out = {}
    for _ in range(terms):
        exps = tuple(rng.randint(-1, 1) if flag else rng.randint(0, 1) for flag in space.laurent)
        out[exps] = Fraction(rng.randint(-4, 4), rng.randint(1, 2))
    return LaurentPoly(space, out)


class TestPotential:

    def test_p1_unit(self, make_p1):
        assert str(hori_vafa(make_p1())) == "w + w^-1"

    def test_p1_formal_areas(self, make_p1):
        f = hori_vafa(make_p1(areas=(1, Fraction(1, 2))), novikov="formal")
        assert str(f) == "q*w + q^(1/2)*w^-1"

    def test_unit_mode_drops_areas(self, make_p1):
        f = hori_vafa(make_p1(areas=(1, Fraction(1, 2))), novikov="unit")
        assert str(f) == "w + w^-1"

    def test_p2(self, p2_su3):
        f = p2_su3.potential
        expected = LaurentPoly.parse("w1 + w2 + w1^-1*w2^-1", VariableSpace.standard(base=2))
        assert f == expected

    def test_holonomy(self):
        i = GaussianRational(Fraction(0), Fraction(1))
        t = ToricInput(n=1, rays=((1,), (-1,)), areas=(0, 0), action=MonomialMap(((1,),)), holonomy=(i, -i))
        assert str(hori_vafa(t)) == "I*w - I*w^-1"


class TestToricInput:

    def test_non_primitive_ray(self):
        with pytest.raises(ToricInputError):
            ToricInput(n=1, rays=((2,), (-1,)), areas=(0, 0), action=MonomialMap(((1,),)))

    def test_repeated_ray(self):
        with pytest.raises(ToricInputError):
            ToricInput(n=1, rays=((1,), (1,)), areas=(0, 0), action=MonomialMap(((1,),)))

    def test_negative_area(self):
        with pytest.raises(ToricInputError):
            ToricInput(n=1, rays=((1,), (-1,)), areas=(0, -1), action=MonomialMap(((1,),)))

    def test_area_count(self):
        with pytest.raises(DimensionMismatchError):
            ToricInput(n=1, rays=((1,), (-1,)), areas=(0,), action=MonomialMap(((1,),)))

    def test_action_columns(self):
        with pytest.raises(DimensionMismatchError):
            ToricInput(n=1, rays=((1,), (-1,)), areas=(0, 0), action=MonomialMap(((1, 0),)))

    def test_holonomy_must_be_unit(self):
        with pytest.raises(ToricInputError):
            ToricInput(
                n=1, rays=((1,), (-1,)), areas=(0, 0), action=MonomialMap(((1,),)),
                holonomy=(GaussianRational(Fraction(2), Fraction(0)), GaussianRational(Fraction(1), Fraction(0))),
            )


class TestLagrangian:

    def test_p1_generator(self, p1_pgl2):
        (g,) = p1_pgl2.lagrangian.generators
        assert g == LaurentPoly.parse("w - w^-1 - h", p1_pgl2.lagrangian.space)

    def test_sl2_generator_carries_matrix_entry(self, p1_sl2):
        (g,) = p1_sl2.lagrangian.generators
        assert g == LaurentPoly.parse("w - w^-1 - 2*h", p1_sl2.lagrangian.space)

    def test_p2_generators(self, p2_su3):
        space = p2_su3.lagrangian.space
        expected = [
            LaurentPoly.parse("w1 - w1^-1*w2^-1 + 2*h1 - h2", space),
            LaurentPoly.parse("w2 - w1^-1*w2^-1 + h1 + h2", space),
        ]
        assert list(p2_su3.lagrangian.generators) == expected

    def test_lagrangian_is_a_curve(self, p1_pgl2):
        assert p1_pgl2.lagrangian.dimension() == 1

    def test_potential_space_must_match(self):
        f = LaurentPoly.parse("w1 + w2", VariableSpace.standard(base=2))
        with pytest.raises(DimensionMismatchError):
            lagrangian_ideal(f, MonomialMap(((1,),)))

    def test_graph_of_df(self, p1_pgl2, p1_sl2):
        assert graph_of_df_check(p1_pgl2) is True
        assert graph_of_df_check(p1_sl2) is None


class TestImage:

    def test_p1_image_contains_conic(self, p1_pgl2):
        image = p1_pgl2.image_ideal()
        assert image.contains(LaurentPoly.parse("z^2 - z*h - 1", ZH))
        assert image.dimension() == 1

    def test_image_is_cached(self, p1_pgl2):
        assert p1_pgl2.image_ideal() is p1_pgl2.image_ideal()

    def test_explicit_generators(self):
        I = explicit_image_ideal(["h - z + 2"], 1)
        assert I.space == ZH
        assert I.contains(LaurentPoly.parse("h*z - z^2 + 2*z", ZH))


class TestWeylAction:

    def test_su2_reflection_on_conic(self):
        su2 = preset("SU2")
        (s,) = simple_reflections(su2)
        moved = weyl_action_on_image(su2, s, LaurentPoly.parse("z^2 - z*h - 1", ZH))
        assert moved == LaurentPoly.parse("z^-2 + z^-1*h - 1", ZH)

    def test_identity_fixes_everything(self):
        su3 = preset("SU3")
        e = weyl_enumerate(su3)[0]
        p = LaurentPoly.parse("z1*h2 - z2^-1 + h1^2", ZH2)
        assert weyl_action_on_image(su3, e, p) == p

    def test_action_preserves_the_bracket(self):
        rng = random.Random(7)
        su3 = preset("SU3")
        for s in weyl_enumerate(su3):
            for _ in range(5):
                a, b = random_image_poly(rng, ZH2), random_image_poly(rng, ZH2)
                lhs = weyl_action_on_image(su3, s, poisson(a, b, su3))
                rhs = poisson(weyl_action_on_image(su3, s, a), weyl_action_on_image(su3, s, b), su3)
                assert lhs == rhs

    def test_action_composes(self):
        rng = random.Random(13)
        su3 = preset("SU3")
        elements = weyl_enumerate(su3)
        for _ in range(10):
            p = random_image_poly(rng, ZH2, terms=4)
            a, b = rng.choice(elements), rng.choice(elements)
            twice = weyl_action_on_image(su3, a, weyl_action_on_image(su3, b, p))
            assert twice == weyl_action_on_image(su3, a.compose(b), p)

    def test_needs_rank_r_ring(self):
        su3 = preset("SU3")
        (s, _) = simple_reflections(su3)
        with pytest.raises(IncompatibleRingError):
            weyl_action_on_image(su3, s, LaurentPoly.parse("z - 1", ZH))


def test_build_mirror_records_mode(make_p1):
    data = build_mirror(make_p1(areas=(1, 1)), novikov="formal")
    assert data.novikov == "formal"
    assert data.potential.has_novikov()
