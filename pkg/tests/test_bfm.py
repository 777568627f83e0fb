"""
BFMLIFT — Blowup presentation, lifting certificates, Poisson and Weyl checks
Run: pytest tests/test_bfm.py -v
"""
import time
from fractions import Fraction

import pytest

from bfmlift.core.exceptions import BfmliftError
from bfmlift.services.bfm import (
    blowup_presentation,
    codim2_check,
    coroot_form,
    lift_check,
    lift_report,
    poisson_nondegeneracy,
    root_character,
    weyl_invariance,
)
from bfmlift.services.ideals import PolyIdeal
from bfmlift.services.laurent import LaurentPoly, MonomialMap
from bfmlift.services.mirror import ToricInput, build_mirror, explicit_image_ideal, image_space
from bfmlift.services.rootdata import langlands_dual, preset, weyl_enumerate

ZH = image_space(1)


def reverify(cert, I):
    """Re-check a LIFTED certificate from its printed cofactor alone."""
    G = I.groebner()
    x = LaurentPoly.parse(cert.cofactor, I.space)
    p = root_character(I.space, cert.root)
    d = coroot_form(I.space, cert.coroot, primitive=True)
    return G.contains(x * d - p)


class TestBlowup:

    def test_psu2_text(self):
        b = blowup_presentation(preset("PSU2"))
        assert b.text == "C[z^±1, h, (z^2 - 1)/h]"
        assert len(b.generators) == 1

    def test_su2_text_keeps_coroot_scalar(self):
        b = blowup_presentation(preset("SU2"))
        assert b.text == "C[z^±1, h, (z - 1)/(2*h)]"

    def test_su3_has_one_generator_per_positive_root(self):
        b = blowup_presentation(preset("SU3"))
        assert [g.symbol for g in b.generators] == ["b1", "b2", "b3"]
        assert len(b.localizations) == 3

    @pytest.mark.parametrize("name", ["SU2", "PSU2", "SU3", "SU2xSU2"])
    def test_negative_root_rewrites_hold(self, name):
        b = blowup_presentation(preset(name))
        assert b.rewrites
        assert all(r.verified for r in b.rewrites)

    def test_rewrite_uses_positive_unit(self):
        (r,) = blowup_presentation(preset("PSU2")).rewrites
        assert r.rule == "b[(-2,)] = z^-2*b"

    @pytest.mark.parametrize("name", ["SU2", "PSU2", "SU3", "PSU3", "SU2xSU2"])
    def test_double_dual_has_the_same_blowup(self, name):
        d = preset(name)
        a, b = blowup_presentation(d), blowup_presentation(langlands_dual(langlands_dual(d)))
        assert a.text == b.text
        assert [g.relation for g in a.generators] == [g.relation for g in b.generators]
        assert [r.rule for r in a.rewrites] == [r.rule for r in b.rewrites]


class TestLiftCertificates:

    def test_p1_pgl2(self, p1_pgl2):
        I = p1_pgl2.parametrized
        (cert,) = lift_check(I, preset("PSU2"), assume_reduced=True)
        assert cert.status == "LIFTED"
        assert cert.cofactor == "z"
        assert cert.coroot_content == 1
        assert cert.normal_form == "0"
        assert cert.reducedness == "assumed"
        assert reverify(cert, I)

    def test_p1_pgl2_image(self, p1_pgl2):
        I = p1_pgl2.image_ideal()
        (cert,) = lift_check(I, preset("PSU2"), assume_reduced=True)
        assert cert.status == "LIFTED"
        assert cert.cofactor == "z"
        assert reverify(cert, I)

    def test_p1_sl2(self, p1_sl2):
        I = p1_sl2.parametrized
        (cert,) = lift_check(I, preset("SU2"), assume_reduced=True)
        assert cert.status == "LIFTED"
        assert cert.cofactor == "2*w"
        assert cert.coroot_cofactor == "w"
        assert cert.coroot_content == 2
        assert cert.divisor == "h"
        assert cert.verified
        assert reverify(cert, I)

    def test_shifted_lagrangian_is_obstructed(self):
        I = explicit_image_ideal(["h - z + 2"], 1)
        (cert,) = lift_check(I, preset("PSU2"), seed=0)
        assert cert.status == "OBSTRUCTED"
        assert cert.radical_membership is False
        assert cert.cofactor is None
        witness = cert.witnesses[0]
        z_re, z_im = witness["point"]["z"]
        h_re, h_im = witness["point"]["h"]
        assert abs(z_re - 2) < 1e-6 and abs(z_im) < 1e-6
        assert abs(h_re) < 1e-6 and abs(h_im) < 1e-6
        assert witness["value"] == pytest.approx(3.0, abs=1e-6)

    def test_needs_rank_r_variables(self, p1_pgl2):
        with pytest.raises(BfmliftError):
            lift_check(p1_pgl2.parametrized, preset("SU3"))

    def test_report_aggregates_worst_status(self, p1_pgl2):
        lifted = lift_check(p1_pgl2.parametrized, preset("PSU2"), assume_reduced=True)
        obstructed = lift_check(explicit_image_ideal(["h - z + 2"], 1), preset("PSU2"), seed=0)
        assert lift_report(lifted, [], []).verdict == "LIFTED"
        assert lift_report(lifted, [], []).regular_on_Z
        summary = lift_report(lifted + obstructed, [], [])
        assert summary.verdict == "OBSTRUCTED"
        assert summary.normality == "UNVERIFIED"
        assert lift_report(lifted, [], [], smooth_evidence=True).normality == "smooth-evidence"

    @pytest.mark.parametrize("generators,expected", [
        (["z1 - 1", "z2 - 1"], "LIFTED"),
        (["h1", "h2"], "OBSTRUCTED"),
    ])
    def test_verdict_is_constant_on_weyl_orbits(self, generators, expected):
        su3 = preset("SU3")
        I = explicit_image_ideal(generators, 2)
        assert weyl_invariance(I, su3).verdict == "INVARIANT"
        status = {tuple(c.root): c.status for c in lift_check(I, su3, seed=0)}
        assert set(status.values()) == {expected}
        for w in weyl_enumerate(su3):
            for alpha in su3.positive_roots():
                image = tuple(w.apply(alpha))
                image = image if image in status else tuple(-x for x in image)
                assert status[image] == status[alpha]

    def test_example_runtimes(self, make_p1):
        t0 = time.perf_counter()
        pgl2 = build_mirror(make_p1())
        I = pgl2.image_ideal()
        assert weyl_invariance(I, preset("PSU2")).verdict == "INVARIANT"
        (cert,) = lift_check(I, preset("PSU2"), seed=0)
        assert cert.status == "LIFTED"
        assert time.perf_counter() - t0 < 1.0
        t0 = time.perf_counter()
        sl2 = build_mirror(make_p1(2))
        (cert,) = lift_check(sl2.parametrized, preset("SU2"), seed=0)
        assert cert.status == "LIFTED" and cert.cofactor == "2*w"
        assert time.perf_counter() - t0 < 1.0


class TestCodim2:

    def test_product_of_lines(self):
        t = ToricInput(
            n=2,
            rays=((1, 0), (-1, 0), (0, 1), (0, -1)),
            areas=(0, 0, 0, 0),
            action=MonomialMap(((2, 0), (0, 2))),
        )
        mirror = build_mirror(t)
        (entry,) = codim2_check(mirror.parametrized, preset("SU2xSU2"))
        assert entry.dimension == 2
        assert entry.intersection_dimension == 0
        assert entry.ok

    def test_rank_one_has_no_pairs(self, p1_pgl2):
        assert codim2_check(p1_pgl2.parametrized, preset("PSU2")) == []


class TestPoisson:

    def test_su3_simple_pair(self):
        su3 = preset("SU3")
        t0 = time.perf_counter()
        report = poisson_nondegeneracy(su3, tuple(su3.simple_indices))
        assert time.perf_counter() - t0 < 0.1
        assert report.matrix == ((Fraction(2), Fraction(-1)), (Fraction(-1), Fraction(2)))
        assert report.determinant == 3
        assert report.nondegenerate

    def test_product_pair_is_diagonal(self):
        d = preset("SU2xSU2")
        report = poisson_nondegeneracy(d, tuple(d.simple_indices))
        assert report.matrix == ((Fraction(2), Fraction(0)), (Fraction(0), Fraction(2)))
        assert report.determinant == 4

    def test_distinct_roots_required(self):
        su3 = preset("SU3")
        i = su3.simple_indices[0]
        with pytest.raises(BfmliftError):
            poisson_nondegeneracy(su3, (i, i))


class TestWeylInvariance:

    def test_conic_is_invariant(self):
        I = PolyIdeal((LaurentPoly.parse("z^2 - z*h - 1", ZH),), ZH)
        report = weyl_invariance(I, preset("PSU2"))
        assert report.verdict == "INVARIANT"
        assert report.generators_checked == 1

    def test_shifted_line_is_not(self):
        report = weyl_invariance(explicit_image_ideal(["h - z + 2"], 1), preset("PSU2"))
        assert report.verdict == "NOT_INVARIANT"
        assert report.witness["image"] == "-h + 2 - z^-1"

    def test_budget_gives_inconclusive(self, p2_su3):
        report = weyl_invariance(p2_su3.parametrized, preset("SU3"), budget=1)
        assert report.verdict == "INCONCLUSIVE"
