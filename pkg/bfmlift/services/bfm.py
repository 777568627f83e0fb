"""
BFMLIFT — Affine blowup algebra and lifting certificates

A°_{G^v} = C[T*T^v_C][(z^alpha - 1)/h_alpha^v]. A Lagrangian Z -> T*T^v_C lifts
to Spec A_{G^v} once every blowup function pulls back to a regular function:
for each positive root we certify  z^alpha - 1 in I + (h_alpha^v)  and extract
x_alpha with  x_alpha * h_alpha^v = z^alpha - 1  modulo I.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
import structlog

from bfmlift.core.config import get_settings
from bfmlift.core.exceptions import BfmliftError, GroebnerBudgetExceeded
from bfmlift.core.observability import get_metrics
from bfmlift.services import numerics
from bfmlift.services.ideals import EMPTY, PolyIdeal, cofactor
from bfmlift.services.laurent import LaurentPoly, VariableSpace, fiber_names, poisson, torus_names
from bfmlift.services.mirror import image_space, weyl_action_on_image
from bfmlift.services.rootdata import RootDatum, simple_reflections

logger = structlog.get_logger(__name__)

LiftStatus = Literal["LIFTED", "OBSTRUCTED", "INCONCLUSIVE"]
Reducedness = Literal["evidenced", "assumed", "rank-deficient", "unverified"]


def root_character(space: VariableSpace, alpha: Sequence[int]) -> LaurentPoly:
    """z^alpha - 1."""
    r = len(alpha)
    return LaurentPoly.monomial(space, dict(zip(torus_names(r), alpha))) - 1


def coroot_form(space: VariableSpace, coroot: Sequence[int], primitive: bool = False) -> LaurentPoly:
    """h_alpha^v = <alpha^v, h>, optionally divided by its content."""
    c = content(coroot) if primitive else 1
    return LaurentPoly.linear_form(space, fiber_names(len(coroot)), [Fraction(x, c) for x in coroot])


def content(vec: Sequence[int]) -> int:
    return math.gcd(*vec) or 1


def _quotient_text(num: LaurentPoly, den: LaurentPoly) -> str:
    den_text = str(den)
    if len(den.terms) > 1 or not den_text.replace("_", "").isalnum():
        den_text = f"({den_text})"
    return f"({num})/{den_text}"


# ============================================
# BLOWUP PRESENTATION
# ============================================

@dataclass(frozen=True)
class BlowupGenerator:
    root_index: int
    symbol: str
    relation: LaurentPoly

    def describe(self) -> str:
        return f"{self.symbol}: {self.relation} = 0"


@dataclass(frozen=True)
class NegativeRootRewrite:
    root_index: int
    positive_index: int
    rule: str
    verified: bool


@dataclass
class BlowupPresentation:
    datum: RootDatum
    space: VariableSpace
    generators: List[BlowupGenerator]
    rewrites: List[NegativeRootRewrite]
    localizations: List[str]
    text: str

    def ideal(self) -> PolyIdeal:
        return PolyIdeal(tuple(g.relation for g in self.generators), self.space)


def blowup_presentation(datum: RootDatum) -> BlowupPresentation:
    """One generator b_alpha per positive root with b_alpha h_alpha^v - (z^alpha - 1) = 0."""
    r = datum.rank
    positive = list(datum.positive_indices)
    symbols = {i: ("b" if len(positive) == 1 else f"b{k + 1}") for k, i in enumerate(positive)}
    base = image_space(r)
    space = base.extend([symbols[i] for i in positive], laurent=False)
    generators: List[BlowupGenerator] = []
    quotients: List[str] = []
    for i in positive:
        alpha, coroot = datum.roots[i], datum.coroots[i]
        b = LaurentPoly.variable(space, symbols[i])
        rel = b * coroot_form(space, coroot) - root_character(space, alpha)
        generators.append(BlowupGenerator(i, symbols[i], rel))
        quotients.append(_quotient_text(root_character(base, alpha), coroot_form(base, coroot)))

    rewrites: List[NegativeRootRewrite] = []
    for i in positive:
        j = datum.negative_of(i)
        alpha = datum.roots[i]
        b = LaurentPoly.variable(space, symbols[i])
        unit = LaurentPoly.monomial(space, dict(zip(torus_names(r), [-a for a in alpha])))
        rewrite = unit * b
        rel = next(g.relation for g in generators if g.root_index == i)
        # (z^-a - 1)/h_{-a} = z^-a b_a, checked against the b_a relation
        residue = rewrite * coroot_form(space, datum.coroots[j]) - root_character(space, datum.roots[j]) + unit * rel
        rewrites.append(NegativeRootRewrite(j, i, f"b[{datum.roots[j]}] = {rewrite}", residue.is_zero()))

    localizations: List[str] = []
    for i in positive:
        inverted = [str(coroot_form(base, datum.coroots[k])) for k in positive if k != i]
        loc = f"C[T*T^v][{symbols[i]}]"
        if inverted:
            loc += "[" + ", ".join(f"({t})^-1" for t in inverted) + "]"
        localizations.append(loc)

    ring = ", ".join([f"{z}^±1" for z in torus_names(r)] + fiber_names(r) + quotients)
    return BlowupPresentation(datum, space, generators, rewrites, localizations, f"C[{ring}]")


# ============================================
# LIFT CERTIFICATES
# ============================================

@dataclass
class SmoothnessReport:
    samples: int = 0
    ranks: List[int] = field(default_factory=list)
    expected_rank: int = 0
    dimension: Optional[int] = None


@dataclass
class LiftCertificate:
    root_index: int
    root: Tuple[int, ...]
    coroot: Tuple[int, ...]
    coroot_content: int
    status: LiftStatus
    reason: Optional[str] = None
    target: str = ""
    divisor: str = ""
    normal_form: Optional[str] = None
    cofactor: Optional[str] = None
    coroot_cofactor: Optional[str] = None
    verified: bool = False
    radical_membership: Optional[bool] = None
    witnesses: List[Dict[str, object]] = field(default_factory=list)
    smoothness: SmoothnessReport = field(default_factory=SmoothnessReport)
    reducedness: Reducedness = "unverified"
    negative_root: Optional[str] = None


def _sample_variety(J: PolyIdeal, polys: List[LaurentPoly], seed: int) -> List[np.ndarray]:
    settings = get_settings()
    if not polys:
        return []
    system = numerics.CompiledSystem(polys, J.space, settings.q_value)
    rng = np.random.default_rng(seed)
    solutions, _ = numerics.multistart(
        system, settings.sample_starts, rng, settings.solver_residual, settings.dedup_tol, settings.newton_max_iter
    )
    return [s.x for s in solutions]


def _point_dict(space: VariableSpace, x: np.ndarray) -> Dict[str, List[float]]:
    return {name: [float(v.real) + 0.0, float(v.imag) + 0.0] for name, v in zip(space.names, x)}


def _certify_root(
    I: PolyIdeal,
    datum: RootDatum,
    i: int,
    assume_reduced: bool,
    budget: Optional[int],
    seed: int,
) -> LiftCertificate:
    settings = get_settings()
    alpha, coroot = datum.roots[i], datum.coroots[i]
    c = content(coroot)
    space = I.space
    p = root_character(space, alpha)
    d = coroot_form(space, coroot, primitive=True)
    d_full = coroot_form(space, coroot)
    cert = LiftCertificate(i, alpha, coroot, c, "INCONCLUSIVE", target=str(p), divisor=str(d))
    neg = LaurentPoly.monomial(image_space(datum.rank), dict(zip(torus_names(datum.rank), [-a for a in alpha])))
    cert.negative_root = f"b[{tuple(-a for a in alpha)}] = {neg}*b[{alpha}]"

    try:
        G = I.groebner(budget)
        J = I.sum([d])
        GJ = J.groebner(budget)
        remainder = GJ.normal_form(p)
        cert.normal_form = str(remainder)
        polys = GJ.to_laurent()
        cert.smoothness.dimension = J.dimension(budget)
        if remainder.is_zero():
            x = cofactor(p, d, G, budget)
            if x is None:
                cert.reason = "cofactor extraction failed"
                return cert
            x_full = x.scale(Fraction(1, c))
            cert.cofactor, cert.coroot_cofactor = str(x), str(x_full)
            cert.verified = G.contains(x * d - p) and G.contains(x_full * d_full - p)
            cert.status = "LIFTED" if cert.verified else "INCONCLUSIVE"
            if not cert.verified:
                cert.reason = "cofactor identity did not re-verify"
            cert.radical_membership = True
        else:
            cert.radical_membership = J.radical_contains(p, budget)
            if cert.radical_membership:
                cert.reason = "reducedness-unverified: z^alpha - 1 vanishes on {h_alpha^v = 0} only to higher order"
    except GroebnerBudgetExceeded as e:
        cert.reason = f"budget: {e}"
        return cert

    points = _sample_variety(J, polys, seed)
    dim = cert.smoothness.dimension
    expected = len(space) - dim if dim is not None and dim != EMPTY else len(space)
    system = numerics.CompiledSystem(polys, space, settings.q_value) if polys else None
    ranks = [numerics.numeric_rank(system.jacobian(x), settings.identity_tol) for x in points] if system else []
    cert.smoothness = SmoothnessReport(len(points), ranks, expected, dim)

    if cert.status == "LIFTED":
        if assume_reduced:
            cert.reducedness = "assumed"
        elif ranks and all(rk == expected for rk in ranks):
            cert.reducedness = "evidenced"
        elif ranks:
            cert.reducedness = "rank-deficient"
        return cert

    if cert.radical_membership is False:
        for x in points:
            value = abs(p.evaluate(x, settings.q_value))
            if value > settings.witness_tol:
                witness: Dict[str, object] = {"point": _point_dict(space, x), "value": value}
                cert.witnesses.append(witness)
        if cert.witnesses:
            cert.status = "OBSTRUCTED"
            cert.reason = "z^alpha - 1 does not vanish on {h_alpha^v = 0}"
        else:
            cert.reason = "not contained, but no numeric witness found"
    return cert


def lift_check(
    I: PolyIdeal,
    datum: RootDatum,
    assume_reduced: bool = False,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[LiftCertificate]:
    """One certificate per positive root, ordered by root index."""
    seed = get_settings().seed if seed is None else seed
    for name in torus_names(datum.rank) + fiber_names(datum.rank):
        if name not in I.space:
            raise BfmliftError(f"lift_check needs {name} in the ideal's variables {I.space.names}")
    certificates = []
    for i in datum.positive_indices:
        cert = _certify_root(I, datum, i, assume_reduced, budget, seed)
        get_metrics().increment("lift_certificates_total", status=cert.status)
        logger.info("lift_certificate", root=list(cert.root), status=cert.status,
                    cofactor=cert.cofactor, reason=cert.reason)
        certificates.append(cert)
    return certificates


# ============================================
# CODIMENSION TWO / POISSON
# ============================================

@dataclass(frozen=True)
class Codim2Entry:
    roots: Tuple[Tuple[int, ...], Tuple[int, ...]]
    dimension: int
    intersection_dimension: int
    ok: bool


def codim2_check(I: PolyIdeal, datum: RootDatum, budget: Optional[int] = None) -> List[Codim2Entry]:
    """dim(I + (h_a1^v, h_a2^v)) <= dim(I) - 2 for every pair of positive roots."""
    base = I.dimension(budget)
    out = []
    for i, j in combinations(datum.positive_indices, 2):
        forms = [coroot_form(I.space, datum.coroots[k], primitive=True) for k in (i, j)]
        dim = I.sum(forms).dimension(budget)
        ok = dim == EMPTY or dim <= base - 2
        out.append(Codim2Entry((datum.roots[i], datum.roots[j]), base, dim, ok))
    return out


@dataclass(frozen=True)
class PoissonReport:
    roots: Tuple[Tuple[int, ...], Tuple[int, ...]]
    matrix: Tuple[Tuple[Fraction, ...], ...]
    determinant: Fraction
    nondegenerate: bool


def poisson_nondegeneracy(datum: RootDatum, pair: Tuple[int, int]) -> PoissonReport:
    """Matrix of {z^{a_i} - 1, h_{a_j}^v} restricted to S = {z^a = 1, h^v = 0}."""
    i, j = pair
    if i == j or datum.roots[i] == datum.roots[j]:
        raise BfmliftError("poisson_nondegeneracy needs two distinct roots")
    space = image_space(datum.rank)
    at_identity = {z: 1 for z in torus_names(datum.rank)}
    rows = []
    for a in (i, j):
        row = []
        for b in (i, j):
            bracket = poisson(root_character(space, datum.roots[a]), coroot_form(space, datum.coroots[b]), datum)
            value = bracket.substitute(at_identity)
            row.append(value.terms.get((0,) * len(space)).at_unit() if not value.is_zero() else Fraction(0))
        rows.append(tuple(Fraction(x) for x in row))
    det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    return PoissonReport((datum.roots[i], datum.roots[j]), tuple(rows), det, det != 0)


# ============================================
# WEYL INVARIANCE
# ============================================

@dataclass
class WeylInvarianceReport:
    verdict: Literal["INVARIANT", "NOT_INVARIANT", "INCONCLUSIVE"]
    generators_checked: int
    witness: Optional[Dict[str, str]] = None
    reason: Optional[str] = None


def weyl_invariance(I: PolyIdeal, datum: RootDatum, budget: Optional[int] = None) -> WeylInvarianceReport:
    """Normal form of s(g) for every simple reflection s and generator g of I."""
    reflections = simple_reflections(datum)
    checked = 0
    try:
        G = I.groebner(budget)
        for s in reflections:
            for g in I.generators:
                image = weyl_action_on_image(datum, s, g)
                checked += 1
                nf = G.normal_form(image)
                if not nf.is_zero():
                    witness = {"element": str(list(s.word)), "generator": str(g),
                               "image": str(image), "normal_form": str(nf)}
                    logger.info("weyl_invariance", verdict="NOT_INVARIANT", **witness)
                    return WeylInvarianceReport("NOT_INVARIANT", checked, witness)
    except GroebnerBudgetExceeded as e:
        return WeylInvarianceReport("INCONCLUSIVE", checked, reason=f"budget: {e}")
    logger.info("weyl_invariance", verdict="INVARIANT", checked=checked)
    return WeylInvarianceReport("INVARIANT", checked)


# ============================================
# AGGREGATE
# ============================================

@dataclass
class LiftSummary:
    verdict: LiftStatus
    regular_on_Z: bool
    normality: Literal["smooth-evidence", "UNVERIFIED"]
    certificates: List[LiftCertificate]
    codim2: List[Codim2Entry]
    poisson: List[PoissonReport]
    weyl: Optional[WeylInvarianceReport]


def lift_report(
    certificates: List[LiftCertificate],
    codim2: List[Codim2Entry],
    poisson_reports: List[PoissonReport],
    weyl: Optional[WeylInvarianceReport] = None,
    smooth_evidence: Optional[bool] = None,
) -> LiftSummary:
    statuses = {c.status for c in certificates}
    if "OBSTRUCTED" in statuses:
        verdict: LiftStatus = "OBSTRUCTED"
    elif "INCONCLUSIVE" in statuses:
        verdict = "INCONCLUSIVE"
    else:
        verdict = "LIFTED"
    regular = verdict == "LIFTED"
    normality = "smooth-evidence" if smooth_evidence else "UNVERIFIED"
    return LiftSummary(verdict, regular, normality, certificates, codim2, poisson_reports, weyl)
