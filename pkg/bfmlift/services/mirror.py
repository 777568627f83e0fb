"""
BFMLIFT — Toric SYZ mirror data

Hori-Vafa superpotential of a toric Fano manifold (one Maslov-2 disc per ray,
weighted by q^area and an optional unit holonomy), the Teleman monomial map
z = w^M, and the ideals presenting Z^T_Y and its image C^T_Y:

    F_i = theta_i(f) - sum_k M_ki h_k        (df = Z_T^* dh, dh left-invariant)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

import structlog

from bfmlift.core.exceptions import BfmliftError, DimensionMismatchError, IncompatibleRingError
from bfmlift.services.ideals import NovikovMode, PolyIdeal, eliminate
from bfmlift.services.laurent import (
    LaurentPoly,
    MonomialMap,
    VariableSpace,
    base_names,
    fiber_names,
    torus_names,
)
from bfmlift.services.novikov import GaussianRational, NovCoeff
from bfmlift.services.rootdata import RootDatum, WeylElement

logger = structlog.get_logger(__name__)


class ToricInputError(BfmliftError):
    """Fan rays, areas, holonomies or the action matrix are inconsistent."""


@dataclass(frozen=True)
class ToricInput:
    n: int
    rays: Tuple[Tuple[int, ...], ...]
    areas: Tuple[Fraction, ...]
    action: MonomialMap
    holonomy: Optional[Tuple[GaussianRational, ...]] = None
    minimal_maslov_at_least_2: bool = True
    h1_generated: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "rays", tuple(tuple(int(x) for x in v) for v in self.rays))
        object.__setattr__(self, "areas", tuple(Fraction(a) for a in self.areas))
        if self.n < 1:
            raise ToricInputError(f"n must be positive, got {self.n}")
        for j, v in enumerate(self.rays):
            if len(v) != self.n:
                raise DimensionMismatchError(f"rays[{j}]", len(v), "n", self.n)
            if math.gcd(*v) != 1:
                raise ToricInputError(f"rays[{j}]={v} is not primitive")
        if len(set(self.rays)) != len(self.rays):
            raise ToricInputError("rays must be pairwise distinct")
        if len(self.areas) != len(self.rays):
            raise DimensionMismatchError("areas", len(self.areas), "rays", len(self.rays))
        if any(a < 0 for a in self.areas):
            raise ToricInputError("areas must be nonnegative")
        if self.action.rows < 1:
            raise ToricInputError("action matrix needs at least one row")
        if self.action.cols != self.n:
            raise DimensionMismatchError("action columns", self.action.cols, "n", self.n)
        if self.holonomy is not None:
            if len(self.holonomy) != len(self.rays):
                raise DimensionMismatchError("holonomy", len(self.holonomy), "rays", len(self.rays))
            for j, hol in enumerate(self.holonomy):
                if GaussianRational._coerce(hol).norm() != 1:
                    raise ToricInputError(f"holonomy[{j}] does not have unit modulus")

    @property
    def rank(self) -> int:
        return self.action.rows


# ============================================
# CONSTRUCTIONS
# ============================================

def hori_vafa(t: ToricInput, novikov: NovikovMode = "unit") -> LaurentPoly:
    """f = sum_j hol_j q^{lambda_j} w^{v_j}."""
    space = VariableSpace.standard(base=t.n)
    terms: Dict[Tuple[int, ...], NovCoeff] = {}
    for j, (ray, area) in enumerate(zip(t.rays, t.areas)):
        hol = t.holonomy[j] if t.holonomy is not None else Fraction(1)
        coeff = NovCoeff.monomial(hol, area if novikov == "formal" else 0)
        terms[ray] = terms[ray] + coeff if ray in terms else coeff
    return LaurentPoly(space, terms)


def teleman_map(t: ToricInput) -> MonomialMap:
    return t.action


def _fiber_term(space: VariableSpace, m: MonomialMap, i: int) -> LaurentPoly:
    """sum_k M_ki h_k, the d log w_i coefficient of Z_T^* dh."""
    return LaurentPoly.linear_form(space, fiber_names(m.rows), m.column(i))


def lagrangian_ideal(f: LaurentPoly, m: MonomialMap, novikov: NovikovMode = "unit") -> PolyIdeal:
    """Z^T_Y in (w, h): generators F_i = theta_i(f) - sum_k M_ki h_k."""
    w = base_names(m.cols)
    if set(f.support()) - set(w) or (len(f.space) and len(f.space) != m.cols):
        raise DimensionMismatchError("potential variables", len(f.space), "action columns", m.cols)
    space = VariableSpace.standard(base=m.cols, rank=m.rows, fiber=True)
    f_up = f.embed(space)
    gens = [f_up.log_derivative(name) - _fiber_term(space, m, i) for i, name in enumerate(w)]
    return PolyIdeal(tuple(gens), space, novikov)


def parametrized_ideal(f: LaurentPoly, m: MonomialMap, novikov: NovikovMode = "unit") -> PolyIdeal:
    """Z^T_Y in (w, z, h) with the graph relations z_k - w^{M_k} adjoined."""
    lag = lagrangian_ideal(f, m, novikov)
    space = VariableSpace.standard(base=m.cols, rank=m.rows, torus=True, fiber=True)
    w = base_names(m.cols)
    graph = [
        LaurentPoly.variable(space, z) - LaurentPoly.monomial(space, dict(zip(w, row)))
        for z, row in zip(torus_names(m.rows), m.matrix)
    ]
    return PolyIdeal(tuple(graph) + tuple(g.embed(space) for g in lag.generators), space, novikov)


def image_ideal(f: LaurentPoly, m: MonomialMap, novikov: NovikovMode = "unit", budget: Optional[int] = None) -> PolyIdeal:
    """C^T_Y: eliminate the moduli variables w from the parametrized ideal."""
    P = parametrized_ideal(f, m, novikov)
    return eliminate(P, torus_names(m.rows) + fiber_names(m.rows), budget)


def image_space(rank: int) -> VariableSpace:
    return VariableSpace.standard(rank=rank, torus=True, fiber=True)


def explicit_image_ideal(generators: Sequence[str], rank: int, novikov: NovikovMode = "unit") -> PolyIdeal:
    """User-supplied (z, h) generators, e.g. the obstruction fixture h - (z - 2)."""
    space = image_space(rank)
    return PolyIdeal(tuple(LaurentPoly.parse(g, space) for g in generators), space, novikov)


@dataclass
class MirrorData:
    toric: ToricInput
    potential: LaurentPoly
    teleman: MonomialMap
    lagrangian: PolyIdeal
    parametrized: PolyIdeal
    novikov: NovikovMode = "unit"
    _image: Optional[PolyIdeal] = field(default=None, repr=False)

    def image_ideal(self, budget: Optional[int] = None) -> PolyIdeal:
        if self._image is None:
            self._image = eliminate(
                self.parametrized, torus_names(self.teleman.rows) + fiber_names(self.teleman.rows), budget
            )
        return self._image


def build_mirror(t: ToricInput, novikov: NovikovMode = "unit") -> MirrorData:
    f = hori_vafa(t, novikov)
    m = teleman_map(t)
    data = MirrorData(t, f, m, lagrangian_ideal(f, m, novikov), parametrized_ideal(f, m, novikov), novikov)
    logger.debug("mirror_built", potential=str(f), rank=m.rows, n=m.cols)
    return data


def graph_of_df_check(mirror: MirrorData) -> Optional[bool]:
    """For M = identity the generators are exactly theta_i(f) - h_i; None otherwise."""
    m = mirror.teleman
    if m != MonomialMap.identity(m.cols):
        return None
    space = mirror.lagrangian.space
    f_up = mirror.potential.embed(space)
    expected = [
        f_up.log_derivative(w) - LaurentPoly.variable(space, h)
        for w, h in zip(base_names(m.cols), fiber_names(m.rows))
    ]
    expected = [e for e in expected if not e.is_zero()]
    return list(mirror.lagrangian.generators) == expected


# ============================================
# WEYL ACTION ON C[T*T^v_C]
# ============================================

def weyl_action_on_image(datum: RootDatum, element: WeylElement, p: LaurentPoly) -> LaurentPoly:
    """z^lam -> z^{S lam},  h_k -> sum_j (S^{-1})_kj h_j."""
    r = datum.rank
    zs, hs = torus_names(r), fiber_names(r)
    for name in zs + hs:
        if name not in p.space:
            raise IncompatibleRingError(f"{name} missing: Weyl action needs the rank-{r} (z, h) ring")
    if element.rank != r:
        raise DimensionMismatchError("Weyl element", element.rank, "datum rank", r)
    space = p.space
    z_idx = [space.index(z) for z in zs]
    h_idx = [space.index(h) for h in hs]
    h_images = [LaurentPoly.linear_form(space, hs, element.inverse_matrix[k]) for k in range(r)]
    result = LaurentPoly.zero(space)
    for exps, coeff in p.terms.items():
        lam = [exps[i] for i in z_idx]
        new = list(exps)
        for k, i in enumerate(z_idx):
            new[i] = sum(element.matrix[k][j] * lam[j] for j in range(r))
        for i in h_idx:
            new[i] = 0
        term = LaurentPoly(space, {tuple(new): coeff})
        for k, i in enumerate(h_idx):
            if exps[i]:
                term = term * h_images[k] ** exps[i]
        result = result + term
    return result
