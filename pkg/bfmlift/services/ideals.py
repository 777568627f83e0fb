"""
BFMLIFT — Groebner engine

Ideals of Laurent polynomial rings C[w^{+-1}, h] are computed in the polynomial
ring C[u, w, h] with u_i w_i = 1 adjoined (Rabinowitsch encoding). In formal
Novikov mode q^{1/D} is an extra Laurent parameter variable.

Buchberger's algorithm with the normal selection strategy, sugar tie-breaking,
the coprime and chain criteria, and an explicit step budget. Bases are reduced,
monic and sorted, so results do not depend on incidental input order.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import structlog

from bfmlift.core.config import get_settings
from bfmlift.core.exceptions import GroebnerBudgetExceeded, IncompatibleRingError
from bfmlift.core.observability import get_metrics
from bfmlift.services.laurent import LaurentPoly, VariableSpace, grevlex_key
from bfmlift.services.novikov import GaussianRational, NovCoeff, Scalar

logger = structlog.get_logger(__name__)

Monomial = Tuple[int, ...]
Poly = Dict[Monomial, Scalar]
NovikovMode = Literal["unit", "formal"]

EMPTY = -1
PARAMETER = "q"
SLOW_GROEBNER_MS = 1000.0


# ============================================
# MONOMIAL ORDERS
# ============================================

@dataclass(frozen=True)
class MonomialOrder:
    """grevlex, lex, or a block order (earlier blocks dominate, grevlex inside blocks).

    Blocks list variable names of the ideal's space; unlisted variables form a
    last block. Auxiliary inverse variables follow their variable's block and the
    Novikov parameter always sits in the last block.
    """

    kind: Literal["grevlex", "lex", "block"] = "grevlex"
    blocks: Tuple[Tuple[str, ...], ...] = ()

    @classmethod
    def elimination(cls, eliminate: Sequence[str], keep: Sequence[str]) -> "MonomialOrder":
        return cls("block", (tuple(eliminate), tuple(keep)))

    def describe(self) -> str:
        if self.kind != "block":
            return self.kind
        return "block(" + " > ".join("{" + ",".join(b) + "}" for b in self.blocks) + ")"


class _EncodedRing:
    """Polynomial ring C[u..., x..., (u_q, q)] hosting a Laurent variable space."""

    def __init__(self, space: VariableSpace, order: MonomialOrder, novikov: NovikovMode, denominator: int = 1):
        self.space = space
        self.order = order
        self.novikov = novikov
        self.denominator = denominator
        laurent = [n for n, flag in zip(space.names, space.laurent) if flag]
        self.aux = {n: f"_u_{n}" for n in laurent}
        names = [self.aux[n] for n in laurent] + list(space.names)
        if novikov == "formal":
            names += ["_u_q", PARAMETER]
        self.names: Tuple[str, ...] = tuple(names)
        self.nvars = len(names)
        self.pos = {n: i for i, n in enumerate(names)}
        self.parameter_count = 1 if novikov == "formal" else 0
        self._var_pos = [self.pos[n] for n in space.names]
        self._aux_pos = [self.pos[self.aux[n]] if n in self.aux else -1 for n in space.names]
        self._key_cache: Dict[Monomial, tuple] = {}
        self._key = self._build_key()

    def _owner(self, ring_name: str) -> str:
        if ring_name in ("_u_q", PARAMETER):
            return PARAMETER
        return ring_name[3:] if ring_name.startswith("_u_") else ring_name

    def _build_key(self) -> Callable[[Monomial], tuple]:
        if self.order.kind == "grevlex":
            return grevlex_key
        if self.order.kind == "lex":
            return tuple
        assigned: Dict[int, int] = {}
        for b, block in enumerate(self.order.blocks):
            for i, n in enumerate(self.names):
                if self._owner(n) in block and self._owner(n) != PARAMETER:
                    assigned.setdefault(i, b)
        last = len(self.order.blocks)
        groups: List[List[int]] = [[] for _ in range(last + 1)]
        for i in range(self.nvars):
            groups[assigned.get(i, last)].append(i)
        groups = [g for g in groups if g]
        self.block_positions = groups

        def key(m: Monomial) -> tuple:
            return tuple(grevlex_key([m[i] for i in g]) for g in groups)

        return key

    def key(self, m: Monomial) -> tuple:
        k = self._key_cache.get(m)
        if k is None:
            k = self._key(m)
            self._key_cache[m] = k
        return k

    def block_of(self, names: Iterable[str]) -> List[int]:
        """Ring positions owned by the given space variables (plus the parameter)."""
        wanted = set(names) | {PARAMETER}
        return [i for i, n in enumerate(self.names) if self._owner(n) in wanted]

    # ── encoding ──────────────────────────────────────────────────
    def unit_relations(self) -> List[Poly]:
        rels = []
        for n, u in self.aux.items():
            m = [0] * self.nvars
            m[self.pos[n]] = 1
            m[self.pos[u]] = 1
            rels.append({tuple(m): Fraction(1), (0,) * self.nvars: Fraction(-1)})
        if self.novikov == "formal":
            m = [0] * self.nvars
            m[self.pos["_u_q"]] = 1
            m[self.pos[PARAMETER]] = 1
            rels.append({tuple(m): Fraction(1), (0,) * self.nvars: Fraction(-1)})
        return rels

    def encode(self, p: LaurentPoly) -> Poly:
        if p.space != self.space:
            p = p.embed(self.space)
        out: Poly = {}
        for exps, coeff in p.terms.items():
            base = [0] * self.nvars
            for i, e in enumerate(exps):
                if e >= 0:
                    base[self._var_pos[i]] = e
                else:
                    base[self._aux_pos[i]] = -e
            if self.novikov == "unit":
                _accumulate(out, tuple(base), coeff.at_unit())
                continue
            for lam, a in coeff.terms:
                k = lam * self.denominator
                if k.denominator != 1:
                    raise IncompatibleRingError(f"q-exponent {lam} not a multiple of 1/{self.denominator}")
                m = list(base)
                if k >= 0:
                    m[self.pos[PARAMETER]] = int(k)
                else:
                    m[self.pos["_u_q"]] = int(-k)
                _accumulate(out, tuple(m), a)
        return out

    def decode(self, poly: Poly, space: Optional[VariableSpace] = None) -> LaurentPoly:
        space = space or self.space
        index = [space.index(n) if n in space else -1 for n in self.space.names]
        terms: Dict[Tuple[int, ...], NovCoeff] = {}
        for m, c in poly.items():
            exps = [0] * len(space)
            for i in range(len(self.space)):
                e = m[self._var_pos[i]] - (m[self._aux_pos[i]] if self._aux_pos[i] >= 0 else 0)
                if e:
                    if index[i] < 0:
                        raise IncompatibleRingError(f"{self.space.names[i]} is not in {space.names}")
                    exps[index[i]] = e
            lam = Fraction(0)
            if self.novikov == "formal":
                lam = Fraction(m[self.pos[PARAMETER]] - m[self.pos["_u_q"]], self.denominator)
            key = tuple(exps)
            piece = NovCoeff.monomial(c, lam)
            terms[key] = terms[key] + piece if key in terms else piece
        return LaurentPoly(space, terms)


def _accumulate(p: Poly, m: Monomial, c: Scalar) -> None:
    value = p.get(m, Fraction(0)) + c
    if value == 0:
        p.pop(m, None)
    else:
        p[m] = value


# ============================================
# BUCHBERGER ENGINE
# ============================================

class _Budget:
    def __init__(self, bound: int):
        self.bound = bound
        self.steps = 0

    def tick(self, n: int = 1) -> None:
        self.steps += n
        if self.steps > self.bound:
            raise GroebnerBudgetExceeded(self.steps, self.bound)


@dataclass
class _Elem:
    poly: Poly
    lm: Monomial
    sugar: int
    coef: Optional[Poly] = None


def _divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


def _deg(p: Poly) -> int:
    return max((sum(m) for m in p), default=0)


def _scale_shift(p: Poly, c: Scalar, shift: Monomial) -> Poly:
    return {tuple(a + b for a, b in zip(m, shift)): v * c for m, v in p.items()}


def _sub_into(target: Poly, p: Poly) -> None:
    for m, v in p.items():
        _accumulate(target, m, -v)


def _mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            _accumulate(out, tuple(a + b for a, b in zip(m1, m2)), c1 * c2)
    return out


class _Engine:
    def __init__(self, ring: _EncodedRing, budget: _Budget, coef_reducer: Optional[Callable[[Poly], Poly]] = None):
        self.ring = ring
        self.budget = budget
        self.coef_reducer = coef_reducer

    def lead(self, p: Poly) -> Monomial:
        return max(p, key=self.ring.key)

    def make(self, p: Poly, sugar: int, coef: Optional[Poly]) -> _Elem:
        lm = self.lead(p)
        lc = p[lm]
        inv = Fraction(1) / lc
        poly = {m: v * inv for m, v in p.items()}
        if coef is not None:
            coef = {m: v * inv for m, v in coef.items()}
            if self.coef_reducer is not None:
                coef = self.coef_reducer(coef)
        return _Elem(poly, lm, sugar, coef)

    def reduce(self, p: Poly, basis: Sequence[_Elem], coef: Optional[Poly] = None) -> Tuple[Poly, Optional[Poly]]:
        """Full reduction; returns (remainder, coef - sum t_j coef_j)."""
        p = dict(p)
        coef = dict(coef) if coef is not None else None
        remainder: Poly = {}
        while p:
            m = self.lead(p)
            c = p[m]
            for g in basis:
                if _divides(g.lm, m):
                    shift = tuple(a - b for a, b in zip(m, g.lm))
                    _sub_into(p, _scale_shift(g.poly, c, shift))
                    if coef is not None and g.coef:
                        _sub_into(coef, _scale_shift(g.coef, c, shift))
                    self.budget.tick()
                    break
            else:
                remainder[m] = c
                del p[m]
        return remainder, coef

    def spoly(self, f: _Elem, g: _Elem) -> Tuple[Poly, int, Optional[Poly]]:
        lcm = _lcm(f.lm, g.lm)
        sf = tuple(a - b for a, b in zip(lcm, f.lm))
        sg = tuple(a - b for a, b in zip(lcm, g.lm))
        s = _scale_shift(f.poly, Fraction(1), sf)
        _sub_into(s, _scale_shift(g.poly, Fraction(1), sg))
        sugar = max(f.sugar + sum(sf), g.sugar + sum(sg))
        coef = None
        if f.coef is not None and g.coef is not None:
            coef = _scale_shift(f.coef, Fraction(1), sf)
            _sub_into(coef, _scale_shift(g.coef, Fraction(1), sg))
        return s, sugar, coef

    def buchberger(self, inputs: Sequence[Tuple[Poly, Optional[Poly]]], seed: Sequence[_Elem] = ()) -> List[_Elem]:
        """Reduced basis of seed + inputs; seed must already be a Groebner basis."""
        basis: List[_Elem] = list(seed)
        pending: set = set()
        track = any(c is not None for _, c in inputs) or any(e.coef is not None for e in seed)

        def add(elem: _Elem) -> None:
            k = len(basis)
            basis.append(elem)
            for i in range(k):
                pending.add((i, k))

        ordered = sorted(
            (item for item in inputs if item[0]),
            key=lambda item: (_deg(item[0]), self.ring.key(self.lead(item[0]))),
        )
        for poly, coef in ordered:
            if track and coef is None:
                coef = {}
            r, c = self.reduce(poly, basis, coef)
            if r:
                add(self.make(r, _deg(poly), c))

        while pending:
            i, j = min(
                pending,
                key=lambda ij: (self.ring.key(_lcm(basis[ij[0]].lm, basis[ij[1]].lm)),
                                max(basis[ij[0]].sugar, basis[ij[1]].sugar), ij),
            )
            pending.discard((i, j))
            self.budget.tick()
            fi, fj = basis[i], basis[j]
            lcm = _lcm(fi.lm, fj.lm)
            if all(a == 0 or b == 0 for a, b in zip(fi.lm, fj.lm)):
                continue
            if any(
                k != i and k != j
                and _divides(basis[k].lm, lcm)
                and (min(i, k), max(i, k)) not in pending
                and (min(j, k), max(j, k)) not in pending
                for k in range(len(basis))
            ):
                continue
            s, sugar, coef = self.spoly(fi, fj)
            r, c = self.reduce(s, basis, coef)
            if r:
                add(self.make(r, sugar, c))
        return self.interreduce(basis)

    def interreduce(self, basis: List[_Elem]) -> List[_Elem]:
        minimal = [
            e for idx, e in enumerate(basis)
            if not any(
                _divides(o.lm, e.lm) and (o.lm != e.lm or jdx < idx)
                for jdx, o in enumerate(basis) if jdx != idx
            )
        ]
        reduced = []
        for idx, e in enumerate(minimal):
            others = [o for jdx, o in enumerate(minimal) if jdx != idx]
            r, c = self.reduce(e.poly, others, e.coef)
            reduced.append(self.make(r, e.sugar, c))
        reduced.sort(key=lambda e: self.ring.key(e.lm))
        return reduced


# ============================================
# PUBLIC TYPES
# ============================================

def _denominator(polys: Iterable[LaurentPoly]) -> int:
    d = 1
    for p in polys:
        for coeff in p.terms.values():
            for den in coeff.exponent_denominators():
                d = d * den // math.gcd(d, den)
    return d


@dataclass(frozen=True)
class PolyIdeal:
    """Ideal of a Laurent ring given by generators in a common variable space."""

    generators: Tuple[LaurentPoly, ...]
    space: VariableSpace
    novikov: NovikovMode = "unit"
    order: MonomialOrder = MonomialOrder()
    _cache: Dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        gens = []
        for g in self.generators:
            if g.space != self.space:
                g = g.embed(self.space)
            if self.novikov == "unit" and g.has_novikov():
                g = g.at_unit()
            if not g.is_zero() and g not in gens:
                gens.append(g)
        object.__setattr__(self, "generators", tuple(gens))

    @classmethod
    def of(cls, generators: Iterable[LaurentPoly], space: Optional[VariableSpace] = None, **kwargs) -> "PolyIdeal":
        generators = list(generators)
        if space is None:
            if not generators:
                raise IncompatibleRingError("cannot infer the variable space of an empty ideal")
            space = generators[0].space
        return cls(tuple(generators), space, **kwargs)

    def with_order(self, order: MonomialOrder) -> "PolyIdeal":
        return PolyIdeal(self.generators, self.space, self.novikov, order)

    def sum(self, extra: Iterable[LaurentPoly]) -> "PolyIdeal":
        return PolyIdeal(self.generators + tuple(extra), self.space, self.novikov, self.order)

    def ring(self, order: Optional[MonomialOrder] = None, extra: Iterable[LaurentPoly] = ()) -> _EncodedRing:
        den = _denominator(list(self.generators) + list(extra)) if self.novikov == "formal" else 1
        return _EncodedRing(self.space, order or self.order, self.novikov, den)

    def groebner(self, budget: Optional[int] = None) -> "GroebnerBasis":
        key = ("gb", budget)
        if key not in self._cache:
            self._cache[key] = groebner(self, budget)
        return self._cache[key]

    def contains(self, p: LaurentPoly, budget: Optional[int] = None) -> bool:
        return self.groebner(budget).contains(p)

    def is_unit(self, budget: Optional[int] = None) -> bool:
        return self.groebner(budget).is_unit()

    def radical_contains(self, p: LaurentPoly, budget: Optional[int] = None) -> bool:
        """p in sqrt(I)  iff  1 in I + (1 - t p)."""
        t = "_t_rad"
        space = self.space.extend([t], laurent=False)
        tp = LaurentPoly.variable(space, t) * p.embed(space)
        lifted = [g.embed(space) for g in self.generators]
        return PolyIdeal(tuple(lifted) + (1 - tp,), space, self.novikov).is_unit(budget)

    def dimension(self, budget: Optional[int] = None) -> int:
        return dimension(self, budget)


@dataclass
class GroebnerBasis:
    """Reduced Groebner basis of an encoded ideal."""

    ring: _EncodedRing
    elements: List[_Elem]
    steps: int

    @property
    def order(self) -> MonomialOrder:
        return self.ring.order

    @property
    def polys(self) -> List[Poly]:
        return [e.poly for e in self.elements]

    def is_unit(self) -> bool:
        return len(self.elements) == 1 and not any(self.elements[0].lm)

    def _engine(self, budget: Optional[int] = None) -> _Engine:
        return _Engine(self.ring, _Budget(budget or get_settings().budget))

    def normal_form_encoded(self, poly: Poly) -> Poly:
        remainder, _ = self._engine().reduce(poly, self.elements)
        return remainder

    def normal_form(self, p: LaurentPoly) -> LaurentPoly:
        return self.ring.decode(self.normal_form_encoded(self.ring.encode(p)))

    def contains(self, p: LaurentPoly) -> bool:
        return not self.normal_form_encoded(self.ring.encode(p))

    def to_laurent(self) -> List[LaurentPoly]:
        out: List[LaurentPoly] = []
        for e in self.elements:
            p = self.ring.decode(e.poly)
            if not p.is_zero() and p not in out:
                out.append(p)
        return out

    def certificate(self) -> Dict[str, object]:
        leads = [e.lm for e in self.elements]
        nondivisible = all(
            not _divides(a, b) for i, a in enumerate(leads) for j, b in enumerate(leads) if i != j
        )
        tails_reduced = all(
            not _divides(o.lm, m)
            for e in self.elements for m in e.poly if m != e.lm
            for o in self.elements
        )
        return {
            "order": self.order.describe(),
            "size": len(self.elements),
            "pairwise_nondivisible": nondivisible,
            "monic": all(e.poly[e.lm] == 1 for e in self.elements),
            "tails_reduced": tails_reduced,
            "steps": self.steps,
        }


# ============================================
# OPERATIONS
# ============================================

def _run(ring: _EncodedRing, polys: Sequence[Poly], bound: int) -> GroebnerBasis:
    metrics = get_metrics()
    started = time.perf_counter()
    budget = _Budget(bound)
    engine = _Engine(ring, budget)
    try:
        elements = engine.buchberger([(p, None) for p in ring.unit_relations() + list(polys)])
    except GroebnerBudgetExceeded:
        metrics.increment("groebner_budget_exceeded_total")
        logger.warning("groebner_budget_exceeded", steps=budget.steps, bound=bound, nvars=ring.nvars)
        raise
    elapsed_ms = (time.perf_counter() - started) * 1000
    metrics.increment("groebner_runs_total")
    metrics.increment("groebner_steps_total", budget.steps)
    metrics.observe("groebner_duration_ms", elapsed_ms)
    log = logger.warning if elapsed_ms > SLOW_GROEBNER_MS else logger.debug
    log("groebner_complete", basis_size=len(elements), steps=budget.steps,
        order=ring.order.describe(), elapsed_ms=round(elapsed_ms, 3))
    return GroebnerBasis(ring, elements, budget.steps)


def groebner(I: PolyIdeal, budget: Optional[int] = None, order: Optional[MonomialOrder] = None) -> GroebnerBasis:
    ring = I.ring(order)
    return _run(ring, [ring.encode(g) for g in I.generators], budget or get_settings().budget)


def normal_form(p: LaurentPoly, G: GroebnerBasis) -> LaurentPoly:
    return G.normal_form(p)


def normalize_generator(p: LaurentPoly) -> LaurentPoly:
    """Shift Laurent exponents to start at 0, clear denominators, positive lead."""
    if p.is_zero():
        return p
    shift = {}
    for name, flag in zip(p.space.names, p.space.laurent):
        lo, _ = p.degree_in(name)
        if flag and lo != 0:
            shift[name] = -lo
    if shift:
        p = p * LaurentPoly.monomial(p.space, shift)
    scalars = [a for c in p.terms.values() for _, a in c.terms]
    if all(isinstance(a, Fraction) for a in scalars):
        den = 1
        num = 0
        for a in scalars:
            den = den * a.denominator // math.gcd(den, a.denominator)
        for a in scalars:
            num = math.gcd(num, (a * den).numerator)
        p = p.scale(Fraction(den, num or 1))
    lead = p.sorted_terms()[0][1].terms[0][1]
    if isinstance(lead, Fraction) and lead < 0:
        p = -p
    elif isinstance(lead, GaussianRational) and (lead.re < 0 or (lead.re == 0 and lead.im < 0)):
        p = -p
    return p


def eliminate(I: PolyIdeal, keep: Sequence[str], budget: Optional[int] = None) -> PolyIdeal:
    """I intersected with C[keep^{+-1}] via a block elimination order."""
    keep = [n for n in I.space.names if n in set(keep)]
    missing = set(keep) - set(I.space.names)
    if missing:
        raise IncompatibleRingError(f"cannot keep unknown variables {sorted(missing)}")
    dropped = [n for n in I.space.names if n not in keep]
    target = I.space.restrict(keep)
    if not dropped:
        return PolyIdeal(I.generators, target, I.novikov)
    ring = I.ring(MonomialOrder.elimination(dropped, keep))
    G = _run(ring, [ring.encode(g) for g in I.generators], budget or get_settings().budget)
    kept_positions = set(ring.block_of(keep))
    generators = []
    for e in G.elements:
        if all(all(m[i] == 0 for i in range(ring.nvars) if i not in kept_positions) for m in e.poly):
            p = ring.decode(e.poly, target)
            if not p.is_zero():
                p = normalize_generator(p)
                if p not in generators:
                    generators.append(p)
    if G.is_unit():
        generators = [LaurentPoly.constant(target, 1)]
    logger.debug("elimination_complete", kept=keep, generators=len(generators))
    return PolyIdeal(tuple(generators), target, I.novikov)


def dimension(I: PolyIdeal, budget: Optional[int] = None) -> int:
    """Krull dimension of the quotient from the lead-term staircase; EMPTY for (1)."""
    G = I.groebner(budget)
    if G.is_unit():
        return EMPTY
    supports = [frozenset(i for i, e in enumerate(el.lm) if e) for el in G.elements]
    n = G.ring.nvars
    for size in range(n, -1, -1):
        for subset in itertools.combinations(range(n), size):
            s = frozenset(subset)
            if not any(sup <= s for sup in supports):
                return size - G.ring.parameter_count
    return 0


def cofactor(
    p: LaurentPoly,
    d: LaurentPoly,
    G: GroebnerBasis,
    budget: Optional[int] = None,
) -> Optional[LaurentPoly]:
    """x with x*d = p modulo I (G a basis of I), or None when p is not in I + (d)."""
    ring = G.ring
    bound = budget or get_settings().budget
    engine_I = _Engine(ring, _Budget(bound))
    zero = {}

    def reduce_mod_I(coef: Poly) -> Poly:
        r, _ = engine_I.reduce(coef, G.elements)
        return r

    seed = [_Elem(e.poly, e.lm, e.sugar, dict(zero)) for e in G.elements]
    one = {(0,) * ring.nvars: Fraction(1)}
    engine = _Engine(ring, _Budget(bound), coef_reducer=reduce_mod_I)
    augmented = engine.buchberger([(ring.encode(d), one)], seed=seed)
    remainder, coef = engine.reduce(ring.encode(p), augmented, {})
    if remainder:
        return None
    x = reduce_mod_I({m: -v for m, v in (coef or {}).items()})
    check = _mul(x, ring.encode(d))
    _sub_into(check, ring.encode(p))
    if reduce_mod_I(check):
        logger.error("cofactor_verification_failed", p=str(p), d=str(d))
        return None
    get_metrics().increment("cofactors_extracted_total")
    return ring.decode(x)
