"""
BFMLIFT — Laurent polynomial ring on T*T^v_C and on the mirror torus

Exact multivariate Laurent polynomials with Novikov coefficients. Base (w) and
torus (z) variables are Laurent, fiber (h) variables are polynomial, matching
C[T*T^v_C] = C[z^{+-1}, h].

Text grammar (round-trips canonical forms):
    term  := [c*][I*][q^lam*]x1^a*x2^b...
    poly  := term ((' + ' | ' - ') term)*
with q^(1/2), q^(-1) parenthesized and negative integer exponents written w^-1.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import TYPE_CHECKING, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import structlog

from bfmlift.core.exceptions import (
    DimensionMismatchError,
    IncompatibleRingError,
    PolynomialParseError,
    VariableKindError,
    ZeroCoordinateError,
)
from bfmlift.services.novikov import (
    GaussianRational,
    NovCoeff,
    Scalar,
    ScalarLike,
    to_scalar,
)

if TYPE_CHECKING:
    from bfmlift.services.rootdata import RootDatum

logger = structlog.get_logger(__name__)

Exponents = Tuple[int, ...]
Number = Union[int, float, complex, Fraction, GaussianRational]

RESERVED_NAMES = frozenset({"q", "I"})
DEFAULT_Q_VALUE = math.exp(-1.0)


def base_names(n: int) -> List[str]:
    return ["w"] if n == 1 else [f"w{i + 1}" for i in range(n)]


def torus_names(r: int) -> List[str]:
    return ["z"] if r == 1 else [f"z{k + 1}" for k in range(r)]


def fiber_names(r: int) -> List[str]:
    return ["h"] if r == 1 else [f"h{k + 1}" for k in range(r)]


def grevlex_key(exps: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    """Larger key = larger monomial in degree-reverse-lexicographic order."""
    return (sum(exps), tuple(-e for e in reversed(exps)))


# ============================================
# VARIABLE UNIVERSE
# ============================================

@dataclass(frozen=True)
class VariableSpace:
    """Ordered variable names; laurent[i] says whether names[i] may be inverted."""

    names: Tuple[str, ...]
    laurent: Tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.names) != len(self.laurent):
            raise DimensionMismatchError("names", len(self.names), "laurent", len(self.laurent))
        if len(set(self.names)) != len(self.names):
            raise IncompatibleRingError(f"duplicate variable names in {self.names}")
        for name in self.names:
            if name in RESERVED_NAMES or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
                raise IncompatibleRingError(f"invalid variable name {name!r}")

    @classmethod
    def standard(cls, base: int = 0, rank: int = 0, torus: bool = False, fiber: bool = False) -> "VariableSpace":
        """Variables in the fixed order w..., z..., h..."""
        names: List[str] = list(base_names(base)) if base else []
        laurent: List[bool] = [True] * len(names)
        if torus and rank:
            names += torus_names(rank)
            laurent += [True] * rank
        if fiber and rank:
            names += fiber_names(rank)
            laurent += [False] * rank
        return cls(tuple(names), tuple(laurent))

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise IncompatibleRingError(f"variable {name!r} not in {self.names}") from None

    def is_laurent(self, name_or_index: Union[str, int]) -> bool:
        i = name_or_index if isinstance(name_or_index, int) else self.index(name_or_index)
        return self.laurent[i]

    def extend(self, names: Iterable[str], laurent: bool = False) -> "VariableSpace":
        new = [n for n in names if n not in self.names]
        return VariableSpace(self.names + tuple(new), self.laurent + (laurent,) * len(new))

    def restrict(self, keep: Iterable[str]) -> "VariableSpace":
        keep_set = set(keep)
        idx = [i for i, n in enumerate(self.names) if n in keep_set]
        return VariableSpace(tuple(self.names[i] for i in idx), tuple(self.laurent[i] for i in idx))


# ============================================
# LAURENT POLYNOMIAL
# ============================================

class LaurentPoly:
    """Immutable sparse Laurent polynomial with NovCoeff coefficients."""

    __slots__ = ("space", "_terms", "_hash")

    def __init__(
        self,
        space: VariableSpace,
        terms: Optional[Mapping[Exponents, Union[NovCoeff, ScalarLike]]] = None,
    ):
        self.space = space
        clean: Dict[Exponents, NovCoeff] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(space):
                raise DimensionMismatchError("exponent vector", len(exps), "variable space", len(space))
            for i, e in enumerate(exps):
                if e < 0 and not space.laurent[i]:
                    raise VariableKindError(f"negative exponent on polynomial variable {space.names[i]}")
            c = coeff if isinstance(coeff, NovCoeff) else NovCoeff.constant(coeff)
            if exps in clean:
                c = clean[exps] + c
            if c.is_zero():
                clean.pop(exps, None)
            else:
                clean[exps] = c
        self._terms = clean
        self._hash: Optional[int] = None

    # ── constructors ──────────────────────────────────────────────
    @classmethod
    def zero(cls, space: VariableSpace) -> "LaurentPoly":
        return cls(space)

    @classmethod
    def constant(cls, space: VariableSpace, c: Union[NovCoeff, ScalarLike] = 1) -> "LaurentPoly":
        return cls(space, {(0,) * len(space): c})

    @classmethod
    def variable(cls, space: VariableSpace, name: str) -> "LaurentPoly":
        exps = [0] * len(space)
        exps[space.index(name)] = 1
        return cls(space, {tuple(exps): 1})

    @classmethod
    def monomial(
        cls,
        space: VariableSpace,
        exps: Union[Mapping[str, int], Sequence[int]],
        coeff: Union[NovCoeff, ScalarLike] = 1,
    ) -> "LaurentPoly":
        if isinstance(exps, Mapping):
            vec = [0] * len(space)
            for name, e in exps.items():
                vec[space.index(name)] += int(e)
            exps = vec
        return cls(space, {tuple(exps): coeff})

    @classmethod
    def linear_form(cls, space: VariableSpace, names: Sequence[str], coefficients: Sequence[ScalarLike]) -> "LaurentPoly":
        if len(names) != len(coefficients):
            raise DimensionMismatchError("linear form variables", len(names), "coefficients", len(coefficients))
        result = cls.zero(space)
        for name, c in zip(names, coefficients):
            if c:
                result = result + cls.variable(space, name).scale(c)
        return result

    # ── accessors ─────────────────────────────────────────────────
    @property
    def terms(self) -> Mapping[Exponents, NovCoeff]:
        return MappingProxyType(self._terms)

    def sorted_terms(self) -> List[Tuple[Exponents, NovCoeff]]:
        return sorted(self._terms.items(), key=lambda kv: grevlex_key(kv[0]), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def has_novikov(self) -> bool:
        return any(any(lam != 0 for lam, _ in c.terms) for c in self._terms.values())

    def support(self) -> Tuple[str, ...]:
        used = set()
        for exps in self._terms:
            used.update(i for i, e in enumerate(exps) if e)
        return tuple(self.space.names[i] for i in sorted(used))

    def degree_in(self, name: str) -> Tuple[int, int]:
        """(min, max) exponent of one variable over all terms."""
        i = self.space.index(name)
        values = [exps[i] for exps in self._terms] or [0]
        return min(values), max(values)

    # ── ring operations ───────────────────────────────────────────
    def _coerce(self, other: object) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            if other.space != self.space:
                raise IncompatibleRingError(
                    f"variable universes differ: {self.space.names} vs {other.space.names}"
                )
            return other
        if isinstance(other, NovCoeff):
            return LaurentPoly.constant(self.space, other)
        if isinstance(other, (int, Fraction, GaussianRational)) and not isinstance(other, bool):
            return LaurentPoly.constant(self.space, other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: object) -> "LaurentPoly":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        merged: Dict[Exponents, NovCoeff] = dict(self._terms)
        for exps, c in o._terms.items():
            merged[exps] = merged[exps] + c if exps in merged else c
        return LaurentPoly(self.space, merged)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.space, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other: object) -> "LaurentPoly":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: object) -> "LaurentPoly":
        return (-self) + other

    def __mul__(self, other: object) -> "LaurentPoly":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        acc: Dict[Exponents, NovCoeff] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in o._terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                acc[exps] = acc[exps] + c if exps in acc else c
        return LaurentPoly(self.space, acc)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "LaurentPoly":
        if not isinstance(exponent, int):
            raise TypeError("exponent must be an integer")
        if exponent < 0:
            return self._monomial_inverse() ** (-exponent)
        result = LaurentPoly.constant(self.space, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def _monomial_inverse(self) -> "LaurentPoly":
        if len(self._terms) != 1:
            raise VariableKindError("only single monomials can be inverted")
        (exps, coeff), = self._terms.items()
        if len(coeff.terms) != 1:
            raise VariableKindError("coefficient is not a unit")
        (lam, a), = coeff.terms
        inv = tuple(-e for e in exps)
        return LaurentPoly(self.space, {inv: NovCoeff.monomial(Fraction(1) / a, -lam)})

    def scale(self, factor: ScalarLike) -> "LaurentPoly":
        s = to_scalar(factor)
        return LaurentPoly(self.space, {e: c.scale(s) for e, c in self._terms.items()})

    def __eq__(self, other: object) -> bool:
        if isinstance(other, LaurentPoly):
            return self.space == other.space and self._terms == other._terms
        if isinstance(other, (int, Fraction, GaussianRational)) and not isinstance(other, bool):
            return self == LaurentPoly.constant(self.space, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.space, frozenset(self._terms.items())))
        return self._hash

    # ── calculus ──────────────────────────────────────────────────
    def derivative(self, name: str) -> "LaurentPoly":
        i = self.space.index(name)
        out: Dict[Exponents, NovCoeff] = {}
        for exps, c in self._terms.items():
            if exps[i]:
                new = list(exps)
                new[i] -= 1
                out[tuple(new)] = c.scale(exps[i])
        return LaurentPoly(self.space, out)

    def log_derivative(self, name_or_index: Union[str, int]) -> "LaurentPoly":
        i = name_or_index if isinstance(name_or_index, int) else self.space.index(name_or_index)
        if not 0 <= i < len(self.space):
            raise IndexError(f"variable index {i} out of range")
        if not self.space.laurent[i]:
            raise VariableKindError(
                f"log-derivative needs a Laurent variable, {self.space.names[i]} is polynomial"
            )
        return LaurentPoly(self.space, {e: c.scale(e[i]) for e, c in self._terms.items() if e[i]})

    # ── specialization ────────────────────────────────────────────
    def at_unit(self) -> "LaurentPoly":
        """Specialize the Novikov parameter q = 1."""
        return LaurentPoly(self.space, {e: c.at_unit() for e, c in self._terms.items()})

    def substitute(self, values: Mapping[str, ScalarLike]) -> "LaurentPoly":
        """Exact substitution of numbers for some variables (kept in the same space)."""
        idx = {self.space.index(n): to_scalar(v) for n, v in values.items()}
        out: Dict[Exponents, NovCoeff] = {}
        for exps, c in self._terms.items():
            factor: Scalar = Fraction(1)
            new = list(exps)
            for i, v in idx.items():
                if exps[i] < 0 and v == 0:
                    raise ZeroCoordinateError(f"{self.space.names[i]} = 0 in a negative power")
                factor = factor * (v ** exps[i])
                new[i] = 0
            key = tuple(new)
            piece = c.scale(factor)
            out[key] = out[key] + piece if key in out else piece
        return LaurentPoly(self.space, out)

    def embed(self, space: VariableSpace) -> "LaurentPoly":
        """Re-express in a universe that contains every variable this polynomial uses."""
        if space == self.space:
            return self
        positions = []
        for i, name in enumerate(self.space.names):
            if name in space:
                j = space.index(name)
                if self.space.laurent[i] and not space.laurent[j] and self.degree_in(name)[0] < 0:
                    raise VariableKindError(f"{name} is inverted but polynomial in the target space")
                positions.append(j)
            else:
                positions.append(-1)
        out: Dict[Exponents, NovCoeff] = {}
        for exps, c in self._terms.items():
            new = [0] * len(space)
            for i, e in enumerate(exps):
                if e:
                    if positions[i] < 0:
                        raise IncompatibleRingError(
                            f"variable {self.space.names[i]} missing from {space.names}"
                        )
                    new[positions[i]] = e
            out[tuple(new)] = c
        return LaurentPoly(space, out)

    def evaluate(self, point: Union[Mapping[str, Number], Sequence[Number]], q_value: float = DEFAULT_Q_VALUE) -> complex:
        return evaluate(self, point, q_value)

    # ── text ──────────────────────────────────────────────────────
    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"LaurentPoly({render(self)!r}, vars={self.space.names})"

    @classmethod
    def parse(cls, text: str, space: VariableSpace) -> "LaurentPoly":
        return _Parser(text, space).parse()


# ============================================
# RING OPERATIONS
# ============================================

def log_derivative(p: LaurentPoly, i: Union[int, str]) -> LaurentPoly:
    """theta_i(p) = w_i * dp/dw_i, the coefficient of d log w_i in dp."""
    return p.log_derivative(i)


@dataclass(frozen=True)
class MonomialMap:
    """Torus homomorphism z_k = prod_i w_i^{M_ki} given by an r x n integer matrix."""

    matrix: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(x) for x in row) for row in self.matrix)
        if rows and len({len(row) for row in rows}) != 1:
            raise DimensionMismatchError("matrix row 0", len(rows[0]), "another matrix row", min(len(r) for r in rows))
        object.__setattr__(self, "matrix", rows)

    @classmethod
    def identity(cls, n: int) -> "MonomialMap":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def rows(self) -> int:
        return len(self.matrix)

    @property
    def cols(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0

    def column(self, i: int) -> Tuple[int, ...]:
        return tuple(row[i] for row in self.matrix)

    def apply(self, w: Sequence[Number]) -> List[complex]:
        """Numeric image z = w^M of a point of the moduli torus."""
        if len(w) != self.cols:
            raise DimensionMismatchError("point", len(w), "monomial map columns", self.cols)
        out = []
        for row in self.matrix:
            value = complex(1.0)
            for wi, e in zip(w, row):
                if e:
                    value *= complex(wi) ** e
            out.append(value)
        return out

    def kernel_basis(self) -> List[Tuple[int, ...]]:
        """Primitive integer vectors spanning ker M over Q."""
        return rational_kernel_basis([list(row) for row in self.matrix], self.cols)


def rational_kernel_basis(rows: Sequence[Sequence[int]], ncols: int) -> List[Tuple[int, ...]]:
    """Integer basis of the rational null space of an integer matrix (sympy)."""
    import sympy

    if ncols == 0:
        return []
    if not rows:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    basis = []
    for vec in sympy.Matrix(rows).nullspace():
        denominators = [sympy.fraction(sympy.nsimplify(x))[1] for x in vec]
        scale = sympy.ilcm(*denominators) if denominators else 1
        ints = [int(x * scale) for x in vec]
        g = math.gcd(*ints) or 1
        basis.append(tuple(x // g for x in ints))
    return basis


def pullback(m: MonomialMap, p: LaurentPoly, base_space: Optional[VariableSpace] = None) -> LaurentPoly:
    """Substitute z_k -> w^{M_k.}; other variables (h) pass through unchanged."""
    z_names = [n for n in torus_names(m.rows) if n in p.space]
    if len(z_names) != m.rows:
        present = len([n for n in p.space.names if n.rstrip("0123456789") == "z"])
        raise DimensionMismatchError("polynomial z-variables", present, "monomial map rows", m.rows)
    w_names = base_names(m.cols)
    rest = [n for n in p.space.names if n not in z_names]
    if base_space is None:
        base_space = VariableSpace(
            tuple(w_names) + tuple(rest),
            (True,) * len(w_names) + tuple(p.space.is_laurent(n) for n in rest),
        )
    z_idx = [p.space.index(n) for n in z_names]
    w_idx = [base_space.index(n) for n in w_names]
    rest_map = [(p.space.index(n), base_space.index(n)) for n in rest]
    out: Dict[Exponents, NovCoeff] = {}
    for exps, c in p.terms.items():
        new = [0] * len(base_space)
        for k, zi in enumerate(z_idx):
            lam = exps[zi]
            if lam:
                for i, wi in enumerate(w_idx):
                    new[wi] += lam * m.matrix[k][i]
        for src, dst in rest_map:
            new[dst] += exps[src]
        key = tuple(new)
        out[key] = out[key] + c if key in out else c
    return LaurentPoly(base_space, out)


def poisson(p: LaurentPoly, q: LaurentPoly, datum: "RootDatum") -> LaurentPoly:
    """Standard bracket on T*T^v_C:  {z^a, h_k} = a_k z^a,  {z,z} = {h,h} = 0."""
    if p.space != q.space:
        raise IncompatibleRingError("poisson operands live in different universes")
    r = datum.rank
    zs, hs = torus_names(r), fiber_names(r)
    for name in zs + hs:
        if name not in p.space:
            raise DimensionMismatchError("bracket rank", r, "polynomial z/h variables", len(p.space))
    result = LaurentPoly.zero(p.space)
    for z, h in zip(zs, hs):
        result = result + p.log_derivative(z) * q.derivative(h) - p.derivative(h) * q.log_derivative(z)
    return result


def evaluate(
    p: LaurentPoly,
    point: Union[Mapping[str, Number], Sequence[Number]],
    q_value: float = DEFAULT_Q_VALUE,
) -> complex:
    """Numeric value; q is specialized to q_value (default e^-1)."""
    if q_value <= 0:
        raise ValueError("q_value must be positive")
    if isinstance(point, Mapping):
        values = [complex(point[n]) if n in point else None for n in p.space.names]
    else:
        if len(point) != len(p.space):
            raise DimensionMismatchError("point", len(point), "variable space", len(p.space))
        values = [complex(v) for v in point]
    total = complex(0.0)
    for exps, c in p.terms.items():
        term = c.at(q_value)
        for i, e in enumerate(exps):
            if e:
                v = values[i]
                if v is None:
                    raise DimensionMismatchError(f"point (missing {p.space.names[i]})", 0, "variable", 1)
                if v == 0 and e < 0:
                    raise ZeroCoordinateError(f"{p.space.names[i]} = 0 in a negative power")
                term *= v ** e
        total += term
    return total


# ============================================
# TEXT RENDERING
# ============================================

def _render_q(lam: Fraction) -> str:
    if lam == 1:
        return "q"
    if lam.denominator == 1 and lam > 0:
        return f"q^{lam.numerator}"
    return f"q^({lam})"


def _render_term(magnitude: Fraction, imaginary: bool, lam: Fraction, exps: Exponents, names: Sequence[str]) -> str:
    factors: List[str] = []
    for name, e in zip(names, exps):
        if e == 1:
            factors.append(name)
        elif e:
            factors.append(f"{name}^{e}")
    head: List[str] = []
    if magnitude != 1 or (not factors and not imaginary and lam == 0):
        head.append(str(magnitude))
    if imaginary:
        head.append("I")
    if lam != 0:
        head.append(_render_q(lam))
    return "*".join(head + factors)


def render(p: LaurentPoly) -> str:
    pieces: List[Tuple[bool, str]] = []
    for exps, coeff in p.sorted_terms():
        for lam, a in coeff.terms:
            parts = [(a.re, False), (a.im, True)] if isinstance(a, GaussianRational) else [(a, False)]
            for value, imaginary in parts:
                if value == 0:
                    continue
                pieces.append((value < 0, _render_term(abs(value), imaginary, lam, exps, p.space.names)))
    if not pieces:
        return "0"
    out = ("-" if pieces[0][0] else "") + pieces[0][1]
    for negative, text in pieces[1:]:
        out += (" - " if negative else " + ") + text
    return out


# ============================================
# TEXT PARSING
# ============================================

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^()]))")


class _Parser:
    """Recursive-descent reader for the fixed term grammar."""

    def __init__(self, text: str, space: VariableSpace):
        self.text = text
        self.space = space
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if not m or m.end() == pos:
                raise PolynomialParseError("unexpected character", text, pos)
            kind = m.lastgroup or "op"
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def _peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _take(self, value: Optional[str] = None) -> Tuple[str, str, int]:
        tok = self._peek()
        if tok is None:
            raise PolynomialParseError("unexpected end of input", self.text, len(self.text))
        if value is not None and tok[1] != value:
            raise PolynomialParseError(f"expected {value!r}", self.text, tok[2])
        self.i += 1
        return tok

    def parse(self) -> LaurentPoly:
        if not self.tokens:
            raise PolynomialParseError("empty polynomial", self.text, 0)
        result = LaurentPoly.zero(self.space)
        sign = 1
        tok = self._peek()
        if tok and tok[1] in "+-" and tok[0] == "op":
            sign = -1 if tok[1] == "-" else 1
            self.i += 1
        while True:
            term = self._term()
            result = result + (term if sign > 0 else -term)
            tok = self._peek()
            if tok is None:
                return result
            if tok[0] == "op" and tok[1] in "+-":
                sign = -1 if tok[1] == "-" else 1
                self.i += 1
                continue
            raise PolynomialParseError("expected '+' or '-'", self.text, tok[2])

    def _term(self) -> LaurentPoly:
        value = self._factor()
        while (tok := self._peek()) is not None and tok[1] == "*":
            self.i += 1
            value = value * self._factor()
        return value

    def _exponent(self, allow_fraction: bool) -> Fraction:
        tok = self._take()
        if tok[1] == "(":
            negative = False
            if (nxt := self._peek()) is not None and nxt[1] == "-":
                negative = True
                self.i += 1
            num = self._take()
            if num[0] != "num":
                raise PolynomialParseError("expected exponent", self.text, num[2])
            self._take(")")
            value = Fraction(num[1])
            value = -value if negative else value
        elif tok[1] == "-":
            num = self._take()
            if num[0] != "num":
                raise PolynomialParseError("expected exponent", self.text, num[2])
            value = -Fraction(num[1])
        elif tok[0] == "num":
            value = Fraction(tok[1])
        else:
            raise PolynomialParseError("expected exponent", self.text, tok[2])
        if not allow_fraction and value.denominator != 1:
            raise PolynomialParseError("variable exponents must be integers", self.text, tok[2])
        return value

    def _factor(self) -> LaurentPoly:
        kind, value, pos = self._take()
        if kind == "num":
            return LaurentPoly.constant(self.space, Fraction(value))
        if kind == "op" and value == "(":
            inner = _Parser.__new__(_Parser)
            inner.text, inner.space, inner.tokens, inner.i = self.text, self.space, self.tokens, self.i
            sub = inner._sum_until_paren()
            self.i = inner.i
            self._take(")")
            return sub
        if kind != "name":
            raise PolynomialParseError("expected a factor", self.text, pos)
        exponent = Fraction(1)
        if (tok := self._peek()) is not None and tok[1] == "^":
            self.i += 1
            exponent = self._exponent(allow_fraction=(value == "q"))
        if value == "I":
            if exponent != 1:
                raise PolynomialParseError("I takes no exponent", self.text, pos)
            return LaurentPoly.constant(self.space, GaussianRational(0, 1))
        if value == "q":
            return LaurentPoly.constant(self.space, NovCoeff.monomial(1, exponent))
        if value not in self.space:
            raise PolynomialParseError(f"unknown variable {value!r}", self.text, pos)
        if exponent < 0 and not self.space.is_laurent(value):
            raise PolynomialParseError(f"negative power of polynomial variable {value!r}", self.text, pos)
        return LaurentPoly.monomial(self.space, {value: int(exponent)})

    def _sum_until_paren(self) -> LaurentPoly:
        result = LaurentPoly.zero(self.space)
        sign = 1
        tok = self._peek()
        if tok and tok[0] == "op" and tok[1] in "+-":
            sign = -1 if tok[1] == "-" else 1
            self.i += 1
        while True:
            term = self._term()
            result = result + (term if sign > 0 else -term)
            tok = self._peek()
            if tok is None or tok[1] == ")":
                return result
            if tok[0] == "op" and tok[1] in "+-":
                sign = -1 if tok[1] == "-" else 1
                self.i += 1
                continue
            raise PolynomialParseError("expected '+', '-' or ')'", self.text, tok[2])
