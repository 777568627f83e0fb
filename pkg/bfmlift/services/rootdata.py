"""
BFMLIFT — Root data, Weyl groups, centers

Roots alpha live in X_*(T) = Z^r (also read as h_alpha in t); coroots alpha^v are
integer linear forms on the same coordinates (h_alpha^v). Pairing is the dot
product. Weyl elements act on the lattice by integer matrices; the induced
action on C[T*T^v_C] sends z^lam -> z^{S lam} and h -> S^{-1} h.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import structlog

from bfmlift.core.config import get_settings
from bfmlift.core.exceptions import (
    DimensionMismatchError,
    RootDatumError,
    WeylGroupTooLarge,
    ZeroCoordinateError,
)
from bfmlift.services.novikov import GaussianRational

logger = structlog.get_logger(__name__)

Vector = Tuple[int, ...]
Matrix = Tuple[Tuple[int, ...], ...]


def pair(coroot: Sequence[int], vec: Sequence[Union[int, Fraction]]) -> Union[int, Fraction]:
    return sum(a * b for a, b in zip(coroot, vec))


def _identity(r: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(r)) for i in range(r))


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    n = len(b)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(len(b[0]) if b else 0))
        for i in range(len(a))
    )


def _apply(m: Matrix, v: Sequence[int]) -> Vector:
    return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in m)


# ============================================
# DATA TYPES
# ============================================

@dataclass(frozen=True)
class WeylElement:
    """Lattice automorphism S together with a word in the simple reflections."""

    matrix: Matrix
    word: Tuple[int, ...]
    inverse_matrix: Matrix

    @property
    def rank(self) -> int:
        return len(self.matrix)

    def is_identity(self) -> bool:
        return self.matrix == _identity(self.rank)

    def apply(self, v: Sequence[int]) -> Vector:
        return _apply(self.matrix, v)

    def compose(self, other: "WeylElement") -> "WeylElement":
        """self * other (apply other first)."""
        return WeylElement(
            _matmul(self.matrix, other.matrix),
            self.word + other.word,
            _matmul(other.inverse_matrix, self.inverse_matrix),
        )


@dataclass(frozen=True)
class RootDatum:
    """Root datum of G^v restricted to the data the lifting pipeline needs."""

    rank: int
    roots: Tuple[Vector, ...]
    coroots: Tuple[Vector, ...]
    name: str = "custom"

    def __post_init__(self) -> None:
        object.__setattr__(self, "roots", tuple(tuple(int(x) for x in a) for a in self.roots))
        object.__setattr__(self, "coroots", tuple(tuple(int(x) for x in a) for a in self.coroots))
        self._validate()

    def _validate(self) -> None:
        r = self.rank
        if r < 1:
            raise RootDatumError(f"rank must be positive, got {r}")
        if len(self.roots) != len(self.coroots):
            raise DimensionMismatchError("roots", len(self.roots), "coroots", len(self.coroots))
        index: Dict[Vector, int] = {}
        for i, (a, av) in enumerate(zip(self.roots, self.coroots)):
            if len(a) != r or len(av) != r:
                raise DimensionMismatchError(f"roots[{i}]", len(a), "rank", r) if len(a) != r else \
                    DimensionMismatchError(f"coroots[{i}]", len(av), "rank", r)
            if not any(a):
                raise RootDatumError(f"roots[{i}] is zero")
            if a in index:
                raise RootDatumError(f"roots[{i}] duplicates roots[{index[a]}]")
            if pair(av, a) != 2:
                raise RootDatumError(f"<coroot, root> = {pair(av, a)} != 2 for roots[{i}]={a}")
            index[a] = i
        coroot_of = dict(zip(self.roots, self.coroots))
        for i, a in enumerate(self.roots):
            neg = tuple(-x for x in a)
            if neg not in coroot_of:
                raise RootDatumError(f"roots[{i}]={a} has no opposite root")
            if coroot_of[neg] != tuple(-x for x in self.coroots[i]):
                raise RootDatumError(f"coroot of -roots[{i}] is not the negated coroot")
        for i, (a, av) in enumerate(zip(self.roots, self.coroots)):
            for b, bv in zip(self.roots, self.coroots):
                image = tuple(x - pair(av, b) * y for x, y in zip(b, a))
                if image not in coroot_of:
                    raise RootDatumError(f"reflection in roots[{i}]={a} does not permute the roots")
                co_image = tuple(x - pair(bv, a) * y for x, y in zip(bv, av))
                if coroot_of[image] != co_image:
                    raise RootDatumError(f"reflection in roots[{i}]={a} does not permute the coroots")

    # ── positive system ───────────────────────────────────────────
    @cached_property
    def positive_indices(self) -> Tuple[int, ...]:
        """Roots whose first nonzero coordinate is positive."""
        return tuple(i for i, a in enumerate(self.roots) if next(x for x in a if x) > 0)

    @cached_property
    def simple_indices(self) -> Tuple[int, ...]:
        positive = [self.roots[i] for i in self.positive_indices]
        sums = {tuple(x + y for x, y in zip(a, b)) for a in positive for b in positive}
        return tuple(i for i in self.positive_indices if self.roots[i] not in sums)

    def positive_roots(self) -> List[Vector]:
        return [self.roots[i] for i in self.positive_indices]

    def simple_roots(self) -> List[Vector]:
        return [self.roots[i] for i in self.simple_indices]

    def index_of(self, root: Sequence[int]) -> int:
        try:
            return self.roots.index(tuple(root))
        except ValueError:
            raise RootDatumError(f"{tuple(root)} is not a root of {self.name}") from None

    def negative_of(self, i: int) -> int:
        return self.index_of(tuple(-x for x in self.roots[i]))

    def pairing_matrix(self, indices: Optional[Sequence[int]] = None) -> List[List[int]]:
        """Entries <alpha_j^v, alpha_i> for the chosen roots (simple roots by default)."""
        idx = list(self.simple_indices if indices is None else indices)
        return [[pair(self.coroots[j], self.roots[i]) for j in idx] for i in idx]

    def reflection_matrix(self, i: int) -> Matrix:
        a, av = self.roots[i], self.coroots[i]
        r = self.rank
        return tuple(tuple(int(p == q) - a[p] * av[q] for q in range(r)) for p in range(r))

    def is_torus(self) -> bool:
        return not self.roots


# ============================================
# OPERATIONS
# ============================================

def reflect(datum: RootDatum, root_index: int, h: Sequence[Union[int, Fraction]]) -> Tuple[Fraction, ...]:
    """s_alpha(h) = h - <alpha^v, h> alpha."""
    if not 0 <= root_index < len(datum.roots):
        raise IndexError(f"root index {root_index} out of range for {len(datum.roots)} roots")
    if len(h) != datum.rank:
        raise DimensionMismatchError("vector", len(h), "rank", datum.rank)
    a, av = datum.roots[root_index], datum.coroots[root_index]
    c = pair(av, [Fraction(x) for x in h])
    return tuple(Fraction(x) - c * y for x, y in zip(h, a))


def weyl_enumerate(datum: RootDatum, bound: Optional[int] = None) -> List[WeylElement]:
    """All Weyl elements, sorted by word length then word."""
    bound = get_settings().weyl_bound if bound is None else bound
    if bound < 1:
        raise ValueError("bound must be >= 1")
    r = datum.rank
    generators = [(i, datum.reflection_matrix(i)) for i in datum.simple_indices]
    ident = WeylElement(_identity(r), (), _identity(r))
    seen: Dict[Matrix, WeylElement] = {ident.matrix: ident}
    queue = deque([ident])
    while queue:
        current = queue.popleft()
        for i, s in generators:
            m = _matmul(current.matrix, s)
            if m in seen:
                continue
            if len(seen) >= bound:
                raise WeylGroupTooLarge(bound)
            element = WeylElement(m, current.word + (i,), _matmul(s, current.inverse_matrix))
            seen[m] = element
            queue.append(element)
    elements = sorted(seen.values(), key=lambda e: (len(e.word), e.word))
    logger.debug("weyl_enumerated", datum=datum.name, size=len(elements))
    return elements


def simple_reflections(datum: RootDatum) -> List[WeylElement]:
    out = []
    for i in datum.simple_indices:
        s = datum.reflection_matrix(i)
        out.append(WeylElement(s, (i,), s))
    return out


def langlands_dual(datum: RootDatum) -> RootDatum:
    name = datum.name
    if name.startswith("dual(") and name.endswith(")"):
        dual_name = name[5:-1]
    else:
        dual_name = _DUAL_NAMES.get(name, f"dual({name})")
    return RootDatum(datum.rank, datum.coroots, datum.roots, dual_name)


def character_value(z: Sequence[complex], lam: Sequence[int]) -> complex:
    value = complex(1.0)
    for zk, e in zip(z, lam):
        if e:
            value *= complex(zk) ** e
    return value


def _exact_character(z: Sequence[Union[int, Fraction, GaussianRational]], lam: Sequence[int]):
    value: Union[Fraction, GaussianRational] = Fraction(1)
    for zk, e in zip(z, lam):
        value = value * (zk ** e)
    return value


def in_center(datum: RootDatum, z: Sequence, tol: Optional[float] = None) -> bool:
    """z^alpha = 1 for every root; exact for rational/Gaussian input, else within tol."""
    if len(z) != datum.rank:
        raise DimensionMismatchError("point", len(z), "rank", datum.rank)
    if any(zk == 0 for zk in z):
        raise ZeroCoordinateError("torus points have nonzero coordinates")
    if all(isinstance(zk, (int, Fraction, GaussianRational)) and not isinstance(zk, bool) for zk in z):
        exact = [Fraction(zk) if isinstance(zk, int) else zk for zk in z]
        return all(_exact_character(exact, a) == 1 for a in datum.roots)
    tol = get_settings().identity_tol if tol is None else tol
    return all(abs(character_value(z, a) - 1) < tol for a in datum.roots)


def act_on_point(element: WeylElement, z: Sequence[complex]) -> List[complex]:
    """(w.z)_k = z^{S^{-1} e_k}, so that (w.z)^lam = z^{S^{-1} lam}."""
    inv = element.inverse_matrix
    r = len(z)
    return [character_value(z, [inv[j][k] for j in range(r)]) for k in range(r)]


# ============================================
# PRESETS
# ============================================

def torus(rank: int) -> RootDatum:
    return RootDatum(rank, (), (), f"T^{rank}")


def _with_negatives(roots: Sequence[Vector], coroots: Sequence[Vector]) -> Tuple[Tuple[Vector, ...], Tuple[Vector, ...]]:
    rs = list(roots) + [tuple(-x for x in a) for a in roots]
    cs = list(coroots) + [tuple(-x for x in a) for a in coroots]
    return tuple(rs), tuple(cs)


_PRESETS: Dict[str, Tuple[int, Sequence[Vector], Sequence[Vector]]] = {
    "SU2": (1, [(1,)], [(2,)]),
    "PSU2": (1, [(2,)], [(1,)]),
    "SO3": (1, [(2,)], [(1,)]),
    "U2": (2, [(1, -1)], [(1, -1)]),
    "SU3": (2, [(1, 0), (0, 1), (1, 1)], [(2, -1), (-1, 2), (1, 1)]),
    "PSU3": (2, [(2, -1), (-1, 2), (1, 1)], [(1, 0), (0, 1), (1, 1)]),
    "SU2xSU2": (2, [(1, 0), (0, 1)], [(2, 0), (0, 2)]),
    "PSU2xPSU2": (2, [(2, 0), (0, 2)], [(1, 0), (0, 1)]),
}

_DUAL_NAMES = {
    "SU2": "PSU2", "PSU2": "SU2", "SO3": "SU2", "U2": "U2",
    "SU3": "PSU3", "PSU3": "SU3", "SU2xSU2": "PSU2xPSU2", "PSU2xPSU2": "SU2xSU2",
}


def preset_names() -> List[str]:
    return sorted(_PRESETS) + ["T^r"]


def preset(name: str) -> RootDatum:
    """Named datum; 'T1', 'T^2', ... give tori."""
    key = name.strip()
    if key in _PRESETS:
        rank, roots, coroots = _PRESETS[key]
        rs, cs = _with_negatives(roots, coroots)
        return RootDatum(rank, rs, cs, key)
    compact = key.replace("^", "")
    if compact.startswith("T") and compact[1:].isdigit() and int(compact[1:]) >= 1:
        return torus(int(compact[1:]))
    raise RootDatumError(f"unknown group preset {name!r}; known: {', '.join(preset_names())}")
