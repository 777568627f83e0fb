"""
BFMLIFT — Desk-scale numerical verification

Critical points of f on Teleman fibres (df = Z_T^* dh with h in a Weyl-fixed
subspace), kernel and center membership of their Teleman values, and Morse /
smoothness checks on the fibres.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
import structlog

from bfmlift.core.config import get_settings
from bfmlift.core.exceptions import DimensionMismatchError
from bfmlift.services import numerics
from bfmlift.services.laurent import (
    LaurentPoly,
    MonomialMap,
    VariableSpace,
    base_names,
    rational_kernel_basis,
)
from bfmlift.services.mirror import lagrangian_ideal
from bfmlift.services.rootdata import RootDatum, character_value, in_center

logger = structlog.get_logger(__name__)

SolveStatus = Literal["COMPLETE", "INCOMPLETE", "SAMPLED"]


@dataclass(frozen=True)
class CriticalPoint:
    coordinates: Tuple[complex, ...]
    fiber: Tuple[complex, ...]
    residual: float
    residual_mp: float
    teleman_value: Tuple[complex, ...]
    multiplicity_hint: int = 1


@dataclass(frozen=True)
class RootConstraint:
    """h restricted to the fixed hyperplane of s_alpha: <alpha^v, h> = 0."""

    datum: RootDatum
    root_index: int

    def describe(self) -> str:
        return f"s_alpha-fixed, alpha={self.datum.roots[self.root_index]}"


@dataclass
class CriticalSolve:
    points: List[CriticalPoint]
    status: SolveStatus
    method: Literal["companion", "newton"]
    constraint: str
    seed: int

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i: int) -> CriticalPoint:
        return self.points[i]


# ============================================
# SOLVING
# ============================================

def _fixed_subspace(constraint: Optional[RootConstraint], r: int) -> List[Tuple[int, ...]]:
    """Integer basis (columns) of the allowed h-subspace; empty for df = 0."""
    if constraint is None:
        return []
    coroot = constraint.datum.coroots[constraint.root_index]
    return rational_kernel_basis([list(coroot)], r)


def _critical_system(f: LaurentPoly, m: MonomialMap, basis: Sequence[Tuple[int, ...]]) -> Tuple[List[LaurentPoly], VariableSpace]:
    w = base_names(m.cols)
    s_names = [f"s{j + 1}" for j in range(len(basis))]
    space = VariableSpace(tuple(w) + tuple(s_names), (True,) * len(w) + (False,) * len(s_names))
    f_up = f.embed(space)
    eqs = []
    for i, name in enumerate(w):
        # sum_k M_ki h_k with h = sum_j basis_j s_j
        coefficients = [sum(m.matrix[k][i] * b[k] for k in range(m.rows)) for b in basis]
        eqs.append(f_up.log_derivative(name) - LaurentPoly.linear_form(space, s_names, coefficients))
    return eqs, space


def solve_critical(
    f: LaurentPoly,
    m: MonomialMap,
    constraint: Optional[RootConstraint] = None,
    seed: Optional[int] = None,
    starts: Optional[int] = None,
) -> CriticalSolve:
    """Solve theta_i(f) = sum_k M_ki h_k with h in the constrained subspace (h = 0 when None)."""
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    starts = settings.newton_starts if starts is None else starts
    if len(f.space) and len(f.space) != m.cols:
        raise DimensionMismatchError("potential variables", len(f.space), "action columns", m.cols)
    basis = _fixed_subspace(constraint, m.rows)
    eqs, space = _critical_system(f, m, basis)
    system = numerics.CompiledSystem(eqs, space, settings.q_value)
    label = constraint.describe() if constraint else "df=0"

    raw: List[Tuple[np.ndarray, float]] = []
    status: SolveStatus
    if len(space) == 1:
        method = "companion"
        roots = numerics.univariate_roots(eqs[0], space.names[0], settings.q_value)
        if roots is None:
            logger.warning("critical_locus_not_isolated", potential=str(f))
            roots, status = [], "INCOMPLETE"
        else:
            status = "COMPLETE"
        for root in roots:
            x, res, _ = numerics.newton(system, np.array([root]), 5, settings.solver_residual)
            raw.append((x, res))
        solutions = numerics.deduplicate(raw, settings.dedup_tol)
    else:
        method = "newton"
        if len(space) > len(eqs):
            # positive-dimensional family: a sample suffices
            starts = min(starts, settings.sample_starts)
        rng = np.random.default_rng(seed)
        solutions, saturated = numerics.multistart(
            system, starts, rng, settings.solver_residual, settings.dedup_tol, settings.newton_max_iter
        )
        if len(space) > len(eqs):
            status = "SAMPLED"
        else:
            status = "COMPLETE" if saturated else "INCOMPLETE"

    points: List[CriticalPoint] = []
    n = m.cols
    for sol in solutions:
        res = system.residual(sol.x)
        res_mp = numerics.mp_residual(eqs, sol.x, settings.mp_bits, settings.q_value)
        if not (res < settings.solver_residual and res_mp < settings.solver_residual):
            continue
        w = tuple(complex(v) for v in sol.x[:n])
        s = sol.x[n:]
        h = tuple(complex(sum(b[k] * s[j] for j, b in enumerate(basis))) for k in range(m.rows))
        points.append(CriticalPoint(w, h, res, res_mp, tuple(m.apply(w)), sol.hits))
    if status == "COMPLETE" and len(points) < len(solutions):
        # dropped points leave the solution set incomplete
        status = "INCOMPLETE"
    logger.info("critical_points_solved", count=len(points), method=method, status=status, constraint=label)
    return CriticalSolve(points, status, method, label, seed)


def solve_constrained(
    f: LaurentPoly,
    m: MonomialMap,
    datum: RootDatum,
    root_index: int,
    seed: Optional[int] = None,
    starts: Optional[int] = None,
) -> CriticalSolve:
    return solve_critical(f, m, RootConstraint(datum, root_index), seed=seed, starts=starts)


# ============================================
# KERNEL / CENTER
# ============================================

@dataclass(frozen=True)
class KernelVerdict:
    point: int
    value: complex
    deviation: float
    modulus_ok: bool
    phase_ok: bool

    @property
    def ok(self) -> bool:
        return self.modulus_ok and self.phase_ok


def check_kernel(points: Sequence[CriticalPoint], datum: RootDatum, root_index: int, tol: Optional[float] = None) -> List[KernelVerdict]:
    """|z^alpha - 1| < tol, split into |log|z^alpha|| (moment) and |arg z^alpha| (holonomy)."""
    tol = get_settings().identity_tol if tol is None else tol
    alpha = datum.roots[root_index]
    out = []
    for i, p in enumerate(points):
        value = character_value(p.teleman_value, alpha)
        deviation = abs(value - 1)
        modulus_ok = abs(math.log(abs(value))) < tol if value != 0 else False
        phase_ok = abs(cmath.phase(value)) < tol if value != 0 else False
        out.append(KernelVerdict(i, value, deviation, modulus_ok, phase_ok))
    return out


@dataclass(frozen=True)
class CenterVerdict:
    point: int
    in_center: bool
    worst_deviation: float


def check_center(points: Sequence[CriticalPoint], datum: RootDatum, tol: Optional[float] = None) -> List[CenterVerdict]:
    """df = 0 predicts Teleman values in Z(G^v_C) = intersection of the root kernels."""
    tol = get_settings().identity_tol if tol is None else tol
    out = []
    for i, p in enumerate(points):
        worst = max((abs(character_value(p.teleman_value, a) - 1) for a in datum.roots), default=0.0)
        out.append(CenterVerdict(i, in_center(datum, p.teleman_value, tol), worst))
    return out


# ============================================
# MORSE / SMOOTHNESS
# ============================================

@dataclass
class MorseVerdict:
    point: int
    directions: List[Tuple[int, ...]]
    hessian: List[List[complex]]
    determinant: complex
    morse: bool
    log_hessian: List[List[complex]]
    jacobian_rank: int
    jacobian_full_rank: bool
    expected_rank: int = 0
    log_hessian_polys: List[List[str]] = field(default_factory=list)


def _standard_basis(n: int) -> List[Tuple[int, ...]]:
    return [tuple(int(i == j) for j in range(n)) for i in range(n)]


def log_hessian_polys(f: LaurentPoly) -> List[List[LaurentPoly]]:
    names = list(f.space.names)
    return [[f.log_derivative(a).log_derivative(b) for b in names] for a in names]


def _morse(
    f: LaurentPoly,
    m: MonomialMap,
    points: Sequence[CriticalPoint],
    directions: List[Tuple[int, ...]],
    tol: Optional[float],
) -> List[MorseVerdict]:
    settings = get_settings()
    tol = settings.hessian_tol if tol is None else tol
    f = f.embed(VariableSpace.standard(base=m.cols))
    polys = log_hessian_polys(f)
    texts = [[str(p) for p in row] for row in polys]
    lag = lagrangian_ideal(f, m)
    jac_system = numerics.CompiledSystem(list(lag.generators), lag.space, settings.q_value)
    n = m.cols
    out = []
    for idx, p in enumerate(points):
        full = np.array([[q.evaluate(p.coordinates, settings.q_value) for q in row] for row in polys],
                        dtype=complex).reshape(n, n)
        V = np.array(directions, dtype=float).reshape(len(directions), n)
        H = V @ full @ V.T
        det = complex(np.linalg.det(H)) if len(directions) else complex(1.0)
        point = np.array(list(p.coordinates) + list(p.fiber), dtype=complex)
        J = jac_system.jacobian(point)
        rank = numerics.numeric_rank(J, settings.identity_tol)
        expected = len(lag.generators)
        out.append(MorseVerdict(
            point=idx,
            directions=list(directions),
            hessian=H.tolist(),
            determinant=det,
            morse=abs(det) > tol,
            log_hessian=full.tolist(),
            jacobian_rank=rank,
            jacobian_full_rank=rank == expected,
            expected_rank=expected,
            log_hessian_polys=texts,
        ))
    return out


def morse_check(f: LaurentPoly, m: MonomialMap, points: Sequence[CriticalPoint], tol: Optional[float] = None) -> List[MorseVerdict]:
    """Hessian of f along the fibres of Z_T (log-directions in ker M) plus Jacobian rank of Z^T_Y.

    When ker M = 0 the fibres are finite and the Hessian is taken over every
    log-direction, so the determinant is that of the full log-Hessian.
    """
    directions = m.kernel_basis() or _standard_basis(m.cols)
    return _morse(f, m, points, directions, tol)


def root_morse_check(
    f: LaurentPoly,
    m: MonomialMap,
    datum: RootDatum,
    root_index: int,
    points: Sequence[CriticalPoint],
    tol: Optional[float] = None,
) -> List[MorseVerdict]:
    """Hessian along the fibres of Y^v -> T^v_C / T^v_alpha: directions v with M v in Q alpha."""
    alpha = datum.roots[root_index]
    annihilator = rational_kernel_basis([list(alpha)], datum.rank)
    rows = [[sum(l[k] * m.matrix[k][i] for k in range(m.rows)) for i in range(m.cols)] for l in annihilator]
    return _morse(f, m, points, rational_kernel_basis(rows, m.cols), tol)
