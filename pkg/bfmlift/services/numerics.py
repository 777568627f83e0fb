"""
BFMLIFT — Numerical kernels

Laurent systems are compiled to (exponent matrix, coefficient vector) pairs and
solved by companion-matrix eigenvalues (univariate) or multi-start Newton:
MINPACK hybrid Powell on the real split for square systems, Gauss-Newton with
minimum-norm least-squares steps otherwise. Every accepted point is re-checked
in extended precision with mpmath.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np
import structlog
from scipy import optimize

from bfmlift.services.laurent import LaurentPoly, VariableSpace
from bfmlift.services.novikov import GaussianRational

logger = structlog.get_logger(__name__)

ZERO_GUARD = 1e-12


# ============================================
# COMPILED SYSTEMS
# ============================================

@dataclass
class CompiledPoly:
    exps: np.ndarray
    coeffs: np.ndarray

    @classmethod
    def from_laurent(cls, p: LaurentPoly, q_value: float) -> "CompiledPoly":
        items = list(p.terms.items())
        exps = np.array([e for e, _ in items], dtype=float).reshape(len(items), len(p.space))
        coeffs = np.array([c.at(q_value) for _, c in items], dtype=complex)
        return cls(exps, coeffs)

    def value(self, x: np.ndarray) -> complex:
        if not len(self.coeffs):
            return 0j
        with np.errstate(all="ignore"):
            return complex(self.coeffs @ np.prod(x[None, :] ** self.exps, axis=1))


class CompiledSystem:
    """F(x) and its Jacobian for Laurent polynomials over one variable space."""

    def __init__(self, polys: Sequence[LaurentPoly], space: VariableSpace, q_value: float):
        self.space = space
        self.polys = [p.embed(space) for p in polys]
        self.q_value = q_value
        self._f = [CompiledPoly.from_laurent(p, q_value) for p in self.polys]
        self._j = [
            [CompiledPoly.from_laurent(p.derivative(name), q_value) for name in space.names]
            for p in self.polys
        ]
        self.laurent_mask = np.array(space.laurent, dtype=bool)

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.polys), len(self.space)

    def residual_vector(self, x: np.ndarray) -> np.ndarray:
        return np.array([p.value(x) for p in self._f], dtype=complex)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return np.array([[d.value(x) for d in row] for row in self._j], dtype=complex).reshape(self.shape)

    def residual(self, x: np.ndarray) -> float:
        F = self.residual_vector(x)
        return float(np.max(np.abs(F))) if F.size else 0.0

    def admissible(self, x: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(x)) and np.all(np.abs(x[self.laurent_mask]) > ZERO_GUARD))


def numeric_rank(matrix: np.ndarray, tol: float) -> int:
    if matrix.size == 0:
        return 0
    sv = np.linalg.svd(matrix, compute_uv=False)
    return int(np.sum(sv > tol * max(1.0, float(sv[0]))))


# ============================================
# NEWTON
# ============================================

def _gauss_newton(system: CompiledSystem, x: np.ndarray, max_iter: int, tol: float) -> np.ndarray:
    for _ in range(max_iter):
        F = system.residual_vector(x)
        if not np.all(np.isfinite(F)):
            break
        if np.max(np.abs(F), initial=0.0) < tol * 1e-3:
            break
        step, *_ = np.linalg.lstsq(system.jacobian(x), -F, rcond=None)
        x = x + step
        if not system.admissible(x):
            break
    return x


def _hybr(system: CompiledSystem, x0: np.ndarray, max_iter: int) -> np.ndarray:
    n = len(x0)

    def fun(v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x = v[:n] + 1j * v[n:]
        F = system.residual_vector(x)
        J = system.jacobian(x)
        if not (np.all(np.isfinite(F)) and np.all(np.isfinite(J))):
            F = np.full_like(F, 1e6)
            J = np.eye(n, dtype=complex)
        real_j = np.block([[J.real, -J.imag], [J.imag, J.real]])
        return np.concatenate([F.real, F.imag]), real_j

    sol = optimize.root(fun, np.concatenate([x0.real, x0.imag]), jac=True, method="hybr",
                        options={"maxfev": max_iter * (2 * n + 1)})
    return sol.x[:n] + 1j * sol.x[n:]


def newton(system: CompiledSystem, x0: np.ndarray, max_iter: int, tol: float) -> Tuple[np.ndarray, float, bool]:
    """One Newton run; returns (point, residual, converged)."""
    m, n = system.shape
    x = np.asarray(x0, dtype=complex)
    if m == n and n > 0:
        x = _hybr(system, x, max_iter)
        if system.admissible(x):
            x = _gauss_newton(system, x, 3, tol)
    else:
        x = _gauss_newton(system, x, max_iter, tol)
    if not system.admissible(x):
        return x, math.inf, False
    res = system.residual(x)
    return x, res, bool(np.isfinite(res) and res < tol)


def random_start(rng: np.random.Generator, space: VariableSpace) -> np.ndarray:
    """Laurent coordinates on a random torus point, polynomial ones Gaussian."""
    out = np.empty(len(space), dtype=complex)
    for i, laurent in enumerate(space.laurent):
        if laurent:
            out[i] = math.exp(rng.uniform(-1.0, 1.0)) * np.exp(1j * rng.uniform(0.0, 2 * math.pi))
        else:
            out[i] = complex(rng.normal(), rng.normal())
    return out


def point_sort_key(x: Sequence[complex]) -> Tuple[float, ...]:
    key: List[float] = []
    for v in x:
        key += [round(float(np.real(v)), 6) + 0.0, round(float(np.imag(v)), 6) + 0.0]
    return tuple(key)


@dataclass
class Solution:
    x: np.ndarray
    residual: float
    hits: int = 1


def deduplicate(points: Sequence[Tuple[np.ndarray, float]], dedup_tol: float) -> List[Solution]:
    found: List[Solution] = []
    for x, res in points:
        match = next((s for s in found if np.max(np.abs(s.x - x), initial=0.0) < dedup_tol), None)
        if match is None:
            found.append(Solution(x, res))
        else:
            match.hits += 1
            if res < match.residual:
                match.x, match.residual = x, res
    found.sort(key=lambda s: point_sort_key(s.x))
    return found


def multistart(
    system: CompiledSystem,
    starts: int,
    rng: np.random.Generator,
    tol: float,
    dedup_tol: float,
    max_iter: int,
) -> Tuple[List[Solution], bool]:
    """Distinct converged points, and whether the second half of starts found nothing new."""
    converged: List[Tuple[np.ndarray, float]] = []
    first_half = 0
    for s in range(starts):
        x, res, ok = newton(system, random_start(rng, system.space), max_iter, tol)
        if ok:
            converged.append((x, res))
        if s + 1 == starts // 2:
            first_half = len(deduplicate(converged, dedup_tol))
    solutions = deduplicate(converged, dedup_tol)
    saturated = starts < 2 or len(solutions) == first_half
    logger.debug("multistart_complete", starts=starts, converged=len(converged),
                 distinct=len(solutions), saturated=saturated)
    return solutions, saturated


# ============================================
# UNIVARIATE
# ============================================

def univariate_roots(p: LaurentPoly, name: str, q_value: float) -> Optional[List[complex]]:
    """Nonzero roots of a one-variable Laurent polynomial (None if identically zero)."""
    if p.is_zero():
        return None
    i = p.space.index(name)
    lo, hi = p.degree_in(name)
    coeffs = np.zeros(hi - lo + 1, dtype=complex)
    for exps, c in p.terms.items():
        coeffs[hi - exps[i]] += c.at(q_value)
    if len(coeffs) == 1:
        return []
    roots = np.roots(coeffs)
    return [complex(r) for r in roots if abs(r) > ZERO_GUARD]


# ============================================
# EXTENDED PRECISION
# ============================================

def _mp_scalar(a) -> mpmath.mpc:
    if isinstance(a, GaussianRational):
        return mpmath.mpc(mpmath.mpf(a.re.numerator) / a.re.denominator,
                          mpmath.mpf(a.im.numerator) / a.im.denominator)
    a = Fraction(a)
    return mpmath.mpc(mpmath.mpf(a.numerator) / a.denominator)


def mp_residual(polys: Sequence[LaurentPoly], x: Sequence[complex], bits: int, q_value: float) -> float:
    """max |p(x)| evaluated with `bits` of binary precision."""
    with mpmath.workprec(bits):
        point = [mpmath.mpc(complex(v)) for v in x]
        q = mpmath.mpf(q_value)
        worst = mpmath.mpf(0)
        for p in polys:
            total = mpmath.mpc(0)
            for exps, coeff in p.terms.items():
                c = mpmath.mpc(0)
                for lam, a in coeff.terms:
                    c += _mp_scalar(a) * q ** (mpmath.mpf(lam.numerator) / lam.denominator)
                for v, e in zip(point, exps):
                    if e:
                        c *= v ** e
                total += c
            worst = max(worst, abs(total))
        return float(worst)
