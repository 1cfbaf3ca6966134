"""Truncated aliasing series and the scalar identities behind it.

All infinite sums over ``n`` in ``Z`` are taken symmetrically: the ``n``
and ``-n`` terms are combined before anything is added up.  One-sided
partial sums of ``1/(x + n)``-type terms do not converge, so no other order
is offered.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DivergentSeriesError, DomainError, PoleCollisionError, ValidationError
from .linalg import as_square, expm, resolvent, spectral_radius
from .statespace import ContinuousStateSpace

__all__ = [
    "AliasingEvaluation",
    "TransferEvaluator",
    "aliasing_sum",
    "aliasing_tail_bound",
    "kernel_expansion_check",
    "higher_order_term",
    "aliasing_power_sum",
    "cotangent_check",
    "half_part_check",
    "Gaussian",
    "poisson_zero_phase_check",
    "neumann_expansion_check",
]


@dataclass(frozen=True, eq=False)
class AliasingEvaluation:
    s: complex
    N: int
    value: np.ndarray
    tail_bound: float
    omega_s: float
    Ts: float


class TransferEvaluator:
    """Evaluate ``C (sI - A)^{-1} B`` at many points through one Schur factorization.

    With ``A = Q T Q^H`` the solve at each point is a back substitution on
    the triangular ``sI - T``, vectorized over the points.
    """

    def __init__(self, plant: ContinuousStateSpace):
        T, Q = scipy.linalg.schur(np.asarray(plant.A, dtype=np.complex128), output="complex")
        self._T = T
        self._Bq = Q.conj().T @ plant.B
        self._Cq = plant.C @ Q
        self.poles = np.diag(T).copy()

    def __call__(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=np.complex128).ravel()
        T, Bq = self._T, self._Bq
        n, m = Bq.shape
        X = np.empty((n, p.size, m), dtype=np.complex128)
        for i in range(n - 1, -1, -1):
            acc = np.broadcast_to(Bq[i], (p.size, m)).astype(np.complex128)
            for k in range(i + 1, n):
                acc = acc + T[i, k] * X[k]
            X[i] = acc / (p - T[i, i])[:, None]
        # (points, p, m)
        return np.einsum("pn,nkm->kpm", self._Cq, X)


def _check_collisions(poles, s, omega_s, N, tol):
    for lam in poles:
        n = round((lam.imag - s.imag) / omega_s)
        if abs(n) <= N and abs(s + 1j * n * omega_s - lam) < tol * max(1.0, abs(lam)):
            raise PoleCollisionError(n, s, lam)


def aliasing_tail_bound(plant: ContinuousStateSpace, s: complex, Ts: float, N: int) -> float:
    """Bound on ``|| S(s) - S_N(s) ||_2``.

    Each combined pair obeys ``||G(s + jnw) + G(s - jnw)|| <= c / n^2`` with
    ``c = 2 ||C|| ||B|| (|s| + ||A|| + 1)^2 / w^2`` once
    ``n w >= 1.155 (|s| + ||A||)``; then ``sum_{n>N} 1/n^2 < 1/N``.  When the
    first omitted pair is not yet in that range the bound is ``inf``.
    """
    omega_s = 2 * math.pi / Ts
    normA = np.linalg.norm(plant.A, 2)
    size = abs(s) + normA
    if (N + 1) * omega_s < 1.155 * size:
        return math.inf
    c = 2 * np.linalg.norm(plant.C, 2) * np.linalg.norm(plant.B, 2) * (size + 1) ** 2 / omega_s**2
    return float(c / (N * Ts))


def aliasing_sum(plant: ContinuousStateSpace, s: complex, Ts: float, N: int,
                 pole_tol: float = 1e-9, evaluator: TransferEvaluator | None = None
                 ) -> AliasingEvaluation:
    """``(1/Ts) * sum_{|n| <= N} G(s + j n ws)`` with the ``n, -n`` terms paired."""
    if np.any(plant.D != 0):
        raise ValidationError("aliasing_sum expects a strictly proper plant (D = 0)")
    N = int(N)
    if N < 1:
        raise ValidationError("N must be >= 1")
    Ts = float(Ts)
    s = complex(s)
    omega_s = 2 * math.pi / Ts
    ev = evaluator or TransferEvaluator(plant)
    _check_collisions(ev.poles, s, omega_s, N, pole_tol)
    n = np.arange(1, N + 1)
    up = ev(s + 1j * n * omega_s)
    down = ev(s - 1j * n * omega_s)
    pairs = up + down
    total = ev(np.array([s]))[0] + pairs.sum(axis=0)
    value = total / Ts
    return AliasingEvaluation(s, N, value, aliasing_tail_bound(plant, s, Ts, N), omega_s, Ts)


def _expm1(z: complex) -> complex:
    """``e^z - 1`` without cancellation near ``z = 0``."""
    x, y = z.real, z.imag
    re = math.expm1(x) * math.cos(y) - 2.0 * math.sin(0.5 * y) ** 2
    return complex(re, math.exp(x) * math.sin(y))


class KernelCheck(NamedTuple):
    lhs: complex
    rhs: complex
    gap: float


def _on_lattice(x: complex, step: float, tol: float = 1e-12) -> bool:
    """True when ``x`` is (numerically) ``j * step * k`` for an integer ``k``."""
    k = round(x.imag / step)
    return abs(x - 1j * step * k) <= tol * max(1.0, abs(x))


def kernel_expansion_check(sigma: complex, Ts: float, N: int) -> KernelCheck:
    """Compare ``1/(e^{sigma Ts} - 1)`` with ``(1/Ts) sum 1/(sigma + j n ws) - 1/2``.

    The symmetric partial sum leaves a tail of order ``1/N``.
    """
    sigma = complex(sigma)
    Ts = float(Ts)
    omega_s = 2 * math.pi / Ts
    if _on_lattice(sigma, omega_s):
        raise DomainError(f"sigma={sigma!r} lies on the lattice -j ws Z")
    n = np.arange(1, N + 1)
    pair = 2 * sigma / (sigma**2 + (n * omega_s) ** 2)
    partial = (1 / sigma + pair.sum()) / Ts
    lhs = 1 / _expm1(sigma * Ts)
    rhs = partial - 0.5
    return KernelCheck(lhs, complex(rhs), float(abs(lhs - rhs)))


def higher_order_term(r: int, x: complex, Ts: float, M: int) -> complex:
    """Right side of the higher-order partial-fraction identity, truncated at ``M``.

    ``r = 1``: ``1/2 + sum_{m<=M} e^{-m Ts x}``;
    ``r >= 2``: ``sum_{m<=M} (m Ts)^(r-1)/(r-1)! e^{-m Ts x}`` (the derivative
    removes the constant).
    """
    r, M = int(r), int(M)
    if r < 1 or M < 1:
        raise ValidationError("need r >= 1 and M >= 1")
    x = complex(x)
    if not x.real > 0:
        raise DivergentSeriesError(f"series diverges for Re(x) <= 0, got x={x!r}")
    m = np.arange(1, M + 1)
    decay = np.exp(-m * Ts * x)
    if r == 1:
        return complex(0.5 + decay.sum())
    coef = (m * Ts) ** (r - 1) / math.factorial(r - 1)
    return complex((coef * decay).sum())


def aliasing_power_sum(x: complex, Ts: float, r: int, N: int) -> complex:
    """``(1/Ts) * sum_{|n|<=N} (x + j n ws)^(-r)``, paired."""
    x = complex(x)
    omega_s = 2 * math.pi / Ts
    if _on_lattice(x, omega_s):
        raise DomainError(f"x={x!r} lies on the lattice -j ws Z")
    n = np.arange(1, N + 1)
    pair = (x + 1j * n * omega_s) ** (-r) + (x - 1j * n * omega_s) ** (-r)
    return complex((x ** (-r) + pair.sum()) / Ts)


def cotangent_check(x: float, N: int) -> float:
    """``| sum_{|n|<=N} 1/(x + n) - pi cot(pi x) |`` with paired terms."""
    x = float(x)
    if x == round(x):
        raise DomainError(f"x={x} is an integer")
    n = np.arange(1, N + 1)
    partial = 1 / x + (2 * x / (x * x - n * n)).sum()
    return float(abs(partial - math.pi / math.tan(math.pi * x)))


def cotangent_partial_sum(x: float, N: int) -> float:
    n = np.arange(1, N + 1)
    return float(1 / x + (2 * x / (x * x - n * n)).sum())


class HalfPartCheck(NamedTuple):
    lhs: complex
    coth_gap: float      # against coth(z/2)
    corrected_gap: float  # against coth(z/2)/2
    series_gap: float     # paired partial sum of 1/(z - 2 pi j n) against lhs


def half_part_check(sT: complex, N: int) -> HalfPartCheck:
    """Test ``1/(1 - e^{-z}) - 1/2`` against both ``coth(z/2)`` and ``coth(z/2)/2``.

    The series column checks ``sum_n 1/(z - 2 pi j n)``, the expansion used
    for the kernel, against the same left side.
    """
    z = complex(sT)
    if _on_lattice(z, 2 * math.pi):
        raise DomainError(f"sT={z!r} lies on the lattice 2 pi j Z")
    lhs = -1 / _expm1(-z) - 0.5
    coth = 1 / cmath.tanh(z / 2)
    n = np.arange(1, N + 1)
    w = 2 * math.pi * n
    series = 1 / z + (2 * z / (z * z + w * w)).sum()
    return HalfPartCheck(lhs, float(abs(lhs - coth)), float(abs(lhs - 0.5 * coth)),
                         float(abs(series - lhs)))


@dataclass(frozen=True)
class Gaussian:
    """``f(t) = exp(-a t^2)`` with ``F(w) = int f e^{-iwt} dt = sqrt(pi/a) exp(-w^2/(4a))``."""

    a: float = math.pi

    @classmethod
    def of_width(cls, width: float) -> "Gaussian":
        return cls(1.0 / width**2)

    def f(self, t):
        return np.exp(-self.a * np.asarray(t, dtype=float) ** 2)

    def F(self, w):
        return math.sqrt(math.pi / self.a) * np.exp(-np.asarray(w, dtype=float) ** 2 / (4 * self.a))


def poisson_zero_phase_check(fn: Gaussian, K: int) -> float:
    """``| sum_{|n|<=K} f(n) - sum_{|k|<=K} F(2 pi k) |``."""
    idx = np.arange(-K, K + 1)
    # sum from the smallest terms inward for a reproducible rounding pattern
    order = np.argsort(-np.abs(idx), kind="stable")
    lhs = math.fsum(fn.f(idx[order]))
    rhs = math.fsum(fn.F(2 * math.pi * idx[order]))
    return float(abs(lhs - rhs))


def neumann_expansion_check(A, Ts: float, z: complex, M: int) -> float:
    """``|| (zI - e^{A Ts})^{-1} - sum_{m=1}^{M} e^{A (m-1) Ts} z^{-m} ||_2``."""
    A = as_square(A, "A")
    Ad = expm(A, Ts)
    z = complex(z)
    rho = spectral_radius(Ad)
    if not abs(z) > rho:
        raise DivergentSeriesError(f"|z|={abs(z):.6g} does not exceed the spectral radius {rho:.6g}")
    exact = resolvent(Ad, z)
    total = np.zeros_like(exact)
    for m in range(1, int(M) + 1):
        total = total + expm(A, (m - 1) * Ts) * z ** (-m)
    return float(np.linalg.norm(exact - total, 2))
