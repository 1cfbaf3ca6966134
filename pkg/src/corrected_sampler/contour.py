"""Contour quadrature for resolvent-type integrands.

Three contours are supported:

* the truncated Bromwich line ``Re p = c, |Im p| <= Omega``, always
  integrated symmetrically (principal value), with Gauss-Legendre panels;
* circles, integrated with the periodic trapezoidal rule;
* circular arcs ``|z| = R, theta1 <= arg z <= theta2`` for large-arc limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContourPlacementError, DomainError, ValidationError
from .linalg import as_square, resolvent_batch

__all__ = [
    "BromwichLine",
    "CircleContour",
    "default_abscissa",
    "bromwich_resolvent_t0",
    "bromwich_resolvent_t",
    "riesz_projection",
    "big_arc_check",
]

_GROWTH = 1.5  # geometric panel growth away from the spectrum


@dataclass(frozen=True)
class BromwichLine:
    """Vertical segment ``c + j y``, ``-half_height <= y <= half_height``.

    ``nodes`` is the Gauss-Legendre order used on every panel; it is even
    so the node set is symmetric about the real axis.
    """

    abscissa: float
    half_height: float
    nodes: int = 16

    def __post_init__(self):
        if not math.isfinite(self.abscissa):
            raise ValidationError("abscissa must be finite")
        if not (self.half_height > 0 and math.isfinite(self.half_height)):
            raise ValidationError("half_height must be positive and finite")
        if self.nodes < 2 or self.nodes % 2:
            raise ValidationError("nodes must be a positive even integer")

    def validate(self, spectrum_bound: float) -> None:
        if not self.abscissa > spectrum_bound:
            raise ContourPlacementError(
                f"abscissa c={self.abscissa} must exceed the spectral bound {spectrum_bound}"
            )


@dataclass(frozen=True)
class CircleContour:
    center: complex
    radius: float
    nodes: int = 64

    def __post_init__(self):
        if not self.radius > 0:
            raise ValidationError("radius must be > 0")
        if self.nodes < 8:
            raise ValidationError("nodes must be >= 8")

    def points(self):
        theta = 2 * np.pi * np.arange(self.nodes) / self.nodes
        offsets = self.radius * np.exp(1j * theta)
        return complex(self.center) + offsets, offsets


def default_abscissa(A, margin: float = 0.5) -> float:
    """Line position used when the caller does not pick one.

    Zero when the spectrum sits at least ``margin`` left of the imaginary
    axis, otherwise ``margin`` to the right of the rightmost eigenvalue.
    """
    eig = np.linalg.eigvals(as_square(A, "A"))
    return float(max(0.0, np.max(eig.real) + margin))


def _line_breakpoints(eig, c, half_height, max_panel):
    """Symmetric panel edges in ``y`` for the line ``c + j y``."""
    dist = c - eig.real
    d_min = float(np.min(dist))
    inner_span = float(np.max(np.abs(eig.imag)) + 4.0 * np.max(dist))
    h = min(d_min, max_panel)
    edges = [0.0]
    y = 0.0
    while y < half_height:
        if y < inner_span:
            step = h
        else:
            step = min((_GROWTH - 1.0) * y, max_panel)
        y = min(y + step, half_height)
        edges.append(y)
        if len(edges) > 2_000_000:
            raise ValidationError("Bromwich line needs too many panels; move the abscissa")
    pos = np.asarray(edges)
    return np.concatenate([-pos[:0:-1], pos])


def _gauss_panels(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _weighted_sum(A, points, weights, chunk=32768):
    n = A.shape[0]
    total = np.zeros((n, n), dtype=np.complex128)
    for lo in range(0, points.size, chunk):
        R = resolvent_batch(A, points[lo:lo + chunk])
        total += np.tensordot(weights[lo:lo + chunk], R, axes=(0, 0))
    return total


def snap_half_height(half_height: float, t: float) -> float:
    """Nearest ``(k + 1/2) pi / t`` to ``half_height``: a zero of ``cos(y t)``."""
    k = max(0, round(half_height * t / math.pi - 0.5))
    return (k + 0.5) * math.pi / t


def _line_integral(A, line: BromwichLine, t: float) -> np.ndarray:
    A = as_square(A, "A")
    eig = np.linalg.eigvals(A)
    line.validate(float(np.max(eig.real)))
    c = line.abscissa
    if t > 0:
        omega = snap_half_height(line.half_height, t)
        max_panel = math.pi / (4.0 * t)
    else:
        omega = line.half_height
        max_panel = math.inf
    edges = _line_breakpoints(eig, c, omega, max_panel)
    y, w = _gauss_panels(edges, line.nodes)
    p = c + 1j * y
    weights = w.astype(np.complex128)
    if t != 0:
        weights = weights * np.exp(p * t)
    # (1/2 pi j) dp = (1/2 pi) dy
    return _weighted_sum(A, p, weights) / (2 * np.pi)


def bromwich_resolvent_t0(A, line: BromwichLine) -> np.ndarray:
    """``(1/2 pi j) * int_{c-jW}^{c+jW} (pI - A)^{-1} dp``, symmetric truncation.

    Tends to ``I/2`` with error ``(cI - A) / (pi W) + O(W^-3)``.
    """
    return _line_integral(A, line, 0.0)


def bromwich_resolvent_t(A, t: float, line: BromwichLine) -> np.ndarray:
    """``(1/2 pi j) * int e^{pt} (pI - A)^{-1} dp`` over the truncated line.

    Converges to ``expm(A, t)``.  The half-height is moved to the nearest
    zero of ``cos(W t)`` (at most half an oscillation period away), which
    removes the ``1/W`` term of the truncation error and leaves ``O(W^-2)``.
    Panels are no longer than ``pi / (4 t)``.
    """
    t = float(t)
    if not t > 0:
        raise DomainError("t must be > 0; use bromwich_resolvent_t0 for t = 0")
    return _line_integral(A, line, t)


def riesz_projection(A, contour: CircleContour, ambiguity: float = 0.1) -> np.ndarray:
    """Spectral projector ``(1/2 pi j) oint (pI - A)^{-1} dp`` on a circle."""
    A = as_square(A, "A")
    eig = np.linalg.eigvals(A)
    dist = np.abs(eig - complex(contour.center))
    r = contour.radius
    bad = (dist >= r / (1 + ambiguity)) & (dist <= r * (1 + ambiguity))
    if np.any(bad):
        raise ContourPlacementError(
            f"eigenvalue {eig[bad][0]!r} lies in the ambiguity band of the circle "
            f"(center {contour.center!r}, radius {r})"
        )
    points, offsets = contour.points()
    # dp = j (p - center) dtheta, dtheta = 2 pi / N
    weights = offsets / contour.nodes
    return _weighted_sum(A, points, weights)


def big_arc_check(
    f: Callable[[complex], object],
    K,
    theta1: float,
    theta2: float,
    radii: Sequence[float],
    nodes: int = 64,
    panels: int = 8,
) -> list[tuple[float, float]]:
    """Deviation of ``int_{C(R)} f(z) dz`` from ``i (theta2 - theta1) K`` per radius.

    ``C(R)`` is the counter-clockwise arc ``R e^{i theta}``.  Returns
    ``[(R, deviation), ...]`` with the deviation measured in the 2-norm.
    """
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValidationError("radii must be increasing")
    K = np.atleast_2d(np.asarray(K, dtype=np.complex128))
    edges = np.linspace(theta1, theta2, panels + 1)
    theta, w = _gauss_panels(edges, nodes)
    expected = 1j * (theta2 - theta1) * K
    rows = []
    for R in radii:
        z = R * np.exp(1j * theta)
        total = np.zeros_like(expected)
        for zk, wk in zip(z, w):
            total = total + np.atleast_2d(np.asarray(f(zk), dtype=np.complex128)) * (1j * zk * wk)
        rows.append((R, float(np.linalg.norm(total - expected, 2))))
    return rows


def decay_exponent(xs: Iterable[float], gaps: Iterable[float]) -> float:
    """Least-squares slope of ``log gap`` against ``log x`` (negative when decaying)."""
    x = np.log(np.asarray(list(xs), dtype=float))
    g = np.log(np.asarray(list(gaps), dtype=float))
    return float(np.polyfit(x, g, 1)[0])
