"""Second-order RMCF benchmark: closed-form stability boundary vs feedthrough convention.

Plant ``G(s) = g (s + z) / ((s + sigma)^2 + omega^2)`` in real modal form,
sampled with the corrected (``eta = 1/2``) or right-limit (``eta = 1``)
impulse-invariant model and closed with static gain ``K``.  Because
``Dd = eta g`` is nonzero the loop is algebraic; solving it gives the
effective gain ``K_eff = K / (1 + eta g K)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .errors import OutsideRegimeError, ValidationError
from .linalg import spectral_radius
from .statespace import ETA_CORRECTED, ETA_RIGHT_LIMIT, ContinuousStateSpace

__all__ = [
    "UNBOUNDED",
    "RmcfPlant",
    "RmcfDerived",
    "GainAnalysis",
    "build_rmcf",
    "derived",
    "closed_loop_matrix",
    "jury_margins",
    "in_regime",
    "critical_gain_eff",
    "critical_gain_bisection",
    "critical_gain_sweep",
    "gain_map",
    "gain_unmap",
    "analyze_gain",
    "stability_gap_report",
    "closed_loop_simulate",
    "search_dramatic",
    "stability_sweep",
    "gain_crossing",
    "verify_dramatic",
]

UNBOUNDED = math.inf


@dataclass(frozen=True)
class RmcfPlant:
    sigma: float
    omega: float
    zero: float
    gain: float

    def __post_init__(self):
        for name in ("sigma", "omega", "zero", "gain"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be a positive finite number, got {value!r}")

    @property
    def kappa(self) -> float:
        return (self.sigma - self.zero) / self.omega

    @classmethod
    def from_kappa(cls, sigma, omega, kappa, gain) -> "RmcfPlant":
        return cls(sigma, omega, sigma - kappa * omega, gain)


@dataclass(frozen=True)
class RmcfDerived:
    kappa: float
    alpha: float
    theta: float
    c: float
    s: float


def derived(p: RmcfPlant, Ts: float) -> RmcfDerived:
    if not Ts > 0:
        raise ValidationError("Ts must be > 0")
    theta = p.omega * Ts
    return RmcfDerived(p.kappa, math.exp(-p.sigma * Ts), theta, math.cos(theta), math.sin(theta))


def build_rmcf(p: RmcfPlant) -> ContinuousStateSpace:
    A = np.array([[-p.sigma, -p.omega], [p.omega, -p.sigma]])
    B = np.array([[0.0], [1.0]])
    C = np.array([[p.gain * p.kappa, p.gain]])
    return ContinuousStateSpace(A, B, C)


def _discrete_parts(p: RmcfPlant, Ts: float):
    d = derived(p, Ts)
    Ad = d.alpha * np.array([[d.c, -d.s], [d.s, d.c]])
    Bd = np.array([[0.0], [1.0]])
    Cd = d.alpha * np.array([[p.gain * (d.kappa * d.c + d.s), p.gain * (d.c - d.kappa * d.s)]])
    return Ad, Bd, Cd


def closed_loop_matrix(p: RmcfPlant, Ts: float, K_eff: float) -> np.ndarray:
    """``A_cl = Ad - Bd K_eff Cd`` for regulation (``r = 0``)."""
    Ad, Bd, Cd = _discrete_parts(p, Ts)
    return Ad - float(K_eff) * (Bd @ Cd)


def jury_margins(p: RmcfPlant, Ts: float, K_eff: float) -> tuple[float, float, float]:
    """``(p(1), p(-1), 1 - det)`` for ``p(l) = l^2 - tr l + det``; all > 0 iff Schur stable."""
    M = closed_loop_matrix(p, Ts, K_eff)
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    return 1.0 - tr + det, 1.0 + tr + det, 1.0 - det


def in_regime(p: RmcfPlant, Ts: float) -> bool:
    """``c - kappa s >= alpha``: the boundary is then reached through ``p(-1) = 0``."""
    d = derived(p, Ts)
    return d.c - d.kappa * d.s >= d.alpha


def critical_gain_eff(p: RmcfPlant, Ts: float) -> float:
    """Closed-form ``K_eff*`` solving ``p(-1) = 0``."""
    d = derived(p, Ts)
    den = p.gain * (d.alpha**2 + d.alpha * (d.c - d.kappa * d.s))
    if not den > 0:
        raise OutsideRegimeError(f"closed form undefined: g(alpha^2 + alpha(c - kappa s)) = {den:.6g}")
    return (1.0 + 2.0 * d.alpha * d.c + d.alpha**2) / den


def _rho_minus_one(p, Ts, K_eff):
    return spectral_radius(closed_loop_matrix(p, Ts, K_eff)) - 1.0


def _bisect(f, lo, hi, iters=200):
    flo, fhi = f(lo), f(hi)
    if not (flo < 0 <= fhi):
        raise ValidationError(f"bisection bracket [{lo}, {hi}] does not straddle the boundary")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_gain_bisection(p: RmcfPlant, Ts: float, upper: float | None = None,
                            iters: int = 200) -> float:
    """Bisection on ``spectral_radius(A_cl(K_eff)) - 1`` over ``[0, upper]``.

    ``upper`` defaults to ten times the closed-form value.
    """
    if upper is None:
        upper = 10.0 * critical_gain_eff(p, Ts)
    return _bisect(lambda k: _rho_minus_one(p, Ts, k), 0.0, upper, iters)


def critical_gain_sweep(p: RmcfPlant, Ts: float, start: float | None = None,
                        factor: float = 1.25, limit: float | None = None) -> float:
    """First stability crossing found by a geometric ``K_eff`` sweep, refined by bisection.

    Uses no closed-form information.  Returns ``UNBOUNDED`` when no crossing
    occurs before ``limit`` (default ``1e8 / g``).
    """
    g = p.gain
    k = start if start is not None else 1e-3 / g
    limit = limit if limit is not None else 1e8 / g
    f = lambda kk: _rho_minus_one(p, Ts, kk)  # noqa: E731
    if f(0.0) >= 0:
        return 0.0
    prev = 0.0
    while k <= limit:
        if f(k) >= 0:
            return _bisect(f, prev, k)
        prev, k = k, k * factor
    return UNBOUNDED


def gain_map(K: float, eta: float, g: float) -> float:
    """``K_eff = K / (1 + eta g K)``; ``K = inf`` maps to the saturation ``1/(eta g)``."""
    if math.isinf(K):
        return 1.0 / (eta * g)
    return K / (1.0 + eta * g * K)


def gain_unmap(K_eff: float, eta: float, g: float) -> float:
    """Inverse of :func:`gain_map`; ``UNBOUNDED`` once ``eta g K_eff >= 1``."""
    if eta * g * K_eff >= 1.0:
        return UNBOUNDED
    return K_eff / (1.0 - eta * g * K_eff)


@dataclass(frozen=True)
class GainAnalysis:
    eta: float
    K_eff_star: float
    K_max: float                  # UNBOUNDED (inf) allowed
    regime_ok: bool
    gap_class: str                # "dramatic" | "ordinary"
    source: str = "closed-form"   # or "oracle" outside the regime
    rho_below: float | None = None  # spectral radius at 0.99 K_max
    rho_above: float | None = None  # spectral radius at 1.01 K_max

    @property
    def bounded(self) -> bool:
        return not math.isinf(self.K_max)

    def to_json(self) -> dict:
        out = asdict(self)
        out["K_max"] = "UNBOUNDED" if math.isinf(self.K_max) else self.K_max
        return out


def _gap_class(K_eff_star: float, g: float) -> str:
    return "dramatic" if 1.0 / g <= K_eff_star < 2.0 / g else "ordinary"


def _rho_at_gain(p, Ts, K, eta):
    return spectral_radius(closed_loop_matrix(p, Ts, gain_map(K, eta, p.gain)))


def analyze_gain(p: RmcfPlant, Ts: float, eta: float, K_eff_star: float | None = None,
                 regime_ok: bool | None = None, source: str = "closed-form") -> GainAnalysis:
    if regime_ok is None:
        regime_ok = in_regime(p, Ts)
    if K_eff_star is None:
        K_eff_star = critical_gain_eff(p, Ts)
    K_max = gain_unmap(K_eff_star, eta, p.gain)
    below = above = None
    if not math.isinf(K_max):
        below = _rho_at_gain(p, Ts, 0.99 * K_max, eta)
        above = _rho_at_gain(p, Ts, 1.01 * K_max, eta)
    return GainAnalysis(eta, K_eff_star, K_max, bool(regime_ok), _gap_class(K_eff_star, p.gain),
                        source, below, above)


def stability_gap_report(p: RmcfPlant, Ts: float) -> tuple[GainAnalysis, GainAnalysis]:
    """Gain analyses for the corrected and right-limit models, in that order.

    Outside the regime ``c - kappa s >= alpha`` the critical effective gain
    comes from the spectral-radius sweep, never from the closed form.
    """
    ok = in_regime(p, Ts)
    if ok:
        kstar, source = critical_gain_eff(p, Ts), "closed-form"
    else:
        kstar, source = critical_gain_sweep(p, Ts), "oracle"
    return (analyze_gain(p, Ts, ETA_CORRECTED, kstar, ok, source),
            analyze_gain(p, Ts, ETA_RIGHT_LIMIT, kstar, ok, source))


@dataclass(frozen=True, eq=False)
class Trajectory:
    states: np.ndarray   # (steps + 1, 2)
    inputs: np.ndarray   # (steps + 1,)
    outputs: np.ndarray  # (steps + 1,)
    K_eff: float


def closed_loop_simulate(p: RmcfPlant, Ts: float, K: float, eta: float, steps: int,
                         x0=(1.0, 0.0)) -> Trajectory:
    """Iterate ``x[k+1] = A_cl x[k]`` with ``u[k] = -K_eff Cd x[k]``."""
    steps = int(steps)
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    K_eff = gain_map(K, eta, p.gain)
    Ad, Bd, Cd = _discrete_parts(p, Ts)
    Acl = Ad - K_eff * (Bd @ Cd)
    Dd = eta * p.gain
    x = np.empty((steps + 1, 2))
    x[0] = np.asarray(x0, dtype=float)
    for k in range(steps):
        x[k + 1] = Acl @ x[k]
    cx = x @ Cd[0]
    u = -K_eff * cx
    y = cx + Dd * u
    return Trajectory(x, u, y, K_eff)


def search_dramatic(sigma_T=(0.05, 2.0, 40), omega_T=(0.1, 3.0, 30), kappa=(-2.0, 2.0, 41),
                    Ts: float = 1.0, target: float = 1.5):
    """Grid search for an in-regime plant with ``1/g <= K_eff* < 2/g`` (``g = 1``).

    Among qualifying grid points the one with ``g K_eff*`` closest to
    ``target`` is returned, so the pick is deterministic.  Returns
    ``(plant, K_eff_star)`` or ``None``.
    """
    sT = np.linspace(*sigma_T[:2], int(sigma_T[2]))
    wT = np.linspace(*omega_T[:2], int(omega_T[2]))
    kp = np.linspace(*kappa[:2], int(kappa[2]))
    S, W, Kp = np.meshgrid(sT, wT, kp, indexing="ij")
    alpha = np.exp(-S)
    c, s = np.cos(W), np.sin(W)
    lean = c - Kp * s
    den = alpha**2 + alpha * lean
    with np.errstate(divide="ignore", invalid="ignore"):
        kstar = (1 + 2 * alpha * c + alpha**2) / den
    zero = S / Ts - Kp * W / Ts
    ok = (lean >= alpha) & (den > 0) & (zero > 0) & (kstar >= 1.0) & (kstar < 2.0)
    if not np.any(ok):
        return None
    score = np.where(ok, np.abs(kstar - target), np.inf)
    idx = np.unravel_index(int(np.argmin(score)), score.shape)
    plant = RmcfPlant.from_kappa(float(S[idx] / Ts), float(W[idx] / Ts), float(Kp[idx]), 1.0)
    return plant, critical_gain_eff(plant, Ts)


def stability_sweep(p: RmcfPlant, Ts: float, gains: Iterable[float],
                    etas=(ETA_CORRECTED, ETA_RIGHT_LIMIT)) -> list[dict]:
    """Rows ``{K, eta, spectral_radius, stable}`` for the CSV sweep table."""
    rows = []
    for eta in etas:
        for K in gains:
            rho = _rho_at_gain(p, Ts, float(K), eta)
            rows.append({"K": float(K), "eta": eta, "spectral_radius": rho, "stable": rho < 1.0})
    return rows


def gain_crossing(p: RmcfPlant, Ts: float, eta: float, start: float | None = None,
                  factor: float = 1.1, limit: float | None = None) -> float:
    """Smallest real gain ``K`` at which the sampled loop loses stability.

    Geometric sweep in ``K`` followed by bisection; ``UNBOUNDED`` when the
    spectral radius stays below one up to ``limit`` (default ``1e6 / g``).
    """
    g = p.gain
    K = start if start is not None else 1e-3 / g
    limit = limit if limit is not None else 1e6 / g
    f = lambda kk: _rho_at_gain(p, Ts, kk, eta) - 1.0  # noqa: E731
    prev = 0.0
    while K <= limit:
        if f(K) >= 0:
            return _bisect(f, prev, K)
        prev, K = K, K * factor
    if f(limit) >= 0:
        return _bisect(f, prev, limit)
    return UNBOUNDED


def verify_dramatic(p: RmcfPlant, Ts: float) -> dict:
    """Oracle evidence for a dramatic stability gap at ``p``.

    Sweeps the right-limit loop up to ``K = 1e6/g`` and locates the corrected
    loop's crossing without using the closed-form ``K_max``.
    """
    half, one = stability_gap_report(p, Ts)
    cross_half = gain_crossing(p, Ts, ETA_CORRECTED)
    cross_one = gain_crossing(p, Ts, ETA_RIGHT_LIMIT)
    rel = None
    if half.bounded and not math.isinf(cross_half):
        rel = abs(cross_half - half.K_max) / half.K_max
    return {
        "gap_class": half.gap_class,
        "g_K_eff_star": p.gain * half.K_eff_star,
        "corrected_K_max": half.K_max,
        "corrected_crossing": cross_half,
        "corrected_relative_error": rel,
        "right_limit_K_max": one.K_max,
        "right_limit_crossing": cross_one,
        "right_limit_sweep_limit": 1e6 / p.gain,
    }
