"""Shared generators for the test suite."""

import numpy as np

from corrected_sampler import ContinuousStateSpace
from corrected_sampler.config import DEFAULT_SEED


def random_hurwitz_plant(rng, n=None, m=1, p=1, norm=4.0):
    """Random plant with all poles at least 0.2 left of the imaginary axis and ||A|| <= ~norm."""
    if n is None:
        n = int(rng.integers(1, 7))
    M = rng.standard_normal((n, n))
    M *= (0.5 * norm) / max(np.linalg.norm(M, 2), 1e-12)
    shift = np.max(np.linalg.eigvals(M).real) + rng.uniform(0.2, 1.5)
    A = M - shift * np.eye(n)
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    # keep CB away from zero so relative checks stay meaningful
    while np.linalg.norm(C @ B, 2) < 0.2:
        C = rng.standard_normal((p, n))
    return ContinuousStateSpace(A, B, C)


def plant_suite(count=50, seed=DEFAULT_SEED):
    rng = np.random.default_rng(seed)
    return [random_hurwitz_plant(rng) for _ in range(count)]


def scalar_plant(a=-1.0, b=1.0, c=1.0):
    return ContinuousStateSpace([[a]], [[b]], [[c]])


def random_regime_plant(rng, Ts=1.0):
    """Rejection-sample an RMCF plant with c - kappa s >= alpha and a positive zero."""
    from corrected_sampler.rmcf import RmcfPlant, in_regime

    while True:
        sT, wT, kappa = rng.uniform(0.05, 2.0), rng.uniform(0.1, 3.0), rng.uniform(-2.0, 2.0)
        g = float(rng.uniform(0.2, 5.0))
        sigma, omega = sT / Ts, wT / Ts
        if sigma - kappa * omega <= 0:
            continue
        p = RmcfPlant.from_kappa(sigma, omega, kappa, g)
        if in_regime(p, Ts):
            return p
