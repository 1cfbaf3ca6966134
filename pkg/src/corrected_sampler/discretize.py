"""Impulse-invariance discretization with an explicit value of the step at 0.

The corrected model uses ``u(0) = 1/2``, which shows up only in the
feedthrough: ``Dz = CB/2``.  The conventional (right-limit) model uses
``u(0) = 1`` and therefore ``Dz = CB``.  ``Bz = B`` in both cases; there is
no ``Ts`` factor on the input matrix.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import UnsupportedFeedthroughError, ValidationError
from .linalg import expm
from .statespace import (
    ETA_CORRECTED,
    ETA_RIGHT_LIMIT,
    ContinuousStateSpace,
    DiscreteStateSpace,
    realify,
    transfer_eval_c,
    transfer_eval_d,
)

__all__ = [
    "HeavisideConvention",
    "discretize",
    "discretize_corrected",
    "discretize_right_limit",
    "forward_shift_realization",
    "transfer_eval_c",
    "transfer_eval_d",
    "sampled_value",
]


class HeavisideConvention(float, enum.Enum):
    """Value assigned to the unit step at ``t = 0``."""

    LEFT = 0.0
    MEAN = 0.5
    RIGHT = 1.0

    def step(self, t: float) -> float:
        if t > 0:
            return 1.0
        if t < 0:
            return 0.0
        return float(self.value)


def _require_strictly_proper(plant: ContinuousStateSpace):
    if np.any(plant.D != 0):
        raise UnsupportedFeedthroughError(
            "the corrected impulse-invariance model is defined for D = 0 plants only"
        )


def discretize(plant: ContinuousStateSpace, Ts: float, eta: float) -> DiscreteStateSpace:
    """Shared construction: ``Az = e^{A Ts}``, ``Bz = B``, ``Cz = C Az``, ``Dz = eta C B``."""
    _require_strictly_proper(plant)
    Ts = float(Ts)
    if not Ts > 0:
        raise ValidationError(f"Ts must be > 0, got {Ts!r}")
    if eta not in (ETA_CORRECTED, ETA_RIGHT_LIMIT):
        raise ValidationError(f"eta must be 0.5 or 1, got {eta!r}")
    Az = realify(expm(plant.A, Ts))
    Cz = realify(plant.C @ Az)
    Dz = realify(eta * (plant.C @ plant.B))
    return DiscreteStateSpace(Az, plant.B.copy(), Cz, Dz, Ts, eta)


def discretize_corrected(plant: ContinuousStateSpace, Ts: float) -> DiscreteStateSpace:
    return discretize(plant, Ts, ETA_CORRECTED)


def discretize_right_limit(plant: ContinuousStateSpace, Ts: float) -> DiscreteStateSpace:
    return discretize(plant, Ts, ETA_RIGHT_LIMIT)


def forward_shift_realization(dss: DiscreteStateSpace) -> DiscreteStateSpace:
    """Realization of ``z * Gd(z)`` for a model with ``Dz = 0``.

    From ``z (zI - A)^{-1} = I + A (zI - A)^{-1}``: the new model is
    ``(A, B, C A, C B)``.
    """
    if np.any(dss.Dz != 0):
        raise ValidationError("forward_shift_realization requires Dz = 0")
    return DiscreteStateSpace(
        dss.Az.copy(), dss.Bz.copy(), realify(dss.Cz @ dss.Az), realify(dss.Cz @ dss.Bz), dss.Ts
    )


def sampled_value(plant: ContinuousStateSpace, t: float,
                  convention: HeavisideConvention = HeavisideConvention.MEAN) -> np.ndarray:
    """Impulse response ``C e^{A t} B u(t)`` with ``u(0)`` set by ``convention``."""
    t = float(t)
    p, m = plant.shape
    u = HeavisideConvention(convention).step(t)
    if u == 0.0:
        return np.zeros((p, m), dtype=np.result_type(plant.C, plant.B))
    return realify(u * (plant.C @ expm(plant.A, t) @ plant.B))
