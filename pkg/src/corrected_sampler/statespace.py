"""Continuous and discrete state-space containers plus their JSON schema."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import DimensionError, ValidationError
from .linalg import as_matrix, matrix_from_json, matrix_to_json, resolvent

__all__ = [
    "ETA_CORRECTED",
    "ETA_RIGHT_LIMIT",
    "ContinuousStateSpace",
    "DiscreteStateSpace",
    "realify",
    "model_to_json",
    "model_from_json",
]

ETA_CORRECTED = 0.5
ETA_RIGHT_LIMIT = 1.0
_ETA_NAMES = {"corrected": ETA_CORRECTED, "right-limit": ETA_RIGHT_LIMIT}


def realify(M, tol: float = 1e-12) -> np.ndarray:
    """Drop an imaginary part no larger than ``tol`` (relative to ``max(1, |M|)``)."""
    M = np.asarray(M)
    if np.iscomplexobj(M):
        scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
        if not M.size or float(np.max(np.abs(M.imag))) <= tol * scale:
            return np.ascontiguousarray(M.real)
    return M


def _frozen(M):
    M = np.array(M)
    M.setflags(write=False)
    return M


def _check_dims(A, B, C, D):
    n = A.shape[0]
    if A.shape != (n, n):
        raise DimensionError(f"A must be square, got {A.shape}")
    if B.shape[0] != n:
        raise DimensionError(f"B must have {n} rows, got {B.shape}")
    if C.shape[1] != n:
        raise DimensionError(f"C must have {n} columns, got {C.shape}")
    if D.shape != (C.shape[0], B.shape[1]):
        raise DimensionError(f"D must be {C.shape[0]}x{B.shape[1]}, got {D.shape}")


@dataclass(frozen=True, eq=False)
class ContinuousStateSpace:
    """``x' = A x + B u``, ``y = C x + D u`` with transfer ``C (sI - A)^{-1} B + D``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray | None = None

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        C = as_matrix(self.C, "C")
        D = np.zeros((C.shape[0], B.shape[1])) if self.D is None else as_matrix(self.D, "D")
        _check_dims(A, B, C, D)
        for name, val in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, _frozen(val))

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        """(outputs, inputs)."""
        return self.C.shape[0], self.B.shape[1]

    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.A)

    def is_hurwitz(self) -> bool:
        return bool(np.all(self.poles().real < 0))

    def certify_hurwitz(self) -> "ContinuousStateSpace":
        if not self.is_hurwitz():
            raise ValidationError("A has an eigenvalue with nonnegative real part")
        return self

    def transfer(self, s: complex) -> np.ndarray:
        return transfer_eval_c(self, s)


@dataclass(frozen=True, eq=False)
class DiscreteStateSpace:
    """``x[k+1] = Az x[k] + Bz u[k]``, ``y[k] = Cz x[k] + Dz u[k]`` sampled at ``Ts``.

    ``eta`` records the feedthrough convention that produced ``Dz``
    (0.5 corrected, 1.0 right-limit); ``None`` for models built by hand.
    """

    Az: np.ndarray
    Bz: np.ndarray
    Cz: np.ndarray
    Dz: np.ndarray
    Ts: float
    eta: float | None = None

    def __post_init__(self):
        Az, Bz, Cz, Dz = (as_matrix(M, name) for M, name in
                          zip((self.Az, self.Bz, self.Cz, self.Dz), ("Az", "Bz", "Cz", "Dz")))
        _check_dims(Az, Bz, Cz, Dz)
        if not (self.Ts > 0 and math.isfinite(self.Ts)):
            raise ValidationError(f"Ts must be positive and finite, got {self.Ts!r}")
        if self.eta is not None and self.eta not in (ETA_CORRECTED, ETA_RIGHT_LIMIT):
            raise ValidationError(f"eta must be 0.5 or 1, got {self.eta!r}")
        for name, val in zip(("Az", "Bz", "Cz", "Dz"), (Az, Bz, Cz, Dz)):
            object.__setattr__(self, name, _frozen(val))
        object.__setattr__(self, "Ts", float(self.Ts))

    @property
    def order(self) -> int:
        return self.Az.shape[0]

    def transfer(self, z: complex) -> np.ndarray:
        return transfer_eval_d(self, z)


def transfer_eval_c(plant: ContinuousStateSpace, s: complex) -> np.ndarray:
    """``G(s) = C (sI - A)^{-1} B + D``."""
    return plant.C @ resolvent(plant.A, s) @ plant.B + plant.D


def transfer_eval_d(dss: DiscreteStateSpace, z: complex) -> np.ndarray:
    """``Gd(z) = Cz (zI - Az)^{-1} Bz + Dz``."""
    return dss.Cz @ resolvent(dss.Az, z) @ dss.Bz + dss.Dz


def model_to_json(model) -> dict:
    if isinstance(model, ContinuousStateSpace):
        return {
            "kind": "continuous",
            "A": matrix_to_json(model.A),
            "B": matrix_to_json(model.B),
            "C": matrix_to_json(model.C),
            "D": matrix_to_json(model.D),
        }
    if isinstance(model, DiscreteStateSpace):
        return {
            "kind": "discrete",
            "A": matrix_to_json(model.Az),
            "B": matrix_to_json(model.Bz),
            "C": matrix_to_json(model.Cz),
            "D": matrix_to_json(model.Dz),
            "Ts": model.Ts,
            "eta": model.eta,
        }
    raise TypeError(f"not a state-space model: {type(model).__name__}")


def _eta_from_json(value):
    if value is None:
        return None
    if isinstance(value, str):
        try:
            return _ETA_NAMES[value]
        except KeyError:
            raise ValidationError(f"unknown eta {value!r}") from None
    return float(value)


def model_from_json(obj: Mapping[str, Any]):
    if not isinstance(obj, Mapping):
        raise ValidationError("model record must be a JSON object")
    kind = obj.get("kind")
    try:
        mats = {k: matrix_from_json(obj[k]) for k in ("A", "B", "C")}
    except KeyError as exc:
        raise ValidationError(f"model record missing field {exc.args[0]!r}") from None
    D = matrix_from_json(obj["D"]) if obj.get("D") is not None else None
    if kind == "continuous":
        return ContinuousStateSpace(mats["A"], mats["B"], mats["C"], D)
    if kind == "discrete":
        if D is None:
            D = np.zeros((mats["C"].shape[0], mats["B"].shape[1]))
        if "Ts" not in obj:
            raise ValidationError("discrete model record needs Ts")
        return DiscreteStateSpace(mats["A"], mats["B"], mats["C"], D, float(obj["Ts"]),
                                  _eta_from_json(obj.get("eta")))
    raise ValidationError(f"model kind must be 'continuous' or 'discrete', got {kind!r}")
