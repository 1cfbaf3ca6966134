"""Tolerances, ladders and run settings, all in one record."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import ValidationError

CONFIG_ENV_VAR = "CORRECTED_SAMPLER_CONFIG"
DEFAULT_SEED = 20240101


@dataclass(frozen=True)
class Tolerances:
    proj: float = 1e-8            # projector identities
    cluster: float = 1e-7         # relative to ||A||
    pole: float = 1e-9            # aliasing pole collision, relative to max(1, |lambda|)
    ambiguity: float = 0.1        # annulus half-width around a circle, relative to radius
    rate: float = 0.3             # allowed |measured - predicted| decay exponent
    # final-gap tolerances used by the lemma suite
    cotangent: float = 1e-3
    half_part: float = 1e-10
    kernel: float = 1e-4
    higher_order: float = 1e-4
    poisson: float = 1e-12
    neumann: float = 1e-10
    big_arc: float = 1e-3
    riesz: float = 1e-8
    bromwich_t0: float = 2e-4
    bromwich_t: float = 1e-6
    forward_shift: float = 1e-11

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValidationError(f"tolerance {f.name} must be > 0, got {value!r}")


def _increasing(name, values):
    values = tuple(values)
    if not values:
        raise ValidationError(f"{name} must not be empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError(f"{name} must be strictly increasing, got {values}")
    return values


@dataclass(frozen=True)
class RunConfig:
    tolerances: Tolerances = field(default_factory=Tolerances)
    n_ladder: tuple = (250, 500, 1000, 2000, 4000)
    omega_ladder: tuple = (1e2, 1e3, 1e4)
    arc_radii: tuple = (1e2, 2e2, 4e2, 8e2, 1.6e3, 3.2e3, 6.4e3, 1.28e4)
    circle_nodes: int = 64
    line_nodes: int = 16
    alias_n: int = 10_000
    seed: int = DEFAULT_SEED
    report_path: str | None = None
    sweep_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_ladder", _increasing("n_ladder", self.n_ladder))
        object.__setattr__(self, "omega_ladder", _increasing("omega_ladder", self.omega_ladder))
        object.__setattr__(self, "arc_radii", _increasing("arc_radii", self.arc_radii))
        if self.circle_nodes < 8:
            raise ValidationError("circle_nodes must be >= 8")
        if self.line_nodes < 2 or self.line_nodes % 2:
            raise ValidationError("line_nodes must be a positive even integer")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        tol = data.pop("tolerances", None)
        if isinstance(tol, Mapping):
            tol_known = {f.name for f in fields(Tolerances)}
            bad = set(tol) - tol_known
            if bad:
                raise ValidationError(f"unknown tolerance keys: {sorted(bad)}")
            data["tolerances"] = Tolerances(**tol)
        elif isinstance(tol, (int, float)):
            # a bare number sets every tolerance at once
            data["tolerances"] = Tolerances(**{f.name: float(tol) for f in fields(Tolerances)})
        return cls(**data)

    def with_tolerances(self, **kw) -> "RunConfig":
        return replace(self, tolerances=replace(self.tolerances, **kw))


DEFAULT_CONFIG = RunConfig()


def load_config(path: str | os.PathLike | None = None) -> RunConfig:
    """Load a JSON config; falls back to ``$CORRECTED_SAMPLER_CONFIG``, then defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR) or None
    if path is None:
        return DEFAULT_CONFIG
    text = Path(path).read_text()
    return RunConfig.from_dict(json.loads(text))
