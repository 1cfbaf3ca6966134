"""Run every identity check on a refinement ladder and grade it.

Each report carries one or more ladders of ``(x, gap)`` rows.  Where the
truncation error follows a power law the slope of ``log gap`` against
``log x`` is fitted and compared with the predicted exponent; for
geometric decay the slope is taken against ``x`` itself (``log2`` per
step).  Identities that hold to rounding at every rung have no rate.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .aliasing import (
    Gaussian,
    aliasing_power_sum,
    cotangent_check,
    half_part_check,
    higher_order_term,
    kernel_expansion_check,
    neumann_expansion_check,
    poisson_zero_phase_check,
)
from .config import DEFAULT_CONFIG, RunConfig
from .contour import (
    BromwichLine,
    big_arc_check,
    bromwich_resolvent_t,
    bromwich_resolvent_t0,
    decay_exponent,
    default_abscissa,
)
from .discretize import forward_shift_realization
from .linalg import expm, resolvent, spectral_radius
from .spectral import spectral_decomposition
from .statespace import DiscreteStateSpace

__all__ = ["Ladder", "LemmaReport", "LEMMA_IDS", "run_all", "reports_to_json",
           "reports_from_json", "format_table"]

VERIFIED = "verified"
WITH_CORRECTION = "verified-with-correction"
FAILED = "failed"

LEMMA_IDS = (
    "cotangent",
    "half-part",
    "kernel-expansion",
    "higher-order-partial-fractions",
    "resolvent-partial-fractions",
    "poisson-zero-phase",
    "neumann-expansion",
    "big-arc",
    "riesz-sum-to-identity",
    "bromwich-t0",
    "bromwich-t",
    "forward-shift",
)

# fixed test matrices, all with ||A|| <= 5
RMCF_A = np.array([[-1.0, -3.0], [3.0, -1.0]])
TEST_MATRICES = {
    "scalar": np.array([[-1.0]]),
    "rmcf": RMCF_A,
    "diagonal": np.diag([-1.0, -2.0]),
    "jordan": np.array([[-1.0, 1.0], [0.0, -1.0]]),
    "coupled": np.array([[-1.0, 2.0, 0.0], [0.0, -2.0, 1.0], [0.5, 0.0, -3.0]]),
}


@dataclass
class Ladder:
    label: str
    xs: list
    gaps: list
    predicted: float | None = None
    kind: str = "power"             # "power" | "geometric" | "none"
    fitted: float | None = None

    def fit(self) -> "Ladder":
        if self.kind == "power" and len(self.xs) > 1:
            self.fitted = decay_exponent(self.xs, self.gaps)
        elif self.kind == "geometric" and len(self.xs) > 1:
            self.fitted = float(np.polyfit(np.asarray(self.xs, float), np.log2(self.gaps), 1)[0])
        return self

    @property
    def final_gap(self) -> float:
        return float(self.gaps[-1])

    def rate_ok(self, tol: float) -> bool:
        if self.kind == "none" or self.predicted is None:
            return True
        return self.fitted is not None and abs(self.fitted - self.predicted) <= tol


@dataclass
class LemmaReport:
    lemma_id: str
    params: dict
    ladders: list
    tolerance: float
    verdict: str
    note: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def final_gap(self) -> float:
        return max(l.final_gap for l in self.ladders)

    @property
    def exponents(self) -> dict:
        return {l.label: l.fitted for l in self.ladders}

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj) -> "LemmaReport":
        obj = dict(obj)
        obj["ladders"] = [Ladder(**l) for l in obj["ladders"]]
        return cls(**obj)


def _grade(ladders, gap_tol, rate_tol):
    ok = all(l.final_gap <= gap_tol for l in ladders) and all(l.rate_ok(rate_tol) for l in ladders)
    return VERIFIED if ok else FAILED


def _report(lemma_id, params, ladders, gap_tol, cfg, note=""):
    ladders = [l.fit() for l in ladders]
    return LemmaReport(lemma_id, params, ladders, gap_tol,
                       _grade(ladders, gap_tol, cfg.tolerances.rate), note)


def _cotangent(cfg):
    x = 0.25
    gaps = [cotangent_check(x, n) for n in cfg.n_ladder]
    return _report("cotangent", {"x": x}, [Ladder("x=1/4", list(cfg.n_ladder), gaps, -1.0)],
                   cfg.tolerances.cotangent, cfg)


def _half_part(cfg):
    sT = 2.0
    checks = [half_part_check(sT, n) for n in cfg.n_ladder]
    last = checks[-1]
    series = Ladder("series", list(cfg.n_ladder), [c.series_gap for c in checks], -1.0).fit()
    tol = cfg.tolerances
    lhs = last.lhs
    coth = 1 / math.tanh(sT / 2)
    ratio = abs(lhs) / coth
    series_ok = series.rate_ok(tol.rate)
    if last.coth_gap <= tol.half_part and series_ok:
        verdict = VERIFIED
    elif last.corrected_gap <= tol.half_part and series_ok:
        verdict = WITH_CORRECTION
    else:
        verdict = FAILED
    return LemmaReport(
        "half-part", {"sT": sT}, [series], tol.half_part, verdict,
        note="holds as 1/(1-e^{-z}) - 1/2 = coth(z/2)/2; the coth(z/2) form is off by a factor of 2",
        extra={"lhs": lhs.real, "coth_gap": last.coth_gap,
               "corrected_gap": last.corrected_gap, "lhs_over_coth": ratio},
    )


def _kernel(cfg):
    gaps = [kernel_expansion_check(1.0, 1.0, n).gap for n in cfg.n_ladder]
    return _report("kernel-expansion", {"sigma": 1.0, "Ts": 1.0},
                   [Ladder("sigma=1", list(cfg.n_ladder), gaps, -1.0)], cfg.tolerances.kernel, cfg)


def _higher_order(cfg):
    x, Ts, M = 1.0, 1.0, 200
    ladders = []
    for r in (1, 2):
        target = higher_order_term(r, x, Ts, M)
        gaps = [abs(aliasing_power_sum(x, Ts, r, n) - target) for n in cfg.n_ladder]
        ladders.append(Ladder(f"r={r}", list(cfg.n_ladder), gaps, -1.0))
    # r = 3 pairs fall off like n^-4; a short ladder stays above rounding
    short = [10, 20, 40, 80, 160]
    target = higher_order_term(3, x, Ts, M)
    gaps = [abs(aliasing_power_sum(x, Ts, 3, n) - target) for n in short]
    ladders.append(Ladder("r=3", short, gaps, -3.0))
    return _report("higher-order-partial-fractions", {"x": x, "Ts": Ts, "M": M},
                   ladders, cfg.tolerances.higher_order, cfg)


def _resolvent_pf(cfg):
    ladders = []
    points = [0.3 + 0.7j, -0.5 + 2.0j, 1.0, 4.0 - 1.0j]
    for name, A in TEST_MATRICES.items():
        dec = spectral_decomposition(A, config=cfg)
        gaps = [float(np.linalg.norm(dec.resolvent(s) - resolvent(A, s), 2)) for s in points]
        ladders.append(Ladder(name, list(range(len(points))), [max(gaps)], kind="none"))
    for l in ladders:
        l.xs = [len(points)]
    return _report("resolvent-partial-fractions", {"points": [str(p) for p in points]},
                   ladders, cfg.tolerances.riesz, cfg)


def _poisson(cfg):
    cases = [("gauss-selfdual", Gaussian(math.pi), 6), ("gauss-a1", Gaussian(1.0), 8),
             ("gauss-width3", Gaussian.of_width(3.0), 20)]
    ladders = []
    for label, fn, K in cases:
        ks = list(range(max(1, K - 4), K + 1))
        ladders.append(Ladder(label, ks, [poisson_zero_phase_check(fn, k) for k in ks], kind="none"))
    return _report("poisson-zero-phase", {"K": [c[2] for c in cases]}, ladders,
                   cfg.tolerances.poisson, cfg)


def _neumann(cfg):
    A = TEST_MATRICES["coupled"]
    Ts = 0.5
    z = complex(np.exp((1 + 1j) * Ts))
    ratio = spectral_radius(expm(A, Ts)) / abs(z)
    Ms = [6, 12, 18, 24, 30]
    gaps = [neumann_expansion_check(A, Ts, z, m) for m in Ms]
    return _report("neumann-expansion", {"Ts": Ts, "z": str(z), "rho_over_abs_z": ratio},
                   [Ladder("coupled", Ms, gaps, math.log2(ratio), kind="geometric")],
                   cfg.tolerances.neumann, cfg)


def _big_arc(cfg):
    radii = list(cfg.arc_radii)
    lo, hi = math.pi / 2, 3 * math.pi / 2
    A = RMCF_A
    eye = np.eye(2)
    inv = big_arc_check(lambda z: 1 / z, 1.0, lo, hi, radii)
    res = big_arc_check(lambda z: resolvent(A, z), eye, lo, hi, radii)
    sq = big_arc_check(lambda z: 1 / z**2, 0.0, lo, hi, radii)
    ladders = [
        Ladder("1/z", radii, [g for _, g in inv], kind="none"),
        Ladder("resolvent", radii, [g for _, g in res], -1.0),
        Ladder("1/z^2", radii, [g for _, g in sq], -1.0),
    ]
    report = _report("big-arc", {"theta1": lo, "theta2": hi}, ladders, cfg.tolerances.big_arc, cfg)
    # exact for 1/z: hold it to rounding at every radius
    if max(g for _, g in inv) > 1e-12 and report.verdict == VERIFIED:
        report.verdict = FAILED
    return report


def _riesz(cfg):
    ladders = []
    for name, A in TEST_MATRICES.items():
        dec = spectral_decomposition(A, config=cfg)
        n = A.shape[0]
        total = sum(dec.projections)
        gap = float(np.linalg.norm(total - np.eye(n), 2))
        for i, P in enumerate(dec.projections):
            gap = max(gap, float(np.linalg.norm(P @ P - P, 2)))
            for k, Q in enumerate(dec.projections):
                if k != i:
                    gap = max(gap, float(np.linalg.norm(P @ Q, 2)))
        ladders.append(Ladder(name, [len(dec.projections)], [gap], kind="none"))
    return _report("riesz-sum-to-identity", {"nodes": cfg.circle_nodes}, ladders,
                   cfg.tolerances.riesz, cfg)


def _bromwich_t0(cfg):
    ladders = []
    for name in ("scalar", "rmcf", "diagonal", "coupled"):
        A = TEST_MATRICES[name]
        c = default_abscissa(A)
        half = 0.5 * np.eye(A.shape[0])
        gaps = [float(np.linalg.norm(
            bromwich_resolvent_t0(A, BromwichLine(c, w, cfg.line_nodes)) - half, 2))
            for w in cfg.omega_ladder]
        ladders.append(Ladder(name, list(cfg.omega_ladder), gaps, -1.0))
    return _report("bromwich-t0", {"omega_ladder": list(cfg.omega_ladder)}, ladders,
                   cfg.tolerances.bromwich_t0, cfg)


def _bromwich_t(cfg):
    A, Ts = RMCF_A, 1.0
    c = default_abscissa(A)
    ladders = []
    for frac in (0.1, 1.0):
        t = frac * Ts
        exact = expm(A, t)
        gaps = [float(np.linalg.norm(
            bromwich_resolvent_t(A, t, BromwichLine(c, w, cfg.line_nodes)) - exact, 2))
            for w in cfg.omega_ladder]
        ladders.append(Ladder(f"t={t:g}", list(cfg.omega_ladder), gaps, -2.0))
    return _report("bromwich-t", {"Ts": Ts, "t": [0.1 * Ts, Ts]}, ladders,
                   cfg.tolerances.bromwich_t, cfg)


def _forward_shift(cfg):
    rng = np.random.default_rng(cfg.seed)
    A = TEST_MATRICES["coupled"]
    Ad = expm(A, 0.5)
    B = rng.standard_normal((3, 1))
    C = rng.standard_normal((1, 3))
    base = DiscreteStateSpace(Ad, B, C, np.zeros((1, 1)), 0.5)
    shifted = forward_shift_realization(base)
    zs = rng.uniform(0.5, 3.0, 100) * np.exp(1j * rng.uniform(-np.pi, np.pi, 100))
    worst = 0.0
    for z in zs:
        lhs = shifted.transfer(z)
        rhs = z * base.transfer(z)
        worst = max(worst, float(np.linalg.norm(lhs - rhs, 2) / max(1.0, np.linalg.norm(rhs, 2))))
    return _report("forward-shift", {"points": 100, "seed": cfg.seed},
                   [Ladder("random-z", [100], [worst], kind="none")], cfg.tolerances.forward_shift, cfg)


_RUNNERS = {
    "cotangent": _cotangent,
    "half-part": _half_part,
    "kernel-expansion": _kernel,
    "higher-order-partial-fractions": _higher_order,
    "resolvent-partial-fractions": _resolvent_pf,
    "poisson-zero-phase": _poisson,
    "neumann-expansion": _neumann,
    "big-arc": _big_arc,
    "riesz-sum-to-identity": _riesz,
    "bromwich-t0": _bromwich_t0,
    "bromwich-t": _bromwich_t,
    "forward-shift": _forward_shift,
}


def run_all(config: RunConfig = DEFAULT_CONFIG) -> list[LemmaReport]:
    """One report per lemma, in :data:`LEMMA_IDS` order.  Exceptions become failures."""
    out = []
    for lemma_id in LEMMA_IDS:
        try:
            out.append(_RUNNERS[lemma_id](config))
        except Exception as exc:  # recorded, not raised
            out.append(LemmaReport(lemma_id, {}, [Ladder("error", [0], [math.inf], kind="none")],
                                   math.nan, FAILED, note=f"{type(exc).__name__}: {exc}"))
    return out


def _clean(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return _clean(obj.item())
    return obj


def _unclean(obj):
    if isinstance(obj, str) and obj in ("inf", "-inf", "nan"):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _unclean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unclean(v) for v in obj]
    return obj


def reports_to_json(reports) -> str:
    return json.dumps([_clean(r.to_json()) for r in reports], indent=2, sort_keys=True)


def reports_from_json(text: str) -> list[LemmaReport]:
    return [LemmaReport.from_json(_unclean(r)) for r in json.loads(text)]


def format_table(reports) -> str:
    head = f"{'lemma':<32} {'verdict':<26} {'final gap':>11}  exponents (fitted/predicted)"
    lines = [head, "-" * len(head)]
    for r in reports:
        rates = ", ".join(
            f"{l.label}: {l.fitted:+.2f}/{l.predicted:+.2f}" if l.fitted is not None and l.predicted is not None
            else f"{l.label}: -" for l in r.ladders
        )
        lines.append(f"{r.lemma_id:<32} {r.verdict:<26} {r.final_gap:11.3e}  {rates}")
    return "\n".join(lines)
