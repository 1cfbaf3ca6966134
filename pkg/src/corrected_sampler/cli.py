"""Command-line front end: ``corrected-sampler <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 input or validation error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .aliasing import TransferEvaluator, aliasing_sum
from .config import DEFAULT_SEED, RunConfig, load_config
from .contour import (
    BromwichLine,
    bromwich_resolvent_t,
    bromwich_resolvent_t0,
    default_abscissa,
)
from .discretize import discretize
from .errors import ResolventAtSpectrumError, SamplerError
from .lemmas import FAILED, format_table, reports_to_json, run_all
from .linalg import as_square, expm, matrix_from_json
from .rmcf import (
    RmcfPlant,
    critical_gain_bisection,
    critical_gain_eff,
    critical_gain_sweep,
    derived,
    in_regime,
    search_dramatic,
    stability_gap_report,
    stability_sweep,
    verify_dramatic,
)
from .statespace import (
    ETA_CORRECTED,
    ETA_RIGHT_LIMIT,
    ContinuousStateSpace,
    model_from_json,
    model_to_json,
    transfer_eval_d,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

_ETAS = {"corrected": ETA_CORRECTED, "right-limit": ETA_RIGHT_LIMIT}
# corrected-model resolution needed before a gap is meaningful
_RESOLUTION = 0.05


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


def _read_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _load_plant(path: str) -> ContinuousStateSpace:
    model = model_from_json(_read_json(path))
    if not isinstance(model, ContinuousStateSpace):
        raise InputError(f"{path}: expected a continuous plant, got a discrete model")
    return model


def _load_matrix(path: str) -> np.ndarray:
    obj = _read_json(path)
    if isinstance(obj, dict) and "rows" in obj:
        return as_square(matrix_from_json(obj), "matrix")
    if isinstance(obj, dict) and "A" in obj:
        A = obj["A"]
        return as_square(matrix_from_json(A) if isinstance(A, dict) else A, "A")
    if isinstance(obj, list):
        return as_square(obj, "matrix")
    raise InputError(f"{path}: expected a matrix record, a model record or a nested list")


def _write_text(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from None


def _fmt(x: float) -> str:
    return repr(float(x))


def _json_safe(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return "UNBOUNDED" if obj > 0 else "-UNBOUNDED"
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _json_safe(obj.item())
    return obj


# -- discretize -------------------------------------------------------------

def cmd_discretize(args, config: RunConfig) -> int:
    plant = _load_plant(args.plant)
    dss = discretize(plant, args.Ts, _ETAS[args.eta])
    text = json.dumps(model_to_json(dss), indent=2) + "\n"
    if args.output:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)
    Dz = dss.Dz
    shown = Dz.ravel()[0] if Dz.size == 1 else Dz.tolist()
    print(f"D_z = {shown}  eta = {dss.eta} ({args.eta})", file=sys.stdout if args.output else sys.stderr)
    return EXIT_OK


# -- alias-check ------------------------------------------------------------

def parse_grid(text: str) -> tuple[float, float, int]:
    """``"re:im_max:count"`` -> (sigma0, omega_max, count)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"grid must look like re:im_max:count, got {text!r}")
    try:
        re_, im_max, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InputError(f"grid must look like re:im_max:count, got {text!r}") from None
    if count < 1 or not (math.isfinite(re_) and math.isfinite(im_max)) or im_max < 0:
        raise InputError(f"grid needs finite values, im_max >= 0 and count >= 1, got {text!r}")
    return re_, im_max, count


_ALIAS_COLUMNS = ("s_re", "s_im", "N", "sum_re", "sum_im", "tail_bound",
                  "model_value_re", "model_value_im", "gap", "right_limit_gap")


def alias_rows(plant: ContinuousStateSpace, Ts: float, points, N: int, pole_tol: float):
    """One row per grid point comparing the aliasing sum with both discrete models."""
    corrected = discretize(plant, Ts, ETA_CORRECTED)
    right = discretize(plant, Ts, ETA_RIGHT_LIMIT)
    ev = TransferEvaluator(plant)
    rows = []
    for s in points:
        res = aliasing_sum(plant, s, Ts, N, pole_tol=pole_tol, evaluator=ev)
        z = np.exp(complex(s) * Ts)
        try:
            g_c = transfer_eval_d(corrected, z)
            g_r = transfer_eval_d(right, z)
        except ResolventAtSpectrumError:
            raise ResolventAtSpectrumError(s, f"s={s!r} maps onto a pole of the discrete model") from None
        rows.append({
            "s_re": complex(s).real, "s_im": complex(s).imag, "N": N,
            "sum_re": res.value.ravel()[0].real, "sum_im": res.value.ravel()[0].imag,
            "tail_bound": res.tail_bound,
            "model_value_re": g_c.ravel()[0].real, "model_value_im": g_c.ravel()[0].imag,
            "gap": float(np.linalg.norm(res.value - g_c, 2)),
            "right_limit_gap": float(np.linalg.norm(res.value - g_r, 2)),
        })
    return rows


def cmd_alias_check(args, config: RunConfig) -> int:
    plant = _load_plant(args.plant)
    Ts = float(args.Ts)
    if not Ts > 0:
        raise InputError("--Ts must be > 0")
    omega_s = 2 * math.pi / Ts
    re_, im_max, count = parse_grid(args.grid) if args.grid else (0.0, 2 * omega_s, 25)
    N = args.N if args.N is not None else config.alias_n
    if N < 1:
        raise InputError("--N must be >= 1")
    points = re_ + 1j * np.linspace(0.0, im_max, count)
    rows = alias_rows(plant, Ts, points, N, config.tolerances.pole)

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=_ALIAS_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (_fmt(v) if isinstance(v, float) else v) for k, v in r.items()})
    _write_text(args.output, buf.getvalue())

    cb = float(np.linalg.norm(plant.C @ plant.B, 2))
    bad = [r for r in rows if not (r["gap"] <= r["tail_bound"] and r["tail_bound"] <= _RESOLUTION * cb)]
    if bad:
        r = bad[0]
        print(f"alias-check failed at {len(bad)} of {len(rows)} points; first at "
              f"s={r['s_re']}{r['s_im']:+}j: gap={r['gap']:.3e}, tail_bound={r['tail_bound']:.3e}, "
              f"resolution limit={_RESOLUTION * cb:.3e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- bromwich ---------------------------------------------------------------

def bromwich_rows(A: np.ndarray, t: float, omegas, nodes: int):
    """``(omega, deviation, rate)`` per ladder entry; ``rate`` is the local decay order."""
    n = A.shape[0]
    c = default_abscissa(A)
    target = 0.5 * np.eye(n) if t == 0 else expm(A, t)
    rows = []
    for W in omegas:
        line = BromwichLine(c, float(W), nodes)
        M = bromwich_resolvent_t0(A, line) if t == 0 else bromwich_resolvent_t(A, t, line)
        dev = float(np.linalg.norm(M - target, 2))
        rate = None
        if rows and rows[-1][1] > 0 and dev > 0:
            rate = math.log(rows[-1][1] / dev) / math.log(W / rows[-1][0])
        rows.append((float(W), dev, rate))
    return rows


def _parse_ladder(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise InputError(f"--omega-ladder must be a list of numbers, got {text!r}") from None
    if not values or any(not (v > 0 and math.isfinite(v)) for v in values):
        raise InputError("--omega-ladder needs positive finite entries")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InputError("--omega-ladder must be strictly increasing")
    return values


def cmd_bromwich(args, config: RunConfig) -> int:
    A = _load_matrix(args.matrix)
    t = float(args.t)
    if not (t >= 0 and math.isfinite(t)):
        raise InputError("--t must be >= 0")
    omegas = _parse_ladder(args.omega_ladder) if args.omega_ladder else config.omega_ladder
    rows = bromwich_rows(A, t, omegas, config.line_nodes)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("omega", "deviation", "rate"))
    for W, dev, rate in rows:
        w.writerow((_fmt(W), _fmt(dev), "" if rate is None else _fmt(rate)))
    _write_text(args.output, buf.getvalue())
    return EXIT_OK


# -- rmcf -------------------------------------------------------------------

def rmcf_report(p: RmcfPlant, Ts: float) -> dict:
    ok = in_regime(p, Ts)
    half, one = stability_gap_report(p, Ts)
    report = {
        "plant": dataclasses.asdict(p),
        "Ts": Ts,
        "derived": dataclasses.asdict(derived(p, Ts)),
        "regime_ok": ok,
        "D_z": {"corrected": ETA_CORRECTED * p.gain, "right-limit": ETA_RIGHT_LIMIT * p.gain},
    }
    kstar = half.K_eff_star
    sweep = critical_gain_sweep(p, Ts)
    oracle = {"sweep": sweep}
    if math.isfinite(kstar) and kstar > 0 and math.isfinite(sweep):
        oracle["sweep_relative_residual"] = abs(sweep - kstar) / kstar
    if ok:
        report["closed_form"] = {"K_eff_star": critical_gain_eff(p, Ts)}
    if math.isfinite(kstar) and kstar > 0:
        bis = critical_gain_bisection(p, Ts, upper=10.0 * kstar)
        oracle["bisection"] = bis
        oracle["bisection_relative_residual"] = abs(bis - kstar) / kstar
    report["oracle"] = oracle
    report["analyses"] = [half.to_json(), one.to_json()]
    return report


def _sweep_gains(p: RmcfPlant):
    return np.geomspace(1e-2 / p.gain, 1e4 / p.gain, 61)


def cmd_rmcf(args, config: RunConfig) -> int:
    Ts = float(args.Ts)
    if args.search_dramatic:
        found = search_dramatic(Ts=Ts)
        if found is None:
            print("no dramatic-gap instance on the search grid", file=sys.stderr)
            return EXIT_FAIL
        p = found[0]
    else:
        missing = [n for n in ("sigma", "omega", "zero", "gain") if getattr(args, n) is None]
        if missing:
            raise InputError("missing " + ", ".join("--" + m for m in missing) + " (or use --search-dramatic)")
        p = RmcfPlant(args.sigma, args.omega, args.zero, args.gain)
    if not (Ts > 0 and math.isfinite(Ts)):
        raise InputError("--Ts must be > 0")
    report = rmcf_report(p, Ts)
    status = EXIT_OK
    if args.search_dramatic:
        evidence = verify_dramatic(p, Ts)
        report["dramatic"] = evidence
        rel = evidence["corrected_relative_error"]
        if not (evidence["gap_class"] == "dramatic" and math.isinf(evidence["right_limit_crossing"])
                and rel is not None and rel <= 1e-6):
            status = EXIT_FAIL

    text = json.dumps(_json_safe(report), indent=2) + "\n"
    if args.output:
        _write_text(args.output, text)
    if args.json or not args.output:
        if args.json:
            sys.stdout.write(text)
        else:
            half, one = report["analyses"]
            print(f"plant sigma={p.sigma} omega={p.omega} zero={p.zero} gain={p.gain} Ts={Ts}")
            print(f"regime_ok={report['regime_ok']}  K_eff_star={half['K_eff_star']!r} ({half['source']})")
            print(f"K_max corrected={half['K_max']}  right-limit={one['K_max']}  gap={half['gap_class']}")
    if args.sweep:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("K", "eta", "spectral_radius", "stable"))
        for r in stability_sweep(p, Ts, _sweep_gains(p)):
            w.writerow((_fmt(r["K"]), r["eta"], _fmt(r["spectral_radius"]), int(r["stable"])))
        _write_text(args.sweep, buf.getvalue())
    return status


# -- verify -----------------------------------------------------------------

def cmd_verify(args, config: RunConfig) -> int:
    reports = run_all(config)
    if args.json:
        text = reports_to_json(reports) + "\n"
    else:
        text = format_table(reports) + "\n"
    _write_text(args.output, text)
    return EXIT_FAIL if any(r.verdict == FAILED for r in reports) else EXIT_OK


# -- wiring -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (default: $CORRECTED_SAMPLER_CONFIG)")
    common.add_argument("--seed", type=int, default=None,
                        help=f"seed for randomized suites (default {DEFAULT_SEED})")

    parser = argparse.ArgumentParser(prog="corrected-sampler", parents=[common],
                                     description="Corrected impulse-invariance tools and checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discretize", parents=[common], help="discretize a continuous plant")
    p.add_argument("plant", help="continuous plant JSON")
    p.add_argument("--Ts", type=float, required=True)
    p.add_argument("--eta", choices=sorted(_ETAS), default="corrected")
    p.add_argument("-o", "--output", help="discrete model JSON (default: stdout)")
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("alias-check", parents=[common],
                       help="compare the aliasing sum with both discrete models")
    p.add_argument("plant")
    p.add_argument("--Ts", type=float, required=True)
    p.add_argument("--grid", help="re:im_max:count, s = re + j*linspace(0, im_max, count)")
    p.add_argument("--N", type=int, default=None, help="truncation order (default from config)")
    p.add_argument("-o", "--output", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_alias_check)

    p = sub.add_parser("bromwich", parents=[common], help="Bromwich line quadrature check")
    p.add_argument("matrix", help="matrix JSON, model JSON or nested list")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--omega-ladder", help="comma-separated truncation heights")
    p.add_argument("-o", "--output", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_bromwich)

    p = sub.add_parser("rmcf", parents=[common], help="RMCF stability-gap benchmark")
    p.add_argument("--sigma", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--zero", type=float)
    p.add_argument("--gain", type=float)
    p.add_argument("--Ts", type=float, default=1.0)
    p.add_argument("--search-dramatic", action="store_true")
    p.add_argument("--json", action="store_true", help="print the JSON report")
    p.add_argument("-o", "--output", help="write the JSON report here")
    p.add_argument("--sweep", help="write the (K, eta, spectral_radius, stable) CSV here")
    p.set_defaults(func=cmd_rmcf)

    p = sub.add_parser("verify", parents=[common], help="run the lemma suite")
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", help="report file (default: stdout)")
    p.set_defaults(func=cmd_verify)
    return parser


def _config_for(args) -> RunConfig:
    try:
        config = load_config(args.config)
    except json.JSONDecodeError as exc:
        raise InputError(f"config: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise InputError(f"cannot read config: {exc.strerror or exc}") from None
    except TypeError as exc:
        raise InputError(f"config: {exc}") from None
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        config = _config_for(args)
        return args.func(args, config)
    except (InputError, SamplerError, ValueError) as exc:
        kind = "" if isinstance(exc, InputError) else f"{type(exc).__name__}: "
        print(f"error: {kind}{exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
