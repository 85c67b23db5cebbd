"""Command-line front end: reproducible experiments over the library.

One experiment = one JSON config document = one deterministic set of
artifacts.  Data files are named ``<kind>-<config-hash>.{csv,json}`` so
identical configs collide onto identical paths, and rerunning a config
must reproduce the data files byte for byte at any worker count; the
only place timestamps (and wall time) live is the manifest.

Exit codes: 0 success, 2 config/validation failure, 3 numerical
contract failure (a certified tolerance could not be met).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import bounds as bounds_mod
from . import fernique as fernique_mod
from . import gaussian as gaussian_mod
from . import modulus as modulus_mod
from . import series as series_mod
from .errors import NumericalContractError, UndefinedIndexError, ValidationError
from .frequencies import TurnFraction, classify, frequencies_from_json

KINDS = (
    "classify",
    "eval",
    "modulus",
    "bounds",
    "sandwich",
    "gaussian-cov",
    "gaussian-rough",
    "fernique",
    "study-lacunar",
    "study-superlacunar",
    "study-gaussian",
)

@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    payload: dict
    out_dir: Path
    workers: int = 1
    formats: tuple[str, ...] = ("csv", "json")


# ---------------------------------------------------------------------------
# config helpers
# ---------------------------------------------------------------------------


def _require(payload: dict, key: str):
    if key not in payload:
        raise ValidationError(f"config is missing required key {key!r}")
    return payload[key]


def _series_from(obj: dict) -> series_mod.SeriesSpec:
    if not isinstance(obj, dict):
        raise ValidationError(f"series spec must be an object, got {obj!r}")
    if "preset" in obj:
        preset = obj["preset"]
        decay = float(_require(obj, "decay"))
        if preset == "lacunar":
            return series_mod.lacunar_series(
                decay, base=int(obj.get("base", 2)),
                truncation=int(obj.get("truncation", 20)))
        if preset == "superlacunar":
            return series_mod.superlacunar_series(
                decay, truncation=int(obj.get("truncation", 8)))
        raise ValidationError(f"unknown series preset {preset!r}")
    return series_mod.SeriesSpec.from_json(obj)


def _ladder_from(obj) -> np.ndarray:
    if isinstance(obj, list):
        arr = np.asarray([float(x) for x in obj], dtype=np.float64)
        if arr.size == 0 or np.any(np.diff(arr) <= 0.0):
            raise ValidationError("explicit delta ladder must be strictly increasing")
        return arr
    if not isinstance(obj, dict):
        raise ValidationError(f"deltas must be a list or ladder object, got {obj!r}")
    kind = obj.get("kind", "log")
    if kind == "log":
        return modulus_mod.log_delta_ladder(
            float(_require(obj, "min")), float(_require(obj, "max")),
            per_decade=int(obj.get("per_decade", 40)))
    if kind == "loglog":
        return modulus_mod.loglog_delta_ladder(
            float(_require(obj, "u_min")), float(_require(obj, "u_max")),
            count=int(_require(obj, "count")))
    raise ValidationError(f"unknown ladder kind {kind!r}")


def _time_from(obj) -> float | TurnFraction:
    if isinstance(obj, dict):
        return TurnFraction(int(_require(obj, "p")), int(_require(obj, "q")))
    return float(obj)


def _modulus_input_from(obj: dict):
    kind = _require(obj, "kind")
    if kind == "envelope":
        return bounds_mod.envelope(
            str(_require(obj, "shape")), str(_require(obj, "side")),
            float(_require(obj, "decay")), float(obj.get("constant", 1.0)),
            clamp=True)
    if kind == "curve":
        return modulus_mod.modulus_curve_from_json(_require(obj, "data"))
    if kind == "curve_file":
        path = Path(str(_require(obj, "path")))
        if not path.exists():
            raise ValidationError(f"curve file {path} does not exist")
        return modulus_mod.modulus_curve_from_json(json.loads(path.read_text()))
    if kind == "lipschitz":
        cap = float(obj.get("cap", 1.0))

        def lipschitz_capped(delta: float) -> float:
            return min(float(delta), cap)

        return lipschitz_capped
    if kind == "constant":
        value = float(_require(obj, "value"))

        def constant_modulus(_delta: float) -> float:
            return value

        return constant_modulus
    raise ValidationError(f"unknown modulus kind {kind!r}")


def _x_ladder_from(obj) -> list[float]:
    if isinstance(obj, list):
        return [float(x) for x in obj]
    if isinstance(obj, dict):
        lo = float(_require(obj, "min"))
        hi = float(_require(obj, "max"))
        count = int(_require(obj, "count"))
        if obj.get("spacing", "log") == "linear":
            return list(np.linspace(lo, hi, count))
        return list(np.exp(np.linspace(math.log(lo), math.log(hi), count)))
    raise ValidationError(f"x_ladder must be a list or range object, got {obj!r}")


def _set_worker_threads(workers: int) -> None:
    try:
        import numba
        limit = numba.config.NUMBA_NUM_THREADS
        numba.set_num_threads(max(1, min(int(workers), limit)))
    except ImportError:  # pragma: no cover - numba is a hard dependency
        pass


def _canonical(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _config_hash(kind: str, payload: dict) -> str:
    return hashlib.sha256(_canonical({"kind": kind, "config": payload}).encode()).hexdigest()[:12]


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# experiment handlers: each returns (csv_text or None, json_obj)
# ---------------------------------------------------------------------------


def _run_classify(payload: dict, workers: int):
    freqs = frequencies_from_json(_require(payload, "frequencies"))
    report = classify(
        freqs, int(_require(payload, "window")),
        r_super=float(payload.get("r_super", 8.0)),
        margin=float(payload.get("margin", 0.1)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["side", "k", "ratio"])
    for i, r in enumerate(report.ratios_positive, start=1):
        w.writerow(["positive", i, repr(float(r))])
    for i, r in enumerate(report.ratios_negative, start=1):
        w.writerow(["negative", i, repr(float(r))])
    out = report.to_json()
    out["frequencies"] = freqs.to_json()
    return buf.getvalue(), out


def _run_eval(payload: dict, workers: int):
    spec = _series_from(_require(payload, "series"))
    t = _time_from(_require(payload, "t"))
    trunc = payload.get("truncation")
    result = series_mod.eval_truncated(spec, t, None if trunc is None else int(trunc))
    obj = {
        "re": result.value.real,
        "im": result.value.imag,
        "error_bound": result.error_bound,
        "truncation": result.truncation,
        "series": spec.to_json(),
    }
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "error_bound", "truncation"])
    w.writerow([repr(result.value.real), repr(result.value.imag),
                repr(result.error_bound), result.truncation])
    return buf.getvalue(), obj


def _run_modulus(payload: dict, workers: int):
    spec = _series_from(_require(payload, "series"))
    deltas = _ladder_from(_require(payload, "deltas"))
    estimator = payload.get("estimator", "grid")
    trunc = payload.get("truncation")
    trunc = None if trunc is None else int(trunc)
    if estimator == "grid":
        grid = series_mod.sample_grid(spec, int(_require(payload, "m")), trunc)
        curve = modulus_mod.empirical_modulus_grid(grid, deltas)
    elif estimator == "pairs":
        curve = modulus_mod.empirical_modulus_pairs(
            spec, deltas,
            pairs_per_delta=int(payload.get("pairs_per_delta", 2048)),
            seed=int(_require(payload, "seed")),
            truncation=trunc)
    else:
        raise ValidationError(f"unknown estimator {estimator!r}")
    obj = curve.to_json()
    obj["series"] = spec.to_json()
    return curve.to_csv(), obj


def _run_bounds(payload: dict, workers: int):
    spec = _series_from(_require(payload, "series"))
    deltas = _ladder_from(_require(payload, "deltas"))
    n_max = int(payload.get("n_max", 60))
    variant = payload.get("variant", "tight")
    variants = list(bounds_mod.SIGMA1_VARIANTS) if variant == "both" else [variant]
    evals = []
    for v in variants:
        evals.extend(bounds_mod.upper_bound_curve(spec, deltas, n_max=n_max, variant=v))
    obj = {
        "series": spec.to_json(),
        "n_max": n_max,
        "evaluations": [e.to_json() for e in evals],
    }
    return bounds_mod.bounds_to_csv(evals), obj


def _sandwich_rows(spec, deltas, m, trunc, pairs, seed, n_max):
    grid = series_mod.sample_grid(spec, m, trunc)
    grid_curve = modulus_mod.empirical_modulus_grid(grid, deltas)
    pair_curve = modulus_mod.empirical_modulus_pairs(
        spec, deltas, pairs_per_delta=pairs, seed=seed, truncation=trunc)
    tight = bounds_mod.upper_bound_curve(spec, deltas, n_max=n_max, variant="tight")
    literal = bounds_mod.upper_bound_curve(spec, deltas, n_max=n_max, variant="literal")
    rows = []
    for i, d in enumerate(deltas):
        emp = max(grid_curve.omegas[i], pair_curve.omegas[i])
        rows.append((float(d), emp, tight[i].total, literal[i].total))
    violations = sum(1 for _, e, t, l in rows if e > t or t > l)
    return rows, violations, grid_curve, pair_curve


def _run_sandwich(payload: dict, workers: int):
    spec = _series_from(_require(payload, "series"))
    deltas = _ladder_from(_require(payload, "deltas"))
    trunc = payload.get("truncation")
    trunc = None if trunc is None else int(trunc)
    rows, violations, grid_curve, pair_curve = _sandwich_rows(
        spec, deltas, int(_require(payload, "m")), trunc,
        int(payload.get("pairs_per_delta", 2048)),
        int(_require(payload, "seed")), int(payload.get("n_max", 60)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "empirical", "upper_tight", "upper_literal"])
    for d, e, t, l in rows:
        w.writerow([f"{d:.17g}", repr(e), repr(t), repr(l)])
    obj = {
        "series": spec.to_json(),
        "violations": violations,
        "rows": [[d, e, t, l] for d, e, t, l in rows],
        "grid_params": grid_curve.params,
        "pair_params": pair_curve.params,
    }
    return buf.getvalue(), obj


def _run_gaussian_cov(payload: dict, workers: int):
    spec = gaussian_mod.GaussianSpec.from_json(_require(payload, "process"))
    lags = [float(x) for x in _require(payload, "lags")]
    base_lags = [float(x) for x in payload.get("base_lags", [0.0])]
    paths = int(_require(payload, "paths"))
    cov = gaussian_mod.CovarianceFunction(spec.decay, spec.truncation, spec.frequencies)

    rows = []
    estimates = {}
    for s in base_lags:
        for t in lags:
            # covariance_exact truncates at the same N the simulated paths
            # use, so the MC expectation is exactly the truncated value and
            # the z-score needs no tail allowance.
            exact = gaussian_mod.covariance_exact(cov, t)
            est = gaussian_mod.covariance_mc(spec, t, s, paths, workers=workers)
            z = abs(est.estimate - exact.value) / est.stderr \
                if est.stderr > 0 else math.inf
            rows.append((s, t, exact.value, exact.tail_bound, est, z))
            estimates[(s, t)] = est

    stationarity = []
    if len(base_lags) >= 2:
        s0, s1 = base_lags[0], base_lags[1]
        for t in lags:
            a, b = estimates[(s0, t)], estimates[(s1, t)]
            joint = math.hypot(a.stderr, b.stderr)
            stationarity.append(abs(a.estimate - b.estimate) / joint if joint > 0 else math.inf)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["base_lag", "lag", "exact", "tail_bound", "estimate", "stderr",
                "imag", "imag_stderr", "z"])
    for s, t, ex, tb, est, z in rows:
        w.writerow([f"{s:.17g}", f"{t:.17g}", repr(ex), repr(tb), repr(est.estimate),
                    repr(est.stderr), repr(est.imag), repr(est.imag_stderr), repr(z)])
    obj = {
        "process": spec.to_json(),
        "paths": paths,
        "lags": lags,
        "base_lags": base_lags,
        "max_z": max(z for *_, z in rows),
        "stationarity_max_z": max(stationarity) if stationarity else None,
        "rows": [[s, t, ex, tb, est.estimate, est.stderr, est.imag, est.imag_stderr, z]
                 for s, t, ex, tb, est, z in rows],
    }
    return buf.getvalue(), obj


def _run_gaussian_rough(payload: dict, workers: int):
    freqs = None
    if "family" in payload:
        freqs = frequencies_from_json(payload["family"])
    table = gaussian_mod.roughness_diagnostic(
        decay=float(_require(payload, "decay")),
        frequencies=freqs,
        n_list=[int(n) for n in _require(payload, "n_list")],
        delta_probe=float(_require(payload, "delta_probe")),
        m=int(_require(payload, "m")),
        paths=int(_require(payload, "paths")),
        seed=int(_require(payload, "seed")),
        workers=workers)
    return table.to_csv(), table.to_json()


def _run_fernique(payload: dict, workers: int):
    modulus = _modulus_input_from(_require(payload, "modulus"))
    report = fernique_mod.classify_convergence(
        modulus,
        _x_ladder_from(_require(payload, "x_ladder")),
        tolerance=float(payload.get("tolerance", 1e-6)),
        residual_max=float(payload.get("residual_max", 0.25)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "partial_integral", "err_estimate"])
    for x, i, e in report.ladder:
        w.writerow([f"{x:.17g}", repr(i), repr(e)])
    return buf.getvalue(), report.to_json()


def _study_fit_or_none(curve, shape, side, decay, fit_range):
    try:
        return bounds_mod.fit_envelope(curve, shape, side, decay, fit_range).to_json()
    except ValidationError as exc:
        return {"error": str(exc)}


def _run_study_lacunar(payload: dict, workers: int):
    decays = [float(x) for x in payload.get("decays", [0.75, 1.0, 2.0])]
    seed = int(_require(payload, "seed"))
    m = int(payload.get("m", 8191))
    trunc = int(payload.get("truncation", 8))
    pairs = int(payload.get("pairs_per_delta", 20000))
    n_max = int(payload.get("n_max", 60))
    deltas = _ladder_from(payload.get("deltas", {"kind": "log", "min": 1e-4,
                                                 "max": 0.5, "per_decade": 10}))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["decay", "delta", "empirical", "upper_tight", "upper_literal"])
    summary = {"decays": {}, "seed": seed}
    for decay in decays:
        spec = series_mod.lacunar_series(decay, truncation=trunc)
        rows, violations, grid_curve, pair_curve = _sandwich_rows(
            spec, deltas, m, trunc, pairs, seed, n_max)
        for d, e, t, l in rows:
            w.writerow([repr(decay), f"{d:.17g}", repr(e), repr(t), repr(l)])
        entry = {"violations": violations}
        fit_deltas = [d for d in deltas if d < math.exp(-1.0)]
        if len(fit_deltas) >= 10:
            emp = modulus_mod.monotone_envelope(pair_curve)
            rng = (min(fit_deltas), max(fit_deltas))
            entry["C1"] = _study_fit_or_none(emp, "log", "lower", decay, rng)
            tight = bounds_mod.bounds_to_curve(
                bounds_mod.upper_bound_curve(spec, deltas, n_max=n_max, variant="tight"))
            entry["C2"] = _study_fit_or_none(tight, "log", "upper", decay, rng)
        summary["decays"][repr(decay)] = entry

    scaling = payload.get("scaling")
    if scaling:
        decay = float(scaling.get("decay", 1.0))
        spec = series_mod.lacunar_series(decay, truncation=int(scaling.get("truncation", 48)))
        sc_deltas = _ladder_from(scaling.get("deltas", {"kind": "log", "min": 1e-8,
                                                        "max": 1e-2, "per_decade": 8}))
        curve = modulus_mod.empirical_modulus_pairs(
            spec, sc_deltas, pairs_per_delta=int(scaling.get("pairs_per_delta", 4096)),
            seed=seed)
        x = np.log(np.abs(np.log(np.asarray(curve.deltas))))
        y = np.log(np.asarray(curve.omegas))
        slope, intercept = np.polyfit(x, y, 1)
        resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
        summary["scaling"] = {"decay": decay, "slope": float(slope),
                              "intercept": float(intercept), "rms_residual": resid,
                              "points": len(x)}
    return buf.getvalue(), summary


def _run_study_superlacunar(payload: dict, workers: int):
    decays = [float(x) for x in payload.get("decays", [1.0, 2.0])]
    seed = int(_require(payload, "seed"))
    m = int(payload.get("m", 65521))
    trunc = int(payload.get("truncation", 4))
    pairs = int(payload.get("pairs_per_delta", 20000))
    n_max = int(payload.get("n_max", 60))
    deltas = _ladder_from(payload.get("deltas", {"kind": "loglog", "u_min": 1.0,
                                                 "u_max": 4.0, "count": 24}))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["decay", "delta", "empirical", "upper_tight", "upper_literal"])
    summary = {"decays": {}, "seed": seed}
    for decay in decays:
        spec = series_mod.superlacunar_series(decay, truncation=trunc)
        rows, violations, grid_curve, pair_curve = _sandwich_rows(
            spec, deltas, m, trunc, pairs, seed, n_max)
        for d, e, t, l in rows:
            w.writerow([repr(decay), f"{d:.17g}", repr(e), repr(t), repr(l)])
        entry = {"violations": violations}
        usable = [d for d in deltas if d < math.exp(-math.e)]
        if len(usable) >= 10:
            emp = modulus_mod.monotone_envelope(pair_curve)
            rng = (min(usable), max(usable))
            tight = bounds_mod.bounds_to_curve(
                bounds_mod.upper_bound_curve(spec, deltas, n_max=n_max, variant="tight"))
            entry["C3"] = _study_fit_or_none(emp, "loglog", "lower", decay, rng)
            entry["C4"] = _study_fit_or_none(tight, "loglog", "upper", decay, rng)
        summary["decays"][repr(decay)] = entry
    return buf.getvalue(), summary


def _run_study_gaussian(payload: dict, workers: int):
    seed = int(_require(payload, "seed"))
    rough_cfg = payload.get("roughness", {})
    decays = [float(x) for x in rough_cfg.get("decays", [0.75, 1.25])]
    n_list = [int(n) for n in rough_cfg.get("n_list", [3, 4, 5])]
    tables = {}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["decay", "N", "median_modulus"])
    for decay in decays:
        table = gaussian_mod.roughness_diagnostic(
            decay=decay, frequencies=None, n_list=n_list,
            delta_probe=float(rough_cfg.get("delta_probe", 0.0625)),
            m=int(rough_cfg.get("m", 4093)),
            paths=int(rough_cfg.get("paths", 200)),
            seed=seed, workers=workers)
        tables[repr(decay)] = table.to_json()
        for n, med in zip(table.truncations, table.medians):
            w.writerow([repr(decay), n, repr(float(med))])

    fern_cfg = payload.get("fernique", {})
    env = bounds_mod.envelope("loglog", "upper",
                              float(fern_cfg.get("decay", 1.25)),
                              float(fern_cfg.get("constant", 1.0)), clamp=True)
    report = fernique_mod.classify_convergence(
        env, _x_ladder_from(fern_cfg.get("x_ladder", {"min": 3.0, "max": 300.0,
                                                      "count": 8})),
        tolerance=float(fern_cfg.get("tolerance", 1e-6)))

    summary = {
        "seed": seed,
        "roughness": tables,
        "fernique": report.to_json(),
    }
    return buf.getvalue(), summary


_HANDLERS = {
    "classify": _run_classify,
    "eval": _run_eval,
    "modulus": _run_modulus,
    "bounds": _run_bounds,
    "sandwich": _run_sandwich,
    "gaussian-cov": _run_gaussian_cov,
    "gaussian-rough": _run_gaussian_rough,
    "fernique": _run_fernique,
    "study-lacunar": _run_study_lacunar,
    "study-superlacunar": _run_study_superlacunar,
    "study-gaussian": _run_study_gaussian,
}


def _needs_seed(kind: str, payload: dict) -> bool:
    if kind == "modulus":
        return payload.get("estimator", "grid") == "pairs"
    return kind in ("sandwich", "gaussian-cov", "gaussian-rough",
                    "study-lacunar", "study-superlacunar", "study-gaussian")


def run_experiment(config: ExperimentConfig) -> dict:
    """Execute one experiment; returns the manifest (also written to disk)."""
    kind = config.kind
    if kind not in _HANDLERS:
        raise ValidationError(f"unknown experiment kind {kind!r}")
    payload = config.payload
    if not isinstance(payload, dict):
        raise ValidationError("config payload must be a JSON object")
    if _needs_seed(kind, payload):
        seed_holder = payload.get("process", payload)
        if "seed" not in seed_holder and "seed" not in payload:
            raise ValidationError(
                f"stochastic experiment {kind!r} requires a seed (config key or --seed)"
            )
    _set_worker_threads(config.workers)

    started = time.perf_counter()
    csv_text, json_obj = _HANDLERS[kind](payload, config.workers)
    wall = time.perf_counter() - started

    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    h = _config_hash(kind, payload)
    outputs = {}
    if csv_text is not None and "csv" in config.formats:
        name = f"{kind}-{h}.csv"
        (out_dir / name).write_text(csv_text)
        outputs[name] = hashlib.sha256(csv_text.encode()).hexdigest()
    if "json" in config.formats:
        name = f"{kind}-{h}.json"
        text = _json_text(json_obj)
        (out_dir / name).write_text(text)
        outputs[name] = hashlib.sha256(text.encode()).hexdigest()

    manifest = {
        "kind": kind,
        "config": payload,
        "hash": h,
        "version": __version__,
        "workers": config.workers,
        "formats": list(config.formats),
        "outputs": outputs,
        "wall_time_s": wall,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    (out_dir / "manifest.json").write_text(_json_text(manifest))
    return manifest


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superlac",
        description="Reproducible experiments on series with huge frequency gaps: "
                    "modulus estimation, analytic bounds, Gaussian sampling, and "
                    "the continuity-criterion integral.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind!r} experiment")
        p.add_argument("--config", required=True, help="JSON config document")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config's seed")
        p.add_argument("--grid", type=int, default=None,
                       help="override the config's grid size m")
        p.add_argument("--workers", type=int, default=1,
                       help="worker threads (results are identical for any count)")
        p.add_argument("--format", choices=("csv", "json", "both"), default="both")
    return parser


def _apply_overrides(payload: dict, args: argparse.Namespace) -> dict:
    payload = json.loads(json.dumps(payload))  # deep copy, JSON-clean
    if args.seed is not None:
        if args.seed < 0:
            raise ValidationError("--seed must be >= 0")
        if "process" in payload and isinstance(payload["process"], dict):
            payload["process"]["seed"] = args.seed
        payload["seed"] = args.seed
    if args.grid is not None:
        payload["m"] = args.grid
    return payload


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    formats = ("csv", "json") if args.format == "both" else (args.format,)
    try:
        raw = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    try:
        payload = _apply_overrides(payload, args)
        config = ExperimentConfig(
            kind=args.kind,
            payload=payload,
            out_dir=Path(args.out),
            workers=max(1, args.workers),
            formats=formats,
        )
        manifest = run_experiment(config)
    except (ValidationError, UndefinedIndexError) as exc:
        print(f"error: invalid config or input: {exc}", file=sys.stderr)
        return 2
    except NumericalContractError as exc:
        print(f"error: numerical contract failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: cannot write artifacts: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"kind": manifest["kind"], "hash": manifest["hash"],
                      "outputs": sorted(manifest["outputs"])}))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
