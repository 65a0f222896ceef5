"""Batch experiment runner.

Usage:
    volterra-lab <experiment> --config <path> [--set k=v]... [--jobs M]
                 [--format csv|json] [--out <path>]

Config files are flat ``key = value`` text; comma-separated values become
lists and ``--set`` overrides win.  Exit codes: 0 success, 2 config error,
3 when any run inside the sweep failed (failures are embedded per record,
the sweep itself is never aborted).  If ``VLAB_BESSEL_CACHE`` names a file,
Bessel zeros are loaded from it before a disk experiment and saved back
after.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__, analysis, asymptotics, disk, gallery, linalg
from .errors import ConfigError, VolterraLabError
from .reports import CSV_COLUMNS, ExperimentReport, RunRecord, write_csv, write_json

EXPERIMENTS = tuple(CSV_COLUMNS)

REQUIRED_KEYS = {
    "snumbers": ("kind", "a", "alpha_or_beta", "dims"),
    "perturb_thm21": ("alpha", "q", "a", "seeds", "dims", "delta"),
    "perturb_thm23": ("q", "seeds", "dims", "delta"),
    "disk_restriction": ("n_max", "k_max", "rank", "seeds", "delta"),
    "criterion": ("n", "eps_list"),
    "volterra_1d": ("dims",),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    output_path: str | None = None
    format: str = "csv"


def parse_scalar(text: str):
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def parse_value(text: str):
    if "," in text:
        return [parse_scalar(part) for part in text.split(",") if part.strip()]
    return parse_scalar(text)


def read_config_file(path) -> dict:
    params = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                params[key.strip()] = parse_value(value)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return params


def _as_list(value) -> list:
    return list(value) if isinstance(value, list) else [value]


def _check_number(params, key, problems, positive=True):
    v = params.get(key)
    if not isinstance(v, (int, float)) or isinstance(v, bool) or (positive and not v > 0):
        problems.append(f"{key}: must be a positive number, got {v!r}")


def _check_int_list(params, key, problems, increasing=False, min_len=1, min_value=1):
    vs = _as_list(params.get(key))
    if not vs or not all(isinstance(v, int) and not isinstance(v, bool) and v >= min_value for v in vs):
        problems.append(f"{key}: must be integers >= {min_value}, got {params.get(key)!r}")
        return
    if len(vs) < min_len:
        problems.append(f"{key}: needs at least {min_len} entries")
    if increasing and any(b <= a for a, b in zip(vs, vs[1:])):
        problems.append(f"{key}: must be strictly increasing")


def validate(config: ExperimentConfig) -> list[str]:
    """Empty list iff run() would accept the config."""
    problems: list[str] = []
    if config.experiment not in EXPERIMENTS:
        problems.append(f"experiment: unknown {config.experiment!r}")
        return problems
    if config.format not in ("csv", "json"):
        problems.append(f"format: must be csv or json, got {config.format!r}")
    params = config.parameters
    for key in REQUIRED_KEYS[config.experiment]:
        if key not in params:
            problems.append(f"{key}: required for {config.experiment}")
    if problems:
        return problems

    exp = config.experiment
    if exp == "snumbers":
        if params["kind"] not in gallery.PROFILE_KINDS:
            problems.append(f"kind: must be one of {gallery.PROFILE_KINDS}")
        _check_number(params, "a", problems)
        if not isinstance(params["alpha_or_beta"], (int, float)):
            problems.append("alpha_or_beta: must be a number")
        _check_int_list(params, "dims", problems, increasing=True, min_value=16)
    elif exp == "perturb_thm21":
        _check_number(params, "alpha", problems)
        _check_number(params, "q", problems)
        _check_number(params, "a", problems)
        _check_number(params, "delta", problems)
        _check_int_list(params, "seeds", problems, min_value=0)
        _check_int_list(params, "dims", problems, increasing=True, min_len=3, min_value=2)
    elif exp == "perturb_thm23":
        _check_number(params, "q", problems)
        _check_number(params, "delta", problems)
        _check_int_list(params, "seeds", problems, min_value=0)
        _check_int_list(params, "dims", problems, increasing=True, min_len=3, min_value=2)
    elif exp == "disk_restriction":
        _check_int_list(params, "n_max", problems, increasing=True, min_len=3)
        _check_int_list(params, "k_max", problems, increasing=True, min_len=3)
        if len(_as_list(params["n_max"])) != len(_as_list(params["k_max"])):
            problems.append("k_max: must pair one-to-one with n_max")
        _check_number(params, "rank", problems)
        _check_int_list(params, "seeds", problems, min_value=0)
        _check_number(params, "delta", problems)
    elif exp == "criterion":
        ns = _as_list(params["n"])
        if not all(isinstance(v, int) and v >= 0 for v in ns):
            problems.append(f"n: must be integers >= 0, got {params['n']!r}")
        eps = _as_list(params["eps_list"])
        if (len(eps) < 4 or not all(isinstance(e, (int, float)) and 0 < e < 1 for e in eps)
                or any(b >= a for a, b in zip(eps, eps[1:]))):
            problems.append("eps_list: needs >= 4 strictly decreasing values in (0, 1)")
    elif exp == "volterra_1d":
        _check_int_list(params, "dims", problems, increasing=True, min_value=8)

    if config.output_path:
        parent = os.path.dirname(os.path.abspath(config.output_path))
        if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
            problems.append(f"output_path: directory not writable: {parent}")
    return problems


def _top_eigenvalues(values: np.ndarray, count: int = 3) -> tuple:
    order = np.argsort(-np.abs(values), kind="stable")
    return tuple(complex(values[i]) for i in order[:count])


def _sum_builder(exp: str, params: dict, seed: int):
    if exp == "perturb_thm21":
        c_profile = gallery.ProfileSpec("power_law", float(params["a"]), float(params["alpha"]))
    else:
        c_profile = gallery.ProfileSpec("log_power", float(params.get("a", 1.0)),
                                        float(params.get("beta", -1.0)))
    t_profile = gallery.ProfileSpec("power_law", 1.0, 1.0 / float(params["q"]))

    def build(n: int) -> linalg.CompactOperatorModel:
        return gallery.assemble_sum(gallery.make_nonnegative_C(c_profile, n),
                                    gallery.make_random_T(t_profile, n, seed))

    return build


def _perturbation_unit(exp: str, params: dict, seed: int):
    dims = [int(n) for n in _as_list(params["dims"])]
    delta = float(params["delta"])
    base = {k: params[k] for k in ("alpha", "q", "a") if k in params}
    base["seed"] = seed
    build = _sum_builder(exp, params, seed)

    def run_unit() -> list[RunRecord]:
        records = []
        refinements = []
        spectra = {}
        for n in dims:
            t0 = time.perf_counter()
            model = build(n)
            w = linalg.eigenvalues(model)
            spectra[n] = (w, time.perf_counter() - t0, model)
            lead = w[int(np.argmax(np.abs(w)))]
            refinements.append((n, float(np.abs(w).max()), complex(lead)))
        verdict = analysis.verdict_from_refinements(refinements, delta)
        schatten = None
        if exp == "perturb_thm23":
            n_last = dims[-1]
            s = linalg.s_numbers(spectra[n_last][2])
            window = (min(100, max(8, n_last // 8)), max(16, n_last - 96))
            schatten = asymptotics.estimate_schatten_order(s, window)
        for (n, radius, _), _n in zip(refinements, dims):
            w, dt, _ = spectra[n]
            metrics = {"spectral_radius": radius,
                       "persistent_nonzero": verdict.persistent_nonzero}
            if schatten is not None:
                metrics["schatten_order"] = schatten if n == dims[-1] else None
            records.append(RunRecord(params={**base, "N": n}, metrics=metrics,
                                     eigenvalues=_top_eigenvalues(w), wall_time_s=dt))
        return records

    return run_unit


def _disk_unit(params: dict, seed: int, bases: list[disk.TruncatedBasis]):
    rank = int(params["rank"])
    delta = float(params["delta"])
    s_frac = float(params.get("s_frac", 0.5))

    def run_unit() -> list[RunRecord]:
        coarse = bases[0]
        s_top = float(1.0 / coarse.eigenvalues[0])
        spec = disk.random_schmidt_spec(coarse, rank, seed, s_max=s_frac * s_top)
        records = []
        refinements = []
        rows = []
        for basis in bases:
            t0 = time.perf_counter()
            embedded = spec if basis is coarse else disk.embed_schmidt_spec(spec, coarse, basis)
            model = disk.assemble_restriction(basis, embedded)
            w = linalg.eigenvalues(model)
            dt = time.perf_counter() - t0
            lead = w[int(np.argmax(np.abs(w)))]
            refinements.append((model.dim, float(np.abs(w).max()), complex(lead)))
            rows.append((basis, w, dt, model.dim))
        verdict = analysis.verdict_from_refinements(refinements, delta)
        for (basis, w, dt, dim), (_, radius, _) in zip(rows, refinements):
            records.append(RunRecord(
                params={"n_max": basis.n_max, "k_max": basis.k_max,
                        "rank": rank, "seed": seed, "N": dim},
                metrics={"spectral_radius": radius,
                         "persistent_nonzero": verdict.persistent_nonzero},
                eigenvalues=_top_eigenvalues(w), wall_time_s=dt))
        return records

    return run_unit


def _build_units(config: ExperimentConfig):
    exp, params = config.experiment, config.parameters
    units = []
    if exp in ("perturb_thm21", "perturb_thm23"):
        for seed in _as_list(params["seeds"]):
            units.append(_perturbation_unit(exp, params, int(seed)))
    elif exp == "disk_restriction":
        pairs = list(zip(_as_list(params["n_max"]), _as_list(params["k_max"])))
        bases = [disk.build_basis(int(n), int(k)) for n, k in pairs]
        for seed in _as_list(params["seeds"]):
            units.append(_disk_unit(params, int(seed), bases))
    elif exp == "snumbers":
        profile = gallery.ProfileSpec(params["kind"], float(params["a"]),
                                      float(params["alpha_or_beta"]))

        def snumbers_unit(n: int):
            def run_unit() -> list[RunRecord]:
                t0 = time.perf_counter()
                s = linalg.s_numbers(gallery.make_nonnegative_C(profile, n))
                window = (max(10, n // 10), n)
                if profile.kind == "power_law":
                    fit = asymptotics.fit_power_law(s, window)
                    exponent = fit.alpha
                else:
                    fit = asymptotics.fit_slowly_varying_log(s, window)
                    exponent = fit.beta
                return [RunRecord(
                    params={"kind": profile.kind, "a": params["a"],
                            "alpha_or_beta": params["alpha_or_beta"], "N": n},
                    metrics={"fit_exponent": exponent, "fit_a": fit.a,
                             "fit_residual": fit.residual},
                    wall_time_s=time.perf_counter() - t0)]
            return run_unit

        for n in _as_list(params["dims"]):
            units.append(snumbers_unit(int(n)))
    elif exp == "criterion":
        eps_list = [float(e) for e in _as_list(params["eps_list"])]

        def criterion_unit(n: int):
            def run_unit() -> list[RunRecord]:
                t0 = time.perf_counter()
                report = analysis.criterion_divergence_report(n, eps_list)
                dt = time.perf_counter() - t0
                return [RunRecord(
                    params={"n": n, "eps": eps},
                    metrics={"integral": val, "divergent": report.divergent,
                             "divergence_rate": report.divergence_rate},
                    wall_time_s=dt / len(eps_list))
                    for eps, val in zip(report.epsilons, report.integrals)]
            return run_unit

        for n in _as_list(params["n"]):
            units.append(criterion_unit(int(n)))
    elif exp == "volterra_1d":
        def volterra_unit(n: int):
            def run_unit() -> list[RunRecord]:
                t0 = time.perf_counter()
                model = analysis.one_d_volterra_matrix(n)
                radius = linalg.spectral_radius(model)
                s = linalg.s_numbers(model)
                window = (min(20, max(2, n // 4)), min(200, n - 10))
                fit_alpha = asymptotics.fit_power_law(s, window).alpha
                return [RunRecord(
                    params={"N": n},
                    metrics={"spectral_radius": radius, "s1": float(s[0]),
                             "fit_alpha": fit_alpha},
                    wall_time_s=time.perf_counter() - t0)]
            return run_unit

        for n in _as_list(params["dims"]):
            units.append(volterra_unit(int(n)))
    return units


def _run_unit_guarded(unit, config: ExperimentConfig) -> list[RunRecord]:
    try:
        return unit()
    except VolterraLabError as exc:
        return [RunRecord(params={}, error=f"{type(exc).__name__}: {exc}")]


def run(config: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    """Execute the experiment, write the report file, and return the report.

    Unit failures are embedded per record; record order is deterministic
    (sweep order) regardless of the jobs setting.
    """
    problems = validate(config)
    if problems:
        raise ConfigError("; ".join(problems))

    cache_path = os.environ.get("VLAB_BESSEL_CACHE")
    if cache_path and config.experiment == "disk_restriction" and os.path.exists(cache_path):
        disk.load_zero_cache(cache_path)

    units = _build_units(config)
    if jobs > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_unit = list(pool.map(lambda u: _run_unit_guarded(u, config), units))
    else:
        per_unit = [_run_unit_guarded(u, config) for u in units]
    records = tuple(rec for unit_records in per_unit for rec in unit_records)

    if cache_path and config.experiment == "disk_restriction":
        try:
            disk.save_zero_cache(cache_path)
        except OSError:
            pass  # cache is advisory

    report = ExperimentReport(experiment=config.experiment, parameters=config.parameters,
                              format=config.format, version=__version__, records=records)
    if config.output_path:
        if config.format == "json":
            write_json(report, config.output_path)
        else:
            stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
            write_csv(report, config.output_path, timestamp=stamp)
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="volterra-lab",
                                     description="operator-spectrum experiment runner")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="flat key = value parameter file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="K=V", help="override one parameter")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    try:
        params = read_config_file(args.config) if args.config else {}
        for item in args.overrides:
            if "=" not in item:
                raise ConfigError(f"--set expects K=V, got {item!r}")
            key, value = item.split("=", 1)
            params[key.strip()] = parse_value(value)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    config = ExperimentConfig(experiment=args.experiment, parameters=params,
                              output_path=args.out, format=args.format)
    problems = validate(config)
    if problems:
        for p in problems:
            print(f"config error: {p}", file=sys.stderr)
        return 2

    try:
        report = run(config, jobs=max(1, args.jobs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (VolterraLabError, OSError) as exc:
        print(f"run error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3

    failures = [rec for rec in report.records if rec.error]
    for rec in failures:
        print(f"run error: {rec.error}", file=sys.stderr)
    if args.out:
        print(f"wrote {len(report.records)} records to {args.out}")
    return 3 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
