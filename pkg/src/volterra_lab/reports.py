"""Machine-readable experiment reports: CSV and JSON serialization.

CSV files are deterministic for a given config: the only line allowed to
vary between identical runs is the leading ``#`` comment, which carries
the timestamp.  Complex eigenvalues are split into re/im column pairs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

N_EIGENVALUE_COLUMNS = 3

_EIG_COLS = [f"eig{i}_{part}" for i in range(1, N_EIGENVALUE_COLUMNS + 1) for part in ("re", "im")]

CSV_COLUMNS = {
    "snumbers": ["kind", "a", "alpha_or_beta", "N",
                 "fit_exponent", "fit_a", "fit_residual", "error"],
    "perturb_thm21": ["alpha", "q", "a", "seed", "N", "spectral_radius",
                      *_EIG_COLS, "persistent_nonzero", "error"],
    "perturb_thm23": ["q", "a", "seed", "N", "spectral_radius",
                      *_EIG_COLS, "persistent_nonzero", "schatten_order", "error"],
    "disk_restriction": ["n_max", "k_max", "rank", "seed", "N", "spectral_radius",
                         *_EIG_COLS, "persistent_nonzero", "error"],
    "criterion": ["n", "eps", "integral", "divergent", "divergence_rate", "error"],
    "volterra_1d": ["N", "spectral_radius", "s1", "fit_alpha", "error"],
}


@dataclass(frozen=True)
class RunRecord:
    """One experiment run at one refinement, with its exact parameters."""

    params: dict
    metrics: dict = field(default_factory=dict)
    eigenvalues: tuple = ()
    wall_time_s: float = 0.0
    error: str | None = None


@dataclass(frozen=True)
class ExperimentReport:
    """Config echo plus per-run records and the artifact version."""

    experiment: str
    parameters: dict
    format: str
    version: str
    records: tuple


def _json_value(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def report_to_dict(report: ExperimentReport) -> dict:
    return {
        "experiment": report.experiment,
        "parameters": report.parameters,
        "format": report.format,
        "version": report.version,
        "records": [
            {
                "params": rec.params,
                "metrics": {k: _json_value(v) for k, v in rec.metrics.items()},
                "eigenvalues": [[z.real, z.imag] for z in rec.eigenvalues],
                "wall_time_s": rec.wall_time_s,
                "error": rec.error,
            }
            for rec in report.records
        ],
    }


def report_from_dict(data: dict) -> ExperimentReport:
    records = tuple(
        RunRecord(
            params=rec["params"],
            metrics=rec["metrics"],
            eigenvalues=tuple(complex(re, im) for re, im in rec["eigenvalues"]),
            wall_time_s=rec["wall_time_s"],
            error=rec["error"],
        )
        for rec in data["records"]
    )
    return ExperimentReport(experiment=data["experiment"], parameters=data["parameters"],
                            format=data["format"], version=data["version"], records=records)


def write_json(report: ExperimentReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2)
        fh.write("\n")


def read_json(path) -> ExperimentReport:
    with open(path, encoding="utf-8") as fh:
        return report_from_dict(json.load(fh))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(report: ExperimentReport, timestamp: str | None = None) -> str:
    """Render the CSV body; the timestamp lives in the leading comment only."""
    columns = CSV_COLUMNS[report.experiment]
    buf = io.StringIO()
    stamp = f" generated={timestamp}" if timestamp else ""
    buf.write(f"# volterra-lab {report.version} experiment={report.experiment}{stamp}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in report.records:
        merged = dict(rec.params)
        merged.update(rec.metrics)
        for i in range(N_EIGENVALUE_COLUMNS):
            if i < len(rec.eigenvalues):
                merged[f"eig{i + 1}_re"] = rec.eigenvalues[i].real
                merged[f"eig{i + 1}_im"] = rec.eigenvalues[i].imag
        merged["error"] = rec.error
        writer.writerow([_cell(merged.get(col)) for col in columns])
    return buf.getvalue()


def write_csv(report: ExperimentReport, path, timestamp: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_csv(report, timestamp=timestamp))
