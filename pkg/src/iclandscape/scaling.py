"""Least-squares scaling fits over (qubits, layers) scans.

Global-observable statistics are fitted as ``log2(f(n)) = alpha n + beta``;
local-observable statistics as ``1/f(x) = alpha x^2 + beta x + gamma`` along
either the qubit or the layer axis, always alongside a linear reference fit.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

log = logging.getLogger(__name__)

SCAN_FIELDS = [
    "observable", "qubits", "layers", "rep",
    "eps_M", "eps_S", "H_M", "lower_mic", "upper_mic", "upper_sic",
]
# table columns in the order LB, eps_M*sqrt(m), UB, UBs
COLUMNS = ("LB", "eps_M_sqrt_m", "UB", "UBs")
_COLUMN_FIELD = {"LB": "lower_mic", "UB": "upper_mic", "UBs": "upper_sic"}
MODELS = {1: "linear", 2: "quadratic"}
COEFFICIENT_NAMES = ("alpha", "beta", "gamma")


class InsufficientDataError(ValueError):
    pass


@dataclass
class ScanPoint:
    """Cross-repetition summary of one (observable, n, L) cell.

    ``stats`` maps each table column to ``(median, std)`` over the repetitions
    where that statistic exists; the MIC bounds are missing when the MIC was
    below the applicability threshold.
    """

    observable: str
    qubits: int
    layers: int
    repetitions: int
    stats: dict[str, tuple[float, float]] = field(default_factory=dict)

    @property
    def statistic(self) -> float:
        return self.stats["eps_M_sqrt_m"][0]

    @property
    def spread(self) -> float:
        return self.stats["eps_M_sqrt_m"][1]

    def value(self, column: str) -> float | None:
        s = self.stats.get(column)
        return None if s is None else s[0]


@dataclass
class FitResult:
    model: str
    transform: str
    coefficients: tuple[float, ...]
    rss: float
    r2: float
    context: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["coefficients"] = list(self.coefficients)
        return d


# -- OLS ---------------------------------------------------------------------

def ols_polyfit(xs, ys, degree: int, weights=None, transform: str = "identity") -> FitResult:
    """Polynomial least squares through the normal equations.

    Coefficients come highest power first, so a quadratic returns
    ``(alpha, beta, gamma)`` for ``alpha x^2 + beta x + gamma``.
    """
    if degree not in MODELS:
        raise ValueError(f"degree must be 1 or 2, got {degree}")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d sequences of equal length")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("fit data must be finite")
    if len(np.unique(x)) < degree + 1:
        raise ValueError(f"degree {degree} fit needs at least {degree + 1} distinct x values")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != x.shape or np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be positive and finite, one per point")
    # centring x keeps the normal equations well conditioned; integer-valued
    # data such as qubit counts then solve without rounding
    mu = float(np.mean(x))
    X = np.vander(x - mu, degree + 1)
    A = X.T @ (w[:, None] * X)
    b = X.T @ (w * y)
    if np.linalg.matrix_rank(A) < degree + 1:
        raise ValueError("normal equations are rank deficient")
    c = np.linalg.solve(A, b)
    resid = y - X @ c
    if degree == 1:
        coef = (c[0], c[1] - c[0] * mu)
    else:
        coef = (c[0], c[1] - 2 * c[0] * mu, c[0] * mu * mu - c[1] * mu + c[2])
    rss = float(np.sum(w * resid ** 2))
    ybar = np.sum(w * y) / np.sum(w)
    tss = float(np.sum(w * (y - ybar) ** 2))
    if tss > 0:
        r2 = 1.0 - rss / tss
    else:
        # constant data: a perfect fit explains everything there is to explain
        r2 = 1.0 if rss <= 1e-24 else -math.inf
    return FitResult(MODELS[degree], transform, tuple(float(c) for c in coef), rss, r2)


def _weights(points, column, transform):
    out = []
    for p in points:
        mu, sd = p.stats[column]
        if sd <= 0:
            raise ValueError(f"cannot weight by zero spread at n={p.qubits}, L={p.layers}")
        # first-order error propagation through the transform
        if transform == "log2":
            sd_t = sd / (mu * math.log(2.0))
        elif transform == "reciprocal":
            sd_t = sd / mu ** 2
        else:
            sd_t = sd
        out.append(1.0 / sd_t ** 2)
    return out


def _column_values(points, column):
    vals = [p.value(column) for p in points]
    if any(v is None for v in vals):
        raise ValueError(f"column {column} is missing for some cells")
    if any(not v > 0 for v in vals):
        raise ValueError(f"column {column} has non-positive statistics; transform undefined")
    return np.array(vals, dtype=float)


def fit_global_qubit_scaling(points, column: str = "eps_M_sqrt_m", weighted: bool = False) -> FitResult:
    """Linear fit of ``log2(statistic)`` against the qubit count at fixed L."""
    points = sorted(points, key=lambda p: p.qubits)
    layers = {p.layers for p in points}
    if len(layers) > 1:
        raise ValueError(f"points span several layer counts: {sorted(layers)}")
    if len({p.qubits for p in points}) < 3:
        raise InsufficientDataError("qubits axis needs at least 3 values for the global fit")
    ys = np.log2(_column_values(points, column))
    xs = [p.qubits for p in points]
    w = _weights(points, column, "log2") if weighted else None
    fit = ols_polyfit(xs, ys, 1, w, transform="log2")
    fit.context = {"observable": "global", "axis": "qubits", "layers": layers.pop(), "column": column}
    return fit


def fit_local_scaling(points, axis: str, column: str = "eps_M_sqrt_m",
                      weighted: bool = False) -> tuple[FitResult, FitResult]:
    """Quadratic and linear fits of ``1/statistic`` along ``axis``.

    Returns ``(quadratic, linear)``; comparing their R^2 shows whether the
    straight line under-fits.
    """
    if axis not in ("qubits", "layers"):
        raise ValueError(f"axis must be 'qubits' or 'layers', got {axis!r}")
    other = "layers" if axis == "qubits" else "qubits"
    points = sorted(points, key=lambda p: getattr(p, axis))
    fixed = {getattr(p, other) for p in points}
    if len(fixed) > 1:
        raise ValueError(f"points span several {other} values: {sorted(fixed)}")
    if len({getattr(p, axis) for p in points}) < 4:
        raise InsufficientDataError(f"{axis} axis needs at least 4 values for the local fit")
    ys = 1.0 / _column_values(points, column)
    xs = [getattr(p, axis) for p in points]
    w = _weights(points, column, "reciprocal") if weighted else None
    fits = (ols_polyfit(xs, ys, 2, w, "reciprocal"), ols_polyfit(xs, ys, 1, w, "reciprocal"))
    fixed_value = fixed.pop()
    for f in fits:
        f.context = {"observable": "local", "axis": axis, other: fixed_value, "column": column}
    return fits


# -- scan data ---------------------------------------------------------------

def _parse_float(text: str) -> float | None:
    v = float(text)
    return None if math.isnan(v) else v


def read_scan_csv(path) -> list[dict]:
    """Rows of a scan CSV; ``nan`` bound entries become ``None``."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != SCAN_FIELDS:
            raise ValueError(f"{path}: expected header {','.join(SCAN_FIELDS)}")
        for lineno, rec in enumerate(reader, start=2):
            try:
                row = {
                    "observable": rec["observable"],
                    "qubits": int(rec["qubits"]),
                    "layers": int(rec["layers"]),
                    "rep": int(rec["rep"]),
                }
                for key in SCAN_FIELDS[4:]:
                    row[key] = _parse_float(rec[key])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed scan row ({exc})") from None
            rows.append(row)
    return rows


def _column_of(row: dict, column: str) -> float | None:
    if column == "eps_M_sqrt_m":
        eps = row["eps_M"]
        return None if eps is None else eps * math.sqrt(row["qubits"] * row["layers"])
    return row[_COLUMN_FIELD[column]]


def aggregate(rows) -> list[ScanPoint]:
    """Median and standard deviation per cell and column, over repetitions."""
    groups: dict[tuple[str, int, int], list[dict]] = {}
    for r in rows:
        groups.setdefault((r["observable"], r["qubits"], r["layers"]), []).append(r)
    points = []
    for (obs, n, L), members in sorted(groups.items()):
        stats = {}
        for col in COLUMNS:
            vals = [v for v in (_column_of(r, col) for r in members) if v is not None]
            if vals:
                stats[col] = (float(np.median(vals)), float(np.std(vals)))
        points.append(ScanPoint(obs, n, L, len(members), stats))
    return points


# -- report --------------------------------------------------------------------

def _slices(points, observable, fixed_attr):
    by_key: dict[int, list[ScanPoint]] = {}
    for p in points:
        if p.observable == observable:
            by_key.setdefault(getattr(p, fixed_attr), []).append(p)
    return sorted(by_key.items())


def _try_fit(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValueError as exc:
        log.warning("skipping fit: %s", exc)
        return None


def fit_report(points, weighted: bool = False) -> list[dict]:
    """Every applicable fit of the scan, one entry per table row.

    Each entry holds the slice description and one FitResult per available
    column. Global slices are indexed by layer count; local slices by layer
    count (qubit axis) and by qubit count (layer axis).
    """
    entries = []
    for L, pts in _slices(points, "global", "layers"):
        if len({p.qubits for p in pts}) < 3:
            continue
        fits = {c: _try_fit(fit_global_qubit_scaling, pts, c, weighted) for c in COLUMNS}
        entries.append(_entry("global", "qubits", "layers", L, "linear", "log2",
                              {c: f for c, f in fits.items() if f is not None}))
    for axis, fixed_attr in (("qubits", "layers"), ("layers", "qubits")):
        for key, pts in _slices(points, "local", fixed_attr):
            if len({getattr(p, axis) for p in pts}) < 4:
                continue
            both = {c: _try_fit(fit_local_scaling, pts, axis, c, weighted) for c in COLUMNS}
            for i, model in enumerate(("quadratic", "linear")):
                fits = {c: f[i] for c, f in both.items() if f is not None}
                entries.append(_entry("local", axis, fixed_attr, key, model, "reciprocal", fits))
    if not entries:
        raise InsufficientDataError(
            "no slice has enough points: global fits need 3 values on the qubits axis, "
            "local fits 4 values on the qubits or layers axis"
        )
    return entries


def _entry(observable, axis, fixed_name, fixed_value, model, transform, fits):
    return {
        "observable": observable,
        "axis": axis,
        "fixed": fixed_name,
        "fixed_value": fixed_value,
        "model": model,
        "transform": transform,
        "fits": fits,
    }


def report_to_json(entries) -> str:
    out = []
    for e in entries:
        d = {k: v for k, v in e.items() if k != "fits"}
        d["fits"] = {c: f.to_dict() for c, f in e["fits"].items()}
        out.append(d)
    return json.dumps(out, indent=2, allow_nan=True)


TABLE_HEADER = (
    ["observable", "axis", "fixed", "fixed_value", "model", "transform"]
    + [f"{name}_{col}" for name in COEFFICIENT_NAMES for col in COLUMNS]
    + [f"r2_{col}" for col in COLUMNS]
)


def report_table_rows(entries) -> list[list[str]]:
    """Coefficient table: for each coefficient, one column per statistic."""
    rows = []
    for e in entries:
        row = [e["observable"], e["axis"], e["fixed"], str(e["fixed_value"]), e["model"], e["transform"]]
        for i in range(len(COEFFICIENT_NAMES)):
            for col in COLUMNS:
                f = e["fits"].get(col)
                row.append(repr(f.coefficients[i]) if f is not None and i < len(f.coefficients) else "")
        for col in COLUMNS:
            f = e["fits"].get(col)
            row.append(repr(f.r2) if f is not None else "")
        rows.append(row)
    return rows


def write_report(entries, json_path, csv_path) -> None:
    with open(json_path, "w") as fh:
        fh.write(report_to_json(entries) + "\n")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        w.writerows(report_table_rows(entries))
