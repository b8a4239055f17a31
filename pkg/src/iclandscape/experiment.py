"""Walk -> IC -> bounds pipeline and the (qubits, layers) scan runner."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import GradientBounds, gradient_bounds
from .ic import (
    DEFAULT_ETA,
    DEFAULT_GRID_HIGH,
    DEFAULT_GRID_LOW,
    DEFAULT_GRID_SIZE,
    ICFeatures,
    default_epsilon_grid,
    extract_features,
    ic_curve,
)
from .landscape import DEFAULT_SAMPLE_MULTIPLIER, DEFAULT_STEP_SIZE, WalkConfig, derive_seed, random_walk
from .quantum import OBSERVABLES, AnsatzSpec, quantum_cost

log = logging.getLogger(__name__)

SCAN_HEADER = [
    "observable", "qubits", "layers", "rep",
    "eps_M", "eps_S", "H_M", "lower_mic", "upper_mic", "upper_sic",
]


@dataclass
class ICSettings:
    eta: float = DEFAULT_ETA
    grid_size: int = DEFAULT_GRID_SIZE
    grid_low: float = DEFAULT_GRID_LOW
    grid_high: float = DEFAULT_GRID_HIGH
    epsilons: tuple[float, ...] | None = None

    def grid(self, deltas) -> np.ndarray:
        if self.epsilons is not None:
            return np.asarray(self.epsilons, dtype=float)
        return default_epsilon_grid(deltas, self.grid_size, self.grid_low, self.grid_high)


def analyze_deltas(deltas, m: int, settings: ICSettings | None = None) -> tuple[ICFeatures, GradientBounds]:
    """IC features and gradient bounds of one walk's cost differences."""
    settings = settings or ICSettings()
    curve = ic_curve(deltas, settings.grid(deltas))
    feats = extract_features(curve, settings.eta, m)
    bounds = gradient_bounds(feats.eps_M, feats.H_M, feats.eps_S, feats.eta, m)
    return feats, bounds


@dataclass(frozen=True)
class Cell:
    observable: str
    qubits: int
    layers: int
    rep: int


@dataclass
class WalkSettings:
    step_size: float = DEFAULT_STEP_SIZE
    multiplier: int = DEFAULT_SAMPLE_MULTIPLIER
    steps: int | None = None

    def config(self, m: int, seed: int) -> WalkConfig:
        if self.steps is not None:
            return WalkConfig(self.step_size, self.steps, seed)
        return WalkConfig.for_dimension(m, self.step_size, self.multiplier, seed)


def cell_seed(master_seed: int, cell: Cell) -> int:
    return derive_seed(master_seed, cell.qubits, cell.layers, OBSERVABLES.index(cell.observable), cell.rep)


def run_cell(cell: Cell, master_seed: int, walk: WalkSettings, ic: ICSettings) -> dict:
    """One scan row: walk the circuit landscape and analyze it."""
    spec = AnsatzSpec(cell.qubits, cell.layers)
    cost = quantum_cost(spec, cell.observable)
    record = random_walk(cost, walk.config(spec.num_params, cell_seed(master_seed, cell)))
    feats, bounds = analyze_deltas(record.deltas, spec.num_params, ic)
    return {
        "observable": cell.observable,
        "qubits": cell.qubits,
        "layers": cell.layers,
        "rep": cell.rep,
        "eps_M": feats.eps_M,
        "eps_S": feats.eps_S,
        "H_M": feats.H_M,
        "lower_mic": bounds.lower_mic,
        "upper_mic": bounds.upper_mic,
        "upper_sic": bounds.upper_sic,
    }


def _run_cell_safe(args):
    cell, master_seed, walk, ic = args
    try:
        return cell, run_cell(cell, master_seed, walk, ic), None
    except Exception as exc:  # recorded per cell; the scan carries on
        return cell, None, f"{type(exc).__name__}: {exc}"


def scan_cells(qubits, layers, observables, repetitions: int) -> list[Cell]:
    return [
        Cell(obs, n, L, rep)
        for obs in observables
        for n in qubits
        for L in layers
        for rep in range(repetitions)
    ]


def run_scan(cells, master_seed: int, walk: WalkSettings | None = None, ic: ICSettings | None = None,
             jobs: int = 1) -> tuple[list[dict], list[tuple[Cell, str]]]:
    """Run every cell; rows come back sorted, independent of ``jobs``."""
    walk = walk or WalkSettings()
    ic = ic or ICSettings()
    # largest circuits first keeps the pool busy until the end
    tasks = sorted(cells, key=lambda c: -(c.qubits * c.layers) * (1 << c.qubits))
    args = [(c, master_seed, walk, ic) for c in tasks]
    if jobs <= 1:
        results = map(_run_cell_safe, args)
        results = list(_logged(results, len(args)))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(_logged(pool.map(_run_cell_safe, args), len(args)))
    rows, failures = [], []
    for cell, row, err in results:
        if err is None:
            rows.append(row)
        else:
            log.error("cell %s failed: %s", cell, err)
            failures.append((cell, err))
    rows.sort(key=lambda r: (r["observable"], r["qubits"], r["layers"], r["rep"]))
    failures.sort(key=lambda f: (f[0].observable, f[0].qubits, f[0].layers, f[0].rep))
    return rows, failures


def _logged(results, total):
    for i, res in enumerate(results, start=1):
        log.info("cell %d/%d done: %s", i, total, res[0])
        yield res


def format_value(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def median_eps_m_sqrt_m(rows, observable: str) -> dict[tuple[int, int], float]:
    groups: dict[tuple[int, int], list[float]] = {}
    for r in rows:
        if r["observable"] != observable:
            continue
        m = r["qubits"] * r["layers"]
        groups.setdefault((r["qubits"], r["layers"]), []).append(r["eps_M"] * math.sqrt(m))
    return {k: float(np.median(v)) for k, v in sorted(groups.items())}
