"""Command-line entry point: ``iclandscape <command> [options]``.

Exit codes: 0 success, 1 failed validation or scan cell, 2 config error,
3 I/O or input-file error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import re
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .experiment import (
    SCAN_HEADER,
    ICSettings,
    WalkSettings,
    analyze_deltas,
    format_value,
    median_eps_m_sqrt_m,
    run_scan,
    scan_cells,
)
from .landscape import (
    AnalyticLandscape,
    WalkConfig,
    WalkFileError,
    deltas_from_columns,
    derive_seed,
    lhs_sample,
    random_walk,
    read_walk_csv,
    walk_over_sample,
    write_manifest,
    write_walk_csv,
)
from .quantum import AnsatzSpec, quantum_cost
from .scaling import InsufficientDataError, aggregate, fit_report, read_scan_csv, write_report
from .validation import SUITES, run_suites

log = logging.getLogger("iclandscape")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
MANIFEST = "manifest.json"


class InputError(Exception):
    """Unreadable or malformed input data (exit code 3)."""


# -- config helpers ------------------------------------------------------------

def _overrides(args) -> dict:
    o: dict = {}
    if getattr(args, "seed", None) is not None:
        o.setdefault("walk", {})["seed"] = args.seed
    if getattr(args, "step_size", None) is not None:
        o.setdefault("walk", {})["step_size"] = args.step_size
    if getattr(args, "reps", None) is not None:
        o.setdefault("walk", {})["repetitions"] = args.reps
        o.setdefault("scan", {})["repetitions"] = args.reps
    if getattr(args, "eta", None) is not None:
        o.setdefault("ic", {})["eta"] = args.eta
    if getattr(args, "jobs", None) is not None:
        o["jobs"] = args.jobs
    if getattr(args, "out", None) is not None:
        o["output"] = args.out
    return o


def _config(args) -> dict:
    return load_config(args.config, _overrides(args))


def _ic_settings(cfg) -> ICSettings:
    ic = cfg["ic"]
    eps = ic["epsilons"]
    return ICSettings(ic["eta"], ic["grid_size"], ic["grid_low"], ic["grid_high"],
                      None if eps is None else tuple(eps))


def _walk_settings(cfg) -> WalkSettings:
    w = cfg["walk"]
    return WalkSettings(w["step_size"], w["multiplier"], w["steps"])


def build_cost(landscape: dict):
    if landscape["type"] == "quantum":
        return quantum_cost(AnsatzSpec(landscape["qubits"], landscape["layers"]), landscape["observable"])
    kind = landscape["kind"]
    if kind == "constant":
        return AnalyticLandscape.constant(len(landscape["coefficients"]), landscape["value"])
    return AnalyticLandscape(kind, landscape["coefficients"])


def _out_dir(cfg) -> Path:
    out = Path(cfg["output"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc}") from None
    return out


# -- commands ------------------------------------------------------------------

def cmd_walk(cfg) -> int:
    cost = build_cost(cfg["landscape"])
    w = cfg["walk"]
    m = cost.dimension
    start = w["start"]
    if start == "zero":
        start = np.zeros(m)
    elif start is not None:
        start = np.asarray(start, dtype=float)
        if start.shape != (m,):
            raise ConfigError(f"invalid config: walk.start: expected {m} coordinates, got {len(start)}")
    out = _out_dir(cfg)
    settings = _walk_settings(cfg)
    files, seeds = [], []
    for rep in range(w["repetitions"]):
        seed = derive_seed(w["seed"], rep)
        if w["mode"] == "over-sample":
            # nearest-neighbour tour through an LHS design of M = multiplier * m points
            rec = walk_over_sample(cost, lhs_sample(m, w["multiplier"] * m, seed), seed)
        else:
            base = settings.config(m, seed)
            rec = random_walk(cost, WalkConfig(base.step_size, base.num_steps, seed, start))
        name = f"walk_rep{rep}.csv"
        theta = out / f"theta_rep{rep}.csv" if w["write_theta"] else None
        write_walk_csv([rec], out / name, theta_path=theta, reps=[rep])
        files.append(name)
        seeds.append(seed)
        log.info("wrote %s (%d steps)", out / name, rec.num_steps)
    write_manifest(out / MANIFEST, m=m, d=w["step_size"], S=rec.num_steps, seed=w["seed"],
                   cost_id=cost.cost_id, mode=w["mode"], repetitions=w["repetitions"], files=files,
                   rep_seeds=seeds)
    print(str(out / MANIFEST))
    return EXIT_OK


def _load_dataset(path: Path, dimension: int | None):
    """Walk reps and parameter dimension from a dataset directory or CSV file."""
    if path.is_dir():
        numbered = [(re.fullmatch(r"walk_rep(\d+)\.csv", p.name), p) for p in path.iterdir()]
        csvs = [p for _, p in sorted((int(mt.group(1)), p) for mt, p in numbered if mt)]
        manifest = path / MANIFEST
    else:
        csvs = [path]
        manifest = path.parent / MANIFEST
    if not csvs:
        raise InputError(f"{path}: no walk_rep*.csv files found")
    if dimension is None:
        try:
            dimension = int(json.loads(manifest.read_text())["m"])
        except FileNotFoundError:
            raise InputError(f"{manifest} not found; pass --dimension") from None
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{manifest}: cannot read parameter dimension ({exc})") from None
    reps: dict[int, np.ndarray] = {}
    for f in csvs:
        for rep, (costs, norms) in read_walk_csv(f).items():
            if rep in reps:
                raise InputError(f"{f}: repetition {rep} appears in more than one file")
            if len(costs) < 3:
                raise InputError(f"{f}: repetition {rep} has fewer than 2 steps")
            if np.any(norms[1:] <= 0):
                raise InputError(f"{f}: repetition {rep} has a non-positive step_norm")
            reps[rep] = deltas_from_columns(costs, norms)
    return dict(sorted(reps.items())), dimension


_SUMMARY_KEYS = ["H_M", "eps_M", "eps_S", "eps_M_sqrt_m", "eps_S_sqrt_m", "lower_mic", "upper_mic", "upper_sic"]


def analyze_dataset(reps: dict[int, np.ndarray], m: int, settings: ICSettings) -> dict:
    results = []
    for rep, deltas in reps.items():
        feats, bounds = analyze_deltas(deltas, m, settings)
        entry = {"rep": rep, **feats.to_dict(), **bounds.to_dict()}
        if not bounds.applicable_mic:
            entry["note"] = "MIC below log6(2): the MIC interval does not apply"
        results.append(entry)
    summary = {"median": {}, "std": {}}
    for key in _SUMMARY_KEYS:
        vals = [r[key] for r in results if r.get(key) is not None]
        summary["median"][key] = float(np.median(vals)) if vals else None
        summary["std"][key] = float(np.std(vals)) if vals else None
    summary["mic_applicable_reps"] = sum(r["applicable_mic"] for r in results)
    return {"m": m, "eta": settings.eta, "repetitions": results, "summary": summary}


def cmd_analyze(cfg, dataset: str, dimension: int | None) -> int:
    reps, m = _load_dataset(Path(dataset), dimension)
    report = analyze_dataset(reps, m, _ic_settings(cfg))
    text = json.dumps(report, indent=2)
    out = _out_dir(cfg)
    (out / "analysis.json").write_text(text + "\n")
    print(text)
    return EXIT_OK


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_scan(cfg) -> int:
    sc = cfg["scan"]
    cells = scan_cells(sc["qubits"], sc["layers"], sc["observables"], sc["repetitions"])
    log.info("scanning %d cells with %d worker(s)", len(cells), cfg["jobs"])
    rows, failures = run_scan(cells, cfg["walk"]["seed"], _walk_settings(cfg), _ic_settings(cfg), cfg["jobs"])
    out = _out_dir(cfg)
    _write_rows(out / "scan.csv", SCAN_HEADER, [[format_value(r[k]) for k in SCAN_HEADER] for r in rows])
    for obs in sc["observables"]:
        med = median_eps_m_sqrt_m(rows, obs)
        _write_rows(out / f"heatmap_{obs}.csv", ["qubits", "layers", "median_eps_M_sqrt_m"],
                    [[n, L, format_value(v)] for (n, L), v in med.items()])
    if failures:
        _write_rows(out / "failures.csv", ["observable", "qubits", "layers", "rep", "error"],
                    [[c.observable, c.qubits, c.layers, c.rep, err] for c, err in failures])
        log.error("%d of %d cells failed; see %s", len(failures), len(cells), out / "failures.csv")
        return EXIT_FAIL
    print(str(out / "scan.csv"))
    return EXIT_OK


def cmd_fit(cfg, scan_csv: str) -> int:
    try:
        rows = read_scan_csv(scan_csv)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    points = aggregate(rows)
    try:
        entries = fit_report(points, weighted=cfg["fit"]["weighted"])
    except InsufficientDataError as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    out = _out_dir(cfg)
    write_report(entries, out / "fit_report.json", out / "fit_table.csv")
    for e in entries:
        f = e["fits"].get("eps_M_sqrt_m")
        if f is None:
            continue
        coefs = " ".join(f"{c:.4g}" for c in f.coefficients)
        print(f"{e['observable']:6s} {e['axis']:6s} {e['fixed']}={e['fixed_value']:<3} "
              f"{e['model']:9s} coef=[{coefs}] R2={f.r2:.4f}")
    return EXIT_OK


def cmd_validate(suites) -> int:
    results = run_suites(suites)
    print(json.dumps({"passed": all(r.passed for r in results), "suites": [r.to_dict() for r in results]},
                     indent=2))
    for r in results:
        log.info("%s: %s (%.1fs)", r.name, "pass" if r.passed else "FAIL", r.seconds)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_print_config(cfg) -> int:
    print(json.dumps(cfg, indent=2))
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------

def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; unspecified fields take defaults")
    common.add_argument("--seed", type=_seed, help="master seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--eta", type=float, help="SIC threshold")
    common.add_argument("--step-size", type=float, help="walk step length d (radians)")
    common.add_argument("--reps", type=int, help="repetitions per walk or scan cell")
    common.add_argument("--jobs", type=int, help="worker processes for scan")
    common.add_argument("-v", "--verbose", action="store_true", help="progress logging on stderr")

    parser = argparse.ArgumentParser(prog="iclandscape", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("walk", parents=[common], help="generate random-walk datasets")
    p = sub.add_parser("analyze", parents=[common], help="IC features and gradient bounds of a dataset")
    p.add_argument("dataset", help="dataset directory or walk CSV")
    p.add_argument("--dimension", type=int, help="parameter count when no manifest is present")
    sub.add_parser("scan", parents=[common], help="walk and analyze every (qubits, layers) cell")
    p = sub.add_parser("fit", parents=[common], help="scaling fits of a scan CSV")
    p.add_argument("scan_csv")
    p = sub.add_parser("validate", parents=[common], help="run the self-check suites")
    p.add_argument("--suite", action="append", choices=sorted(SUITES), help="run only this suite (repeatable)")
    sub.add_parser("print-config", parents=[common], help="print the effective configuration")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "validate":
            return cmd_validate(args.suite)
        cfg = _config(args)
        if args.command == "walk":
            return cmd_walk(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.dataset, args.dimension)
        if args.command == "scan":
            return cmd_scan(cfg)
        if args.command == "fit":
            return cmd_fit(cfg, args.scan_csv)
        return cmd_print_config(cfg)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (InputError, WalkFileError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
