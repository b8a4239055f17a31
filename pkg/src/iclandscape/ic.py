"""Information content of a walk: symbols, pair statistics, H(eps), MIC/SIC."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import h

MINUS, DOT, PLUS = -1, 0, 1
_CHARS = {MINUS: "-", DOT: "o", PLUS: "+"}
_FROM_CHARS = {"-": MINUS, "−": MINUS, "o": DOT, "⊙": DOT, ".": DOT, "+": PLUS}

UNEQUAL_PAIRS = ((PLUS, MINUS), (MINUS, PLUS), (PLUS, DOT), (DOT, PLUS), (MINUS, DOT), (DOT, MINUS))

DEFAULT_ETA = 0.05
DEFAULT_GRID_SIZE = 200
DEFAULT_GRID_LOW = 1e-8
DEFAULT_GRID_HIGH = 10.0


@dataclass
class SymbolSequence:
    symbols: np.ndarray  # int8 values in {-1, 0, +1}
    epsilon: float

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return "".join(_CHARS[int(s)] for s in self.symbols)

    @classmethod
    def from_string(cls, text: str, epsilon: float = 0.0) -> "SymbolSequence":
        return cls(np.array([_FROM_CHARS[c] for c in text], dtype=np.int8), epsilon)


def symbolize(deltas, epsilon: float) -> SymbolSequence:
    """Map each cost difference to ``-``, ``o`` or ``+``; ``|d| <= eps`` is ``o``."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    d = np.asarray(deltas, dtype=float)
    sym = np.zeros(d.shape, dtype=np.int8)
    sym[d > epsilon] = PLUS
    sym[d < -epsilon] = MINUS
    return SymbolSequence(sym, float(epsilon))


@dataclass
class PairProbabilities:
    """Frequencies of consecutive ordered symbol pairs.

    ``counts[a + 1, b + 1]`` is the number of positions where symbol ``a`` is
    followed by ``b``.
    """

    counts: np.ndarray
    pair_count: int

    def p(self, a: int, b: int) -> float:
        return int(self.counts[a + 1, b + 1]) / self.pair_count

    @property
    def unequal(self) -> dict[tuple[int, int], float]:
        return {pair: self.p(*pair) for pair in UNEQUAL_PAIRS}

    @property
    def p_dotdot(self) -> float:
        return self.p(DOT, DOT)

    @property
    def p_plusplus(self) -> float:
        return self.p(PLUS, PLUS)

    @property
    def p_minusminus(self) -> float:
        return self.p(MINUS, MINUS)

    def total(self) -> float:
        return float(self.counts.sum()) / self.pair_count


def pair_probabilities(seq: SymbolSequence | np.ndarray) -> PairProbabilities:
    sym = seq.symbols if isinstance(seq, SymbolSequence) else np.asarray(seq)
    if len(sym) < 2:
        raise ValueError("need at least two symbols to form a pair")
    code = 3 * (sym[:-1].astype(np.int64) + 1) + (sym[1:].astype(np.int64) + 1)
    counts = np.bincount(code, minlength=9).reshape(3, 3)
    return PairProbabilities(counts=counts, pair_count=len(sym) - 1)


def information_content(pp: PairProbabilities) -> float:
    """Sum of ``h(p_ab)`` over the six unequal pairs (log base 6)."""
    return float(sum(h(p) for p in pp.unequal.values()))


@dataclass
class ICCurve:
    epsilons: np.ndarray
    values: np.ndarray
    m: int | None = None

    def __post_init__(self):
        self.epsilons = np.asarray(self.epsilons, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.epsilons.shape != self.values.shape:
            raise ValueError("epsilons and values must have equal length")
        if np.any(np.diff(self.epsilons) <= 0):
            raise ValueError("epsilons must be strictly increasing")

    def __len__(self) -> int:
        return len(self.epsilons)

    @classmethod
    def from_pairs(cls, pairs, m: int | None = None) -> "ICCurve":
        eps, vals = zip(*pairs)
        return cls(np.array(eps), np.array(vals), m)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epsilon", "H"])
            for e, v in zip(self.epsilons, self.values):
                w.writerow([repr(float(e)), repr(float(v))])


def default_epsilon_grid(
    deltas,
    size: int = DEFAULT_GRID_SIZE,
    low: float = DEFAULT_GRID_LOW,
    high: float = DEFAULT_GRID_HIGH,
) -> np.ndarray:
    """``{0}`` plus ``size`` log-spaced values in ``[low*ref, high*ref]``.

    ``ref`` is the largest ``|delta|``; a flat walk (``ref = 0``) falls back
    to ``ref = 1`` so the grid stays strictly increasing.
    """
    d = np.asarray(deltas, dtype=float)
    ref = float(np.max(np.abs(d))) if d.size else 0.0
    if not ref > 0.0 or not math.isfinite(ref):
        ref = 1.0
    return np.concatenate(([0.0], np.geomspace(low * ref, high * ref, size)))


def ic_values(deltas, epsilons) -> np.ndarray:
    """H(eps) for each eps, computed in one pass over the grid."""
    d = np.asarray(deltas, dtype=float)
    if d.size < 2:
        raise ValueError("need at least two cost differences")
    eps = np.asarray(epsilons, dtype=float)
    # sign pattern is fixed; only the dot threshold moves with eps
    sign = np.sign(d).astype(np.int8)
    mag = np.abs(d)
    out = np.empty(len(eps))
    for i, e in enumerate(eps):
        sym = np.where(mag <= e, np.int8(DOT), sign)
        out[i] = information_content(pair_probabilities(sym))
    return out


def ic_curve(walk, grid=None) -> ICCurve:
    """H(eps) of a walk (or a bare array of deltas) over ``grid``."""
    deltas = getattr(walk, "deltas", walk)
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0:
        raise ValueError("walk has no cost differences")
    if deltas.size < 2:
        raise ValueError("walk needs at least two steps")
    m = getattr(walk, "dimension", None)
    eps = default_epsilon_grid(deltas) if grid is None else np.unique(np.asarray(grid, dtype=float))
    return ICCurve(eps, ic_values(deltas, eps), m)


@dataclass
class ICFeatures:
    H_M: float
    eps_M: float
    eps_S: float
    eta: float
    m: int | None
    H_S: float = field(default=float("nan"))

    @property
    def eps_M_sqrt_m(self) -> float:
        return self.eps_M * math.sqrt(self.m) if self.m else float("nan")

    @property
    def eps_S_sqrt_m(self) -> float:
        return self.eps_S * math.sqrt(self.m) if self.m else float("nan")

    def to_dict(self) -> dict:
        return {
            "H_M": self.H_M,
            "eps_M": self.eps_M,
            "eps_S": self.eps_S,
            "eta": self.eta,
            "m": self.m,
            "eps_M_sqrt_m": self.eps_M_sqrt_m,
            "eps_S_sqrt_m": self.eps_S_sqrt_m,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def extract_features(curve: ICCurve, eta: float = DEFAULT_ETA, m: int | None = None) -> ICFeatures:
    """MIC ``(H_M, eps_M)`` and sensitivity ``eps_S`` of an IC curve.

    ``eps_M`` is the smallest grid eps attaining the maximum. ``eps_S`` is
    the smallest positive grid eps with ``H <= eta``; it falls back to eps=0
    only if the curve has no positive grid points.
    """
    if not 0.0 < eta <= 1.0 / 6.0:
        raise ValueError(f"eta must lie in (0, 1/6], got {eta}")
    if len(curve) == 0:
        raise ValueError("empty IC curve")
    m = curve.m if m is None else m
    vals = curve.values
    i_max = int(np.argmax(vals))  # first occurrence = smallest eps
    below = np.flatnonzero((vals <= eta) & (curve.epsilons > 0.0))
    if below.size == 0:
        below = np.flatnonzero(vals <= eta)
    if below.size == 0:
        raise RuntimeError(
            "no grid epsilon reaches H <= eta; extend the grid past max |delta C|"
        )
    i_s = int(below[0])
    return ICFeatures(
        H_M=float(vals[i_max]),
        eps_M=float(curve.epsilons[i_max]),
        eps_S=float(curve.epsilons[i_s]),
        eta=float(eta),
        m=m,
        H_S=float(vals[i_s]),
    )


def write_features(features: ICFeatures, path) -> None:
    Path(path).write_text(features.to_json() + "\n")
