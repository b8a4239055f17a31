"""Cost-function contract, parameter sampling and isotropic random walks.

Walk coordinates are kept unreduced so every step has length exactly ``d``;
reduction modulo 2*pi happens inside cost evaluation only.
"""

from __future__ import annotations

import csv
import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * math.pi

DEFAULT_STEP_SIZE = 0.1
DEFAULT_SAMPLE_MULTIPLIER = 50


class WalkError(RuntimeError):
    """Cost evaluation failed at a given walk step."""

    def __init__(self, step: int, cause: BaseException):
        super().__init__(f"cost evaluation failed at walk step {step}: {cause}")
        self.step = step
        self.__cause__ = cause


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based (Philox) generator for ``seed`` and a tuple of stream keys."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(master_seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for ``(master_seed, *keys)``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class CostFunction(ABC):
    """Deterministic scalar cost on the torus [0, 2*pi)^m.

    Subclasses implement :meth:`_evaluate` on reduced coordinates, and may
    override :meth:`_evaluate_batch` with a vectorized version. Implementations
    must not keep mutable state between calls, so one instance can be
    evaluated from several workers.
    """

    #: whether coordinates are reduced modulo 2*pi before evaluation
    periodic: bool = True

    def __init__(self, dimension: int, cost_id: str = ""):
        if dimension < 1:
            raise ValueError(f"dimension must be positive, got {dimension}")
        self.dimension = int(dimension)
        self.cost_id = cost_id or type(self).__name__

    @abstractmethod
    def _evaluate(self, theta: np.ndarray) -> float: ...

    def _evaluate_batch(self, thetas: np.ndarray) -> np.ndarray:
        return np.array([self._evaluate(t) for t in thetas], dtype=float)

    def _prepare(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.dimension:
            raise ValueError(f"expected {self.dimension} parameters, got {theta.shape[-1]}")
        return np.mod(theta, TWO_PI) if self.periodic else theta

    def evaluate(self, theta) -> float:
        return float(self._evaluate(self._prepare(theta)))

    def evaluate_batch(self, thetas) -> np.ndarray:
        thetas = np.atleast_2d(thetas)
        return np.asarray(self._evaluate_batch(self._prepare(thetas)), dtype=float)

    __call__ = evaluate


class AnalyticLandscape(CostFunction):
    """Closed-form landscapes with exact gradients, used as validation oracles.

    kinds: ``linear`` (g . theta, not periodic), ``cosine``
    (sum_k a_k cos theta_k) and ``constant``.
    """

    KINDS = ("linear", "cosine", "constant")

    def __init__(self, kind: str, coefficients, value: float = 0.0):
        if kind not in self.KINDS:
            raise ValueError(f"unknown landscape kind {kind!r}; expected one of {self.KINDS}")
        coef = np.asarray(coefficients, dtype=float).ravel()
        super().__init__(len(coef), cost_id=f"analytic-{kind}")
        self.kind = kind
        self.coefficients = coef
        self.value = float(value)
        # a linear function is not periodic; wrapping would add jumps of 2*pi*g_k
        self.periodic = kind != "linear"

    @classmethod
    def linear(cls, g) -> "AnalyticLandscape":
        return cls("linear", g)

    @classmethod
    def cosine(cls, a) -> "AnalyticLandscape":
        return cls("cosine", a)

    @classmethod
    def constant(cls, m: int, value: float = 0.0) -> "AnalyticLandscape":
        return cls("constant", np.zeros(m), value)

    def _evaluate(self, theta):
        return float(self._evaluate_batch(theta[None, :])[0])

    def _evaluate_batch(self, thetas):
        if self.kind == "linear":
            return thetas @ self.coefficients
        if self.kind == "cosine":
            return np.cos(thetas) @ self.coefficients
        return np.full(len(thetas), self.value)

    def exact_gradient(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind == "linear":
            return self.coefficients.copy()
        if self.kind == "cosine":
            return -self.coefficients * np.sin(theta)
        return np.zeros(self.dimension)

    @property
    def exact_average_sq_norm(self) -> float:
        """E ||grad C||^2 under the uniform distribution on the torus."""
        if self.kind == "linear":
            return float(self.coefficients @ self.coefficients)
        if self.kind == "cosine":
            return float(self.coefficients @ self.coefficients) / 2.0
        return 0.0


def lhs_sample(m: int, M: int, seed: int) -> np.ndarray:
    """Latin hypercube sample of ``M`` points in [0, 2*pi)^m, shape ``(M, m)``.

    Each axis is cut into ``M`` equal bins holding exactly one point.
    """
    if m < 1:
        raise ValueError(f"dimension must be >= 1, got {m}")
    if M < 2:
        raise ValueError(f"sample count must be >= 2, got {M}")
    rng = make_rng(seed)
    bins = np.stack([rng.permutation(M) for _ in range(m)], axis=1)
    u = rng.random((M, m))
    return (bins + u) * (TWO_PI / M)


def isotropic_directions(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` unit vectors uniform on the sphere S^(m-1): normalized Gaussians."""
    x = rng.standard_normal((count, m))
    norms = np.linalg.norm(x, axis=1)
    bad = norms == 0.0
    while bad.any():  # measure-zero, but keep the contract
        x[bad] = rng.standard_normal((int(bad.sum()), m))
        norms = np.linalg.norm(x, axis=1)
        bad = norms == 0.0
    return x / norms[:, None]


def isotropic_direction(m: int, rng: np.random.Generator) -> np.ndarray:
    if m < 1:
        raise ValueError(f"dimension must be >= 1, got {m}")
    return isotropic_directions(m, 1, rng)[0]


@dataclass
class WalkConfig:
    step_size: float = DEFAULT_STEP_SIZE
    num_steps: int = 100
    seed: int = 0
    start: np.ndarray | None = None

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError(f"step size must be positive, got {self.step_size}")
        if self.num_steps < 2:
            raise ValueError(f"a walk needs at least 2 steps, got {self.num_steps}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @classmethod
    def for_dimension(cls, m: int, step_size: float = DEFAULT_STEP_SIZE,
                      multiplier: int = DEFAULT_SAMPLE_MULTIPLIER, seed: int = 0,
                      start=None) -> "WalkConfig":
        """Default walk length: ``S = M - 2`` with ``M = multiplier * m``, so ``S + 1 < M``."""
        return cls(step_size, max(2, multiplier * m - 2), seed, start)


@dataclass
class WalkRecord:
    points: np.ndarray  # (S+1, m), unreduced
    costs: np.ndarray  # (S+1,)
    deltas: np.ndarray  # (S,)
    step_norms: np.ndarray  # (S,)
    seed: int = 0
    step_size: float = float("nan")
    cost_id: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def num_steps(self) -> int:
        return len(self.deltas)


def _evaluate_points(cost: CostFunction, points: np.ndarray) -> np.ndarray:
    try:
        return cost.evaluate_batch(points)
    except Exception:
        pass
    costs = np.empty(len(points))
    for i, p in enumerate(points):
        try:
            costs[i] = cost.evaluate(p)
        except Exception as exc:
            raise WalkError(i, exc) from exc
    return costs


def walk_from_points(cost: CostFunction, points: np.ndarray, **meta) -> WalkRecord:
    """Evaluate ``cost`` along an ordered sequence of points and form the deltas."""
    points = np.asarray(points, dtype=float)
    costs = _evaluate_points(cost, points)
    step_norms = np.linalg.norm(np.diff(points, axis=0), axis=1)
    deltas = np.diff(costs) / step_norms
    return WalkRecord(points, costs, deltas, step_norms, cost_id=cost.cost_id, **meta)


def random_walk(cost: CostFunction, config: WalkConfig) -> WalkRecord:
    """Isotropic fixed-step walk: ``theta_{i+1} = theta_i + d * delta_i``."""
    m = cost.dimension
    rng = make_rng(config.seed)
    if config.start is None:
        start = rng.uniform(0.0, TWO_PI, m)
    else:
        start = np.asarray(config.start, dtype=float)
        if start.shape != (m,):
            raise ValueError(f"start point must have {m} coordinates")
    steps = config.step_size * isotropic_directions(m, config.num_steps, rng)
    points = np.empty((config.num_steps + 1, m))
    points[0] = start
    np.cumsum(steps, axis=0, out=points[1:])
    points[1:] += start
    return walk_from_points(cost, points, seed=int(config.seed), step_size=float(config.step_size))


def walk_over_sample(cost: CostFunction, sample: np.ndarray, seed: int = 0) -> WalkRecord:
    """Nearest-neighbour tour through a fixed sample (e.g. an LHS design).

    Starts at a random sample point and repeatedly moves to the closest
    unvisited one. Steps are neither isotropic nor of fixed length, so the
    bounds do not strictly apply; useful as a landscape statistic.
    """
    sample = np.asarray(sample, dtype=float)
    n = len(sample)
    if n < 3:
        raise ValueError("need at least three sample points for a walk")
    rng = make_rng(seed)
    order = [int(rng.integers(n))]
    visited = np.zeros(n, dtype=bool)
    visited[order[0]] = True
    for _ in range(n - 1):
        dist = np.linalg.norm(sample - sample[order[-1]], axis=1)
        dist[visited] = np.inf
        nxt = int(np.argmin(dist))
        visited[nxt] = True
        order.append(nxt)
    return walk_from_points(cost, sample[order], seed=int(seed))


def finite_difference_gradient(cost: CostFunction, theta, h: float = 1e-5) -> np.ndarray:
    """Central differences ``(C(theta + h e_k) - C(theta - h e_k)) / 2h``."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    theta = np.asarray(theta, dtype=float)
    m = len(theta)
    shifts = np.eye(m) * h
    plus = cost.evaluate_batch(theta + shifts)
    minus = cost.evaluate_batch(theta - shifts)
    return (plus - minus) / (2.0 * h)


# --- walk dataset files ---------------------------------------------------

WALK_HEADER = ["rep", "step", "cost", "step_norm"]


def write_walk_csv(records: list[WalkRecord], path, theta_path=None, reps=None) -> None:
    """Rows ``rep,step,cost,step_norm``; step 0 is the start (step_norm 0)."""
    reps = list(range(len(records))) if reps is None else list(reps)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(WALK_HEADER)
        for rep, rec in zip(reps, records):
            norms = np.concatenate(([0.0], rec.step_norms))
            for step, (c, sn) in enumerate(zip(rec.costs, norms)):
                w.writerow([rep, step, repr(float(c)), repr(float(sn))])
    if theta_path is not None:
        with open(theta_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            m = records[0].dimension
            w.writerow(["rep", "step"] + [f"theta_{k}" for k in range(m)])
            for rep, rec in zip(reps, records):
                for step, p in enumerate(rec.points):
                    w.writerow([rep, step] + [repr(float(v)) for v in p])


def write_manifest(path, *, m: int, d: float, S: int, seed: int, cost_id: str, **extra) -> None:
    data = {"m": m, "d": d, "S": S, "seed": seed, "cost_id": cost_id, **extra}
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


class WalkFileError(ValueError):
    def __init__(self, path, line: int, msg: str):
        super().__init__(f"{path}:{line}: {msg}")
        self.path = str(path)
        self.line = line


def read_walk_csv(path) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Parse a walk CSV into ``{rep: (costs, step_norms)}`` (step_norms include step 0)."""
    rows: dict[int, list[tuple[int, float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != WALK_HEADER:
            raise WalkFileError(path, 1, f"expected header {','.join(WALK_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise WalkFileError(path, lineno, f"expected 4 fields, got {len(row)}")
            try:
                rep, step = int(row[0]), int(row[1])
                cost, norm = float(row[2]), float(row[3])
            except ValueError as exc:
                raise WalkFileError(path, lineno, str(exc)) from None
            rows.setdefault(rep, []).append((step, cost, norm))
    out = {}
    for rep, items in rows.items():
        items.sort()
        steps = [s for s, _, _ in items]
        if steps != list(range(len(steps))):
            raise WalkFileError(path, 0, f"rep {rep}: steps are not contiguous from 0")
        out[rep] = (np.array([c for _, c, _ in items]), np.array([n for _, _, n in items]))
    return out


def deltas_from_columns(costs: np.ndarray, step_norms: np.ndarray) -> np.ndarray:
    return np.diff(costs) / step_norms[1:]
