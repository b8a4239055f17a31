"""Self-check suites behind ``iclandscape validate``.

Each suite returns a SuiteResult holding the measured statistics next to the
threshold they are judged against.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds import MIC_THRESHOLD, gaussian_phi, mic_balance, phi_m, phi_m_inverse, solve_q
from .experiment import ICSettings, analyze_deltas
from .landscape import AnalyticLandscape, WalkConfig, derive_seed, finite_difference_gradient, random_walk
from .oracles import dense_cost, ks_distance, quad_incomplete_beta
from .quantum import AnsatzSpec, parameter_shift_gradient, quantum_cost
from .special import reg_incomplete_beta, reg_incomplete_beta_array


@dataclass
class SuiteResult:
    name: str
    passed: bool
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _timed(fn):
    def run(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        res.passed = bool(res.passed)
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def ks_suite(dims=(3, 10, 50), steps: int = 100_000, seed: int = 0, tol: float = 0.01) -> SuiteResult:
    """Squared normalized differences on a linear landscape vs Beta(1/2, (m-1)/2)."""
    distances = {}
    for m in dims:
        g = np.random.default_rng(derive_seed(seed, m)).standard_normal(m)
        cost = AnalyticLandscape.linear(g)
        rec = random_walk(cost, WalkConfig(0.1, steps, derive_seed(seed, m, 1)))
        u = (rec.deltas / np.linalg.norm(g)) ** 2
        a, b = 0.5, 0.5 * (m - 1)
        distances[m] = ks_distance(u, lambda x: reg_incomplete_beta_array(np.clip(x, 0.0, 1.0), a, b))
    passed = all(d < tol for d in distances.values())
    return SuiteResult("walk-law-ks", passed, {"ks_distance": distances, "tolerance": tol, "steps": steps})


def beta_oracle_grid():
    """(x, a, b) triples covering the shapes used by the bounds, 100+ points."""
    shapes = [(0.5, 0.5 * (m - 1)) for m in (2, 3, 5, 10, 20, 50, 100, 200, 500, 1000)]
    shapes += [(1.0, 1.0), (2.0, 3.0), (7.5, 0.5), (0.3, 0.3)]
    xs = [1e-4, 0.003, 0.02, 0.07, 0.15, 0.3, 0.45, 0.5, 0.6, 0.75, 0.9, 0.99, 0.9999]
    return [(x, a, b) for a, b in shapes for x in xs]


@_timed
def special_suite(beta_tol: float = 1e-10, inverse_tol: float = 1e-9, q_tol: float = 1e-12) -> SuiteResult:
    """Incomplete beta vs quadrature, Phi_m round trips and the H_M -> q solve."""
    grid = beta_oracle_grid()
    beta_err = max(abs(reg_incomplete_beta(x, a, b) - quad_incomplete_beta(x, a, b)) for x, a, b in grid)
    inv_err = 0.0
    for m in (2, 3, 10, 100, 1000):
        for p in np.linspace(0.005, 0.995, 100):
            inv_err = max(inv_err, abs(phi_m(phi_m_inverse(p, m), m) - p))
    q_resid = 0.0
    for H in np.linspace(MIC_THRESHOLD + 1e-4, 1.0 - 1e-6, 200):
        q_resid = max(q_resid, abs(mic_balance(solve_q(H)) - H))
    q_at_one = abs(solve_q(1.0) - 1.0 / 6.0)
    stats = {
        "beta_grid_points": len(grid),
        "beta_max_abs_error": beta_err,
        "phi_inverse_max_error": inv_err,
        "solve_q_max_residual": q_resid,
        "solve_q_at_one_error": q_at_one,
    }
    passed = beta_err < beta_tol and inv_err < inverse_tol and q_resid < q_tol and q_at_one < q_tol
    return SuiteResult("special-functions", passed, stats)


def containment_coefficients(m: int = 20) -> np.ndarray:
    return np.linspace(0.5, 1.5, m)


@_timed
def containment_suite(runs: int = 50, m: int = 20, eta: float = 0.05, seed: int = 0,
                      mic_rate: float = 0.90, sic_rate: float = 0.95) -> SuiteResult:
    """How often the MIC interval and the SIC bound hold on a separable cosine landscape."""
    cost = AnalyticLandscape.cosine(containment_coefficients(m))
    true_norm = math.sqrt(cost.exact_average_sq_norm)
    settings = ICSettings(eta=eta)
    mic_hits = sic_hits = applicable = 0
    for run in range(runs):
        rec = random_walk(cost, WalkConfig.for_dimension(m, seed=derive_seed(seed, run)))
        _, b = analyze_deltas(rec.deltas, m, settings)
        if b.applicable_mic:
            applicable += 1
            mic_hits += b.lower_mic <= true_norm <= b.upper_mic
        sic_hits += true_norm <= b.upper_sic
    stats = {
        "runs": runs,
        "true_norm": true_norm,
        "mic_applicable": applicable,
        # an inapplicable MIC interval counts as a miss
        "mic_containment_rate": mic_hits / runs,
        "sic_bound_rate": sic_hits / runs,
    }
    passed = stats["mic_containment_rate"] >= mic_rate and stats["sic_bound_rate"] >= sic_rate
    return SuiteResult("bound-containment", passed, stats)


def gaussian_sup_distance(m: int, points: int = 4001) -> float:
    ts = np.linspace(-1.0, 1.0, points)
    return max(abs(phi_m(t, m) - gaussian_phi(t, m)) for t in ts)


@_timed
def gaussian_suite(dims=(10, 100, 1000), tol: float = 0.01) -> SuiteResult:
    dist = {m: gaussian_sup_distance(m) for m in dims}
    vals = [dist[m] for m in dims]
    decreasing = all(b < a for a, b in zip(vals, vals[1:]))
    return SuiteResult("gaussian-limit", decreasing and dist[max(dims)] < tol,
                       {"sup_distance": dist, "decreasing": decreasing, "tolerance": tol})


@_timed
def simulator_suite(max_qubits: int = 6, max_layers: int = 3, samples: int = 20, seed: int = 0,
                    cost_tol: float = 1e-10, grad_tol: float = 1e-6) -> SuiteResult:
    """Statevector vs dense matrices, and parameter shift vs finite differences."""
    rng = np.random.default_rng(seed)
    cost_err = grad_err = 0.0
    for n in range(2, max_qubits + 1):
        for L in range(1, max_layers + 1):
            spec = AnsatzSpec(n, L)
            for kind in ("local", "global"):
                cost = quantum_cost(spec, kind)
                thetas = rng.uniform(0.0, 2 * math.pi, size=(samples, spec.num_params))
                batch = cost.evaluate_batch(thetas)
                for theta, fast in zip(thetas, batch):
                    ref = dense_cost(n, L, kind, theta)
                    cost_err = max(cost_err, abs(fast - ref), abs(cost.evaluate(theta) - ref))
                for theta in thetas:
                    ps = parameter_shift_gradient(spec, kind, theta)
                    fd = finite_difference_gradient(cost, theta, 1e-5)
                    grad_err = max(grad_err, float(np.max(np.abs(ps - fd))))
    stats = {"cost_max_abs_error": cost_err, "gradient_max_abs_error": grad_err}
    return SuiteResult("simulator-oracle", cost_err < cost_tol and grad_err < grad_tol, stats)


SUITES = {
    "special": special_suite,
    "gaussian": gaussian_suite,
    "simulator": simulator_suite,
    "ks": ks_suite,
    "containment": containment_suite,
}


def run_suites(names=None) -> list[SuiteResult]:
    names = list(SUITES) if not names else names
    return [SUITES[name]() for name in names]
