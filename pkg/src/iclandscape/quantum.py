"""Statevector simulation of an alternating layered RY/CZ ansatz.

Conventions:

* qubit 0 is the most significant bit of the amplitude index (the order of
  ``np.kron(q0, q1, ...)``);
* parameter ``l * n + q`` drives the RY rotation on qubit ``q`` in layer ``l``;
* each layer applies ``RY(theta) = exp(-i theta Y/2)`` on every qubit, then CZ
  on pairs (0,1), (2,3), ... for even layers and (1,2), (3,4), ... for odd ones.

RY and CZ are real, so batched evaluation runs in float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .landscape import CostFunction

MAX_QUBITS = 16
OBSERVABLES = ("local", "global")
# amplitudes per evaluation chunk; small enough to stay cache-resident
_CHUNK_AMPLITUDES = 1 << 16


@dataclass(frozen=True)
class AnsatzSpec:
    qubits: int
    layers: int

    def __post_init__(self):
        if not 2 <= self.qubits <= MAX_QUBITS:
            raise ValueError(f"qubits must lie in [2, {MAX_QUBITS}], got {self.qubits}")
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")

    @property
    def num_params(self) -> int:
        return self.qubits * self.layers

    def entangler_pairs(self, layer: int) -> list[tuple[int, int]]:
        first = layer % 2
        return [(q, q + 1) for q in range(first, self.qubits - 1, 2)]

    def cz_signs(self, layer: int) -> np.ndarray:
        """Diagonal of the layer's CZ product as a +-1 vector over basis states."""
        n = self.qubits
        idx = np.arange(1 << n)
        signs = np.ones(1 << n)
        for a, b in self.entangler_pairs(layer):
            both = ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
            signs[both == 1] *= -1.0
        return signs

    def to_dict(self) -> dict:
        return {"qubits": self.qubits, "layers": self.layers}


@dataclass(frozen=True)
class ObservableSpec:
    kind: str
    qubits: int

    def __post_init__(self):
        if self.kind not in OBSERVABLES:
            raise ValueError(f"observable must be one of {OBSERVABLES}, got {self.kind!r}")


def zero_state(n: int, batch: int | None = None, dtype=np.complex128) -> np.ndarray:
    shape = (1 << n,) if batch is None else (batch, 1 << n)
    psi = np.zeros(shape, dtype=dtype)
    psi[..., 0] = 1.0
    return psi


def apply_ry(psi: np.ndarray, theta, qubit: int, n: int) -> np.ndarray:
    """RY on ``qubit`` for a state ``(2^n,)`` or a batch ``(B, 2^n)``; in place.

    ``theta`` is a scalar or one angle per batch row.
    """
    batch = psi.reshape(-1, 1 << qubit, 2, 1 << (n - 1 - qubit))
    half = np.asarray(theta, dtype=float).reshape(-1, 1, 1) / 2.0
    c, s = np.cos(half), np.sin(half)
    a0 = batch[:, :, 0, :].copy()
    a1 = batch[:, :, 1, :]
    batch[:, :, 0, :] = c * a0 - s * a1
    batch[:, :, 1, :] = s * a0 + c * a1
    return psi


def apply_cz(psi: np.ndarray, a: int, b: int, n: int) -> np.ndarray:
    """CZ between qubits ``a`` and ``b``; in place."""
    lo, hi = sorted((a, b))
    view = psi.reshape(-1, 1 << lo, 2, 1 << (hi - lo - 1), 2, 1 << (n - 1 - hi))
    view[:, :, 1, :, 1, :] *= -1
    return psi


def prepare_state(spec: AnsatzSpec, theta) -> np.ndarray:
    """``U(theta)|0...0>`` as a complex amplitude vector of length ``2^n``."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.num_params,):
        raise ValueError(f"expected {spec.num_params} parameters, got shape {theta.shape}")
    n = spec.qubits
    psi = zero_state(n)
    for layer in range(spec.layers):
        for q in range(n):
            apply_ry(psi, theta[layer * n + q], q, n)
        for a, b in spec.entangler_pairs(layer):
            apply_cz(psi, a, b, n)
    return psi


def _z_sum(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    ones = np.zeros(1 << n)
    for q in range(n):
        ones += (idx >> (n - 1 - q)) & 1
    # sum_i <Z_i> weight per basis state: (#zeros - #ones)
    return n - 2.0 * ones


def expectation(state: np.ndarray, obs: ObservableSpec) -> float:
    """``<psi|O|psi>`` for the local or global observable.

    local: ``(1/n) sum_i (1 - Z_i)``; global: ``|0...0><0...0|``.
    """
    probs = np.abs(state) ** 2
    if probs.shape[-1] != 1 << obs.qubits:
        raise ValueError("state size does not match observable qubit count")
    if obs.kind == "global":
        return float(probs[..., 0]) if probs.ndim == 1 else probs[..., 0]
    val = 1.0 - (probs @ _z_sum(obs.qubits)) / obs.qubits
    return float(val) if probs.ndim == 1 else val


class QuantumCost(CostFunction):
    """``C(theta) = <0|U(theta)^dag O U(theta)|0>`` for the layered ansatz."""

    def __init__(self, spec: AnsatzSpec, obs: ObservableSpec):
        if spec.qubits != obs.qubits:
            raise ValueError("ansatz and observable act on different qubit counts")
        super().__init__(spec.num_params, cost_id=f"quantum-n{spec.qubits}-L{spec.layers}-{obs.kind}")
        self.spec = spec
        self.obs = obs

    @cached_property
    def _layer_signs(self) -> list[np.ndarray]:
        return [self.spec.cz_signs(layer) for layer in range(self.spec.layers)]

    @cached_property
    def _readout(self) -> np.ndarray | None:
        return _z_sum(self.spec.qubits) if self.obs.kind == "local" else None

    def _evaluate(self, theta):
        return expectation(prepare_state(self.spec, theta), self.obs)

    def _evaluate_batch(self, thetas):
        n, layers = self.spec.qubits, self.spec.layers
        chunk = max(1, _CHUNK_AMPLITUDES >> n)
        out = np.empty(len(thetas))
        for start in range(0, len(thetas), chunk):
            block = thetas[start:start + chunk]
            psi = zero_state(n, len(block), dtype=np.float64)
            for layer in range(layers):
                for q in range(n):
                    apply_ry(psi, block[:, layer * n + q], q, n)
                psi *= self._layer_signs[layer]
            probs = psi * psi
            if self._readout is None:
                out[start:start + len(block)] = probs[:, 0]
            else:
                out[start:start + len(block)] = 1.0 - (probs @ self._readout) / n
        return out


def quantum_cost(spec: AnsatzSpec, obs: ObservableSpec | str) -> QuantumCost:
    if isinstance(obs, str):
        obs = ObservableSpec(obs, spec.qubits)
    return QuantumCost(spec, obs)


def parameter_shift_gradient(spec: AnsatzSpec, obs: ObservableSpec | str, theta) -> np.ndarray:
    """Exact gradient: ``[C(theta + pi/2 e_k) - C(theta - pi/2 e_k)] / 2``.

    Valid because every generator ``Y/2`` has eigenvalues +-1/2.
    """
    cost = quantum_cost(spec, obs)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.num_params,):
        raise ValueError(f"expected {spec.num_params} parameters, got shape {theta.shape}")
    shifts = np.eye(spec.num_params) * (math.pi / 2.0)
    vals = cost.evaluate_batch(np.concatenate([theta + shifts, theta - shifts]))
    m = spec.num_params
    return (vals[:m] - vals[m:]) / 2.0


def parameter_shift_gradients(cost: QuantumCost, thetas) -> np.ndarray:
    """Parameter-shift gradients at many points, shape ``(P, m)``."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    m = cost.dimension
    shifts = np.eye(m) * (math.pi / 2.0)
    plus = cost.evaluate_batch((thetas[:, None, :] + shifts).reshape(-1, m)).reshape(-1, m)
    minus = cost.evaluate_batch((thetas[:, None, :] - shifts).reshape(-1, m)).reshape(-1, m)
    return (plus - minus) / 2.0
