"""Independent reference implementations used to check the fast paths.

None of these share code with the functions they check: the circuit oracle
multiplies dense ``2^n x 2^n`` matrices built with ``np.kron``, and the
incomplete beta oracle integrates the beta density with adaptive quadrature.
"""

from __future__ import annotations

import math
from functools import reduce

import numpy as np
from scipy import integrate

_I2 = np.eye(2)
_Z = np.diag([1.0, -1.0])
_P0 = np.diag([1.0, 0.0])
_P1 = np.diag([0.0, 1.0])


def _ry_matrix(theta: float) -> np.ndarray:
    return np.array(
        [[math.cos(theta / 2), -math.sin(theta / 2)], [math.sin(theta / 2), math.cos(theta / 2)]],
        dtype=complex,
    )


def _kron_all(ops) -> np.ndarray:
    return reduce(np.kron, ops)


def dense_unitary(n: int, layers: int, theta) -> np.ndarray:
    """Full circuit unitary, qubit 0 leftmost in the Kronecker product."""
    if n > 8:
        raise ValueError("dense oracle is only meant for small circuits")
    theta = np.asarray(theta, dtype=float)
    U = np.eye(1 << n, dtype=complex)
    for layer in range(layers):
        rot = _kron_all([_ry_matrix(theta[layer * n + q]) for q in range(n)])
        ent = np.eye(1 << n, dtype=complex)
        for a in range(layer % 2, n - 1, 2):
            # CZ = |0><0| x I + |1><1| x Z on qubits (a, a+1)
            ops0 = [_I2] * n
            ops0[a] = _P0
            ops1 = [_I2] * n
            ops1[a] = _P1
            ops1[a + 1] = _Z
            ent = (_kron_all(ops0) + _kron_all(ops1)) @ ent
        U = ent @ rot @ U
    return U


def dense_observable(n: int, kind: str) -> np.ndarray:
    if kind == "global":
        return _kron_all([_P0] * n)
    total = np.zeros((1 << n, 1 << n))
    for i in range(n):
        ops = [_I2] * n
        ops[i] = _Z
        total += np.eye(1 << n) - _kron_all(ops)
    return total / n


def dense_cost(n: int, layers: int, kind: str, theta) -> float:
    psi0 = np.zeros(1 << n, dtype=complex)
    psi0[0] = 1.0
    psi = dense_unitary(n, layers, theta) @ psi0
    return float(np.real(np.conj(psi) @ dense_observable(n, kind) @ psi))


def quad_incomplete_beta(x: float, a: float, b: float) -> float:
    """``I(x; a, b)`` by adaptive quadrature of the beta density.

    Substituting ``t = u^2`` removes the ``t^(a-1)`` endpoint singularity for
    ``a < 1``; the normalization uses ``math.lgamma``.
    """
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    if x > 0.5:
        # integrate the other tail so the (1-t)^(b-1) end is also substituted
        return 1.0 - quad_incomplete_beta(1.0 - x, b, a)
    log_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)

    def integrand(u):
        if u == 0.0:
            return 2.0 * math.exp(log_norm) if a == 0.5 else 0.0
        return 2.0 * math.exp(log_norm + (2 * a - 1) * math.log(u) + (b - 1) * math.log1p(-u * u))

    val, _ = integrate.quad(integrand, 0.0, math.sqrt(x), epsabs=1e-15, epsrel=1e-13, limit=500)
    return val


def ks_distance(sample, cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance between a sample and a CDF.

    ``cdf`` maps a sorted array to CDF values.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
