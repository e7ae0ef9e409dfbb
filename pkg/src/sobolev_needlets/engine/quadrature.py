from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

from .errors import QuadratureConvergenceError, QuadratureError
from .models import CubatureRule


NEWTON_TOL = 1e-14
NEWTON_MAX_ITER = 100


def _legendre_with_derivative(n: int, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    if n == 0:
        return p_prev, np.zeros_like(x)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=None)
def _gauss_legendre_cached(npoints: int) -> Tuple[np.ndarray, np.ndarray]:
    i = np.arange(npoints)
    x = np.cos(math.pi * (i + 0.75) / (npoints + 0.5))

    for _ in range(NEWTON_MAX_ITER):
        p, dp = _legendre_with_derivative(npoints, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < NEWTON_TOL:
            break
    else:
        raise QuadratureConvergenceError(
            f"Gauss-Legendre root finding did not converge for n={npoints} "
            f"after {NEWTON_MAX_ITER} iterations"
        )

    _, dp = _legendre_with_derivative(npoints, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    nodes, weights = x[order], w[order]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(npoints: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes (ascending) and weights on [-1, 1].

    Exact for polynomials of degree <= 2 n - 1. Roots by Newton iteration on P_n
    from the guesses cos(pi (i + 3/4) / (n + 1/2)).
    """
    if npoints < 1:
        raise QuadratureError(f"npoints must be >= 1; got {npoints}")
    nodes, weights = _gauss_legendre_cached(int(npoints))
    return nodes.copy(), weights.copy()


@lru_cache(maxsize=64)
def sphere_cubature(degree: int) -> CubatureRule:
    """
    Product rule exact for spherical polynomials of degree <= `degree`:

        ceil((D + 1) / 2) Gauss-Legendre nodes in cos(colatitude)
        x (D + 1) equispaced longitudes 2 pi i / (D + 1)

        lambda = w_GL * 2 pi / (D + 1)

    Rules are immutable and cached per degree.
    """
    if degree < 0:
        raise QuadratureError(f"degree must be >= 0; got {degree}")
    n_lat = (degree + 2) // 2
    n_lon = degree + 1

    z, w = gauss_legendre(n_lat)
    phi = 2.0 * math.pi * np.arange(n_lon) / n_lon
    s = np.sqrt(1.0 - z * z)

    nodes = np.empty((n_lat, n_lon, 3))
    nodes[..., 0] = s[:, None] * np.cos(phi)[None, :]
    nodes[..., 1] = s[:, None] * np.sin(phi)[None, :]
    nodes[..., 2] = z[:, None]
    weights = np.repeat(w * (2.0 * math.pi / n_lon), n_lon)

    return CubatureRule(exactness_degree=int(degree), nodes=nodes.reshape(-1, 3), weights=weights)


def integrate(rule: CubatureRule, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """sum_k lambda_k f(xi_k); f receives the (K, 3) node array."""
    values = np.asarray(f(rule.nodes), dtype=float).reshape(-1)
    if values.size != rule.size:
        raise QuadratureError(f"integrand returned {values.size} values for {rule.size} nodes")
    if not np.all(np.isfinite(values)):
        raise QuadratureError("integrand is not finite at every cubature node")
    return float(rule.weights @ values)
