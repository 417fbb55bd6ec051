"""Gauss-Hermite velocity-space quadrature, used as an independent moment oracle.

Integrals are computed from point values of :func:`maxwellian_eval` only;
nothing here knows the closed-form moments.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from hlbm.kinetics import HomogenizedMaxwellian, maxwellian_eval

DEFAULT_NODES = 40


def _grid(M: HomogenizedMaxwellian, nodes: int):
    x, w = np.polynomial.hermite.hermgauss(nodes)
    d = M.d
    mesh = np.meshgrid(*([x] * d), indexing="ij")
    X = np.stack([g.ravel() for g in mesh], axis=-1)
    wmesh = np.meshgrid(*([w] * d), indexing="ij")
    Wt = np.prod(np.stack([g.ravel() for g in wmesh], axis=-1), axis=-1)
    scale = math.sqrt(2.0 * M.variance)
    v = M.mean + scale * X
    # undo the Hermite weight so the rule integrates the raw density
    Wt = Wt * np.exp(np.sum(X * X, axis=-1)) * scale**d
    return v, Wt


def integrate(M: HomogenizedMaxwellian, integrand: Callable[[np.ndarray], np.ndarray], nodes: int = DEFAULT_NODES) -> np.ndarray:
    """``m int integrand(v) M(v) dv``; ``integrand`` maps ``(N, d)`` to ``(N, ...)``."""
    v, Wt = _grid(M, nodes)
    vals = integrand(v)
    weights = M.m * Wt * maxwellian_eval(M, v)
    return np.tensordot(weights, vals, axes=(0, 0))


def integrate_density(M: HomogenizedMaxwellian, density: Callable[[np.ndarray], np.ndarray], nodes: int = DEFAULT_NODES) -> np.ndarray:
    """``int density(v) dv`` for a density that is a polynomial times ``M``."""
    v, Wt = _grid(M, nodes)
    return np.tensordot(Wt, density(v), axes=(0, 0))


def zeroth(M, nodes=DEFAULT_NODES) -> float:
    return float(integrate(M, lambda v: np.ones(len(v)), nodes)) / M.m


def first(M, nodes=DEFAULT_NODES) -> np.ndarray:
    return integrate(M, lambda v: v, nodes) / M.rho


def second_central(M, nodes=DEFAULT_NODES) -> np.ndarray:
    u = M.u
    return integrate(M, lambda v: np.einsum("ni,nj->nij", v - u, v - u), nodes)


def third_central(M, nodes=DEFAULT_NODES) -> np.ndarray:
    u = M.u
    return integrate(M, lambda v: np.einsum("ni,nj,nk->nijk", v - u, v - u, v - u), nodes)


def ccw(M, nodes=DEFAULT_NODES) -> np.ndarray:
    u, mu = M.u, M.mean
    return integrate(M, lambda v: np.einsum("ni,nj,nk->nijk", v - u, v - u, v - mu), nodes)


def ccwv(M, nodes=DEFAULT_NODES) -> np.ndarray:
    u, mu = M.u, M.mean
    return integrate(
        M, lambda v: np.einsum("ni,nj,nk,nl->nijkl", v - u, v - u, v - mu, v), nodes
    )
