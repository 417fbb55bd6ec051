"""Moment algebra of the porosity-controlled (homogenized) Maxwellian.

The equilibrium is an isotropic Gaussian in velocity space centred on the
damped velocity ``varpi * u`` with variance ``1/(3 eps^2)`` per component::

    M(v) = n eps^d / (2 pi / 3)^(d/2) * exp(-3/2 |v eps - varpi u eps|^2)

Writing ``w = v - varpi u`` (zero-mean Gaussian), ``beta = 1 - varpi`` and
``c = v - u = w - beta u``, every moment below is an exact Gaussian
expectation.  Tensor index conventions: ``grad_u[a, b] = d u_b / d x_a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _vec(u) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    if arr.ndim != 1:
        raise ValueError("velocity must be a vector")
    return arr


@dataclass(frozen=True)
class HomogenizedMaxwellian:
    n: float
    u: np.ndarray
    varpi: float
    eps: float
    m: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "u", _vec(self.u))
        if not self.n > 0:
            raise ValueError("particle density n must be positive")
        if not self.eps > 0:
            raise ValueError("scaling parameter eps must be positive")
        if not self.m > 0:
            raise ValueError("particle mass m must be positive")
        if not 0.0 <= self.varpi <= 1.0:
            raise ValueError(f"porosity control varpi = {self.varpi} outside [0, 1]")

    @property
    def d(self) -> int:
        return self.u.shape[0]

    @property
    def rho(self) -> float:
        return self.m * self.n

    @property
    def variance(self) -> float:
        return 1.0 / (3.0 * self.eps**2)

    @property
    def beta(self) -> float:
        return 1.0 - self.varpi

    @property
    def mean(self) -> np.ndarray:
        return self.varpi * self.u

    @property
    def pressure(self) -> float:
        return self.rho * self.variance


@dataclass(frozen=True)
class MomentSet:
    rho: float
    u: np.ndarray
    P: np.ndarray
    p: float


@dataclass(frozen=True)
class FieldGradients:
    """Local flow derivatives; anything left out is zero."""

    d: int
    grad_u: np.ndarray = None
    dt_u: np.ndarray = None
    grad_rho: np.ndarray = None
    F: np.ndarray = None

    def __post_init__(self):
        d = self.d
        for name, shape in (("grad_u", (d, d)), ("dt_u", (d,)), ("grad_rho", (d,)), ("F", (d,))):
            val = getattr(self, name)
            arr = np.zeros(shape) if val is None else np.asarray(val, dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            object.__setattr__(self, name, arr)


def maxwellian_eval(M: HomogenizedMaxwellian, v) -> np.ndarray:
    """Equilibrium density at velocities ``v`` (shape ``(..., d)``)."""
    v = np.asarray(v, dtype=float)
    d = M.d
    if v.shape[-1] != d:
        raise ValueError(f"velocity has {v.shape[-1]} components, Maxwellian is {d}-dimensional")
    peak = M.n * M.eps**d / (2.0 * math.pi / 3.0) ** (d / 2.0)
    diff = (v - M.mean) * M.eps
    return peak * np.exp(-1.5 * np.sum(diff * diff, axis=-1))


def equilibrium_moments(M: HomogenizedMaxwellian):
    """``(rho, u_eq, p)``; the mean velocity carries the ``varpi`` factor."""
    return M.rho, M.mean.copy(), M.pressure


def central_moment2(M: HomogenizedMaxwellian) -> np.ndarray:
    """``m int c_i c_j M dv = rho [delta_ij / (3 eps^2) + (1 - varpi)^2 u_i u_j]``."""
    I = np.eye(M.d)
    return M.rho * (M.variance * I + M.beta**2 * np.outer(M.u, M.u))


def central_moment3(M: HomogenizedMaxwellian) -> np.ndarray:
    """``m int c_i c_j c_k M dv``.

    ``-rho beta s^2 (u_i d_jk + u_j d_ik + u_k d_ij) - rho beta^3 u_i u_j u_k``
    with ``s^2 = 1/(3 eps^2)``.
    """
    u, I = M.u, np.eye(M.d)
    s2, b = M.variance, M.beta
    sym = (
        np.einsum("i,jk->ijk", u, I)
        + np.einsum("j,ik->ijk", u, I)
        + np.einsum("k,ij->ijk", u, I)
    )
    return M.rho * (-b * s2 * sym - b**3 * np.einsum("i,j,k->ijk", u, u, u))


def moment_ccw(M: HomogenizedMaxwellian) -> np.ndarray:
    """``m int c_i c_j (v - varpi u)_k M dv = -rho beta s^2 (u_i d_jk + u_j d_ik)``."""
    u, I = M.u, np.eye(M.d)
    sym = np.einsum("i,jk->ijk", u, I) + np.einsum("j,ik->ijk", u, I)
    return -M.rho * M.beta * M.variance * sym


def mixed_moment_ccwv(M: HomogenizedMaxwellian) -> np.ndarray:
    """``m int c_i c_j (v - varpi u)_k v_l M dv`` as a ``(d, d, d, d)`` array.

    ``rho [ s^4 (d_ij d_kl + d_ik d_jl + d_il d_jk) + beta^2 s^2 u_i u_j d_kl
    - beta varpi s^2 (u_i u_l d_jk + u_j u_l d_ik) ]``
    """
    u, I = M.u, np.eye(M.d)
    s2, b, vp = M.variance, M.beta, M.varpi
    iso = (
        np.einsum("ij,kl->ijkl", I, I)
        + np.einsum("ik,jl->ijkl", I, I)
        + np.einsum("il,jk->ijkl", I, I)
    )
    uu = np.outer(u, u)
    drift = np.einsum("ij,kl->ijkl", uu, I)
    cross = np.einsum("il,jk->ijkl", uu, I) + np.einsum("jl,ik->ijkl", uu, I)
    return M.rho * (s2 * s2 * iso + b * b * s2 * drift - b * vp * s2 * cross)


def _ansatz_terms(M: HomogenizedMaxwellian, grads: FieldGradients, v: np.ndarray):
    """Per-velocity terms ``(a, b, c, d, e)`` of the material derivative of ``M``.

    ``D M / Dt = (-a + b + c + d - e) M``; the last sign comes from the
    force term ``(F/m) . grad_v M = -3 eps^2 (v - varpi u) . F / m  M``.
    """
    e2 = M.eps**2
    c = v - M.u
    cw = v - M.mean
    a = np.trace(grads.grad_u)
    b = c @ grads.grad_rho / M.rho
    cf = 3.0 * e2 * M.varpi * (cw @ grads.dt_u)
    # (v . grad) u_k = v_l grad_u[l, k]
    df = 3.0 * e2 * M.varpi * np.einsum("...k,...l,lk->...", cw, v, grads.grad_u)
    ef = 3.0 * e2 * (cw @ grads.F) / M.m
    return a, b, cf, df, ef


def material_derivative_factor(M: HomogenizedMaxwellian, grads: FieldGradients, v) -> np.ndarray:
    """``(D M / Dt) / M`` at velocities ``v`` under mass conservation."""
    v = np.asarray(v, dtype=float)
    a, b, cf, df, ef = _ansatz_terms(M, grads, v)
    return -a + b + cf + df - ef


def chapman_enskog_population(M: HomogenizedMaxwellian, grads: FieldGradients, nu: float, v) -> np.ndarray:
    """First-order ansatz ``f = M - 3 eps^2 nu D M / Dt``."""
    v = np.asarray(v, dtype=float)
    factor = material_derivative_factor(M, grads, v)
    return maxwellian_eval(M, v) * (1.0 - 3.0 * M.eps**2 * nu * factor)


#: remainder exponent of the first-order stress when ``1 - varpi = O(eps^2)``
STRESS_REMAINDER_ORDER = 2


def chapman_enskog_stress(rho, u, grads: FieldGradients, nu: float, eps_param: float, varpi: float, m: float = 1.0):
    """Stress ``m int c c f dv`` of the first-order ansatz, from exact moments.

    Returns ``(P, 2)``; ``P`` differs from the Newtonian
    ``p I - nu rho (grad u + grad u^T)`` by ``O(eps^2)`` when
    ``1 - varpi = O(eps^2)``, and equals it exactly for ``varpi = 1`` and
    vanishing density gradient.
    """
    M = HomogenizedMaxwellian(n=rho / m, u=u, varpi=varpi, eps=eps_param, m=m)
    e2 = eps_param**2
    T2 = central_moment2(M)
    T3 = central_moment3(M)
    Tw = moment_ccw(M)
    T4 = mixed_moment_ccwv(M)
    g = grads
    a_part = T2 * np.trace(g.grad_u)
    b_part = T3 @ g.grad_rho / M.rho
    c_part = 3.0 * e2 * varpi * (Tw @ g.dt_u)
    d_part = 3.0 * e2 * varpi * np.einsum("ijkl,lk->ij", T4, g.grad_u)
    e_part = 3.0 * e2 * (Tw @ g.F) / m
    P = T2 - 3.0 * e2 * nu * (-a_part + b_part + c_part + d_part - e_part)
    P = 0.5 * (P + P.T)
    return P, STRESS_REMAINDER_ORDER


def newtonian_stress(rho, grad_u, nu: float, eps_param: float) -> np.ndarray:
    """``p I - nu rho (grad u + grad u^T)`` with ``p = rho / (3 eps^2)``."""
    grad_u = np.asarray(grad_u, dtype=float)
    d = grad_u.shape[0]
    return rho / (3.0 * eps_param**2) * np.eye(d) - nu * rho * (grad_u + grad_u.T)


def moment_set(P: np.ndarray, rho: float, u) -> MomentSet:
    P = np.asarray(P, dtype=float)
    return MomentSet(rho=rho, u=_vec(u), P=P, p=float(np.trace(P)) / P.shape[0])


def momentum_balance_rhs(rho, u, nu: float, K: float) -> np.ndarray:
    """Permeability sink ``-nu rho u / K``; zero for ``K = inf``."""
    u = _vec(u)
    if not K > 0:
        raise ValueError("permeability K must be positive")
    if math.isinf(K):
        return np.zeros_like(u)
    return -nu * rho * u / K


def relaxation_sink(rho, u, tau: float, varpi: float) -> np.ndarray:
    """Collision form of the same sink, ``-(rho u - varpi rho u) / tau``."""
    u = _vec(u)
    return -(rho * u - varpi * rho * u) / tau
