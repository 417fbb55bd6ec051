"""Permeability tensor of a periodic unit cell with a centred disk.

For each axis ``k`` the Stokes cell problem ``grad p_k - lap v_k = e_k``
(periodic, no-slip on the disk) is solved by driving the lattice solver
with a small uniform body force to steady state.  Lattice fields map to
the unit cell by

    v = u_lb * nu_lb / (g N^2),      p = p_lb / (g N)

with ``g`` the lattice force and ``N`` cells per unit length.  The tensor
is assembled twice: from the mean velocity ``A_jk = <(v_k)_j>`` (reported)
and from the Dirichlet form ``A_jk = int grad v_k : grad v_j`` (cross-check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from hlbm.lattice import Simulation, SimulationConfig


class CellProblemError(ValueError):
    """Degenerate or unsupported cell geometry."""


class NotConvergedError(RuntimeError):
    def __init__(self, steps: int, residuals: list[float]):
        self.steps = steps
        self.residuals = residuals
        tail = ", ".join(f"{r:.3g}" for r in residuals[-5:])
        super().__init__(f"cell problem not steady after {steps} steps; last residuals: {tail}")


class DiscretizationError(RuntimeError):
    """Mean-velocity and gradient assemblies of A disagree."""


@dataclass(frozen=True)
class UnitCellSpec:
    """Unit cell ``[0, 1)^2`` with a centred disk of diameter ``delta``.

    ``tol`` bounds the extrapolated remaining change of the mean velocity
    relative to its value; ``check_every`` is the step chunk between checks.
    With ``warm_start`` an even resolution of at least 64 starts from the
    solution at half the resolution, which removes most of the slow
    large-scale transient.
    """

    resolution: int = 64
    delta: float = 0.5
    tau: float = 1.0
    tol: float = 1e-6
    max_steps: int = 2_000_000
    check_every: int = 200
    agreement_tol: float = 0.02
    warm_start: bool = True

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise CellProblemError(
                f"obstacle diameter delta = {self.delta} must lie in (0, 1): "
                "delta = 0 has no steady state and delta >= 1 leaves no connected fluid"
            )
        if self.resolution < 4:
            raise CellProblemError("resolution must be at least 4 cells")
        if not self.tau > 0.5:
            raise CellProblemError("relaxation time must exceed 0.5")
        if not self.tol > 0 or self.check_every < 1 or self.max_steps < 1:
            raise CellProblemError("tolerance, check interval and step budget must be positive")

    @property
    def nu_lb(self) -> float:
        return (self.tau - 0.5) / 3.0

    @property
    def lattice_force(self) -> float:
        # keeps peak lattice speeds near 1e-4 so the inertial term is negligible
        return 1e-7 * (32.0 / self.resolution) ** 2


def disk_mask(resolution: int, delta: float) -> np.ndarray:
    """Cells whose centre lies inside the disk; symmetric under the square's group."""
    c = (np.arange(resolution) + 0.5) / resolution - 0.5
    X, Y = np.meshgrid(c, c, indexing="ij")
    return X * X + Y * Y < (0.5 * delta) ** 2


@dataclass(frozen=True)
class CellSolution:
    axis: int
    v: np.ndarray  # (2, N, N), unit-cell scaled, zero in the obstacle
    p: np.ndarray  # (N, N), mean-free over the fluid
    solid: np.ndarray
    steps: int
    residuals: tuple
    divergence: float  # max interior |div v| relative to max |grad v|

    @property
    def mean_velocity(self) -> np.ndarray:
        return self.v.reshape(2, -1).mean(axis=1)


@dataclass(frozen=True)
class PermeabilityResult:
    spec: UnitCellSpec
    A: np.ndarray
    A_gradient: np.ndarray
    solutions: tuple = field(repr=False)

    @property
    def residual(self) -> float:
        return max(s.residuals[-1] for s in self.solutions)

    @property
    def agreement(self) -> float:
        """Ratio of the gradient-form trace to the mean-velocity trace."""
        return float(np.trace(self.A_gradient) / np.trace(self.A))

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.A + self.A.T))


def _interior_divergence(ux, uy, solid) -> float:
    fluid = ~solid
    inner = fluid.copy()
    for ax in (0, 1):
        for s in (1, -1):
            inner &= np.roll(fluid, s, axis=ax)
    div = 0.5 * (np.roll(ux, -1, 0) - np.roll(ux, 1, 0) + np.roll(uy, -1, 1) - np.roll(uy, 1, 1))
    grad = max(np.abs(np.diff(ux, axis=a)).max() for a in (0, 1))
    grad = max(grad, max(np.abs(np.diff(uy, axis=a)).max() for a in (0, 1)))
    if grad == 0 or not inner.any():
        return 0.0
    return float(np.abs(div[inner]).max() / grad)


def _coarse_start(spec: UnitCellSpec, k: int, solid: np.ndarray):
    """Lattice ``(rho, u)`` from the half-resolution solution, or ``None``."""
    N = spec.resolution
    if not spec.warm_start or N < 64 or N % 2:
        return None
    coarse = solve_unit_cell(replace(spec, resolution=N // 2), k)
    g = spec.lattice_force
    up = lambda a: np.repeat(np.repeat(a, 2, axis=-2), 2, axis=-1)
    u = up(coarse.v) * (g * N * N / spec.nu_lb)
    u[:, solid] = 0.0
    rho = 1.0 + 3.0 * up(coarse.p) * g * N
    return rho, u


def solve_unit_cell(spec: UnitCellSpec, k: int) -> CellSolution:
    """Steady cell flow driven along axis ``k`` (0 or 1)."""
    if k not in (0, 1):
        raise CellProblemError(f"axis must be 0 or 1, got {k}")
    N = spec.resolution
    solid = disk_mask(N, spec.delta)
    if not solid.any():
        raise CellProblemError(
            f"delta = {spec.delta} covers no cell centre at resolution {N}; "
            "without an obstacle the forced periodic flow accelerates forever"
        )
    if solid[0].any() or solid[:, 0].any():
        raise CellProblemError("obstacle touches the cell boundary at this resolution")
    g = spec.lattice_force
    force = (g, 0.0) if k == 0 else (0.0, g)
    start = _coarse_start(spec, k, solid)
    rho0, u0 = start if start is not None else (1.0, (0.0, 0.0))
    sim = Simulation(SimulationConfig(nx=N, ny=N, tau=spec.tau, force=force, solid=solid, rho0=rho0, u0=u0))
    history = []
    residuals = []
    while True:
        sim.step(spec.check_every)
        m = sim.macroscopic()
        U = float((m.ux, m.uy)[k].mean())
        history.append(U)
        if len(history) >= 3:
            d1 = history[-2] - history[-3]
            d2 = history[-1] - history[-2]
            if d2 == 0.0:
                residuals.append(0.0)
                break
            r = d2 / d1 if d1 != 0.0 else 0.0
            # remaining change of a geometric tail d2 (r + r^2 + ...)
            remaining = abs(d2 * r / (1.0 - r)) if 0.0 < r < 1.0 else abs(d2) * 1e3
            residuals.append(remaining / abs(U))
            if residuals[-1] < spec.tol:
                break
        if sim.step_count >= spec.max_steps:
            raise NotConvergedError(sim.step_count, residuals)
    vs = spec.nu_lb / (g * N * N)
    v = np.stack([m.ux, m.uy]) * vs
    p = np.where(solid, 0.0, m.p) / (g * N)
    p = np.where(solid, 0.0, p - p[~solid].mean())
    return CellSolution(
        axis=k,
        v=v,
        p=p,
        solid=solid,
        steps=sim.step_count,
        residuals=tuple(residuals),
        divergence=_interior_divergence(m.ux, m.uy, solid),
    )


def dirichlet_inner(a: np.ndarray, b: np.ndarray, solid: np.ndarray) -> float:
    """Face-difference approximation of ``int grad a : grad b`` on the unit cell.

    Fluid-fluid faces contribute the product of the differences; a
    fluid-solid face has the wall halfway, so the one-sided gradient is
    ``2 u`` over half a cell, contributing ``2 a b``.
    """
    fluid = ~solid
    total = 0.0
    for comp in range(a.shape[0]):
        x, y = a[comp], b[comp]
        for ax in (0, 1):
            nb_solid = np.roll(solid, -1, axis=ax)
            both = fluid & ~nb_solid
            dx = np.roll(x, -1, axis=ax) - x
            dy = np.roll(y, -1, axis=ax) - y
            total += float(np.sum((dx * dy)[both]))
            total += float(np.sum(2.0 * (x * y)[fluid & nb_solid]))
            into = solid & np.roll(fluid, -1, axis=ax)
            xn = np.roll(x, -1, axis=ax)
            yn = np.roll(y, -1, axis=ax)
            total += float(np.sum(2.0 * (xn * yn)[into]))
    return total


def permeability_tensor(spec: UnitCellSpec, check: bool = True) -> PermeabilityResult:
    """Solve both axes and assemble ``A`` by both forms.

    With ``check`` a relative trace disagreement above ``spec.agreement_tol``
    raises :class:`DiscretizationError`.
    """
    sols = tuple(solve_unit_cell(spec, k) for k in (0, 1))
    A = np.empty((2, 2))
    Ag = np.empty((2, 2))
    for k, s in enumerate(sols):
        A[:, k] = s.mean_velocity
    for j in range(2):
        for k in range(2):
            Ag[j, k] = dirichlet_inner(sols[k].v, sols[j].v, sols[0].solid)
    res = PermeabilityResult(spec=spec, A=A, A_gradient=Ag, solutions=sols)
    if check and abs(res.agreement - 1.0) > spec.agreement_tol:
        raise DiscretizationError(
            f"gradient and mean-velocity forms of A differ by {abs(res.agreement - 1):.2%} "
            f"at resolution {spec.resolution}; refine the grid"
        )
    return res


def permeability_sweep(deltas, resolution: int = 64, **spec_kwargs) -> list[PermeabilityResult]:
    return [
        permeability_tensor(UnitCellSpec(resolution=resolution, delta=float(d), **spec_kwargs))
        for d in deltas
    ]


def local_model_matrix_2d(d: int = 2) -> np.ndarray:
    """Drag matrix of the planar exterior model problem, ``4 pi I``."""
    if d != 2:
        raise CellProblemError("only the planar (d = 2) local model is available")
    return 4.0 * math.pi * np.eye(2)


def scalar_permeability(A, spread_tol: float = 0.05) -> float:
    """Single eigenvalue of an isotropic ``A``; rejects a spread above ``spread_tol``."""
    A = np.asarray(A.A if isinstance(A, PermeabilityResult) else A, dtype=float)
    if A.ndim == 0:
        value = float(A)
        if not value > 0:
            raise CellProblemError("A must be positive")
        return value
    ev = np.linalg.eigvalsh(0.5 * (A + A.T))
    if ev.min() <= 0:
        raise CellProblemError(f"A is not positive definite (eigenvalues {ev})")
    mean = float(ev.mean())
    if (ev.max() - ev.min()) / mean > spread_tol:
        raise CellProblemError(
            f"A is anisotropic (eigenvalues {ev}); the isotropic damping model does not apply"
        )
    return mean


def brinkman_damping_from_cell(A, sigma: float, nu: float) -> float:
    """Damping coefficient ``nu / (sigma^2 A)`` with ``A`` the isotropic eigenvalue."""
    if not nu > 0:
        raise CellProblemError("viscosity must be positive")
    if not sigma > 0:
        raise CellProblemError("sigma must be positive")
    a = scalar_permeability(A)
    if math.isinf(sigma):
        return 0.0
    return nu / (sigma**2 * a)
