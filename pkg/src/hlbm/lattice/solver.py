"""D2Q9 homogenized BGK solver: configuration, state and time stepping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from hlbm import _accel
from hlbm.lattice import kernels
from hlbm.lattice.d2q9 import CS2, CX, CY, W

ArrayLike = Union[float, np.ndarray]

#: guard on lattice speed; beyond it the second-order equilibrium is meaningless
MAX_LATTICE_SPEED = 0.3


class LatticeError(ValueError):
    """Invalid lattice configuration."""


class InstabilityError(RuntimeError):
    def __init__(self, step: int, cell: tuple[int, int], reason: str):
        self.step = step
        self.cell = cell
        self.reason = reason
        super().__init__(f"step {step}, cell {cell}: {reason}")


def equilibrium(rho: ArrayLike, u: Sequence[ArrayLike], varpi: ArrayLike = 1.0) -> np.ndarray:
    """Porosity-controlled second-order equilibrium, shape ``(9, *rho.shape)``.

    The equilibrium is the usual incompressible-BGK expansion evaluated at
    the damped velocity ``varpi * u``.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise LatticeError("density must be positive")
    ex = np.asarray(varpi, dtype=float) * np.asarray(u[0], dtype=float)
    ey = np.asarray(varpi, dtype=float) * np.asarray(u[1], dtype=float)
    shape = np.broadcast(rho, ex, ey).shape
    ext = (slice(None),) + (None,) * len(shape)
    cu = CX[ext] * ex + CY[ext] * ey
    usq = ex * ex + ey * ey
    return W[ext] * rho * (1.0 + 3.0 * cu + 4.5 * cu * cu - 1.5 * usq)


def nonequilibrium_from_gradients(rho: ArrayLike, grad_u: np.ndarray, tau: float) -> np.ndarray:
    """First-order Chapman-Enskog part ``-3 tau w_i rho (c_i c_i - I/3) : grad u``.

    ``grad_u[a, b] = d u_b / d x_a`` with trailing spatial axes.
    """
    rho = np.asarray(rho, dtype=float)
    out = []
    for i in range(9):
        c = (CX[i], CY[i])
        s = 0.0
        for a in range(2):
            for b in range(2):
                q = c[a] * c[b] - (CS2 if a == b else 0.0)
                if q:
                    s = s + q * grad_u[a, b]
        out.append(-3.0 * tau * W[i] * rho * s)
    return np.array(np.broadcast_arrays(*out))


def _as_field(value, shape, name) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    try:
        return np.ascontiguousarray(np.broadcast_to(arr, shape), dtype=float).copy()
    except ValueError:
        raise LatticeError(f"{name} has shape {arr.shape}, expected scalar or {shape}") from None


@dataclass
class SimulationConfig:
    """Everything needed to run one lattice simulation.

    All quantities are in lattice units (``dx = dt = 1``).  ``K`` is the
    per-cell permeability; ``math.inf`` means no porous damping and gives
    ``varpi = 1`` exactly.  ``force`` is a body force per unit mass, either
    a pair of scalars or a ``(2, nx, ny)`` array.
    """

    nx: int
    ny: int
    tau: float
    K: ArrayLike = math.inf
    force: Union[Sequence[float], np.ndarray] = (0.0, 0.0)
    solid: Optional[np.ndarray] = None
    periodic: tuple[bool, bool] = (True, True)
    rho0: ArrayLike = 1.0
    u0: Union[Sequence[ArrayLike], np.ndarray] = (0.0, 0.0)
    steps: int = 0
    every: int = 0
    initial_populations: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise LatticeError("grid must have at least one cell per axis")
        if not self.tau > 0.5:
            raise LatticeError("relaxation time must exceed 0.5")
        if self.steps < 0 or self.every < 0:
            raise LatticeError("steps and output cadence must be non-negative")
        shape = (self.nx, self.ny)
        if self.solid is None:
            self.solid = np.zeros(shape, dtype=bool)
        self.solid = np.asarray(self.solid, dtype=bool)
        if self.solid.shape != shape:
            raise LatticeError(f"solid mask shape {self.solid.shape} != grid {shape}")
        if self.solid.all():
            raise LatticeError("no fluid cells")
        K = np.asarray(self.K, dtype=float)
        if np.any(~(K > 0)):
            raise LatticeError("permeability K must be positive (porosity control needs K > 0)")
        varpi = self.varpi_field()
        if np.any(varpi < 0):
            raise LatticeError(
                "porosity control varpi = 1 - nu*tau/K is negative; increase K or lower tau"
            )

    @property
    def nu(self) -> float:
        return (self.tau - 0.5) / 3.0

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def varpi_field(self) -> np.ndarray:
        K = _as_field(self.K, self.shape, "K")
        return 1.0 - (self.nu * self.tau) / K

    def force_field(self) -> np.ndarray:
        g = np.asarray(self.force, dtype=float)
        if g.shape == (2,):
            g = g[:, None, None]
        return _as_field(g, (2,) + self.shape, "force")


@dataclass(frozen=True)
class MacroFields:
    """Density, velocity and pressure on the grid at one step."""

    rho: np.ndarray
    ux: np.ndarray
    uy: np.ndarray
    p: np.ndarray
    step: int


class Simulation:
    """Owns the populations and advances them in time.

    Not thread-safe: one caller steps a simulation at a time.  Snapshots
    returned by :meth:`macroscopic` are independent copies.
    """

    def __init__(self, config: SimulationConfig):
        self.config = config
        shape = config.shape
        self.solid = np.ascontiguousarray(config.solid)
        self.fluid = ~self.solid
        self.varpi = self.config.varpi_field()
        g = config.force_field()
        self.gx = np.ascontiguousarray(g[0])
        self.gy = np.ascontiguousarray(g[1])
        self.omega = 1.0 / config.tau
        if config.initial_populations is not None:
            f = np.array(config.initial_populations, dtype=float)
            if f.shape != (9,) + shape:
                raise LatticeError(f"initial populations must have shape {(9,) + shape}")
        else:
            rho0 = _as_field(config.rho0, shape, "rho0")
            u0 = np.asarray(config.u0, dtype=float)
            if u0.shape == (2,):
                u0 = u0[:, None, None]
            u0 = _as_field(u0, (2,) + shape, "u0")
            # shift by half the force so the reported velocity equals u0
            f = equilibrium(rho0, (u0[0] - 0.5 * self.gx, u0[1] - 0.5 * self.gy))
        f[:, self.solid] = 0.0
        self.f = np.ascontiguousarray(f)
        self._buf = np.zeros_like(self.f)
        self.step_count = 0
        self.rho_ref = float(self.f.sum(axis=0)[self.fluid].mean())
        self._kernel = kernels.select_step()
        self._blocked = None
        if self._kernel is None:
            self._blocked = kernels.blocked_links(self.solid, *config.periodic)

    @property
    def backend(self) -> str:
        return _accel.backend_name()

    def step(self, n: int = 1) -> None:
        px, py = self.config.periodic
        for _ in range(n):
            if self._kernel is None:
                umax2, ix, iy = kernels.step_numpy(
                    self.f, self._buf, self.solid, self.varpi, self.gx, self.gy,
                    self.omega, px, py, self._blocked,
                )
            else:
                umax2, ix, iy = self._kernel(
                    self.f, self._buf, self.solid, self.varpi, self.gx, self.gy,
                    self.omega, px, py,
                )
            if not math.isfinite(umax2):
                raise InstabilityError(self.step_count, (ix, iy), "non-finite or non-positive density")
            if umax2 > MAX_LATTICE_SPEED**2:
                raise InstabilityError(
                    self.step_count, (ix, iy),
                    f"|u| = {math.sqrt(umax2):.3g} exceeds {MAX_LATTICE_SPEED} lattice units",
                )
            self.f, self._buf = self._buf, self.f
            self.step_count += 1

    def mass(self) -> float:
        return float(self.f[:, self.fluid].sum())

    def macroscopic(self) -> MacroFields:
        f = self.f
        rho = f.sum(axis=0)
        safe = np.where(self.fluid, rho, 1.0)
        ux = (np.tensordot(CX, f, axes=1) + 0.5 * safe * self.gx) / safe
        uy = (np.tensordot(CY, f, axes=1) + 0.5 * safe * self.gy) / safe
        rho = np.where(self.fluid, rho, self.rho_ref)
        ux = np.where(self.fluid, ux, 0.0)
        uy = np.where(self.fluid, uy, 0.0)
        p = CS2 * (rho - self.rho_ref)
        return MacroFields(rho=rho, ux=ux, uy=uy, p=p, step=self.step_count)

    def strain_rate(self) -> np.ndarray:
        """Strain-rate tensor from the non-equilibrium second moment.

        Returns ``S[a, b]`` with trailing grid axes; zero in solid cells.
        """
        m = self.macroscopic()
        rho = np.where(self.fluid, m.rho, 1.0)
        feq = equilibrium(rho, (m.ux, m.uy), self.varpi)
        fneq = self.f - feq
        cs = (CX, CY)
        g = (self.gx * rho, self.gy * rho)
        e = (self.varpi * m.ux, self.varpi * m.uy)
        S = np.zeros((2, 2) + self.config.shape)
        coef = -1.5 / (self.config.tau * rho)
        for a in range(2):
            for b in range(2):
                pi = np.tensordot(cs[a] * cs[b], fneq, axes=1)
                # undo the forcing contribution to the non-equilibrium stress
                pi = pi + 0.5 * (e[a] * g[b] + e[b] * g[a])
                S[a, b] = np.where(self.fluid, coef * pi, 0.0)
        return S


def run(config: SimulationConfig) -> list[MacroFields]:
    """Run ``config.steps`` steps, snapshotting every ``config.every`` steps.

    The initial fields are always the first snapshot; the final state is
    always the last one.
    """
    sim = Simulation(config)
    snaps = [sim.macroscopic()]
    every = config.every or config.steps or 1
    done = 0
    while done < config.steps:
        n = min(every, config.steps - done)
        sim.step(n)
        done += n
        snaps.append(sim.macroscopic())
    return snaps
