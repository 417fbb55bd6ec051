"""Analytic benchmarks for the lattice solver under diffusive refinement.

Physical quantities map to lattice units through :class:`DiffusiveUnits`:
halving ``dx`` quarters ``dt`` at fixed viscosity, so the relaxation time
stays fixed along a resolution ladder.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from hlbm.lattice import (
    Simulation,
    SimulationConfig,
    equilibrium,
    nonequilibrium_from_gradients,
)

#: relaxation time at which halfway bounce-back places a straight wall exactly
#: halfway between nodes for Poiseuille-type flows
TAU_WALL_EXACT = 0.5 + math.sqrt(3.0 / 16.0)


# ---------------------------------------------------------------- references


def reference_taylor_green(x, y, t, nu, U0=1.0, k=1.0):
    """Decaying vortex array: ``(ux, uy, p)``."""
    decay = math.exp(-2.0 * nu * k * k * t)
    ux = -U0 * np.cos(k * x) * np.sin(k * y) * decay
    uy = U0 * np.sin(k * x) * np.cos(k * y) * decay
    p = -(U0 * U0 / 4.0) * (np.cos(2 * k * x) + np.cos(2 * k * y)) * decay * decay
    return ux, uy, p


def reference_brinkman_channel(y, H, nu, K, F):
    """Steady force-driven channel with walls at ``y = 0, H`` and sink ``nu u / K``.

    Falls back to the Poiseuille parabola for ``K = inf`` and switches to an
    exponential form when ``H / sqrt(K)`` would overflow ``cosh``.
    """
    y = np.asarray(y, dtype=float)
    if math.isinf(K):
        return F * y * (H - y) / (2.0 * nu)
    r = math.sqrt(K)
    half = H / (2.0 * r)
    s = (y - H / 2.0) / r
    if half < 300:
        shape = np.cosh(s) / math.cosh(half)
    else:
        shape = np.exp(np.abs(s) - half)
    return F * K / nu * (1.0 - shape)


def reference_channel_pressure(y, H, Fy):
    """Hydrostatic pressure balancing a transverse force, mean-free over the channel."""
    return Fy * (np.asarray(y, dtype=float) - H / 2.0)


def reference_darcy_uniform(nu, K, F):
    """Steady uniform velocity ``(K / nu) F``."""
    return K / nu * np.asarray(F, dtype=float)


def reference_darcy_transient(t, nu, K, F):
    """Start-up from rest: ``(K/nu) F (1 - exp(-nu t / K))``."""
    return reference_darcy_uniform(nu, K, F) * (1.0 - math.exp(-nu * t / K))


# ----------------------------------------------------------------- utilities


@dataclass(frozen=True)
class DiffusiveUnits:
    """Lattice <-> physical conversion for ``n`` cells across length ``length``."""

    length: float
    n: int
    nu: float
    tau: float

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def nu_lb(self) -> float:
        return (self.tau - 0.5) / 3.0

    @property
    def dt(self) -> float:
        return self.nu_lb * self.dx**2 / self.nu

    @property
    def velocity(self) -> float:
        """Physical velocity of one lattice unit."""
        return self.dx / self.dt

    def force(self, F):
        return np.asarray(F, dtype=float) * self.dt**2 / self.dx

    def permeability(self, K: float) -> float:
        return math.inf if math.isinf(K) else K / self.dx**2

    def pressure(self, p_lb):
        return np.asarray(p_lb) * self.velocity**2


def eoc(errors: Sequence[tuple[float, float]]) -> list[float]:
    """Observed orders ``log2(e_i / e_{i+1})`` for a ladder halving ``h``."""
    if len(errors) < 2:
        raise ValueError("need at least two (h, error) pairs")
    hs = [float(h) for h, _ in errors]
    es = [float(e) for _, e in errors]
    if any(not e > 0 for e in es):
        raise ValueError("errors must be positive")
    for a, b in zip(hs, hs[1:]):
        if not math.isclose(a / b, 2.0, rel_tol=1e-9):
            raise ValueError("ladder must halve h at every step")
    return [math.log2(a / b) for a, b in zip(es, es[1:])]


def _rel_l2(err, ref) -> float:
    den = math.sqrt(float(np.sum(ref * ref)))
    return math.sqrt(float(np.sum(err * err))) / den if den > 0 else math.sqrt(float(np.sum(err * err)))


def _rel_max(err, ref) -> float:
    den = float(np.abs(ref).max())
    return float(np.abs(err).max()) / den if den > 0 else float(np.abs(err).max())


def run_to_steady(sim: Simulation, tol: float = 1e-10, chunk: int = 500, max_steps: int = 50_000_000) -> float:
    """Step until the per-step max velocity change falls below ``tol`` times max |u|."""
    m = sim.macroscopic()
    prev = np.stack([m.ux, m.uy])
    while True:
        sim.step(chunk)
        m = sim.macroscopic()
        cur = np.stack([m.ux, m.uy])
        change = float(np.abs(cur - prev).max()) / chunk
        scale = float(np.abs(cur).max())
        if change <= tol * scale or scale == 0.0:
            return change
        if sim.step_count >= max_steps:
            raise RuntimeError(f"no steady state after {sim.step_count} steps (change {change:.3g})")
        prev = cur


# --------------------------------------------------------------- case runners


@dataclass
class ResolutionError:
    n: int
    h: float
    steps: int
    u_l2: float
    u_max: float
    p_l2: float = math.nan
    p_max: float = math.nan
    seconds_per_step: float = math.nan
    extra: dict = field(default_factory=dict)


def run_taylor_green(n: int, nu=0.1, U0=1.0, k=1.0, tau=TAU_WALL_EXACT, t_end=None, samples=20) -> ResolutionError:
    """Periodic ``[0, 2 pi)^2`` vortex; errors are maxima over ``samples`` times."""
    L = 2.0 * math.pi / k
    units = DiffusiveUnits(L, n, nu, tau)
    dx, cu = units.dx, 1.0 / units.velocity
    x = (np.arange(n) + 0.5) * dx
    X, Y = np.meshgrid(x, x, indexing="ij")
    ux, uy, p = reference_taylor_green(X, Y, 0.0, nu, U0, k)
    rho = 1.0 + 3.0 * p * cu * cu
    # grad[a, b] = d u_b / d x_a in lattice units
    grad = np.empty((2, 2, n, n))
    grad[0, 0] = U0 * k * np.sin(k * X) * np.sin(k * Y)
    grad[1, 1] = -grad[0, 0]
    grad[1, 0] = -U0 * k * np.cos(k * X) * np.cos(k * Y)
    grad[0, 1] = -grad[1, 0]
    grad *= cu * dx
    f = equilibrium(rho, (ux * cu, uy * cu)) + nonequilibrium_from_gradients(rho, grad, tau)
    sim = Simulation(SimulationConfig(nx=n, ny=n, tau=tau, initial_populations=f))
    if t_end is None:
        t_end = math.log(2.0) / (2.0 * nu * k * k)
    total = int(round(t_end / units.dt))
    u_l2 = u_max = p_l2 = p_max = 0.0
    times, energies = [0.0], [float(np.mean(ux * ux + uy * uy))]
    elapsed = 0.0
    for j in range(1, samples + 1):
        t0 = time.perf_counter()
        sim.step(total * j // samples - sim.step_count)
        elapsed += time.perf_counter() - t0
        m = sim.macroscopic()
        t = sim.step_count * units.dt
        ue, ve, pe = reference_taylor_green(X, Y, t, nu, U0, k)
        vx, vy = m.ux / cu, m.uy / cu
        err = np.stack([vx - ue, vy - ve])
        ref = np.stack([ue, ve])
        u_l2 = max(u_l2, _rel_l2(err, ref))
        u_max = max(u_max, _rel_max(err, ref))
        ps = units.pressure(m.p)
        ps = ps - ps.mean()
        p_l2 = max(p_l2, _rel_l2(ps - pe, pe))
        p_max = max(p_max, _rel_max(ps - pe, pe))
        times.append(t)
        energies.append(float(np.mean(vx * vx + vy * vy)))
    # amplitude decays at half the kinetic-energy rate
    rate = -0.5 * np.polyfit(times, np.log(energies), 1)[0]
    return ResolutionError(
        n=n, h=dx, steps=sim.step_count, u_l2=u_l2, u_max=u_max, p_l2=p_l2, p_max=p_max,
        seconds_per_step=elapsed / max(sim.step_count, 1),
        extra={"decay_rate": rate, "decay_rate_exact": 2.0 * nu * k * k},
    )


def channel_simulation(ny: int, H=1.0, nu=0.1, K=0.01, F=(1.0, 0.0), tau=TAU_WALL_EXACT):
    """Periodic-in-x channel, one cell wide, walls at ``y = 0`` and ``y = H``."""
    units = DiffusiveUnits(H, ny, nu, tau)
    g = units.force(F)
    cfg = SimulationConfig(
        nx=1, ny=ny, tau=tau, K=units.permeability(K), force=(g[0], g[1]), periodic=(True, False)
    )
    return Simulation(cfg), units


def run_brinkman_channel(ny: int, H=1.0, nu=0.1, K=0.01, F=(1.0, 1.0), tau=TAU_WALL_EXACT, tol=1e-10) -> ResolutionError:
    """Steady channel against the cosh profile.

    The transverse force component only builds a hydrostatic pressure; it
    gives the pressure field a non-trivial exact solution to converge to.
    """
    sim, units = channel_simulation(ny, H, nu, K, F, tau)
    t0 = time.perf_counter()
    run_to_steady(sim, tol=tol)
    elapsed = time.perf_counter() - t0
    m = sim.macroscopic()
    y = (np.arange(ny) + 0.5) * units.dx
    u = m.ux[0] * units.velocity
    ue = reference_brinkman_channel(y, H, nu, K, F[0])
    p = units.pressure(m.p[0])
    p = p - p.mean()
    pe = reference_channel_pressure(y, H, F[1])
    row = ResolutionError(
        n=ny, h=units.dx, steps=sim.step_count,
        u_l2=_rel_l2(u - ue, ue), u_max=_rel_max(u - ue, ue),
        seconds_per_step=elapsed / max(sim.step_count, 1),
        extra={"centerline": float(np.interp(H / 2, y, u))},
    )
    if F[1] != 0.0:
        row.p_l2 = _rel_l2(p - pe, pe)
        row.p_max = _rel_max(p - pe, pe)
    return row


def run_darcy_uniform(nu=0.1, K=1e-4, F=(1.0, 0.0), relax_steps=100, n=4, steady_relaxations=30):
    """Periodic box under uniform force; returns ``(transient_error, steady_error, row)``.

    ``relax_steps`` lattice steps make up one relaxation time ``K / nu``.
    """
    F = np.asarray(F, dtype=float)
    dt = K / (nu * relax_steps)
    tau = TAU_WALL_EXACT
    nu_lb = (tau - 0.5) / 3.0
    dx = math.sqrt(nu * dt / nu_lb)
    g = F * dt * dt / dx
    sim = Simulation(SimulationConfig(nx=n, ny=n, tau=tau, K=K / dx**2, force=(g[0], g[1])))
    vel = dx / dt
    t0 = time.perf_counter()
    sim.step(relax_steps)
    m = sim.macroscopic()
    u_t = np.array([m.ux.mean(), m.uy.mean()]) * vel
    ref_t = reference_darcy_transient(sim.step_count * dt, nu, K, F)
    transient = float(np.abs(u_t - ref_t).max() / np.abs(ref_t).max())
    sim.step(relax_steps * steady_relaxations)
    elapsed = time.perf_counter() - t0
    m = sim.macroscopic()
    u = np.stack([m.ux, m.uy]) * vel
    ref = reference_darcy_uniform(nu, K, F)[:, None, None] * np.ones_like(u)
    steady = _rel_max(u - ref, ref)
    row = ResolutionError(
        n=n, h=dx, steps=sim.step_count, u_l2=_rel_l2(u - ref, ref), u_max=steady,
        seconds_per_step=elapsed / sim.step_count,
        extra={"transient_error": transient},
    )
    return transient, steady, row


# ------------------------------------------------------------------ reports


@dataclass
class Check:
    name: str
    value: float
    band: str
    ok: bool


@dataclass
class ErrorReport:
    case: str
    rows: list[ResolutionError]
    eoc_u: list[float] = field(default_factory=list)
    eoc_u_max: list[float] = field(default_factory=list)
    eoc_p: list[float] = field(default_factory=list)
    eoc_p_max: list[float] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_csv(self) -> str:
        cols = ["n", "h", "steps", "u_l2", "u_max", "p_l2", "p_max", "seconds_per_step"]
        lines = [",".join(cols + ["eoc_u", "eoc_p"])]
        for i, r in enumerate(self.rows):
            vals = [f"{getattr(r, c):.17g}" if isinstance(getattr(r, c), float) else str(getattr(r, c)) for c in cols]
            eu = f"{self.eoc_u[i - 1]:.17g}" if i and self.eoc_u else ""
            ep = f"{self.eoc_p[i - 1]:.17g}" if i and self.eoc_p else ""
            lines.append(",".join(vals + [eu, ep]))
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        out = [f"benchmark {self.case}"]
        for r in self.rows:
            out.append(
                f"  n={r.n:<5d} steps={r.steps:<8d} u_l2={r.u_l2:.3e} u_max={r.u_max:.3e} "
                f"p_l2={r.p_l2:.3e} ({r.seconds_per_step * 1e3:.3f} ms/step)"
            )
        if self.eoc_u:
            out.append("  EOC u: " + ", ".join(f"{e:.3f}" for e in self.eoc_u))
        if self.eoc_p:
            out.append("  EOC p: " + ", ".join(f"{e:.3f}" for e in self.eoc_p))
        for c in self.checks:
            out.append(f"  [{'ok' if c.ok else 'FAIL'}] {c.name} = {c.value:.6g}  (band {c.band})")
        out.append("  bands encode second order in pressure, at least first order in velocity")
        return "\n".join(out)


@dataclass(frozen=True)
class BenchmarkCase:
    name: str
    ladder: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in CASES:
            raise ValueError(f"unknown benchmark {self.name!r}; choose from {sorted(CASES)}")
        lad = tuple(int(n) for n in self.ladder) or CASES[self.name]["ladder"]
        if any(b <= a for a, b in zip(lad, lad[1:])):
            raise ValueError("resolution ladder must be strictly refining")
        object.__setattr__(self, "ladder", lad)
        merged = dict(CASES[self.name]["params"])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ValueError(f"unknown parameters for {self.name}: {sorted(unknown)}")
        merged.update(self.params)
        object.__setattr__(self, "params", merged)


CASES = {
    "taylor_green": {"ladder": (32, 64, 128), "params": {"nu": 0.1, "U0": 1.0, "k": 1.0, "tau": TAU_WALL_EXACT}},
    "brinkman_channel": {
        "ladder": (16, 32, 64),
        "params": {"H": 1.0, "nu": 0.1, "K": 0.01, "F": (1.0, 1.0), "tau": TAU_WALL_EXACT},
    },
    "poiseuille": {"ladder": (16, 32, 64), "params": {"H": 1.0, "nu": 0.1, "F": (1.0, 0.0), "tau": 0.8}},
    "darcy_uniform": {"ladder": (4,), "params": {"nu": 0.1, "K": 1e-4, "F": (1.0, 0.0), "relax_steps": 100}},
}


def _band(name, value, lo=-math.inf, hi=math.inf) -> Check:
    if math.isinf(lo):
        text = f"< {hi:g}"
    elif math.isinf(hi):
        text = f">= {lo:g}"
    else:
        text = f"[{lo:g}, {hi:g}]"
    return Check(name, value, text, bool(lo <= value <= hi) if math.isfinite(value) else False)


def _ladder_eocs(report: ErrorReport, with_p: bool):
    if len(report.rows) < 2:
        return
    report.eoc_u = eoc([(r.h, r.u_l2) for r in report.rows])
    report.eoc_u_max = eoc([(r.h, r.u_max) for r in report.rows])
    if with_p:
        report.eoc_p = eoc([(r.h, r.p_l2) for r in report.rows])
        report.eoc_p_max = eoc([(r.h, r.p_max) for r in report.rows])
    errs = [r.u_l2 for r in report.rows]
    report.checks.append(
        Check("velocity error decreases along ladder", float(all(b < a for a, b in zip(errs, errs[1:]))), "1", all(b < a for a, b in zip(errs, errs[1:])))
    )


def run_benchmark(case: BenchmarkCase) -> ErrorReport:
    p = case.params
    report = ErrorReport(case=case.name, rows=[])
    if case.name == "taylor_green":
        report.rows = [run_taylor_green(n, **p) for n in case.ladder]
        _ladder_eocs(report, with_p=False)
        for i, e in enumerate(report.eoc_u):
            report.checks.append(_band(f"EOC u ({case.ladder[i]}->{case.ladder[i + 1]})", e, 1.7, 2.3))
        fin = report.rows[-1].extra
        rel = abs(fin["decay_rate"] / fin["decay_rate_exact"] - 1.0)
        report.checks.append(_band(f"decay rate relative error at n={case.ladder[-1]}", rel, hi=0.01))
    elif case.name in ("brinkman_channel", "poiseuille"):
        K = p.get("K", math.inf)
        kw = {k: v for k, v in p.items() if k != "K"}
        report.rows = [run_brinkman_channel(n, K=K, **kw) for n in case.ladder]
        with_p = p["F"][1] != 0.0
        _ladder_eocs(report, with_p=with_p)
        for i, e in enumerate(report.eoc_u):
            report.checks.append(_band(f"EOC u ({case.ladder[i]}->{case.ladder[i + 1]})", e, lo=1.0))
        for i, e in enumerate(report.eoc_p):
            report.checks.append(_band(f"EOC p ({case.ladder[i]}->{case.ladder[i + 1]})", e, 1.7, 2.3))
        report.checks.append(_band(f"max relative u error at n={case.ladder[-1]}", report.rows[-1].u_max, hi=1e-3))
    elif case.name == "darcy_uniform":
        for n in case.ladder:
            transient, steady, row = run_darcy_uniform(n=n, **p)
            report.rows.append(row)
            report.checks.append(_band(f"steady relative error (n={n})", steady, hi=1e-6))
            report.checks.append(_band(f"transient relative error at t=K/nu (n={n})", transient, hi=1e-2))
    return report


# ------------------------------------------------------------- regime sweep


@dataclass
class LayerRow:
    K: float
    ny: int
    width: float
    predicted: float
    flatness: float
    steps: int

    @property
    def ratio(self) -> float:
        return self.width / self.predicted


def boundary_layer_width(y, u, fraction=0.95) -> float:
    """Distance from the wall at ``y = 0`` to where ``u`` first reaches ``fraction * max u``."""
    target = fraction * float(np.max(u))
    ys = np.concatenate([[0.0], y])
    us = np.concatenate([[0.0], u])
    j = int(np.argmax(us >= target))
    return float(ys[j - 1] + (target - us[j - 1]) * (ys[j] - ys[j - 1]) / (us[j] - us[j - 1]))


def k_sweep(Ks: Sequence[float], ny=400, H=1.0, nu=0.1, F=1.0, tau=TAU_WALL_EXACT, tol=1e-10) -> list[LayerRow]:
    """Steady channel profiles on one grid for each permeability in ``Ks``.

    ``flatness`` is mean over max velocity: 2/3 for the parabola, 1 for a plug.
    """
    rows = []
    for K in Ks:
        sim, units = channel_simulation(ny, H, nu, K, (F, 0.0), tau)
        run_to_steady(sim, tol=tol)
        m = sim.macroscopic()
        y = (np.arange(ny) + 0.5) * units.dx
        u = m.ux[0] * units.velocity
        half = ny // 2
        rows.append(
            LayerRow(
                K=float(K), ny=ny, width=boundary_layer_width(y[:half], u[:half]),
                predicted=3.0 * math.sqrt(K), flatness=float(u.mean() / u.max()),
                steps=sim.step_count,
            )
        )
    return rows
