"""Scaling analysis of a periodic obstacle matrix.

A domain is tiled with cubic (square) cells of side ``epsilon``; each cell
holds a centred spherical obstacle of diameter ``a_eps``.  The ratio
``sigma_eps`` of cell size to obstacle size decides which homogenized
equation governs the flow as ``epsilon -> 0``:

======  ==============  ===========================================
case    lim sigma_eps   limit equation
======  ==============  ===========================================
(i)     +inf            Navier-Stokes (obstacles too small to matter)
(ii)    0 < sigma < inf Brinkman
(iii)   0               Darcy (time dependent)
(iv)    0               Darcy with memory
======  ==============  ===========================================

The kinetic side of the model needs the porosity control
``varpi = 1 - nu*tau/K`` which turns permeability into equilibrium damping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np


class DomainError(ValueError):
    """Parameters outside the range where a formula is meaningful."""


NSE = "NSE(i)"
BRINKMAN = "Brinkman(ii)"
DARCY_T = "Darcy_t(iii)"
DARCY_MEM = "Darcy_mem(iv)"
CASE_LABELS = (NSE, BRINKMAN, DARCY_T, DARCY_MEM)


@dataclass(frozen=True)
class PorousScaling:
    """Obstacle matrix geometry at one cell size.

    Give either an explicit obstacle diameter ``a_eps`` or a power law
    ``a_eps = C * epsilon**n``.  The obstacle must lie strictly inside its
    cell; that is checked when a size-dependent quantity is evaluated, so a
    power law can still be classified when it touches the cell wall.
    """

    d: int
    epsilon: float
    a_eps: Optional[float] = None
    C: Optional[float] = None
    n: Optional[int] = None

    def __post_init__(self):
        if self.d not in (2, 3):
            raise DomainError(f"dimension must be 2 or 3, got {self.d}")
        if not self.epsilon > 0:
            raise DomainError("cell size epsilon must be positive")
        explicit = self.a_eps is not None
        law = self.C is not None or self.n is not None
        if explicit == law:
            raise DomainError("give either a_eps or the power law (C, n), not both")
        if law:
            if self.C is None or self.n is None:
                raise DomainError("power law needs both C and n")
            if not self.C > 0:
                raise DomainError("power-law prefactor C must be positive")
            if int(self.n) != self.n or self.n < 1:
                raise DomainError("power-law exponent n must be an integer >= 1")

    @classmethod
    def power_law(cls, d: int, epsilon: float, C: float, n: int) -> "PorousScaling":
        return cls(d=d, epsilon=epsilon, C=C, n=n)

    @property
    def is_power_law(self) -> bool:
        return self.C is not None

    @property
    def obstacle_size(self) -> float:
        if self.a_eps is not None:
            return float(self.a_eps)
        return self.C * self.epsilon**self.n

    def at(self, epsilon: float) -> "PorousScaling":
        """Same obstacle law evaluated at another cell size."""
        if not self.is_power_law:
            raise DomainError("only a power-law scaling can be moved to another epsilon")
        return PorousScaling(d=self.d, epsilon=epsilon, C=self.C, n=self.n)

    def check_fits(self) -> float:
        a = self.obstacle_size
        if not a > 0:
            raise DomainError(f"obstacle size must be positive, got {a}")
        if a >= self.epsilon:
            raise DomainError(
                f"obstacle of size {a:.6g} does not fit strictly inside a cell of size {self.epsilon:.6g}"
            )
        return a


def sigma_ratio(scaling: PorousScaling, strict: bool = True) -> float:
    """Cell-to-obstacle size ratio ``sigma_eps``.

    ``(eps^d / a^(d-2))^(1/2)`` for d >= 3 and ``eps * |log(a/eps)|^(1/2)``
    for d = 2.  With ``strict=False`` the formula is evaluated for any
    positive ``a``, which is how the power-law curves are tabulated past the
    point where the obstacle would fill the cell.
    """
    if strict:
        a = scaling.check_fits()
    else:
        a = scaling.obstacle_size
        if not a > 0:
            raise DomainError(f"obstacle size must be positive, got {a}")
    eps = scaling.epsilon
    d = scaling.d
    if d == 2:
        return eps * math.sqrt(abs(math.log(a / eps)))
    return math.sqrt(eps**d / a ** (d - 2))


def critical_obstacle_size(d: int, epsilon: float, C0: float) -> float:
    """Obstacle size for which ``sigma_eps`` tends to a finite positive limit."""
    if d not in (2, 3):
        raise DomainError(f"dimension must be 2 or 3, got {d}")
    if not C0 > 0 or not math.isfinite(C0):
        raise DomainError("critical-size prefactor C0 must lie in (0, inf)")
    if not epsilon > 0:
        raise DomainError("cell size epsilon must be positive")
    if d == 2:
        return math.exp(-C0 / epsilon**2)
    return C0 * epsilon ** (d / (d - 2))


def critical_sigma_limit(d: int, C0: float) -> float:
    """``lim sigma_eps`` at the critical size: ``C0^((2-d)/2)`` or ``C0^(1/2)``."""
    if d == 2:
        return math.sqrt(C0)
    return C0 ** ((2 - d) / 2)


@dataclass(frozen=True)
class SigmaLimit:
    """Extended-real limit of ``sigma_eps``: ``zero``, ``finite`` or ``infinite``."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("zero", "finite", "infinite"):
            raise ValueError(f"unknown limit kind {self.kind!r}")

    @classmethod
    def zero(cls):
        return cls("zero", 0.0)

    @classmethod
    def infinite(cls):
        return cls("infinite", math.inf)

    @classmethod
    def finite(cls, value: float):
        if not (value > 0 and math.isfinite(value)):
            raise ValueError("a finite sigma limit must be positive")
        return cls("finite", float(value))

    def __str__(self):
        if self.kind == "infinite":
            return "+inf"
        if self.kind == "zero":
            return "0"
        return f"{self.value:.17g}"


@dataclass(frozen=True)
class RegimeReport:
    case_label: str
    sigma_limit: SigmaLimit
    porosity_limit: float


def classify_regime(scaling: PorousScaling) -> RegimeReport:
    """Homogenization case of a d = 3 power law ``a = C eps^n``, n in 1..4."""
    if not scaling.is_power_law:
        raise DomainError("regime classification needs a power-law obstacle size a = C*eps^n")
    if scaling.d != 3:
        raise DomainError(f"regime classification is implemented for d = 3 only, got d = {scaling.d}")
    C, n = scaling.C, int(scaling.n)
    if n == 4:
        return RegimeReport(NSE, SigmaLimit.infinite(), 1.0)
    if n == 3:
        return RegimeReport(BRINKMAN, SigmaLimit.finite(C ** -0.5), 1.0)
    if n == 2:
        return RegimeReport(DARCY_T, SigmaLimit.zero(), 1.0)
    if n == 1:
        if C > 1:
            raise DomainError("for n = 1 the obstacle outgrows its cell unless C <= 1")
        return RegimeReport(DARCY_MEM, SigmaLimit.zero(), 1.0 - C * math.pi / 6.0)
    raise DomainError(f"unsupported exponent n = {n}; only n in 1..4 are classified")


def probe_sigma_limit(scaling: PorousScaling, epsilons: Sequence[float]) -> SigmaLimit:
    """Numerical limit probe: fit log sigma against log eps over shrinking eps.

    A positive slope means sigma -> 0, a negative one sigma -> +inf, and a
    flat curve a finite limit (reported as the value at the smallest eps).
    """
    eps = np.sort(np.asarray(epsilons, dtype=float))
    if eps.size < 2:
        raise ValueError("need at least two epsilon samples")
    sig = np.array([sigma_ratio(scaling.at(e), strict=False) for e in eps])
    slope = np.polyfit(np.log(eps), np.log(sig), 1)[0]
    if abs(slope) < 1e-8:
        return SigmaLimit.finite(float(sig[0]))
    return SigmaLimit.zero() if slope > 0 else SigmaLimit.infinite()


def porosity(scaling: PorousScaling) -> float:
    """Void fraction ``1 - pi a^3 / (6 eps^3)`` of a cube holding one sphere."""
    if scaling.d != 3:
        raise DomainError("porosity is implemented for spherical obstacles in d = 3")
    a = scaling.check_fits()
    phi = 1.0 - math.pi * a**3 / (6.0 * scaling.epsilon**3)
    # a vanishing obstacle rounds to exactly 1
    if not 0.0 < phi <= 1.0:
        raise DomainError(f"porosity {phi} outside (0, 1)")
    return phi


def porosity_control(nu: float, tau: float, K: float) -> float:
    """``varpi = 1 - nu*tau/K``; exactly 1 for ``K = inf``."""
    if not (nu > 0 and tau > 0):
        raise DomainError("viscosity and relaxation time must be positive")
    if not K > 0:
        raise DomainError("permeability K must be positive")
    if math.isinf(K):
        return 1.0
    varpi = 1.0 - nu * tau / K
    if varpi < 0:
        raise DomainError(
            f"porosity control varpi = {varpi:.6g} < 0: damping nu*tau/K exceeds one, "
            "outside the validity of the homogenized equilibrium"
        )
    return varpi


def porosity_control_diffusive(nu: float, eps_param: float, K: float) -> float:
    """``varpi_eps = 1 - 3 nu^2 eps^2 / K``, i.e. :func:`porosity_control` at ``tau = 3 nu eps^2``."""
    if not eps_param > 0:
        raise DomainError("scaling parameter must be positive")
    return porosity_control(nu, 3.0 * nu * eps_param**2, K)


def diffusive_tau(nu: float, eps_param: float) -> float:
    return 3.0 * nu * eps_param**2


@dataclass(frozen=True)
class KineticScaling:
    """Kinetic parameters tied to one macroscopic viscosity and permeability."""

    nu: float
    eps_param: float
    K: float
    tau: float
    varpi: float

    @classmethod
    def diffusive(cls, nu: float, eps_param: float, K: float) -> "KineticScaling":
        tau = diffusive_tau(nu, eps_param)
        return cls(nu=nu, eps_param=eps_param, K=K, tau=tau, varpi=porosity_control(nu, tau, K))

    @property
    def mean_thermal_speed(self) -> float:
        return math.sqrt(8.0 / (3.0 * math.pi)) / self.eps_param

    @property
    def mean_free_path(self) -> float:
        return math.sqrt(24.0 / math.pi) * self.nu * self.eps_param


def permeability_from_cell(sigma: float, A: float) -> float:
    """Scalar permeability ``K = sigma^2 A`` so that ``nu/K = nu / (sigma^2 A)``."""
    if not sigma > 0 or not A > 0:
        raise DomainError("sigma and A must be positive")
    return sigma**2 * A


def kinetic_viscosity(c_bar: float, l_f: float) -> float:
    """Viscosity ``pi c_bar l_f / 8`` of a gas with mean speed ``c_bar``."""
    return math.pi * c_bar * l_f / 8.0


def nondimensional_numbers(l_f: float, c_bar: float, U: float, L: float, nu: float):
    """Knudsen, Mach and Reynolds numbers ``(l_f/L, U/c_s, U L/nu)``.

    ``c_bar`` is the mean absolute thermal speed; the isothermal sound
    speed is ``c_s = sqrt(3 R theta) = c_bar sqrt(3 pi / 8)``.  With
    ``nu = kinetic_viscosity(c_bar, l_f)`` the three satisfy
    ``Re = sqrt(24/pi) Ma / Kn``.
    """
    for name, value in (("l_f", l_f), ("c_bar", c_bar), ("U", U), ("L", L), ("nu", nu)):
        if not value > 0:
            raise DomainError(f"{name} must be positive")
    c_s = c_bar * math.sqrt(3.0 * math.pi / 8.0)
    return l_f / L, U / c_s, U * L / nu


def regime_table(d: int, epsilons: Iterable[float], C: float, ns: Iterable[int]) -> list[dict]:
    """Rows ``(n, case, eps, a_eps, sigma_eps, phi, fits)`` for tabulating sigma(eps).

    sigma follows the power law even where the obstacle does not fit.  A
    touching obstacle (``a_eps == eps``) is flagged as not fitting but keeps
    its porosity; a larger one leaves the porosity undefined (nan).
    """
    rows = []
    for n in ns:
        base = PorousScaling.power_law(d, 1.0, C, n)
        label = classify_regime(base).case_label if d == 3 else ""
        for eps in epsilons:
            s = base.at(eps)
            a = s.obstacle_size
            fits = 0 < a < eps
            sig = sigma_ratio(s, strict=False)
            if d == 3 and a <= eps:
                phi = 1.0 - math.pi * a**3 / (6.0 * eps**3)
            else:
                phi = math.nan
            rows.append(
                dict(n=n, case=label, epsilon=eps, a_eps=a, sigma=sig, porosity=phi, fits=fits)
            )
    return rows
