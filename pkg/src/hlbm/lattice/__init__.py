"""Discrete D2Q9 realization of the homogenized BGK equation."""

from hlbm.lattice.d2q9 import C, CS2, OPP, W, check_isotropy
from hlbm.lattice.solver import (
    MAX_LATTICE_SPEED,
    InstabilityError,
    LatticeError,
    MacroFields,
    Simulation,
    SimulationConfig,
    equilibrium,
    nonequilibrium_from_gradients,
    run,
)

__all__ = [
    "C", "CS2", "OPP", "W", "check_isotropy",
    "MAX_LATTICE_SPEED", "InstabilityError", "LatticeError", "MacroFields",
    "Simulation", "SimulationConfig", "equilibrium",
    "nonequilibrium_from_gradients", "run",
]
