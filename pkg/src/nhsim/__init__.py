"""Pseudospectral simulator and exact-solution engine for Hartree equations
with growing interaction kernels."""
from .closedform import (DilationError, HarmonicSetup, OmegaMode, SingularTimeError,
                         explicit_solution_2H, explicit_solution_nH, free_propagate,
                         mehler_propagate)
from .config import ConfigError, RunConfig, parse_config
from .grid import Grid, GridError, WaveField, field_from_function, gaussian
from .io import emit_series, parse_series, read_snapshot, write_snapshot
from .kernels import KernelError, PotentialSpec, audit_assumptions, audit_kernel_bound
from .observables import ObservableSeries, center_of_mass, energy, mass, momentum
from .solver import (BoundaryMassError, EquationSpec, NonFiniteError, SimulationRun,
                     SolverConfig, evolve, run_simulation)

__version__ = "0.1.0"

__all__ = [
    "BoundaryMassError", "ConfigError", "DilationError", "EquationSpec", "Grid", "GridError",
    "HarmonicSetup", "KernelError", "NonFiniteError", "ObservableSeries", "OmegaMode",
    "PotentialSpec", "RunConfig", "SimulationRun", "SingularTimeError", "SolverConfig",
    "WaveField", "audit_assumptions", "audit_kernel_bound", "center_of_mass", "emit_series",
    "energy", "evolve", "explicit_solution_2H", "explicit_solution_nH", "field_from_function",
    "free_propagate", "gaussian", "mass", "mehler_propagate", "momentum", "parse_config",
    "parse_series", "read_snapshot", "run_simulation", "write_snapshot",
]
