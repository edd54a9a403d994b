"""Two-velocity stochastic hydrodynamics: effective thermodynamics, system
classification, an implicit three-layer integrator and its stability analysis."""
from .grid import Boundary, FieldState, Grid, gaussian_bump
from .pde import (
    PdeSystem,
    StateVec,
    SystemKind,
    TypeTag,
    characteristic_speed,
    classify,
    classify_field,
    make_general_t,
    make_modified_t0,
    make_nelson,
)
from .scheme import RunReport, RunStatus, SolverConfig, run
from .thermo import ThermoParams, effective_quantities

__version__ = "0.1.0"
