"""Spectral splitting integrators for the semiclassical cubic Schroedinger equation
with a defect-based local error estimate and adaptive step control."""

from .controller import (ControllerConfig, MaxStepsExceeded, StepSizeUnderflow, Trajectory,
                         adaptive_integrate, fixed_integrate)
from .experiments import (DEFAULT_STATE, LaserConfig, LaserResult, ScanRecord, UnresolvedStateError,
                          default_grid, dyadic_times, emit, eps_scan, fit_slope, fixed_step_reference,
                          global_error_scan, laser_beam, load_records, noise_floor, order_scan,
                          read_snapshot, record_rows, scan_slope, wkb_scan, write_snapshot)
from .grid import Grid, l2_norm, make_grid, spectral_derivative
from .operators import Problem, ProblemParams
from .oracle import OracleConfig, StabilityError, oracle_solve
from .schemes import BUILTIN_SCHEMES, SplittingScheme, builtin_scheme, reference_scheme, triple_jump
from .states import InitialState, wkb
from .stepper import defect, estimate, local_error, reference_flow, split_step, step

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_SCHEMES", "ControllerConfig", "DEFAULT_STATE", "Grid", "InitialState", "LaserConfig", "LaserResult",
    "MaxStepsExceeded", "OracleConfig", "Problem", "ProblemParams", "ScanRecord", "SplittingScheme",
    "StabilityError", "StepSizeUnderflow", "Trajectory", "UnresolvedStateError", "adaptive_integrate",
    "builtin_scheme", "default_grid", "defect", "dyadic_times", "emit", "eps_scan", "estimate", "fit_slope", "fixed_integrate",
    "fixed_step_reference", "global_error_scan", "l2_norm", "laser_beam", "load_records", "local_error", "make_grid",
    "noise_floor", "oracle_solve", "order_scan", "read_snapshot", "record_rows", "reference_flow",
    "reference_scheme", "scan_slope", "spectral_derivative", "split_step", "step", "triple_jump", "wkb", "wkb_scan", "write_snapshot",
]
