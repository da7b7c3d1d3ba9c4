"""Pseudo-spectral benchmark suite for sixth-order phase-field gradient flows."""

from .controller import AdaptiveConfig, RunAbortedError, RunReport, run_adaptive, run_fixed_dt
from .integrators import ImplicitStepper, SemiImplicitStepper, make_stepper
from .models import DoubleWell, FchParams, PfcParams
from .schemes import SchemeKind, step_coeffs
from .solvers import DEFAULT_ETA_SWEEP, SolverConfig
from .spectral import Grid2D, PeriodicField, SpectralOps

__version__ = "0.1.0"

__all__ = [
    "AdaptiveConfig",
    "DEFAULT_ETA_SWEEP",
    "DoubleWell",
    "FchParams",
    "Grid2D",
    "ImplicitStepper",
    "PeriodicField",
    "PfcParams",
    "RunAbortedError",
    "RunReport",
    "SchemeKind",
    "SemiImplicitStepper",
    "SolverConfig",
    "SpectralOps",
    "make_stepper",
    "run_adaptive",
    "run_fixed_dt",
    "step_coeffs",
]
