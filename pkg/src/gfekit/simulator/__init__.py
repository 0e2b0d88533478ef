"""Spectral time integration and finite-difference residual grids."""
from .fd import FdResult, fd_residual_grid, residual_from_jet, stencil_weights
from .spectral import (
    CSV_HEADER,
    Field,
    Grid,
    PeriodicityError,
    RunConfig,
    RunResult,
    SimulationError,
    energy,
    enstrophy,
    run,
    stationarity_drift,
    step,
    stream_function,
    temporal_convergence,
)
