"""Joint phase-time array beam design, loss statistics and scheduling simulation."""

from jpta.geometry import ArrayGeometry, BeamGrid, Direction, build_beam_grid, steering_vector
from jpta.carrier import CarrierConfig, SubbandPlan, make_subband_plan, subcarrier_frequency
from jpta.solvers import (
    Architecture,
    DelayPhaseSolution,
    SolverOptions,
    equivalent_precoder,
    quantize_phases,
    solve,
    solve_all,
    solve_gd,
    solve_iterative,
    solve_ls,
    target_weights,
)
from jpta.metrics import (
    GainProfile,
    LossSample,
    LossSummary,
    effective_loss,
    gain_profile,
    monte_carlo_loss,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "Architecture",
    "BeamGrid",
    "CarrierConfig",
    "DelayPhaseSolution",
    "Direction",
    "GainProfile",
    "LossSample",
    "LossSummary",
    "SolverOptions",
    "SubbandPlan",
    "build_beam_grid",
    "effective_loss",
    "equivalent_precoder",
    "gain_profile",
    "make_subband_plan",
    "monte_carlo_loss",
    "quantize_phases",
    "solve",
    "solve_all",
    "solve_gd",
    "solve_iterative",
    "solve_ls",
    "steering_vector",
    "subcarrier_frequency",
    "summarize",
    "target_weights",
]
