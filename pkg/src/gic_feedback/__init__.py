"""Time-varying feedback coding for the symmetric Gaussian interference channel."""

from .bootstrap import BootstrapParams, Schedule, bootstrap_params, build_schedule
from .exceptions import (
    DegenerateChannelError,
    DomainError,
    InfeasibleError,
    ScheduleError,
    SolverError,
)
from .montecarlo import SimConfig, SimStats, run_batch, run_trial
from .rate_theory import (
    ChannelParams,
    FixedPointSolution,
    RateResult,
    degraded_rate,
    gdof_ratio,
    kramer_solution,
    rho_max,
    symmetric_rate,
)

__version__ = "0.1.0"
