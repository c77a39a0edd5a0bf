"""aggdiff: 1D nonlocal aggregation with degenerate nonlinear diffusion.

A conservative method-of-lines solver for

    du/dt + d/dx(u * (dK/dx * u)) = r * d/dx(u^2 du/dx),   K(x) = exp(-|x|),

with an optional eps * u_xx regularization, plus the verifiable consequences
of the model's analysis wired in as runtime monitors: mass conservation,
the exp(t) envelope of the L2 norm, positivity, support confinement along
characteristics, the edge-speed floor exp(-2L) * mass, and the lifetime
bound 2L exp(2L)/mass.
"""

__version__ = "0.1.0"

from .grid import Grid, Field, lp_norm, ddx, interpolate
from .kernel import (
    KernelKind,
    KernelSpec,
    conv_k,
    conv_dk,
    conv_ddk,
    conv_k_direct,
    conv_dk_direct,
)
from .solver import (
    Status,
    SolverConfig,
    SolverState,
    rhs,
    compute_dt,
    step,
    detect_stop,
    run,
    mild_residual,
)
from .characteristics import (
    CharacteristicSet,
    CharacteristicTracker,
    CharacteristicEscapeError,
    BlowupReport,
    SupportEdges,
    advect,
    boundary_speed_check,
    blowup_bound,
    support_edges,
)
from .diagnostics import (
    DiagnosticsRecord,
    BoundViolation,
    RunReport,
    observe,
    check_bounds,
    fit_blowup_time,
)
from .oracle import (
    OracleConfig,
    Profile,
    indicator,
    exponential,
    gaussian,
    bump,
    quadrature_conv,
    reference_solve,
)
from .initial import build_initial_condition
from .config import RunConfigFile, ConfigError, parse_config, format_config_echo
from .experiments import run_experiment, check_experiment

__all__ = [
    "__version__",
    "Grid", "Field", "lp_norm", "ddx", "interpolate",
    "KernelKind", "KernelSpec", "conv_k", "conv_dk", "conv_ddk",
    "conv_k_direct", "conv_dk_direct",
    "Status", "SolverConfig", "SolverState", "rhs", "compute_dt", "step",
    "detect_stop", "run", "mild_residual",
    "CharacteristicSet", "CharacteristicTracker", "CharacteristicEscapeError",
    "BlowupReport", "SupportEdges", "advect", "boundary_speed_check",
    "blowup_bound", "support_edges",
    "DiagnosticsRecord", "BoundViolation", "RunReport", "observe",
    "check_bounds", "fit_blowup_time",
    "OracleConfig", "Profile", "indicator", "exponential", "gaussian", "bump",
    "quadrature_conv", "reference_solve",
    "build_initial_condition",
    "RunConfigFile", "ConfigError", "parse_config", "format_config_echo",
    "run_experiment", "check_experiment",
]
