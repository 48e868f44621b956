"""Mean-field dynamics of a two-mode condensate in a double well under decoherence."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    BlochVector,
    DensityMatrix,
    InitialState,
    LindbladPreset,
    LindbladSpec,
    ModelParams,
    ValidationError,
    bloch_from_density,
    bloch_rhs,
    build_hamiltonian,
    build_lindblad_operator,
    density_from_bloch,
    density_from_initial,
    dissipator,
    mean_field_energy,
    rhs,
)
from .integrate import (  # noqa: E402
    IntegrationError,
    IntegratorConfig,
    Method,
    NormDriftError,
    PositivityViolationError,
    StepUnderflowError,
    TimeGrid,
    TraceDriftError,
    Trajectory,
    evolve,
    evolve_gpe,
    steady_state,
)
from .analysis import (  # noqa: E402
    CriticalReport,
    WindowSummary,
    coherence_series,
    detect_critical_c,
    jump_sharpness_vs_gamma,
    self_trapping_indicator,
    window_summary,
)
from .experiment import (  # noqa: E402
    FIGURE_NAMES,
    CellResult,
    SweepResult,
    SweepSpec,
    export,
    figure_preset,
    load_run_config,
    load_sweep_json,
    run_sweep,
    split_gamma,
)

__all__ = [
    "__version__",
    "BlochVector",
    "DensityMatrix",
    "InitialState",
    "LindbladPreset",
    "LindbladSpec",
    "ModelParams",
    "ValidationError",
    "bloch_from_density",
    "bloch_rhs",
    "build_hamiltonian",
    "build_lindblad_operator",
    "density_from_bloch",
    "density_from_initial",
    "dissipator",
    "mean_field_energy",
    "rhs",
    "IntegrationError",
    "IntegratorConfig",
    "Method",
    "NormDriftError",
    "PositivityViolationError",
    "StepUnderflowError",
    "TimeGrid",
    "TraceDriftError",
    "Trajectory",
    "evolve",
    "evolve_gpe",
    "steady_state",
    "CriticalReport",
    "WindowSummary",
    "coherence_series",
    "detect_critical_c",
    "jump_sharpness_vs_gamma",
    "self_trapping_indicator",
    "window_summary",
    "FIGURE_NAMES",
    "CellResult",
    "SweepResult",
    "SweepSpec",
    "export",
    "figure_preset",
    "load_run_config",
    "load_sweep_json",
    "run_sweep",
    "split_gamma",
]
