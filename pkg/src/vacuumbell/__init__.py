"""Two Unruh-DeWitt detectors coupled briefly to the scalar-field
vacuum: amplitudes, the harvested two-qubit state, entanglement and
Bell-violation measures, local filtering, and brute-force validation
paths, with a sweep/persistence CLI on top.

The numerical core is an adaptive Gauss-Kronrod quadrature tuned for
oscillatory half-line integrals plus a compiled pairwise double-sum
kernel (with a pure-NumPy fallback selected automatically at import).
"""

from .amplitudes import (
    AmplitudeError,
    AmplitudeSet,
    DetectorConfig,
    PairConfig,
    compute_amplitudes,
    cross_overlap,
    emission_norm,
    exchange_amplitude,
    x_norm_squared,
)
from .backend import BACKEND_NAME, HAVE_EXTENSION
from .experiments import (
    CONVENTION,
    CSV_COLUMNS,
    NPolicy,
    ResultRow,
    RunConfig,
    ScalingReport,
    SweepKind,
    emit_results,
    fit_scaling,
    read_results,
    run_sweep,
    scaling_check,
    single_point,
    sweep_filter_eta,
    sweep_gap,
    sweep_separation,
    sweep_superosc_index,
)
from .oracle import (
    ModeLattice,
    OracleComparison,
    OracleError,
    brute_chsh,
    build_lattice,
    compare_with_quadrature,
    default_omega_max,
    lattice_amplitudes,
)
from .presets import (
    DEFAULT_SWEEPS,
    PRESETS,
    asymmetric_hat_pair,
    deep_superosc_pair,
    default_pair,
    gap_study_pair,
    gaussian_pair,
)
from .quadrature import (
    QuadConfig,
    QuadResult,
    QuadratureError,
    integrate_finite,
    integrate_halfline,
    neumaier_sum,
)
from .states import (
    BellReport,
    FilterPair,
    TwoQubitState,
    apply_filter,
    bell_report,
    build_state,
    chsh_condition,
    correlation_matrix,
    horodecki_M,
    negativity,
    negativity_approx,
    optimal_filter,
    optimal_settings,
    state_from_matrix,
)
from .windows import (
    SelectedGaps,
    WindowKind,
    WindowSpec,
    eval_window,
    norm_sq,
    normalize_window,
    select_gaps,
    superosc_band,
    window_sup,
)

from .experiments import package_version as _package_version

__version__ = _package_version()

__all__ = [
    "AmplitudeError",
    "AmplitudeSet",
    "DetectorConfig",
    "PairConfig",
    "compute_amplitudes",
    "cross_overlap",
    "emission_norm",
    "exchange_amplitude",
    "x_norm_squared",
    "BACKEND_NAME",
    "HAVE_EXTENSION",
    "CONVENTION",
    "CSV_COLUMNS",
    "NPolicy",
    "ResultRow",
    "RunConfig",
    "ScalingReport",
    "SweepKind",
    "emit_results",
    "fit_scaling",
    "read_results",
    "run_sweep",
    "scaling_check",
    "single_point",
    "sweep_filter_eta",
    "sweep_gap",
    "sweep_separation",
    "sweep_superosc_index",
    "ModeLattice",
    "OracleComparison",
    "OracleError",
    "brute_chsh",
    "build_lattice",
    "compare_with_quadrature",
    "default_omega_max",
    "lattice_amplitudes",
    "DEFAULT_SWEEPS",
    "PRESETS",
    "asymmetric_hat_pair",
    "deep_superosc_pair",
    "default_pair",
    "gap_study_pair",
    "gaussian_pair",
    "QuadConfig",
    "QuadResult",
    "QuadratureError",
    "integrate_finite",
    "integrate_halfline",
    "neumaier_sum",
    "BellReport",
    "FilterPair",
    "TwoQubitState",
    "apply_filter",
    "bell_report",
    "build_state",
    "chsh_condition",
    "correlation_matrix",
    "horodecki_M",
    "negativity",
    "negativity_approx",
    "optimal_filter",
    "optimal_settings",
    "state_from_matrix",
    "SelectedGaps",
    "WindowKind",
    "WindowSpec",
    "eval_window",
    "norm_sq",
    "normalize_window",
    "select_gaps",
    "superosc_band",
    "window_sup",
    "__version__",
]
