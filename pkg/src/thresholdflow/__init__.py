"""Multiphase thresholding dynamics with independent tensions and mobilities.

A periodic-torus implementation of the two-Gaussian thresholding scheme for
multiphase mean curvature flow: each step convolves the current partition
with a wide and a narrow heat kernel, forms pairwise comparison fields from
surface-tension/mobility coefficient matrices, and relabels each cell by the
minimal comparison value.  The package certifies the scheme against its
minimizing-movements characterization (exhaustive enumeration on small
grids), tracks the discrete energy-dissipation ledger on every run, and
measures sharp-interface observables (shrink rates, junction angles,
interface lengths) against their analytic targets.
"""

from .errors import (
    ConfigError,
    DimensionError,
    EmptyPhase,
    EnumerationTooLarge,
    InadmissibleMaterialError,
    InadmissibleTensions,
    NegativeSquareError,
    NonpositiveTimeError,
    NotShrinking,
    PartitionError,
    ResolutionError,
    ResolutionWarning,
    ScaleOrderError,
    ThresholdFlowError,
    ValidationError,
    WindowTooShort,
)
from .kernel_synthesis import (
    CheckResult,
    KernelCoefficients,
    MaterialSpec,
    ValidationReport,
    compute_coefficients,
    suggest_scales,
    triangle_margins,
    uniform_material,
    validate,
)
from .spectral_field import (
    GridSpec,
    LabelField,
    ScalarField,
    SpectralField,
    check_resolution,
    comparison_fields,
    gaussian_convolve,
    heat_multiplier,
    indicator,
    phase_fields,
    phase_volumes,
    read_labels,
    read_scalar,
    to_scalar,
    to_spectral,
    weighted_kernel_convolve,
    write_labels,
    write_scalar,
)
from .energetics import (
    EnergyBreakdown,
    StepReport,
    approximate_energy,
    distance,
    distance_halftime,
    energy_cross_form,
    metrics_header,
    movement_objective,
    write_metrics,
)
from .thresholding_engine import (
    SchemeConfig,
    Trajectory,
    VanishedPhase,
    run,
    threshold_step,
)
from .variational_oracle import (
    OracleCase,
    OracleVerdict,
    exhaustive_minimize,
    random_admissible_material,
    random_case,
    random_field_case,
    realspace_crosscheck,
    realspace_distance_halftime,
    relaxed_sampling_check,
    run_suite,
)
from .geometry_probes import (
    InterfaceMeasurement,
    JunctionReport,
    disk_radius,
    interface_length,
    junction_angles,
    shrink_rate_fit,
    write_probes_csv,
    young_angles,
    young_force_residual,
)
from .cli_harness import (
    EXPERIMENTS,
    InitialCondition,
    RunConfig,
    build_initial,
    main,
    parse_config,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
