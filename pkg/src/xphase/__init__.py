"""Extended-phase-space dynamics: MFQM and complex classical mechanics.

Both formalisms share the 4D phase space X = (x, y, p, q). The MFQM flavor
flows under the generator H+ with conserved constraint H-; the CCM flavor
flows under H_R with conserved H_I. The package provides exact polynomial
Hamiltonians with gradients, an adaptive integrator with event detection,
Gaussian phase-space ensembles, a 1D eigenvalue oracle, and the experiment
recipes built on them (double-well dwell ratios, uncertainty sweeps,
classical-limit contraction, rebound checks).
"""

from .analysis import (
    ComparisonRow,
    ComparisonTable,
    DwellSummary,
    ReboundReport,
    SHOEllipseParams,
    UncertaintySweepRow,
    barrier_height,
    ccm_double_well_run,
    ccm_initial_momenta,
    ccm_vs_quantum_report,
    chord_energy_logs,
    classical_limit_sweep,
    dwell_analysis,
    fit_sho_ellipse,
    identity_battery,
    mfqm_double_well_run,
    mfqm_level_set_bound,
    rebound_check,
    sample_ccm_level_set,
    sample_mfqm_level_set,
    stationary_points,
    uncertainty_sweep,
    well_minima,
)
from .dynamics import (
    Event,
    IntegratorConfig,
    Trajectory,
    conservation_report,
    conserved_logs,
    integrate,
    refine_crossing,
    well_crossings,
)
from .ensemble import (
    MomentSummary,
    SampleSet,
    moments,
    sample_gaussian_wigner,
    separatrix_fraction,
    transport,
)
from .errors import DomainError, NumericError, UsageError, XPhaseError
from .hamiltonians import (
    ExtendedSystem,
    Flavor,
    GradedValue,
    PhasePoint,
    StructureMatrices,
    check_gamma_relation,
    check_lambda_relation,
    chord_ends,
    complexification_identity,
    constraint,
    generator,
    h_classical,
    h_i,
    h_minus,
    h_plus,
    h_r,
    poisson_bracket,
    structure_matrices,
    vector_field,
)
from .oracle import (
    Grid1D,
    SpectrumResult,
    eigensolve,
    grid_probability_split,
    localized_combination,
    well_probabilities,
)
from .potentials import (
    Potential,
    double_well,
    from_config,
    harmonic,
    inverted_harmonic,
)

__version__ = "0.1.0"

__all__ = [
    "ComparisonRow", "ComparisonTable", "DwellSummary", "ReboundReport",
    "SHOEllipseParams", "UncertaintySweepRow", "barrier_height",
    "ccm_double_well_run", "ccm_initial_momenta", "ccm_vs_quantum_report",
    "chord_energy_logs", "classical_limit_sweep", "dwell_analysis",
    "fit_sho_ellipse", "identity_battery", "mfqm_double_well_run",
    "mfqm_level_set_bound", "rebound_check", "sample_ccm_level_set",
    "sample_mfqm_level_set", "stationary_points", "uncertainty_sweep",
    "well_minima",
    "Event", "IntegratorConfig", "Trajectory", "conservation_report",
    "conserved_logs", "integrate", "refine_crossing", "well_crossings",
    "MomentSummary", "SampleSet", "moments", "sample_gaussian_wigner",
    "separatrix_fraction", "transport",
    "DomainError", "NumericError", "UsageError", "XPhaseError",
    "ExtendedSystem", "Flavor", "GradedValue", "PhasePoint",
    "StructureMatrices", "check_gamma_relation", "check_lambda_relation",
    "chord_ends", "complexification_identity", "constraint", "generator",
    "h_classical", "h_i", "h_minus", "h_plus", "h_r", "poisson_bracket",
    "structure_matrices", "vector_field",
    "Grid1D", "SpectrumResult", "eigensolve", "grid_probability_split",
    "localized_combination", "well_probabilities",
    "Potential", "double_well", "from_config", "harmonic", "inverted_harmonic",
    "__version__",
]
