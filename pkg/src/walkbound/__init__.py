"""Random walks on free-group extensions and their boundary statistics.

The package covers reduced-word and boundary-ray arithmetic, automorphisms
with growth classification, semi-direct extensions of a free group by a
lattice or a free group, seeded walk simulation with drift and entropy
estimators, empirical hitting measures with stationarity and convergence
diagnostics, Poisson-style harmonic evaluation, and the coset tree of the
conjugation action together with its strips and liminf observers.
"""

from .errors import (
    BudgetError,
    ConfigError,
    ConvergenceError,
    InconclusiveGrowthError,
    TruncationError,
    WalkboundError,
)
from .words import Ray, Word, common_prefix_length, free_reduce
from .morphisms import (
    Automorphism,
    CancellationBound,
    GrowthReport,
    boundary_apply,
    cancellation_bound,
    classify_growth,
    default_margin,
    identity_automorphism,
    inner_automorphism,
)
from .groups import (
    ActingGroup,
    ExtElement,
    ModuliSpec,
    PermKernelSpec,
    ball,
    element_key,
    ext_identity,
    ext_inverse,
    ext_multiply,
    gauge_length,
    in_sublattice,
    standard_generators,
)
from .walk import (
    DriftEstimate,
    EntropyEstimate,
    PathBatch,
    StepMeasure,
    asymptotic_entropy_estimate,
    drift_estimate,
    entropy_depth_counts,
    entropy_from_counts,
    merge_batches,
    merge_depth_counts,
    sample_paths,
)
from .boundary import (
    ConvergenceTrace,
    CylinderDistribution,
    FirstReturnSample,
    HittingEstimate,
    act_on_ray,
    empirical_hitting_measure,
    extend_to_ray,
    first_return_sampler,
    sample_boundary_rays,
    stationarity_residual,
    track_convergence,
)
from .harmonic import (
    CylinderFunction,
    HarmonicityReport,
    PoissonValue,
    harmonicity_residual,
    poisson_eval,
)
from .tree import (
    CosetTree,
    CosetVertex,
    Direction,
    LiminfResult,
    StripProfile,
    TreeGeodesic,
    build_tree,
    liminf_observers,
    strip_exit_points,
    strip_growth_profile,
    twisted_power,
)
from .config import (
    RunConfig,
    build_acting_group,
    build_measure,
    emit_config,
    named_automorphisms,
    parse_config,
    sublattice_spec,
)
from .fixtures import fixture_names, fixture_text, load_fixture

__version__ = "0.1.0"

__all__ = [
    "ActingGroup",
    "Automorphism",
    "BudgetError",
    "CancellationBound",
    "ConfigError",
    "ConvergenceError",
    "ConvergenceTrace",
    "CosetTree",
    "CosetVertex",
    "CylinderDistribution",
    "CylinderFunction",
    "Direction",
    "DriftEstimate",
    "EntropyEstimate",
    "ExtElement",
    "FirstReturnSample",
    "GrowthReport",
    "HarmonicityReport",
    "HittingEstimate",
    "InconclusiveGrowthError",
    "LiminfResult",
    "ModuliSpec",
    "PathBatch",
    "PermKernelSpec",
    "PoissonValue",
    "Ray",
    "RunConfig",
    "StepMeasure",
    "StripProfile",
    "TreeGeodesic",
    "TruncationError",
    "WalkboundError",
    "Word",
    "act_on_ray",
    "asymptotic_entropy_estimate",
    "ball",
    "boundary_apply",
    "build_acting_group",
    "build_measure",
    "build_tree",
    "cancellation_bound",
    "classify_growth",
    "common_prefix_length",
    "default_margin",
    "drift_estimate",
    "element_key",
    "emit_config",
    "empirical_hitting_measure",
    "entropy_depth_counts",
    "entropy_from_counts",
    "ext_identity",
    "ext_inverse",
    "ext_multiply",
    "extend_to_ray",
    "first_return_sampler",
    "fixture_names",
    "fixture_text",
    "free_reduce",
    "gauge_length",
    "harmonicity_residual",
    "identity_automorphism",
    "in_sublattice",
    "inner_automorphism",
    "liminf_observers",
    "load_fixture",
    "merge_batches",
    "merge_depth_counts",
    "named_automorphisms",
    "parse_config",
    "poisson_eval",
    "sample_boundary_rays",
    "sample_paths",
    "stationarity_residual",
    "standard_generators",
    "strip_exit_points",
    "strip_growth_profile",
    "track_convergence",
    "twisted_power",
]
