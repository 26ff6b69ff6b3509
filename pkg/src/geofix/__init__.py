"""Fixed-point iterations, rate bounds and axiom checks in geodesic metric spaces."""
from .errors import ConstructionError, DomainError, GeofixError, NumericFailure, UnsupportedCapability
from .geometry import (
    Euclidean,
    Lp,
    Modulus,
    PoincareDisk,
    cat0_modulus,
    convex_combination,
    distance,
    lp_modulus,
    modulus_eval,
    parse_space,
)
from .iteration import (
    GridSearch,
    OrbitTrace,
    TreeSearch,
    alternating_projections,
    asymptotic_center,
    minimal_displacement_estimate,
    parallel_orbit,
    periodic_point_probe,
    picard_orbit,
    regularity_index,
)
from .mappings import (
    Averaged,
    Composite,
    Identity,
    Projection,
    apply,
    check_lambda_firm,
    check_nonexpansive,
    fixed_point_set_probe,
)
from .rates import (
    ExtendedCount,
    RateInputs,
    RegularityCertificate,
    ap_rate,
    averaged_rate,
    certify,
    firmly_rate,
    lp_closed_form_rate,
    parallel_rate,
    parallel_rate_refined,
)
from .sets import Ball, GeodesicSegment, HalfSpace, Subtree, dist_to_set, membership, project
from .trees import MetricTree, TreePoint, tripod

__version__ = "0.1.0"
