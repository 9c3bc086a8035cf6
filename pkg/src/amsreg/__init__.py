"""Dimensions of linear systems on surfaces from pencils at infinity, and
regularity bounds for generic fat points in the plane."""

from .ams import (
    DeltaSequence,
    GraphRecipe,
    NewtonData,
    ResolutionCombinatorics,
    ams_degree,
    build_graph,
    delta_for_recipe,
    delta_to_proximity,
    enumerate_representatives,
    is_p_sufficient_chain,
    newton_polygons,
    validate_delta_sequence,
)
from .errors import (
    AmsregError,
    ArithmeticOverflowError,
    AssumptionViolationError,
    InputError,
    InternalError,
    OracleDegeneracyError,
)
from .oracle import PointSample, dim_linear_system, tau_oracle
from .proximity import (
    ProximityGraph,
    UnloadingTrace,
    UnloadStep,
    epsilon,
    excesses,
    inverse_proximity_matrix,
    is_almost_consistent,
    is_consistent,
    proximity_matrix,
    unload,
    unload_step,
)
from .regularity import (
    BoundReport,
    NonSpecialityVerdict,
    RegularityVerdict,
    best_beta,
    beta_bound,
    conjecture_family,
    exact_regularity,
    expected_dimension,
    nonspeciality_check,
    regularity_bracket,
)
from .surface import (
    DivisorClass,
    SurfaceModel,
    canonical_class,
    cone_coordinates,
    euler_characteristic,
    h0,
    h1,
    is_nef,
    nef_reduce,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
