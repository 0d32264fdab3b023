"""Exact S-adic geometry of numbers over the rationals.

Discrete Z[1/M]-modules in R^n x prod_p Q_p^n: enumeration of points in
S-adic balls, successive minima, covolumes, reduction, and exact checks of
Minkowski-type and covering-radius inequalities.
"""

from .errors import (
    FalsificationError,
    InconsistentConditionsError,
    IterationLimitError,
    NotPositiveDefiniteError,
    PreconditionError,
    RankDeficiencyError,
    SadicError,
    SingularMatrixError,
    SpanOverlapError,
    UnsupportedFieldError,
    ZeroContentError,
)
from .exactnum import INF, Magnitude, Ordering, Place, SConfig, SurdSum, abs_at, compare, valuation
from .linalg import (
    Radius,
    SMatrix,
    SVector,
    VolumeValue,
    ball_volume,
    content,
    gram_schmidt_arch,
    gram_schmidt_nonarch,
    norm,
)
from .smodule import (
    MinimaResult,
    ModulePoint,
    SModule,
    balance,
    covolume,
    first_minimum,
    points_in_ball,
    rank_check,
    reduce,
    relative_covolume,
    successive_minima,
)
from .theorems import (
    BoundReport,
    SBox,
    check_sum_covolume,
    covering_radius_bounds,
    covering_radius_estimate,
    distance_to_module,
    mahler_probe,
    minkowski_box_point,
    submodules_up_to,
    verify_minkowski,
    verify_precise,
)
from .zlattice import IntegerLattice, QuadForm, closest_vector, enumerate_quadratic, hnf, lll, snf

__version__ = "0.1.0"
