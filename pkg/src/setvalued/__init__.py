"""Set-valued Riemann integration: compact-set calculus, Riemann sums of
multifunctions, support-function embeddings and infratype bounds."""

from .space import Space, SparseVector, pair, norm
from .sets import (
    CompactSet,
    ConvexPolytope,
    ESum,
    IndexedHull,
    L1Model,
    PointCloud,
    SetError,
    convex_hull,
    dist_point_to_eset,
    hausdorff_distance,
    is_convex_within,
    minkowski_sum,
    scale,
    set_norm,
    support_function,
)
from .partition import TaggedPartition, prime_partition, random_partition, schedule, uniform_partition

__all__ = [
    "Space", "SparseVector", "pair", "norm",
    "CompactSet", "ConvexPolytope", "ESum", "IndexedHull", "L1Model", "PointCloud", "SetError",
    "convex_hull", "dist_point_to_eset", "hausdorff_distance", "is_convex_within", "minkowski_sum",
    "scale", "set_norm", "support_function",
    "TaggedPartition", "prime_partition", "random_partition", "schedule", "uniform_partition",
]

__version__ = "0.1.0"
