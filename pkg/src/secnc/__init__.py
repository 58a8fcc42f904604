"""Secure unicast network coding when a single non-source node supplies the keys."""

from .audit import SecurityReport, audit_all, entropy_oracle, is_secure_subset, wiretap_matrices
from .codec import (
    GlobalEncoding,
    LinearCode,
    decodable,
    decode_matrix,
    propagate,
    restrict,
    sample_code,
    star_feasible,
)
from .field import FieldSpec, ff_inv, mat_mul, mat_rank, random_matrix, rowspace_contains
from .kernels import BACKEND
from .network import (
    AugmentedNetwork,
    CutCapacities,
    Network,
    augment_star,
    cut_capacities,
    mincut,
    parse_network,
    topo_order,
)
from .region import RatePoint, feasible, max_rate, region_boundary

__version__ = "0.1.0"
