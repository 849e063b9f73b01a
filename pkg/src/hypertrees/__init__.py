"""Determinantal random hypertrees and the coboundary expansion of their unions."""

from .cohomology import (
    coboundary,
    coboundary_expansion,
    coboundary_space_basis,
    coset_min_norm,
    expansion_constant,
    f2_cohomology_dim,
    is_minimal,
    meshulam_wallach_check,
)
from .complex import Cochain, Complex, cover_count, edge_norm, link, norm, read_complex, weight, write_complex
from .config import Caps, default_caps, parse_caps
from .detproc import PositiveContraction, bernstein_bound, count_law, sample, sample_union, subset_probability
from .errors import CapacityError, HypertreeError, InvalidDimension, InvalidInput, NumericalFailure, UndefinedWeight
from .homology import (
    enumerate_hypertrees,
    homology_order,
    is_hypertree,
    measure_weight,
    smith_normal_form,
)
from .hypertree import incidence, kernel, sample_hypertree, sample_union_complex
from .lab import Report, skeleton_alpha, theorem_trend

__all__ = [
    "Caps", "CapacityError", "Cochain", "Complex", "HypertreeError", "InvalidDimension", "InvalidInput",
    "NumericalFailure", "PositiveContraction", "Report", "UndefinedWeight", "bernstein_bound", "coboundary",
    "coboundary_expansion", "coboundary_space_basis", "coset_min_norm", "count_law", "cover_count",
    "default_caps", "edge_norm", "enumerate_hypertrees", "expansion_constant", "f2_cohomology_dim",
    "homology_order", "incidence", "is_hypertree", "is_minimal", "kernel", "link", "measure_weight",
    "meshulam_wallach_check", "norm", "parse_caps", "read_complex", "sample", "sample_hypertree",
    "sample_union", "sample_union_complex", "skeleton_alpha", "smith_normal_form", "subset_probability",
    "theorem_trend", "weight", "write_complex",
]
