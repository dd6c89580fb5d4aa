"""Broken lines, influence of added points, and pinning for planar Poisson configurations."""

from .geometry import (
    AxisPoints,
    Domain,
    PlanarConfig,
    Point2,
    RandomSource,
    rotate_back,
    rotate_to_timecone,
    sample_poisson_in_domain,
    sample_poisson_on_axis,
)
from .lines import (
    BirthEvent,
    BrokenLine,
    LineSet,
    Segment,
    brute_force_chain,
    build_broken_lines,
    count_lines,
    extract_geodesic,
    lis_oracle,
    sample_boundary_births,
    separating_line_count,
)

__version__ = "0.1.0"

__all__ = [
    "AxisPoints", "Domain", "PlanarConfig", "Point2", "RandomSource", "rotate_back", "rotate_to_timecone",
    "sample_poisson_in_domain", "sample_poisson_on_axis", "BirthEvent", "BrokenLine", "LineSet", "Segment",
    "brute_force_chain", "build_broken_lines", "count_lines", "extract_geodesic", "lis_oracle",
    "sample_boundary_births", "separating_line_count", "__version__",
]
