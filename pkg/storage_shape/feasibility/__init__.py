from storage_shape.feasibility.allocation import (
    AllocationMatrix,
    check_subset_condition,
    solve_nonneg_allocation,
    solve_positive_allocation,
    verify_allocation,
)
from storage_shape.feasibility.geometry import (
    SeparatingFunctional,
    origin_in_ri_D,
    polytope_vertices,
    separating_functional,
)
from storage_shape.feasibility.report import FeasibilityReport, FeasibilityStatus, analyze_network

__all__ = [
    "AllocationMatrix",
    "FeasibilityReport",
    "FeasibilityStatus",
    "SeparatingFunctional",
    "analyze_network",
    "check_subset_condition",
    "origin_in_ri_D",
    "polytope_vertices",
    "separating_functional",
    "solve_nonneg_allocation",
    "solve_positive_allocation",
    "verify_allocation",
]
