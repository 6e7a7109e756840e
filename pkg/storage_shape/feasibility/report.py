from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from storage_shape.config import EnumerationLimits
from storage_shape.feasibility.allocation import (
    AllocationMatrix,
    EnumerationLimitError,
    check_subset_condition,
    default_probe_start,
    probe_positive_allocation,
    solve_nonneg_allocation,
    solve_positive_allocation,
)
from storage_shape.feasibility.geometry import SeparatingFunctional, origin_in_ri_D, separating_functional
from storage_shape.netmodel.network import StorageNetwork, component_count, is_connected, require_valid
from storage_shape.netmodel.rational import format_rational

logger = logging.getLogger(__name__)


class FeasibilityStatus(str, Enum):
    POSITIVE = "POSITIVE"
    NONNEG_ONLY = "NONNEG_ONLY"
    INFEASIBLE = "INFEASIBLE"
    UNDECIDED = "UNDECIDED"


def status_from_slack(slack: Fraction | None) -> FeasibilityStatus:
    if slack is None or slack > 0:
        return FeasibilityStatus.POSITIVE
    if slack == 0:
        return FeasibilityStatus.NONNEG_ONLY
    return FeasibilityStatus.INFEASIBLE


@dataclass
class FeasibilityReport:
    status: FeasibilityStatus
    slack: Fraction | None
    witness_subset: tuple[int, ...]
    allocation: AllocationMatrix | None
    certificate: SeparatingFunctional | None
    connected: bool
    components: int
    origin_in_ri_D: bool | None
    notes: list[str] = field(default_factory=list)

    @property
    def erp_exists(self) -> bool:
        return self.status in {FeasibilityStatus.POSITIVE, FeasibilityStatus.NONNEG_ONLY, FeasibilityStatus.UNDECIDED}

    @property
    def serp_exists(self) -> bool | None:
        if self.status == FeasibilityStatus.UNDECIDED:
            return None
        return self.status == FeasibilityStatus.POSITIVE

    def to_dict(self) -> dict:
        return {
            "connected": self.connected,
            "components": self.components,
            "status": self.status.value,
            "slack": None if self.slack is None else format_rational(self.slack),
            "witness_subset": list(self.witness_subset),
            "erp_exists": self.erp_exists,
            "serp_exists": self.serp_exists,
            "origin_in_ri_D": self.origin_in_ri_D,
            "allocation": None if self.allocation is None else self.allocation.to_strings(),
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "notes": list(self.notes),
        }


def analyze_network(net: StorageNetwork, limits: EnumerationLimits | None = None) -> FeasibilityReport:
    limits = limits or EnumerationLimits()
    require_valid(net)
    connected = is_connected(net)
    components = component_count(net)
    notes: list[str] = []
    if not connected:
        notes.append(
            "neighbor graph is disconnected: it is impossible to obtain positive recurrence in shape for any routing policy"
        )
        if components >= 4:
            notes.append("with at least 4 components even null recurrence in shape is impossible")

    nonneg = solve_nonneg_allocation(net)
    if net.K > limits.max_subset_neighborhoods:
        notes.append(f"K={net.K} above the subset enumeration cap; positivity decided by epsilon-flow probing only")
        if nonneg is None:
            return FeasibilityReport(
                FeasibilityStatus.INFEASIBLE, None, (), None, None, connected, components, False, notes
            )
        positive = probe_positive_allocation(net, default_probe_start(net), limits)
        status = FeasibilityStatus.POSITIVE if positive is not None else FeasibilityStatus.UNDECIDED
        return FeasibilityReport(
            status,
            None,
            (),
            positive or nonneg,
            None,
            connected,
            components,
            True if positive is not None else None,
            notes,
        )

    condition = check_subset_condition(net, limits)
    status = status_from_slack(condition.slack)
    if (status != FeasibilityStatus.INFEASIBLE) != (nonneg is not None):
        raise RuntimeError(
            f"subset condition (slack {condition.slack}) and max-flow disagree on non-negative feasibility"
        )
    positive = solve_positive_allocation(net, condition=condition, limits=limits)
    in_ri = origin_in_ri_D(net, condition)
    if in_ri != (positive is not None):
        raise RuntimeError("origin_in_ri_D disagrees with the positive allocation search")

    certificate = None
    if status != FeasibilityStatus.POSITIVE:
        try:
            certificate = separating_functional(net, condition)
        except EnumerationLimitError as exc:
            notes.append(f"certificate not verified: {exc}")
        if certificate is not None and not certificate.proper:
            notes.append("certificate annihilates every vertex of D (improper separation)")

    logger.info("analysis: status=%s slack=%s witness=%s", status.value, condition.slack, condition.witness_subset)
    return FeasibilityReport(
        status=status,
        slack=condition.slack,
        witness_subset=condition.witness_subset,
        allocation=positive if positive is not None else nonneg,
        certificate=certificate,
        connected=connected,
        components=components,
        origin_in_ri_D=in_ri,
        notes=notes,
    )
