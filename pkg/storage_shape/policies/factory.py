from __future__ import annotations

import logging

from storage_shape.api.schemas import PolicySpec
from storage_shape.feasibility.allocation import (
    AllocationMatrix,
    EnumerationLimitError,
    default_probe_start,
    probe_positive_allocation,
    solve_nonneg_allocation,
    solve_positive_allocation,
)
from storage_shape.netmodel.network import StorageNetwork, require_valid
from storage_shape.netmodel.rational import parse_rational
from storage_shape.policies.routing import EquilibriumPolicy, JoinShortestQueue, PerturbedEquilibriumPolicy, Policy
from storage_shape.policies.table import TablePolicy

logger = logging.getLogger(__name__)


class AllocationUnavailableError(ValueError):
    """The policy needs a solution of the allocation system that does not exist."""


def positive_allocation(net: StorageNetwork) -> AllocationMatrix | None:
    try:
        return solve_positive_allocation(net)
    except EnumerationLimitError:
        return probe_positive_allocation(net, default_probe_start(net))


def build_policy(spec: PolicySpec, net: StorageNetwork, alpha: AllocationMatrix | None = None) -> Policy:
    """Instantiate a policy spec on `net`; ERP/SERP/PSERP use the solver's allocation unless one is given."""
    require_valid(net)
    kind = spec.policy
    if kind == "jsq":
        return JoinShortestQueue()
    if kind == "table":
        if spec.rows is not None:
            return TablePolicy.constant(net, [[parse_rational(p) for p in row] for row in spec.rows])
        return TablePolicy.random(net, spec.seed if spec.seed is not None else 0, clip=spec.clip)

    if kind == "erp":
        alpha = alpha or solve_nonneg_allocation(net)
        if alpha is None:
            raise AllocationUnavailableError("no non-negative solution of the allocation system: ERP does not exist")
        return EquilibriumPolicy(net, alpha)

    alpha = alpha or positive_allocation(net)
    if alpha is None:
        raise AllocationUnavailableError(f"no strictly positive solution of the allocation system: {kind.upper()} does not exist")
    if kind == "serp":
        return EquilibriumPolicy(net, alpha, strict=True)
    epsilon = parse_rational(spec.epsilon) if spec.epsilon is not None else None
    policy = PerturbedEquilibriumPolicy(net, alpha, epsilon)
    if epsilon is None:
        logger.info("pserp epsilon defaulted to min(alpha)/2 = %s", policy.epsilon)
    return policy
