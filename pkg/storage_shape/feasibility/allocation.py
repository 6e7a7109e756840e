from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from storage_shape.config import EnumerationLimits
from storage_shape.feasibility.flows import transport
from storage_shape.netmodel.network import CheckResult, StorageNetwork
from storage_shape.netmodel.rational import format_rational, lcm_of_denominators

logger = logging.getLogger(__name__)


class EnumerationLimitError(ValueError):
    pass


class SearchExhaustedError(RuntimeError):
    pass


@dataclass(frozen=True)
class AllocationMatrix:
    alpha: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(tuple(Fraction(a) for a in row) for row in self.alpha))

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.alpha[i]

    def minimum(self) -> Fraction:
        return min(a for row in self.alpha for a in row)

    def is_positive(self) -> bool:
        return all(a > 0 for row in self.alpha for a in row)

    def to_strings(self) -> list[list[str]]:
        return [[format_rational(a) for a in row] for row in self.alpha]


@dataclass(frozen=True)
class SubsetCondition:
    slack: Fraction | None
    witness_subset: tuple[int, ...]


def check_subset_condition(net: StorageNetwork, limits: EnumerationLimits | None = None) -> SubsetCondition:
    """Minimum over proper non-empty J of n_J/n - sum_{j in J} lambda_j, with its witness.

    Subsets closed under the neighbor relation (no neighborhood outside J meets S_J) are
    skipped when their gap is exactly zero: they are tight for every solution, positive or not.
    For a connected network no proper subset is closed. Ties go to the lexicographically
    smallest sorted index tuple. slack is None when no subset remains.
    """
    limits = limits or EnumerationLimits()
    K = net.K
    if K > limits.max_subset_neighborhoods:
        raise EnumerationLimitError(
            f"K={K} exceeds the subset enumeration cap {limits.max_subset_neighborhoods}; "
            "use flow-based decision only"
        )

    # integer gaps: gap(J) * n * L = n_J * L - n * sum(a_j), with lambda_j = a_j / L
    L = lcm_of_denominators(net.rates)
    weights = [int(rate * L) for rate in net.rates]
    hood_masks = [sum(1 << s for s in hood) for hood in net.neighborhoods]
    node_hoods = [0] * net.n
    for i, hood in enumerate(net.neighborhoods):
        for s in hood:
            node_hoods[s] |= 1 << i
    touch_masks = []
    for hood in net.neighborhoods:
        touched = 0
        for s in hood:
            touched |= node_hoods[s]
        touch_masks.append(touched)

    full = (1 << K) - 1
    union = [0] * (1 << K)
    touches = [0] * (1 << K)
    weight = [0] * (1 << K)
    best_key: tuple[int, tuple[int, ...]] | None = None
    for mask in range(1, 1 << K):
        low = mask & -mask
        idx = low.bit_length() - 1
        rest = mask ^ low
        union[mask] = union[rest] | hood_masks[idx]
        touches[mask] = touches[rest] | touch_masks[idx]
        weight[mask] = weight[rest] + weights[idx]
        if mask == full:
            continue
        gap = union[mask].bit_count() * L - net.n * weight[mask]
        closed = touches[mask] == mask
        if closed and gap == 0:
            continue
        subset = tuple(i for i in range(K) if mask >> i & 1)
        key = (gap, subset)
        if best_key is None or key < best_key:
            best_key = key

    if best_key is None:
        return SubsetCondition(slack=None, witness_subset=())
    gap, subset = best_key
    return SubsetCondition(slack=Fraction(gap, net.n * L), witness_subset=subset)


def solve_nonneg_allocation(net: StorageNetwork) -> AllocationMatrix | None:
    """Non-negative solution of system (1) by integer max-flow; None when infeasible."""
    result = transport(net, list(net.rates), [Fraction(1, net.n)] * net.n)
    if not result.feasible:
        logger.info("no non-negative allocation: max flow %s of %s", result.flow_value, result.demand_total)
        return None
    return AllocationMatrix(result.flows)


def allocation_with_floor(net: StorageNetwork, epsilon: Fraction) -> AllocationMatrix | None:
    """Solution with every alpha_ij >= epsilon, via the lower-bound reduction to plain max-flow."""
    degree = [len(m) for m in net.memberships]
    supplies = [rate - len(hood) * epsilon for rate, hood in zip(net.rates, net.neighborhoods)]
    demands = [Fraction(1, net.n) - degree[ell] * epsilon for ell in range(net.n)]
    result = transport(net, supplies, demands)
    if not result.feasible:
        return None
    return AllocationMatrix(tuple(tuple(f + epsilon for f in row) for row in result.flows))


def solve_positive_allocation(
    net: StorageNetwork,
    *,
    condition: SubsetCondition | None = None,
    limits: EnumerationLimits | None = None,
) -> AllocationMatrix | None:
    """Strictly positive solution of system (1), or None when the subset slack is <= 0."""
    limits = limits or EnumerationLimits()
    condition = condition or check_subset_condition(net, limits)
    if condition.slack is not None and condition.slack <= 0:
        return None
    start = condition.slack if condition.slack is not None else Fraction(1, net.n)
    found = probe_positive_allocation(net, start, limits)
    if found is None:
        raise SearchExhaustedError(
            f"no positive allocation within {limits.max_epsilon_halvings} halvings although slack "
            f"{format_rational(start)} > 0"
        )
    return found


def probe_positive_allocation(
    net: StorageNetwork, start: Fraction, limits: EnumerationLimits | None = None
) -> AllocationMatrix | None:
    """Try epsilon = start / 2^k for k = 1..cap; semi-decision when the subset test is unavailable."""
    limits = limits or EnumerationLimits()
    for k in range(1, limits.max_epsilon_halvings + 1):
        epsilon = start / (1 << k)
        alloc = allocation_with_floor(net, epsilon)
        if alloc is not None:
            logger.debug("positive allocation found with epsilon=%s (k=%d)", epsilon, k)
            return alloc
    return None


def default_probe_start(net: StorageNetwork) -> Fraction:
    degree = max(len(m) for m in net.memberships) or 1
    per_row = min(rate / len(hood) for rate, hood in zip(net.rates, net.neighborhoods))
    return min(per_row, Fraction(1, net.n * degree)) * 2


def verify_allocation(net: StorageNetwork, alpha: AllocationMatrix) -> CheckResult:
    if net.K == 0 or not alpha.alpha:
        raise ValueError("allocation verification needs at least one neighborhood")
    if len(alpha.alpha) != net.K or any(len(row) != k for row, k in zip(alpha.alpha, net.kappa)):
        raise ValueError("allocation shape does not match the network's neighborhoods")

    violations: list[str] = []
    for i, row in enumerate(alpha.alpha):
        for j, a in enumerate(row):
            if a < 0:
                violations.append(f"alpha[{i}][{j}] = {format_rational(a)} is negative")
        residual = sum(row, Fraction(0)) - net.rates[i]
        if residual != 0:
            violations.append(f"row {i}: sum {format_rational(sum(row, Fraction(0)))} vs rate {format_rational(net.rates[i])} (residual {format_rational(residual)})")

    target = Fraction(1, net.n)
    for ell, members in enumerate(net.memberships):
        total = sum((alpha.alpha[i][j] for i, j in members), Fraction(0))
        if total != target:
            violations.append(f"node {ell}: sum {format_rational(total)} vs {format_rational(target)} (residual {format_rational(total - target)})")
    return CheckResult.from_violations(violations)
