from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Sequence

from storage_shape.feasibility.allocation import AllocationMatrix, verify_allocation
from storage_shape.netmodel.network import CheckResult, LoadsLike, StorageNetwork, loads_of
from storage_shape.netmodel.rational import format_rational

Row = tuple[Fraction, ...]
_ONE: Row = (Fraction(1),)


@dataclass(frozen=True)
class PolicyDecision:
    rows: tuple[Row, ...]

    def row(self, i: int) -> Row:
        return self.rows[i]

    def check(self) -> CheckResult:
        violations = []
        for i, row in enumerate(self.rows):
            if any(p < 0 for p in row):
                violations.append(f"row {i} has a negative entry")
            if sum(row, Fraction(0)) != 1:
                violations.append(f"row {i} sums to {format_rational(sum(row, Fraction(0)))}")
        return CheckResult.from_violations(violations)

    def to_strings(self) -> list[list[str]]:
        return [[format_rational(p) for p in row] for row in self.rows]


def first_min_position(local: Sequence[int]) -> int:
    best = 0
    for j in range(1, len(local)):
        if local[j] < local[best]:
            best = j
    return best


def last_max_position(local: Sequence[int]) -> int:
    best = 0
    for j in range(1, len(local)):
        if local[j] >= local[best]:
            best = j
    return best


def local_loads(loads: Sequence[int], hood: Sequence[int]) -> tuple[int, ...]:
    return tuple(loads[s] for s in hood)


def argmin_node(x: LoadsLike, hood: Sequence[int]) -> int:
    """First node of the neighborhood with minimal load."""
    if not hood:
        raise ValueError("neighborhood is empty")
    return hood[first_min_position(local_loads(loads_of(x), hood))]


def argmax_node(x: LoadsLike, hood: Sequence[int]) -> int:
    """Last node of the neighborhood with maximal load."""
    if not hood:
        raise ValueError("neighborhood is empty")
    return hood[last_max_position(local_loads(loads_of(x), hood))]


def _unit(size: int, position: int) -> Row:
    return tuple(Fraction(1) if j == position else Fraction(0) for j in range(size))


class Policy:
    """A local, shape-invariant routing policy.

    row(i, local) receives only the loads of S_i. row_key(i, local) is a hashable summary that
    determines the row, so callers may cache rows per key; None means the row never changes.
    """

    name = "policy"

    def row(self, i: int, local: Sequence[int]) -> Row:
        raise NotImplementedError

    def row_key(self, i: int, local: Sequence[int]) -> Hashable:
        return tuple(v - local[0] for v in local)

    def describe(self) -> dict:
        return {"policy": self.name}


class JoinShortestQueue(Policy):
    name = "jsq"

    def row(self, i: int, local: Sequence[int]) -> Row:
        return _unit(len(local), first_min_position(local))

    def row_key(self, i: int, local: Sequence[int]) -> Hashable:
        return first_min_position(local)


def _equilibrium_rows(net: StorageNetwork, alpha: AllocationMatrix) -> tuple[Row, ...]:
    return tuple(tuple(a / rate for a in row) for row, rate in zip(alpha.alpha, net.rates))


class EquilibriumPolicy(Policy):
    """p^(i)_j = alpha_ij / lambda_i for every configuration; strict=True demands alpha > 0."""

    def __init__(self, net: StorageNetwork, alpha: AllocationMatrix, *, strict: bool = False) -> None:
        check = verify_allocation(net, alpha)
        if not check.ok:
            raise ValueError("alpha does not solve the allocation system: " + "; ".join(check.violations))
        if strict and not alpha.is_positive():
            raise ValueError("a strictly positive allocation is required for SERP")
        self.alpha = alpha
        self.strict = strict
        self.name = "serp" if strict else "erp"
        self._rows = _equilibrium_rows(net, alpha)

    def row(self, i: int, local: Sequence[int]) -> Row:
        return self._rows[i]

    def row_key(self, i: int, local: Sequence[int]) -> Hashable:
        return None

    def describe(self) -> dict:
        return {"policy": self.name, "alpha": self.alpha.to_strings()}


class PerturbedEquilibriumPolicy(Policy):
    """SERP with epsilon / lambda_i moved from the last-max entry to the first-min entry of each row."""

    name = "pserp"

    def __init__(self, net: StorageNetwork, alpha: AllocationMatrix, epsilon: Fraction | None = None) -> None:
        check = verify_allocation(net, alpha)
        if not check.ok:
            raise ValueError("alpha does not solve the allocation system: " + "; ".join(check.violations))
        if not alpha.is_positive():
            raise ValueError("PSERP needs a strictly positive allocation")
        floor = alpha.minimum()
        epsilon = floor / 2 if epsilon is None else Fraction(epsilon)
        if not 0 < epsilon < floor:
            raise ValueError(
                f"epsilon must satisfy 0 < epsilon < min alpha = {format_rational(floor)}, got {format_rational(epsilon)}"
            )
        self.alpha = alpha
        self.epsilon = epsilon
        self._base = _equilibrium_rows(net, alpha)
        self._shift = tuple(epsilon / rate for rate in net.rates)

    def row(self, i: int, local: Sequence[int]) -> Row:
        if len(local) == 1:
            return _ONE
        low, high = first_min_position(local), last_max_position(local)
        row = list(self._base[i])
        row[low] += self._shift[i]
        row[high] -= self._shift[i]
        return tuple(row)

    def row_key(self, i: int, local: Sequence[int]) -> Hashable:
        if len(local) == 1:
            return None
        return first_min_position(local), last_max_position(local)

    def describe(self) -> dict:
        return {
            "policy": self.name,
            "alpha": self.alpha.to_strings(),
            "epsilon": format_rational(self.epsilon),
        }


def decide(policy: Policy, net: StorageNetwork, x: LoadsLike) -> PolicyDecision:
    loads = loads_of(x)
    if len(loads) != net.n:
        raise ValueError(f"dimension mismatch: configuration has {len(loads)} entries, network has {net.n} nodes")
    return PolicyDecision(tuple(policy.row(i, local_loads(loads, hood)) for i, hood in enumerate(net.neighborhoods)))
