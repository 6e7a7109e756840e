from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

import networkx as nx

from storage_shape.netmodel.rational import format_rational


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    violations: list[str] = field(default_factory=list)

    @classmethod
    def from_violations(cls, violations: list[str]) -> "CheckResult":
        return cls(ok=not violations, violations=list(violations))


@dataclass(frozen=True)
class StorageNetwork:
    n: int
    neighborhoods: tuple[tuple[int, ...], ...]
    rates: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "neighborhoods", tuple(tuple(int(s) for s in hood) for hood in self.neighborhoods))
        object.__setattr__(self, "rates", tuple(Fraction(r) for r in self.rates))

    @property
    def K(self) -> int:
        return len(self.neighborhoods)

    @property
    def kappa(self) -> tuple[int, ...]:
        return tuple(len(hood) for hood in self.neighborhoods)

    @cached_property
    def memberships(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """For every node, the (neighborhood, position) pairs that route into it."""
        per_node: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for i, hood in enumerate(self.neighborhoods):
            for j, node in enumerate(hood):
                if 0 <= node < self.n:
                    per_node[node].append((i, j))
        return tuple(tuple(items) for items in per_node)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "neighborhoods": [list(hood) for hood in self.neighborhoods],
            "rates": [format_rational(r) for r in self.rates],
        }


@dataclass(frozen=True)
class Configuration:
    loads: tuple[int, ...]

    def __post_init__(self) -> None:
        loads = tuple(int(v) for v in self.loads)
        if any(v < 0 for v in loads):
            raise ValueError("configuration loads must be non-negative")
        object.__setattr__(self, "loads", loads)

    def __len__(self) -> int:
        return len(self.loads)

    def plus_unit(self, node: int) -> "Configuration":
        loads = list(self.loads)
        loads[node] += 1
        return Configuration(tuple(loads))

    def shifted(self, c: int) -> "Configuration":
        return Configuration(tuple(v + c for v in self.loads))


@dataclass(frozen=True)
class Shape:
    """Shape F(x) stored as n*x - sum(x)*1 so that every coordinate stays an integer."""

    scaled: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.scaled)

    def coordinates(self) -> tuple[Fraction, ...]:
        n = self.n
        return tuple(Fraction(d, n) for d in self.scaled)

    def is_zero(self) -> bool:
        return not any(self.scaled)


LoadsLike = Union[Configuration, Sequence[int]]


def loads_of(x: LoadsLike) -> tuple[int, ...]:
    if isinstance(x, Configuration):
        return x.loads
    return tuple(int(v) for v in x)


def validate(net: StorageNetwork) -> CheckResult:
    violations: list[str] = []
    if net.n < 1:
        violations.append(f"node count must be >= 1, got {net.n}")
    if net.K < 1:
        violations.append("at least one neighborhood is required")
    if len(net.rates) != net.K:
        violations.append(f"{len(net.rates)} rates given for {net.K} neighborhoods")

    covered: set[int] = set()
    for i, hood in enumerate(net.neighborhoods):
        if not hood:
            violations.append(f"neighborhood {i} is empty")
            continue
        if any(b <= a for a, b in zip(hood, hood[1:])):
            violations.append(f"neighborhood {i} is not strictly increasing: {list(hood)}")
        outside = [s for s in hood if s < 0 or s >= net.n]
        if outside:
            violations.append(f"neighborhood {i} has nodes outside 0..{net.n - 1}: {outside}")
        covered.update(s for s in hood if 0 <= s < net.n)

    for node in range(max(net.n, 0)):
        if node not in covered:
            violations.append(f"union does not cover node {node}")

    for i, rate in enumerate(net.rates):
        if rate <= 0:
            violations.append(f"rate {i} must be positive, got {format_rational(rate)}")
    total = sum(net.rates, Fraction(0))
    if net.rates and total != 1:
        violations.append(f"rates sum to {format_rational(total)} ≠ 1")
    return CheckResult.from_violations(violations)


def require_valid(net: StorageNetwork) -> None:
    check = validate(net)
    if not check.ok:
        raise ValueError("invalid storage network: " + "; ".join(check.violations))


def neighbor_graph(net: StorageNetwork) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(net.n))
    for hood in net.neighborhoods:
        for a, b in zip(hood, hood[1:]):
            graph.add_edge(a, b)
    return graph


def is_connected(net: StorageNetwork) -> bool:
    # a path through each neighborhood gives the same components as the full clique
    return nx.is_connected(neighbor_graph(net))


def component_count(net: StorageNetwork) -> int:
    return nx.number_connected_components(neighbor_graph(net))


def _check_dimension(loads: tuple[int, ...], net: StorageNetwork) -> None:
    if len(loads) != net.n:
        raise ValueError(f"dimension mismatch: configuration has {len(loads)} entries, network has {net.n} nodes")


def shape_of(x: LoadsLike, net: StorageNetwork) -> Shape:
    loads = loads_of(x)
    _check_dimension(loads, net)
    total = sum(loads)
    return Shape(tuple(net.n * v - total for v in loads))


def shape_magnitude(x: LoadsLike, net: StorageNetwork) -> Fraction:
    shape = shape_of(x, net)
    return Fraction(sum(d * d for d in shape.scaled), net.n * net.n)


def mean_load(x: LoadsLike, net: StorageNetwork) -> Fraction:
    loads = loads_of(x)
    _check_dimension(loads, net)
    return Fraction(sum(loads), net.n)
