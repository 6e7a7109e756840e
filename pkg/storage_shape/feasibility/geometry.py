from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from storage_shape.config import EnumerationLimits
from storage_shape.feasibility.allocation import EnumerationLimitError, SubsetCondition, check_subset_condition
from storage_shape.netmodel.network import StorageNetwork
from storage_shape.netmodel.rational import format_rational

logger = logging.getLogger(__name__)

Vector = tuple[Fraction, ...]


class CertificateError(RuntimeError):
    pass


@dataclass(frozen=True)
class SeparatingFunctional:
    b: Vector
    witness_subset: tuple[int, ...]
    proper: bool

    def to_dict(self) -> dict:
        return {
            "b": [format_rational(v) for v in self.b],
            "witness_subset": list(self.witness_subset),
            "proper": self.proper,
        }


def center(vector: Sequence[Fraction]) -> Vector:
    """F: subtract the mean from every coordinate."""
    mean = sum(vector, Fraction(0)) / len(vector)
    return tuple(Fraction(v) - mean for v in vector)


def inner(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((Fraction(a) * Fraction(b) for a, b in zip(u, v)), Fraction(0))


def expected_inflow(net: StorageNetwork, rows: Sequence[Sequence[Fraction]]) -> Vector:
    """E(p): per-node arrival rate when neighborhood i routes by row p^(i)."""
    inflow = [Fraction(0)] * net.n
    for rate, hood, row in zip(net.rates, net.neighborhoods, rows):
        for node, p in zip(hood, row):
            inflow[node] += rate * Fraction(p)
    return tuple(inflow)


def polytope_vertices(net: StorageNetwork, limits: EnumerationLimits | None = None) -> list[Vector]:
    """Images F(sum_i lambda_i e_c(i)) over all choice functions c; D is their convex hull."""
    limits = limits or EnumerationLimits()
    count = math.prod(net.kappa)
    if count > limits.max_polytope_vertices:
        raise EnumerationLimitError(
            f"{count} choice functions exceed the vertex enumeration guard {limits.max_polytope_vertices}"
        )
    seen: set[Vector] = set()
    for choice in itertools.product(*net.neighborhoods):
        inflow = [Fraction(0)] * net.n
        for rate, node in zip(net.rates, choice):
            inflow[node] += rate
        seen.add(center(inflow))
    return sorted(seen)


def origin_in_ri_D(net: StorageNetwork, condition: SubsetCondition | None = None) -> bool:
    condition = condition or check_subset_condition(net)
    return condition.slack is None or condition.slack > 0


def separating_functional(
    net: StorageNetwork,
    condition: SubsetCondition | None = None,
    vertices: list[Vector] | None = None,
) -> SeparatingFunctional:
    condition = condition or check_subset_condition(net)
    if condition.slack is None or condition.slack > 0:
        raise ValueError("no certificate: positive solution exists")

    covered = {s for i in condition.witness_subset for s in net.neighborhoods[i]}
    share = Fraction(len(covered), net.n)
    b = tuple(1 - share if ell in covered else -share for ell in range(net.n))
    if not any(b) or sum(b) != 0:
        raise CertificateError(f"degenerate certificate from witness {list(condition.witness_subset)}")

    vertices = vertices if vertices is not None else polytope_vertices(net)
    products = [inner(v, b) for v in vertices]
    negative = [p for p in products if p < 0]
    if negative:
        raise CertificateError(f"certificate is negative on {len(negative)} polytope vertices (min {min(negative)})")
    proper = any(p > 0 for p in products)
    logger.debug("certificate b=%s proper=%s over %d vertices", b, proper, len(vertices))
    return SeparatingFunctional(b=b, witness_subset=condition.witness_subset, proper=proper)


def vertex_products(vertices: list[Vector], functional: SeparatingFunctional) -> list[Fraction]:
    return [inner(v, functional.b) for v in vertices]
