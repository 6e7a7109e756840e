from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from storage_shape.feasibility.allocation import AllocationMatrix, verify_allocation
from storage_shape.feasibility.geometry import CertificateError, center, expected_inflow, inner
from storage_shape.netmodel.network import LoadsLike, StorageNetwork, loads_of, mean_load, shape_magnitude
from storage_shape.netmodel.rational import format_rational
from storage_shape.policies.routing import (
    EquilibriumPolicy,
    JoinShortestQueue,
    PerturbedEquilibriumPolicy,
    Policy,
    decide,
    first_min_position,
    last_max_position,
    local_loads,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DriftReport:
    expected_delta_f: Fraction
    contributions: tuple[Fraction, ...]
    closed_form_value: Fraction | None = None
    closed_form: str | None = None

    @property
    def match(self) -> bool | None:
        if self.closed_form_value is None:
            return None
        return self.closed_form_value == self.expected_delta_f

    def to_dict(self) -> dict:
        return {
            "delta_f": format_rational(self.expected_delta_f),
            "contributions": [format_rational(c) for c in self.contributions],
            "closed_form": None if self.closed_form_value is None else format_rational(self.closed_form_value),
            "closed_form_kind": self.closed_form,
            "match": self.match,
        }


@dataclass(frozen=True)
class JumpBoundResult:
    ok: bool
    magnitude: Fraction
    counterexamples: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class OptimalityResult:
    ok: bool
    jsq_value: Fraction
    other_value: Fraction


def delta_f_unit(x: LoadsLike, node: int, net: StorageNetwork) -> Fraction:
    """f(x + e_node) - f(x) = 2(x_node - m(x)) + 1 - 1/n."""
    loads = loads_of(x)
    m = mean_load(loads, net)
    return 2 * (loads[node] - m) + 1 - Fraction(1, net.n)


def _neighborhood_contributions(net: StorageNetwork, policy: Policy, loads: tuple[int, ...]) -> tuple[Fraction, ...]:
    decision = decide(policy, net, loads)
    unit = [delta_f_unit(loads, ell, net) for ell in range(net.n)]
    return tuple(
        sum((p * unit[s] for p, s in zip(decision.row(i), hood)), Fraction(0))
        for i, hood in enumerate(net.neighborhoods)
    )


def expected_drift_f(
    net: StorageNetwork,
    policy: Policy,
    x: LoadsLike,
    alpha: AllocationMatrix | None = None,
) -> DriftReport:
    """Exact E[f(X(m+1)) - f(X(m)) | X(m) = x] by enumerating the arrival outcomes.

    contributions[i] is the conditional expectation given the arrival stream is i. When the
    policy has a known closed form (JSQ needs `alpha`), it is evaluated alongside.
    """
    loads = loads_of(x)
    contributions = _neighborhood_contributions(net, policy, loads)
    total = sum((rate * c for rate, c in zip(net.rates, contributions)), Fraction(0))

    closed, kind = None, None
    if isinstance(policy, PerturbedEquilibriumPolicy):
        closed, kind = pserp_drift_closed_form(net, policy.alpha, policy.epsilon, loads), "pserp"
    elif isinstance(policy, EquilibriumPolicy):
        closed, kind = 1 - Fraction(1, net.n), "serp"
    elif isinstance(policy, JoinShortestQueue) and alpha is not None:
        closed, kind = jsq_drift_closed_form(net, alpha, loads), "jsq"
    return DriftReport(total, contributions, closed, kind)


def _require_solution(net: StorageNetwork, alpha: AllocationMatrix) -> None:
    check = verify_allocation(net, alpha)
    if not check.ok:
        raise ValueError("alpha does not solve the allocation system: " + "; ".join(check.violations))


def pserp_drift_closed_form(
    net: StorageNetwork, alpha: AllocationMatrix, epsilon: Fraction, x: LoadsLike
) -> Fraction:
    if not alpha.is_positive():
        raise ValueError("PSERP closed form needs a strictly positive allocation")
    if not 0 < epsilon < alpha.minimum():
        raise ValueError(f"epsilon {format_rational(epsilon)} outside (0, {format_rational(alpha.minimum())})")
    loads = loads_of(x)
    spread = 0
    for hood in net.neighborhoods:
        local = local_loads(loads, hood)
        spread += local[last_max_position(local)] - local[first_min_position(local)]
    return -2 * epsilon * spread + 1 - Fraction(1, net.n)


def jsq_drift_closed_form(net: StorageNetwork, alpha: AllocationMatrix, x: LoadsLike) -> Fraction:
    _require_solution(net, alpha)
    loads = loads_of(x)
    total = Fraction(0)
    for row, hood in zip(alpha.alpha, net.neighborhoods):
        local = local_loads(loads, hood)
        low = first_min_position(local)
        total += sum((a * (v - local[low]) for j, (a, v) in enumerate(zip(row, local)) if j != low), Fraction(0))
    return -2 * total + 1 - Fraction(1, net.n)


def jump_bound_check(x: LoadsLike, net: StorageNetwork) -> JumpBoundResult:
    """|f(x + e_l) - f(x)| <= 4 sqrt(f(x)) for every node, compared squared."""
    f = shape_magnitude(x, net)
    if f == 0:
        raise ValueError("jump bound needs a configuration with positive shape magnitude")
    bad = [ell for ell in range(net.n) if delta_f_unit(x, ell, net) ** 2 > 16 * f]
    return JumpBoundResult(ok=not bad, magnitude=f, counterexamples=bad)


def jsq_optimality_check(net: StorageNetwork, x: LoadsLike, other: Policy) -> OptimalityResult:
    jsq = expected_drift_f(net, JoinShortestQueue(), x).expected_delta_f
    value = expected_drift_f(net, other, x).expected_delta_f
    return OptimalityResult(ok=jsq <= value, jsq_value=jsq, other_value=value)


def certificate_drift_check(
    net: StorageNetwork, policy: Policy, x: LoadsLike, b: Sequence[Fraction]
) -> Fraction:
    """<F(E(p)), b> for p = decide(policy, x); a negative value means the certificate or policy is broken."""
    decision = decide(policy, net, x)
    value = inner(center(expected_inflow(net, decision.rows)), b)
    if value < 0:
        raise CertificateError(f"certificate drift {format_rational(value)} < 0 at x={list(loads_of(x))}")
    return value
