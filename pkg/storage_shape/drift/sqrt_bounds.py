from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from storage_shape.config import SqrtPrecision
from storage_shape.drift.oracle import expected_drift_f
from storage_shape.netmodel.network import LoadsLike, StorageNetwork, loads_of, shape_magnitude
from storage_shape.policies.routing import Policy, decide

logger = logging.getLogger(__name__)


class PrecisionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def scale(self, k: Fraction) -> "Interval":
        a, b = self.lo * k, self.hi * k
        return Interval(min(a, b), max(a, b))

    def midpoint(self) -> float:
        return float((self.lo + self.hi) / 2)


def sqrt_interval(value: Fraction, bits: int) -> Interval:
    """Enclosure of sqrt(value) with endpoints on the grid 2^-bits."""
    if value < 0:
        raise ValueError("square root of a negative rational")
    scale = 1 << (2 * bits)
    scaled = value * scale
    floor_root = math.isqrt(math.floor(scaled))
    ceil_arg = math.ceil(scaled)
    ceil_root = math.isqrt(ceil_arg)
    if ceil_root * ceil_root < ceil_arg:
        ceil_root += 1
    unit = Fraction(1, 1 << bits)
    return Interval(floor_root * unit, ceil_root * unit)


@dataclass(frozen=True)
class GDriftReport:
    drift_g: Interval
    bound: Interval
    drift_f: Fraction
    bits: int
    max_jump: Interval

    def to_dict(self) -> dict:
        return {
            "drift_g": self.drift_g.midpoint(),
            "drift_g_interval": [float(self.drift_g.lo), float(self.drift_g.hi)],
            "bound": self.bound.midpoint(),
            "bits": self.bits,
            "max_g_jump": float(self.max_jump.hi),
        }


def _divide_by_interval(value: Fraction, denominator: Interval) -> Interval:
    if denominator.lo <= 0:
        raise PrecisionError("square root enclosure touches zero")
    a, b = value / denominator.lo, value / denominator.hi
    return Interval(min(a, b), max(a, b))


def expected_drift_g(
    net: StorageNetwork,
    policy: Policy,
    x: LoadsLike,
    precision: SqrtPrecision | None = None,
) -> GDriftReport:
    """E[g(X(m+1))] - g(x) for g = sqrt(f), with certified enclosures.

    Also encloses the concavity bound drift_f / (2 sqrt f(x)) and checks drift_g <= bound and
    every jump |g(x') - g(x)| <= 4, each up to the configured slack.
    """
    precision = precision or SqrtPrecision()
    loads = loads_of(x)
    f = shape_magnitude(loads, net)
    if f == 0:
        raise ValueError("g-drift needs a configuration with positive shape magnitude")

    decision = decide(policy, net, loads)
    outcomes: dict[int, Fraction] = {}
    for rate, row, hood in zip(net.rates, decision.rows, net.neighborhoods):
        for p, s in zip(row, hood):
            if p:
                outcomes[s] = outcomes.get(s, Fraction(0)) + rate * p
    after = {s: shape_magnitude(tuple(v + (ell == s) for ell, v in enumerate(loads)), net) for s in outcomes}
    drift_f = expected_drift_f(net, policy, loads).expected_delta_f

    bits = precision.start_bits
    while bits <= precision.max_bits:
        root = sqrt_interval(f, bits)
        total = Interval(Fraction(0), Fraction(0))
        jump_lo = jump_hi = Fraction(0)
        for s, weight in sorted(outcomes.items()):
            delta = sqrt_interval(after[s], bits) - root
            total = total + delta.scale(weight)
            jump_lo = max(jump_lo, delta.lo, -delta.hi)
            jump_hi = max(jump_hi, abs(delta.lo), abs(delta.hi))
        jump = Interval(jump_lo, jump_hi)
        bound = _divide_by_interval(drift_f / 2, root)
        if total.width <= precision.max_width and bound.width <= precision.max_width:
            break
        bits *= 2
    else:
        raise PrecisionError(f"g-drift enclosure wider than {precision.max_width} at {precision.max_bits} bits")

    slack = Fraction(precision.assertion_slack)
    if total.lo > bound.hi + slack:
        raise RuntimeError(f"g-drift {total.midpoint()} exceeds concavity bound {bound.midpoint()}")
    if jump.lo > 4 + slack:
        raise RuntimeError(f"g jump {float(jump.lo)} exceeds 4")
    logger.debug("g-drift at %s: [%s, %s] with %d bits", list(loads), float(total.lo), float(total.hi), bits)
    return GDriftReport(drift_g=total, bound=bound, drift_f=drift_f, bits=bits, max_jump=jump)
