from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from storage_shape.drift.oracle import expected_drift_f
from storage_shape.netmodel.network import StorageNetwork, shape_magnitude, shape_of
from storage_shape.policies.routing import Policy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DriftSample:
    loads: tuple[int, ...]
    magnitude: Fraction
    spread: Fraction
    drift: Fraction


@dataclass(frozen=True)
class NegativeDriftFit:
    """drift_f(x) <= -c sqrt(f(x)) for every sample with max |x_l - m(x)| >= a."""

    ok: bool
    c: float | None
    a: float | None
    points: int

    def to_dict(self) -> dict:
        return {"ok": self.ok, "c": self.c, "a": self.a, "points": self.points}


def shape_spread(loads: tuple[int, ...], net: StorageNetwork) -> Fraction:
    return Fraction(max(abs(d) for d in shape_of(loads, net).scaled), net.n)


def collect_samples(net: StorageNetwork, policy: Policy, configurations: Iterable[tuple[int, ...]]) -> list[DriftSample]:
    samples = []
    for loads in configurations:
        loads = tuple(loads)
        samples.append(
            DriftSample(
                loads=loads,
                magnitude=shape_magnitude(loads, net),
                spread=shape_spread(loads, net),
                drift=expected_drift_f(net, policy, loads).expected_delta_f,
            )
        )
    return samples


def fit_negative_drift(samples: list[DriftSample]) -> NegativeDriftFit:
    """Smallest spread threshold a over which the sampled drift stays below -c sqrt(f) with c > 0."""
    usable = [s for s in samples if s.magnitude > 0]
    if not usable:
        return NegativeDriftFit(ok=False, c=None, a=None, points=0)
    spread = np.array([float(s.spread) for s in usable])
    ratio = np.array([-float(s.drift) / np.sqrt(float(s.magnitude)) for s in usable])

    order = np.argsort(-spread, kind="stable")
    spread, ratio = spread[order], ratio[order]
    running = np.minimum.accumulate(ratio)
    group_end = np.flatnonzero(np.append(spread[1:] != spread[:-1], True))
    valid = group_end[running[group_end] > 0]
    if valid.size == 0:
        logger.info("no spread threshold gives negative drift over %d samples", len(usable))
        return NegativeDriftFit(ok=False, c=float(running[group_end[0]]), a=None, points=0)
    last = int(valid[-1])
    return NegativeDriftFit(ok=True, c=float(running[last]), a=float(spread[last]), points=last + 1)
