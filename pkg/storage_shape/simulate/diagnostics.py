from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import stats as sps

from storage_shape.config import DiagnosticThresholds
from storage_shape.simulate.engine import TrajectoryStats

logger = logging.getLogger(__name__)

PROXY_NOTE = "finite-sample proxy: recurrence and transience are infinite-time properties"


class Verdict(str, Enum):
    POSITIVE_RECURRENT_CONSISTENT = "POSITIVE_RECURRENT_CONSISTENT"
    TRANSIENT_CONSISTENT = "TRANSIENT_CONSISTENT"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class SlopeEstimate:
    slope: float
    ci_low: float
    ci_high: float
    replicas: int


@dataclass(frozen=True)
class TailFit:
    """log P(tau > t) ~ log A - c t."""

    c: float
    log_a: float
    r2: float
    points: int


@dataclass
class RecurrenceDiagnostic:
    verdict: Verdict
    slope: SlopeEstimate | None
    tail: TailFit | None
    mean_tau: float | None
    censoring_fraction: float
    tau_count: int
    censored_excursions: int
    tau_cutoff: int
    thresholds: DiagnosticThresholds
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "sqrt_magnitude_slope": None
            if self.slope is None
            else {
                "slope": self.slope.slope,
                "ci": [self.slope.ci_low, self.slope.ci_high],
                "replicas": self.slope.replicas,
            },
            "tail_exponent": None
            if self.tail is None
            else {"c": self.tail.c, "log_a": self.tail.log_a, "r2": self.tail.r2, "points": self.tail.points},
            "mean_tau": self.mean_tau,
            "censoring_fraction": self.censoring_fraction,
            "tau_count": self.tau_count,
            "censored_excursions": self.censored_excursions,
            "tau_cutoff": self.tau_cutoff,
            "thresholds": self.thresholds.as_dict(),
            "notes": [PROXY_NOTE, *self.notes],
        }


def _replica_slope(series: Sequence[tuple[int, object]], burn_in: float) -> tuple[float, float, int] | None:
    if not series:
        return None
    horizon = series[-1][0]
    points = [(m, math.sqrt(float(f))) for m, f in series if m > burn_in * horizon]
    if len(points) < 2:
        return None
    steps = np.array([p[0] for p in points], dtype=float)
    roots = np.array([p[1] for p in points])
    fit = sps.linregress(steps, roots)
    return float(fit.slope), float(fit.stderr), len(points)


def sqrt_magnitude_slope(
    replicas: Sequence[TrajectoryStats], thresholds: DiagnosticThresholds
) -> SlopeEstimate | None:
    """Least-squares slope of sqrt(f) against the step per replica, with a t interval across replicas."""
    fits = [f for f in (_replica_slope(r.magnitude_series, thresholds.burn_in_fraction) for r in replicas) if f]
    if not fits:
        return None
    q = (1 + thresholds.confidence) / 2
    slopes = np.array([f[0] for f in fits])
    if len(fits) == 1:
        slope, stderr, points = fits[0]
        if points < 3:
            return SlopeEstimate(slope, slope, slope, 1)
        half = float(sps.t.ppf(q, points - 2)) * stderr
        return SlopeEstimate(slope, slope - half, slope + half, 1)
    mean = float(slopes.mean())
    half = float(sps.t.ppf(q, len(fits) - 1)) * float(slopes.std(ddof=1)) / math.sqrt(len(fits))
    return SlopeEstimate(mean, mean - half, mean + half, len(fits))


def fit_tail(
    tau_samples: Sequence[int], censored: int, min_survivors: int
) -> TailFit | None:
    """Fit the log empirical survival of tau; censored excursions outlive every support point."""
    total = len(tau_samples) + censored
    if total == 0 or not tau_samples:
        return None
    counts = Counter(tau_samples)
    alive = total
    xs, ys = [], []
    for t in sorted(counts):
        alive -= counts[t]
        if alive < min_survivors:
            break
        xs.append(float(t))
        ys.append(math.log(alive / total))
    if len(xs) < 2:
        return None
    fit = sps.linregress(np.array(xs), np.array(ys))
    return TailFit(c=-float(fit.slope), log_a=float(fit.intercept), r2=float(fit.rvalue) ** 2, points=len(xs))


def restricted_mean_tau(tau_samples: Sequence[int], censored: int, tau_cutoff: int) -> float | None:
    total = len(tau_samples) + censored
    if total == 0:
        return None
    return (sum(tau_samples) + censored * tau_cutoff) / total


def aggregate(
    replicas: Sequence[TrajectoryStats],
    tau_cutoff: int,
    thresholds: DiagnosticThresholds | None = None,
) -> RecurrenceDiagnostic:
    if not replicas:
        raise ValueError("aggregate needs at least one replica")
    thresholds = thresholds or DiagnosticThresholds()
    pooled = [t for r in replicas for t in r.tau_samples]
    censored = sum(r.censored_count for r in replicas)
    censoring = sum(1 for r in replicas if r.censored_count or r.approach_censored) / len(replicas)

    slope = sqrt_magnitude_slope(replicas, thresholds)
    tail = fit_tail(pooled, censored, thresholds.min_survivors)
    mean_tau = restricted_mean_tau(pooled, censored, tau_cutoff)

    notes = []
    verdict = Verdict.INCONCLUSIVE
    if slope is None:
        notes.append("too few recorded points for a slope estimate")
    elif slope.ci_low > 0 and censoring > thresholds.transient_censoring:
        verdict = Verdict.TRANSIENT_CONSISTENT
    elif (
        slope.ci_low <= 0 <= slope.ci_high
        and censoring < thresholds.recurrent_censoring
        and tail is not None
        and tail.c > 0
        and tail.r2 >= thresholds.tail_min_r2
    ):
        verdict = Verdict.POSITIVE_RECURRENT_CONSISTENT
    if censored:
        notes.append(f"{censored} excursions censored at tau_cutoff={tau_cutoff}; mean_tau is a restricted mean")
    logger.info("verdict %s (censoring %.3f, %d tau samples)", verdict.value, censoring, len(pooled))
    return RecurrenceDiagnostic(
        verdict=verdict,
        slope=slope,
        tail=tail,
        mean_tau=mean_tau,
        censoring_fraction=censoring,
        tau_count=len(pooled),
        censored_excursions=censored,
        tau_cutoff=tau_cutoff,
        thresholds=thresholds,
        notes=notes,
    )


@dataclass(frozen=True)
class MgfRow:
    c: float
    value: float
    first_half: float | None
    stable: bool


@dataclass
class MgfTable:
    rows: list[MgfRow]
    largest_stable: float | None
    note: str | None = None

    def to_dict(self) -> dict:
        return {
            "rows": [
                {"c": r.c, "value": _finite(r.value), "first_half": _finite(r.first_half), "stable": r.stable}
                for r in self.rows
            ],
            "largest_stable_c": self.largest_stable,
            "note": self.note,
        }


def _finite(value: float | None) -> float | None:
    return value if value is not None and math.isfinite(value) else None


def _mgf(tau: np.ndarray, c: float) -> float:
    # shift by the largest exponent so a constant sample gives exp(c * tau) exactly
    shift = c * float(tau.max())
    try:
        scale = math.exp(shift)
    except OverflowError:
        return math.inf
    return scale * float(np.exp(c * tau - shift).mean())


def mgf_probe(
    tau_samples: Sequence[int],
    c_grid: Sequence[float],
    stability: float = 0.10,
    censored: int = 0,
) -> MgfTable:
    """Empirical E[exp(c tau)] per grid point; stable when the first half of the sample agrees within `stability`."""
    if not tau_samples:
        raise ValueError("mgf probe needs return-time samples")
    tau = np.array(tau_samples, dtype=float)
    half = tau[: len(tau) // 2]
    rows = []
    for c in c_grid:
        value = _mgf(tau, c)
        first = _mgf(half, c) if half.size else None
        stable = first is not None and math.isfinite(value) and abs(first / value - 1) <= stability
        rows.append(MgfRow(c=float(c), value=value, first_half=first, stable=stable))
    largest = max((r.c for r in rows if r.stable), default=None)
    note = None
    if censored:
        note = f"{censored} censored excursions excluded; values underestimate the true transform"
    return MgfTable(rows=rows, largest_stable=largest, note=note)
