"""Counter-based random streams for reproducible replicas.

Every replica owns a Philox stream keyed by (replica_id, seed). Each embedded step consumes
exactly two raw 64-bit outputs, so the draws used at step m depend only on (seed, replica_id, m)
and never on how replicas are scheduled across workers. The optional continuous-time clock
reads the same key from a counter offset by 2^192, which the step stream never reaches.

Exact rational probabilities are mapped to 64-bit thresholds once, rounding to nearest
(Python's round, ties to even); each decision is biased by at most 2^-64.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Sequence

import numpy as np

U64 = 1 << 64
CHUNK = 8192


def stream_key(seed: int, replica_id: int) -> int:
    if not 0 <= seed < U64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if replica_id < 0:
        raise ValueError(f"replica id must be non-negative, got {replica_id}")
    return (replica_id << 64) | seed


def thresholds(probabilities: Sequence[Fraction]) -> tuple[int, ...]:
    """Cumulative 64-bit thresholds; the last one is always 2^64."""
    out = []
    acc = Fraction(0)
    for p in probabilities:
        acc += p
        out.append(round(acc * U64))
    out[-1] = U64
    return tuple(out)


def pick(cuts: Sequence[int], u: int) -> int:
    return bisect_right(cuts, u)


class StepStream:
    """Pairs of uniform 64-bit integers, one pair per embedded step."""

    def __init__(self, seed: int, replica_id: int = 0) -> None:
        self.key = stream_key(seed, replica_id)
        self._bits = np.random.Philox(key=self.key)
        self._buffer: list[int] = []
        self._pos = 0

    def pair(self) -> tuple[int, int]:
        if self._pos + 2 > len(self._buffer):
            self._buffer = self._bits.random_raw(2 * CHUNK).tolist()
            self._pos = 0
        a, b = self._buffer[self._pos], self._buffer[self._pos + 1]
        self._pos += 2
        return a, b


class ExponentialClock:
    """Unit-rate exponential inter-arrival times on an independent counter range."""

    def __init__(self, seed: int, replica_id: int = 0) -> None:
        bits = np.random.Philox(key=stream_key(seed, replica_id), counter=[0, 0, 0, 1])
        self._gen = np.random.Generator(bits)
        self._buffer: list[float] = []
        self._pos = 0
        self.now = 0.0

    def tick(self) -> float:
        if self._pos >= len(self._buffer):
            self._buffer = self._gen.standard_exponential(CHUNK).tolist()
            self._pos = 0
        self.now += self._buffer[self._pos]
        self._pos += 1
        return self.now
