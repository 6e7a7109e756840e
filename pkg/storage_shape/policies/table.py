from __future__ import annotations

import hashlib
from fractions import Fraction
from typing import Hashable, Iterator, Sequence

from storage_shape.config import DEFAULT_TABLE_CLIP
from storage_shape.netmodel.network import StorageNetwork
from storage_shape.netmodel.rational import format_rational
from storage_shape.policies.routing import Policy, Row

TABLE_DENOMINATOR = 64


def clipped_differences(local: Sequence[int], clip: int) -> tuple[int, ...]:
    """Loads of S_i relative to its first node, clipped to [-clip, clip]."""
    base = local[0]
    return tuple(max(-clip, min(clip, v - base)) for v in local[1:])


def _digest_ints(*parts: object) -> Iterator[int]:
    token = ":".join(str(p) for p in parts).encode("utf-8")
    counter = 0
    while True:
        digest = hashlib.sha256(token + b"#" + str(counter).encode("ascii")).digest()
        for k in range(0, len(digest), 4):
            yield int.from_bytes(digest[k : k + 4], "big")
        counter += 1


def random_simplex_row(size: int, *parts: object) -> Row:
    """A point of the probability simplex with denominator TABLE_DENOMINATOR, fixed by `parts`."""
    if size == 1:
        return (Fraction(1),)
    draws = _digest_ints(*parts)
    cuts = sorted(next(draws) % (TABLE_DENOMINATOR + 1) for _ in range(size - 1))
    bounds = [0, *cuts, TABLE_DENOMINATOR]
    return tuple(Fraction(b - a, TABLE_DENOMINATOR) for a, b in zip(bounds, bounds[1:]))


class TablePolicy(Policy):
    """Rows looked up by the clipped load-difference vector of each neighborhood.

    With a seed, every (neighborhood, key) cell is a deterministic pseudo-random point of the
    simplex generated on first use; with explicit rows, every cell of neighborhood i is rows[i].
    """

    name = "table"

    def __init__(
        self,
        net: StorageNetwork,
        *,
        seed: int | None = None,
        rows: Sequence[Sequence[Fraction]] | None = None,
        clip: int = DEFAULT_TABLE_CLIP,
    ) -> None:
        if (seed is None) == (rows is None):
            raise ValueError("a table policy needs exactly one of seed or rows")
        if clip < 1:
            raise ValueError(f"table clip must be >= 1, got {clip}")
        self.kappa = net.kappa
        self.seed = seed
        self.clip = clip
        self._fixed: tuple[Row, ...] | None = None
        if rows is not None:
            self._fixed = tuple(tuple(Fraction(p) for p in row) for row in rows)
            self._check_fixed(net)
        self._cells: dict[tuple[int, tuple[int, ...]], Row] = {}

    @classmethod
    def random(cls, net: StorageNetwork, seed: int, clip: int = DEFAULT_TABLE_CLIP) -> "TablePolicy":
        return cls(net, seed=seed, clip=clip)

    @classmethod
    def constant(cls, net: StorageNetwork, rows: Sequence[Sequence[Fraction]]) -> "TablePolicy":
        return cls(net, rows=rows)

    def _check_fixed(self, net: StorageNetwork) -> None:
        assert self._fixed is not None
        if len(self._fixed) != net.K:
            raise ValueError(f"table has {len(self._fixed)} rows for {net.K} neighborhoods")
        for i, (row, size) in enumerate(zip(self._fixed, net.kappa)):
            if len(row) != size:
                raise ValueError(f"table row {i} has {len(row)} entries, neighborhood has {size} nodes")
            if any(p < 0 for p in row) or sum(row, Fraction(0)) != 1:
                raise ValueError(f"table row {i} is not a probability vector")

    def row(self, i: int, local: Sequence[int]) -> Row:
        if self._fixed is not None:
            return self._fixed[i]
        key = clipped_differences(local, self.clip)
        cell = self._cells.get((i, key))
        if cell is None:
            cell = random_simplex_row(len(local), self.seed, i, key)
            self._cells[(i, key)] = cell
        return cell

    def row_key(self, i: int, local: Sequence[int]) -> Hashable:
        if self._fixed is not None:
            return None
        return clipped_differences(local, self.clip)

    def describe(self) -> dict:
        if self._fixed is not None:
            return {"policy": self.name, "rows": [[format_rational(p) for p in row] for row in self._fixed]}
        return {"policy": self.name, "seed": self.seed, "clip": self.clip}


def random_policy(net: StorageNetwork, seed: int) -> TablePolicy:
    return TablePolicy.random(net, seed)
