from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable

from storage_shape.config import MIN_DEFAULT_TAU_CUTOFF
from storage_shape.netmodel.network import Configuration, LoadsLike, Shape, StorageNetwork, loads_of, require_valid
from storage_shape.policies.routing import Policy
from storage_shape.simulate.rng import ExponentialClock, StepStream, pick, thresholds

logger = logging.getLogger(__name__)


def default_tau_cutoff(max_steps: int) -> int:
    return max(MIN_DEFAULT_TAU_CUTOFF, max_steps // 10)


@dataclass(frozen=True)
class SimConfig:
    net: StorageNetwork
    policy: Policy
    initial: tuple[int, ...]
    max_steps: int
    replicas: int = 1
    seed: int = 0
    record_every: int = 100
    tau_cutoff: int | None = None
    continuous_time: bool = False

    def __post_init__(self) -> None:
        require_valid(self.net)
        object.__setattr__(self, "initial", Configuration(tuple(self.initial)).loads)
        if len(self.initial) != self.net.n:
            raise ValueError(f"initial configuration has {len(self.initial)} entries, network has {self.net.n} nodes")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.tau_cutoff is None:
            object.__setattr__(self, "tau_cutoff", default_tau_cutoff(self.max_steps))
        elif self.tau_cutoff < 1:
            raise ValueError("tau_cutoff must be >= 1")


@dataclass
class TrajectoryStats:
    replica_id: int
    steps: int
    tau_samples: list[int] = field(default_factory=list)
    censored_count: int = 0
    ended_censored: bool = False
    magnitude_series: list[tuple[int, Fraction]] = field(default_factory=list)
    timestamps: list[float] = field(default_factory=list)
    final_loads: tuple[int, ...] = ()
    final_shape: Shape = field(default_factory=lambda: Shape(()))
    max_abs_shape_coord: Fraction = Fraction(0)
    initial_shape_returns: int = 0
    first_hit: int | None = None
    approach_censored: bool = False
    neighborhood_counts: list[int] = field(default_factory=list)
    node_counts: list[int] = field(default_factory=list)
    routing_counts: list[list[int]] = field(default_factory=list)

    def empirical_allocation(self, net: StorageNetwork) -> list[list[float]]:
        """lambda_i * N_ij / N_i, an estimate of the allocation realised by the run."""
        out = []
        for rate, total, row in zip(net.rates, self.neighborhood_counts, self.routing_counts):
            out.append([float(rate) * c / total if total else 0.0 for c in row])
        return out


class EmbeddedChain:
    """Sampling rule of the chain observed at arrival epochs, with rows cached per policy key."""

    def __init__(self, net: StorageNetwork, policy: Policy) -> None:
        self.net = net
        self.policy = policy
        self.hood_cuts = thresholds(net.rates)
        self._row_cuts: list[dict[Hashable, tuple[int, ...]]] = [{} for _ in net.neighborhoods]

    def choose(self, loads: list[int] | tuple[int, ...], u_hood: int, u_node: int) -> tuple[int, int, int]:
        """(neighborhood, position in it, node) for one arrival."""
        i = pick(self.hood_cuts, u_hood)
        hood = self.net.neighborhoods[i]
        if len(hood) == 1:
            return i, 0, hood[0]
        local = [loads[s] for s in hood]
        key = self.policy.row_key(i, local)
        cache = self._row_cuts[i]
        cuts = cache.get(key)
        if cuts is None:
            cuts = thresholds(self.policy.row(i, local))
            cache[key] = cuts
        j = pick(cuts, u_node)
        return i, j, hood[j]


def step(
    net: StorageNetwork,
    policy: Policy,
    x: LoadsLike,
    stream: StepStream,
    chain: EmbeddedChain | None = None,
) -> tuple[Configuration, int, int]:
    chain = chain or EmbeddedChain(net, policy)
    loads = loads_of(x)
    u_hood, u_node = stream.pair()
    i, _, node = chain.choose(loads, u_hood, u_node)
    return Configuration(loads).plus_unit(node), i, node


def run_replica(cfg: SimConfig, replica_id: int) -> TrajectoryStats:
    """Run max_steps embedded steps; deterministic in (cfg, replica_id)."""
    net = cfg.net
    n = net.n
    chain = EmbeddedChain(net, cfg.policy)
    stream = StepStream(cfg.seed, replica_id)
    clock = ExponentialClock(cfg.seed, replica_id) if cfg.continuous_time else None

    loads = list(cfg.initial)
    total = sum(loads)
    squares = sum(v * v for v in loads)
    start = list(cfg.initial)
    cutoff = cfg.tau_cutoff
    stats = TrajectoryStats(
        replica_id=replica_id,
        steps=cfg.max_steps,
        neighborhood_counts=[0] * net.K,
        node_counts=[0] * n,
        routing_counts=[[0] * k for k in net.kappa],
    )
    widest = max(abs(n * v - total) for v in loads)
    # a non-zero initial shape is an approach phase, not an excursion from zero
    last_return: int | None = 0 if n * squares == total * total else None

    for m in range(1, cfg.max_steps + 1):
        u_hood, u_node = stream.pair()
        i, j, node = chain.choose(loads, u_hood, u_node)
        squares += 2 * loads[node] + 1
        loads[node] += 1
        total += 1
        stats.neighborhood_counts[i] += 1
        stats.routing_counts[i][j] += 1
        stats.node_counts[node] += 1
        now = clock.tick() if clock is not None else None

        widest = max(widest, n * max(loads) - total, total - n * min(loads))
        if n * squares == total * total:
            if last_return is None:
                stats.first_hit = m
                stats.approach_censored = m > cutoff
            elif m - last_return <= cutoff:
                stats.tau_samples.append(m - last_return)
            else:
                stats.censored_count += 1
            last_return = m
        if m % n == 0:
            offset = loads[0] - start[0]
            if all(a - b == offset for a, b in zip(loads, start)):
                stats.initial_shape_returns += 1
        if m % cfg.record_every == 0:
            stats.magnitude_series.append((m, Fraction(n * squares - total * total, n)))
            if now is not None:
                stats.timestamps.append(now)

    if last_return is None:
        stats.approach_censored = cfg.max_steps >= cutoff
    elif cfg.max_steps - last_return >= cutoff:
        stats.censored_count += 1
        stats.ended_censored = True
    stats.final_loads = tuple(loads)
    stats.final_shape = Shape(tuple(n * v - total for v in loads))
    stats.max_abs_shape_coord = Fraction(widest, n)
    logger.debug(
        "replica %d: %d returns, %d censored, final shape %s",
        replica_id,
        len(stats.tau_samples),
        stats.censored_count,
        stats.final_shape.scaled,
    )
    return stats


def _run_one(args: tuple[SimConfig, int]) -> TrajectoryStats:
    cfg, replica_id = args
    return run_replica(cfg, replica_id)


def run_replicas(cfg: SimConfig, workers: int = 1) -> list[TrajectoryStats]:
    """All replicas in replica-id order; the result does not depend on `workers`."""
    jobs = [(cfg, r) for r in range(cfg.replicas)]
    logger.info("simulating %d replicas x %d steps on %d worker(s)", cfg.replicas, cfg.max_steps, workers)
    if workers <= 1 or cfg.replicas == 1:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))
