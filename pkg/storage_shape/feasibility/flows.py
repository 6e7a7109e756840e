from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import networkx as nx
from networkx.algorithms.flow import dinitz

from storage_shape.netmodel.network import StorageNetwork
from storage_shape.netmodel.rational import lcm_of_denominators

logger = logging.getLogger(__name__)

SOURCE = "source"
SINK = "sink"


@dataclass(frozen=True)
class TransportResult:
    feasible: bool
    scale: int
    flow_value: Fraction
    demand_total: Fraction
    flows: tuple[tuple[Fraction, ...], ...]


def _hood(i: int) -> tuple[str, int]:
    return ("hood", i)


def _node(ell: int) -> tuple[str, int]:
    return ("node", ell)


def build_flow_network(net: StorageNetwork, supplies: list[int], demands: list[int]) -> nx.DiGraph:
    """source -> neighborhood i (supply) -> member nodes (uncapacitated) -> sink (demand)."""
    graph = nx.DiGraph()
    graph.add_node(SOURCE)
    graph.add_node(SINK)
    for i, hood in enumerate(net.neighborhoods):
        graph.add_edge(SOURCE, _hood(i), capacity=supplies[i])
        for node in hood:
            # no capacity attribute: networkx treats the arc as unbounded
            graph.add_edge(_hood(i), _node(node))
    for ell in range(net.n):
        graph.add_edge(_node(ell), SINK, capacity=demands[ell])
    return graph


def transport(net: StorageNetwork, supplies: list[Fraction], demands: list[Fraction]) -> TransportResult:
    """Route exactly `supplies` from neighborhoods to nodes meeting `demands`, with exact integers."""
    supply_total = sum(supplies, Fraction(0))
    demand_total = sum(demands, Fraction(0))
    empty = tuple(tuple(Fraction(0) for _ in hood) for hood in net.neighborhoods)
    if any(s < 0 for s in supplies) or any(d < 0 for d in demands) or supply_total != demand_total:
        return TransportResult(False, 1, Fraction(0), demand_total, empty)

    scale = lcm_of_denominators([*supplies, *demands])
    int_supplies = [int(s * scale) for s in supplies]
    int_demands = [int(d * scale) for d in demands]
    graph = build_flow_network(net, int_supplies, int_demands)
    residual = dinitz(graph, SOURCE, SINK, capacity="capacity")
    value = residual.graph["flow_value"]
    target = int(demand_total * scale)
    logger.debug("dinitz: scale=%d flow=%d target=%d", scale, value, target)

    flows = tuple(
        tuple(Fraction(max(residual[_hood(i)][_node(node)]["flow"], 0), scale) for node in hood)
        for i, hood in enumerate(net.neighborhoods)
    )
    return TransportResult(
        feasible=value == target,
        scale=scale,
        flow_value=Fraction(value, scale),
        demand_total=demand_total,
        flows=flows,
    )
