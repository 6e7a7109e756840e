from storage_shape.policies.factory import build_policy
from storage_shape.policies.routing import (
    EquilibriumPolicy,
    JoinShortestQueue,
    PerturbedEquilibriumPolicy,
    Policy,
    PolicyDecision,
    argmax_node,
    argmin_node,
    decide,
)
from storage_shape.policies.table import TablePolicy, random_policy

__all__ = [
    "EquilibriumPolicy",
    "JoinShortestQueue",
    "PerturbedEquilibriumPolicy",
    "Policy",
    "PolicyDecision",
    "TablePolicy",
    "argmax_node",
    "argmin_node",
    "build_policy",
    "decide",
    "random_policy",
]
