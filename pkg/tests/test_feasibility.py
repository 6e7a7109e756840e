from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest

from storage_shape.config import EnumerationLimits
from storage_shape.feasibility import (
    AllocationMatrix,
    FeasibilityStatus,
    analyze_network,
    check_subset_condition,
    origin_in_ri_D,
    polytope_vertices,
    separating_functional,
    solve_nonneg_allocation,
    solve_positive_allocation,
    verify_allocation,
)
from storage_shape.feasibility.allocation import EnumerationLimitError
from storage_shape.feasibility.geometry import vertex_products
from storage_shape.netmodel.network import StorageNetwork
from tests.conftest import make_net, three_pairs_with
from tests.oracles import lp_max, oracle_status, random_network

F = Fraction


def test_subset_slack_examples(three_pairs, boundary_pairs, singleton_net):
    symmetric = check_subset_condition(three_pairs)
    assert symmetric.slack == F(1, 3)
    assert symmetric.witness_subset == (0,)

    boundary = check_subset_condition(boundary_pairs)
    assert boundary.slack == 0
    assert boundary.witness_subset == (0,)

    overfed = check_subset_condition(singleton_net)
    assert overfed.slack == F(-1, 6)
    assert overfed.witness_subset == (0,)


def test_subset_condition_refuses_large_k(three_pairs):
    with pytest.raises(EnumerationLimitError, match="use flow-based decision only"):
        check_subset_condition(three_pairs, EnumerationLimits(max_subset_neighborhoods=2))


def test_single_neighborhood_has_no_proper_subset(single_pair):
    condition = check_subset_condition(single_pair)
    assert condition.slack is None
    assert condition.witness_subset == ()


def test_nonneg_allocation_examples(single_pair, singleton_net, three_pairs):
    alpha = solve_nonneg_allocation(single_pair)
    assert alpha.alpha == ((F(1, 2), F(1, 2)),)

    assert solve_nonneg_allocation(singleton_net) is None

    symmetric = solve_nonneg_allocation(three_pairs)
    assert verify_allocation(three_pairs, symmetric).ok


def test_positive_allocation_examples(three_pairs, boundary_pairs, six_pairs):
    alpha = solve_positive_allocation(three_pairs)
    assert alpha.is_positive()
    assert [sum(row) for row in alpha.alpha] == [F(1, 3)] * 3
    assert verify_allocation(three_pairs, alpha).ok

    assert solve_positive_allocation(boundary_pairs) is None

    six = solve_positive_allocation(six_pairs)
    assert six.is_positive()
    assert verify_allocation(six_pairs, six).ok


def test_verify_allocation_reports_column_residuals(three_pairs):
    uniform = AllocationMatrix(((F(1, 6), F(1, 6)),) * 3)
    assert verify_allocation(three_pairs, uniform).ok

    lopsided = AllocationMatrix(((F(1, 3), 0), (F(1, 3), 0), (F(1, 3), 0)))
    check = verify_allocation(three_pairs, lopsided)
    assert not check.ok
    assert any(v.startswith("node 0: sum 2/3 vs 1/3") for v in check.violations)
    assert any(v.startswith("node 2: sum 0 vs 1/3") for v in check.violations)
    assert not any(v.startswith("node 1") for v in check.violations)


def test_verify_allocation_needs_neighborhoods():
    empty = StorageNetwork(n=1, neighborhoods=(), rates=())
    with pytest.raises(ValueError, match="at least one neighborhood"):
        verify_allocation(empty, AllocationMatrix(()))


def test_polytope_vertices_examples(single_pair, singleton_net):
    assert set(polytope_vertices(single_pair)) == {(F(1, 2), F(-1, 2)), (F(-1, 2), F(1, 2))}
    assert set(polytope_vertices(singleton_net)) == {
        (F(2, 3), F(-1, 3), F(-1, 3)),
        (F(1, 6), F(1, 6), F(-1, 3)),
        (F(1, 6), F(-1, 3), F(1, 6)),
    }
    assert polytope_vertices(make_net(1, [[0]], ["1"])) == [(F(0),)]


def test_polytope_vertex_guard(six_pairs):
    with pytest.raises(EnumerationLimitError, match="vertex enumeration guard"):
        polytope_vertices(six_pairs, EnumerationLimits(max_polytope_vertices=10))


def test_origin_in_relative_interior(three_pairs, boundary_pairs, singleton_net):
    assert origin_in_ri_D(three_pairs) is True
    assert origin_in_ri_D(boundary_pairs) is False
    assert origin_in_ri_D(singleton_net) is False


def test_certificate_for_overfed_node(singleton_net):
    functional = separating_functional(singleton_net)
    assert functional.b == (F(2, 3), F(-1, 3), F(-1, 3))
    products = vertex_products(polytope_vertices(singleton_net), functional)
    assert sorted(products) == [F(1, 6), F(1, 6), F(2, 3)]
    assert functional.proper


def test_certificate_on_boundary(boundary_pairs):
    functional = separating_functional(boundary_pairs)
    assert functional.b == (F(1, 3), F(1, 3), F(-2, 3))
    vertices = polytope_vertices(boundary_pairs)
    assert all(p >= 0 for p in vertex_products(vertices, functional))


def test_certificate_on_disconnected_imbalance():
    net = make_net(4, [[0, 1], [2, 3]], ["3/4", "1/4"])
    functional = separating_functional(net)
    assert functional.witness_subset == (0,)
    assert functional.b == (F(1, 2), F(1, 2), F(-1, 2), F(-1, 2))
    assert all(p >= 0 for p in vertex_products(polytope_vertices(net), functional))


def test_certificate_refused_when_positive(three_pairs):
    with pytest.raises(ValueError, match="no certificate: positive solution exists"):
        separating_functional(three_pairs)


def test_analyze_symmetric_pairs(three_pairs):
    report = analyze_network(three_pairs)
    payload = report.to_dict()
    assert payload["connected"] is True
    assert payload["status"] == "POSITIVE"
    assert payload["erp_exists"] is True
    assert payload["serp_exists"] is True
    assert payload["certificate"] is None
    assert payload["slack"] == "1/3"


def test_analyze_overfed_node_carries_certificate(singleton_net):
    report = analyze_network(singleton_net)
    assert report.status == FeasibilityStatus.INFEASIBLE
    assert report.allocation is None
    assert report.certificate is not None
    assert report.erp_exists is False


def test_analyze_disconnected_network_warns():
    report = analyze_network(make_net(4, [[0, 1], [2, 3]], ["1/2", "1/2"]))
    assert report.connected is False
    assert report.components == 2
    assert any("impossible to obtain positive recurrence" in note for note in report.notes)


def test_analyze_many_components_adds_null_recurrence_note():
    report = analyze_network(make_net(4, [[0], [1], [2], [3]], ["1/4"] * 4))
    assert report.components == 4
    assert any("null recurrence" in note for note in report.notes)


def test_analyze_above_cap_probes_only(three_pairs, boundary_pairs, singleton_net):
    limits = EnumerationLimits(max_subset_neighborhoods=1)

    positive = analyze_network(three_pairs, limits)
    assert positive.status == FeasibilityStatus.POSITIVE
    assert positive.allocation.is_positive()

    undecided = analyze_network(boundary_pairs, limits)
    assert undecided.status == FeasibilityStatus.UNDECIDED
    assert undecided.serp_exists is None
    assert verify_allocation(boundary_pairs, undecided.allocation).ok

    assert analyze_network(singleton_net, limits).status == FeasibilityStatus.INFEASIBLE


def test_analyze_rejects_invalid_network():
    with pytest.raises(ValueError, match="union does not cover node 1"):
        analyze_network(make_net(2, [[0]], ["1"]))


@pytest.mark.parametrize("k", range(1, 12))
def test_three_pairs_sweep_matches_strict_threshold(k):
    lam = F(k, 12)
    rest = (1 - lam) / 2
    report = analyze_network(three_pairs_with(lam, rest, rest))
    if max(lam, rest) < F(2, 3):
        assert report.status == FeasibilityStatus.POSITIVE
    elif lam == F(2, 3):
        assert report.status == FeasibilityStatus.NONNEG_ONLY
    else:
        assert report.status == FeasibilityStatus.INFEASIBLE


SIX_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _six_pairs_rates(rng: np.random.Generator) -> list[Fraction]:
    cuts = sorted(int(c) for c in rng.choice(np.arange(1, 24), size=5, replace=False))
    bounds = [0, *cuts, 24]
    return [F(b - a, 24) for a, b in zip(bounds, bounds[1:])]


def test_six_pairs_positive_iff_strict_pair_and_triangle_bounds():
    rng = np.random.default_rng(2024)
    triangles = [tuple(t) for t in itertools.combinations(range(4), 3)]
    for _ in range(200):
        rates = _six_pairs_rates(rng)
        net = make_net(4, [list(p) for p in SIX_PAIRS], rates)
        pairs_ok = all(r < F(1, 2) for r in rates)
        triangles_ok = all(
            sum(r for pair, r in zip(SIX_PAIRS, rates) if set(pair) <= set(t)) < F(3, 4) for t in triangles
        )
        status = analyze_network(net).status
        assert (status == FeasibilityStatus.POSITIVE) == (pairs_ok and triangles_ok), rates


def test_exact_simplex_on_small_programs(three_pairs, boundary_pairs, singleton_net):
    assert lp_max([[1, 1]], [1], [1, 0]) == 1
    assert lp_max([[-1, -1], [1, 0]], [-2, 1], [0, 1]) == 1
    assert lp_max([[1, 1]], [-1], [1, 0]) is None
    assert oracle_status(three_pairs) == "POSITIVE"
    assert oracle_status(boundary_pairs) == "NONNEG_ONLY"
    assert oracle_status(singleton_net) == "INFEASIBLE"


def test_random_networks_agree_with_exact_simplex():
    rng = np.random.default_rng(11)
    for _ in range(500):
        net = random_network(rng)
        report = analyze_network(net)
        assert report.status.value == oracle_status(net), net
        positive = solve_positive_allocation(net)
        assert origin_in_ri_D(net) == (positive is not None)
        if report.allocation is not None:
            assert verify_allocation(net, report.allocation).ok
        if report.certificate is not None:
            products = vertex_products(polytope_vertices(net), report.certificate)
            assert all(p >= 0 for p in products)
