from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from storage_shape.config import SqrtPrecision
from storage_shape.drift import (
    certificate_drift_check,
    collect_samples,
    delta_f_unit,
    expected_drift_f,
    expected_drift_g,
    fit_negative_drift,
    jsq_drift_closed_form,
    jsq_optimality_check,
    jump_bound_check,
    pserp_drift_closed_form,
    sample_configurations,
    sqrt_interval,
)
from storage_shape.drift.sqrt_bounds import PrecisionError
from storage_shape.feasibility import separating_functional, solve_positive_allocation
from storage_shape.feasibility.allocation import AllocationMatrix
from storage_shape.netmodel.network import shape_magnitude
from storage_shape.policies import (
    EquilibriumPolicy,
    JoinShortestQueue,
    PerturbedEquilibriumPolicy,
    TablePolicy,
    random_policy,
)
from tests.oracles import random_network

F = Fraction
UNIFORM = AllocationMatrix(((F(1, 6), F(1, 6)),) * 3)


def test_delta_f_unit_examples(three_pairs):
    assert delta_f_unit((2, 1, 0), 0, three_pairs) == F(8, 3)
    assert delta_f_unit((2, 1, 0), 2, three_pairs) == F(-4, 3)
    assert delta_f_unit((0, 0, 0), 1, three_pairs) == F(2, 3)


def test_delta_f_unit_matches_magnitude_difference(three_pairs):
    x = (5, 1, 3)
    for ell in range(3):
        bumped = tuple(v + (k == ell) for k, v in enumerate(x))
        assert delta_f_unit(x, ell, three_pairs) == shape_magnitude(bumped, three_pairs) - shape_magnitude(x, three_pairs)


def test_expected_drift_examples(three_pairs):
    jsq = expected_drift_f(three_pairs, JoinShortestQueue(), (2, 1, 0))
    assert jsq.expected_delta_f == F(-2, 3)
    assert jsq.contributions == (F(2, 3), F(-4, 3), F(-4, 3))
    assert jsq.match is None

    serp = EquilibriumPolicy(three_pairs, UNIFORM, strict=True)
    for x in [(2, 1, 0), (7, 0, 3), (0, 0, 0)]:
        report = expected_drift_f(three_pairs, serp, x)
        assert report.expected_delta_f == F(2, 3)
        assert report.match is True

    pserp = PerturbedEquilibriumPolicy(three_pairs, UNIFORM, F(1, 12))
    report = expected_drift_f(three_pairs, pserp, (2, 1, 0))
    assert report.expected_delta_f == 0
    assert report.closed_form == "pserp"
    assert report.match is True


def test_jsq_report_carries_closed_form_when_alpha_given(three_pairs):
    report = expected_drift_f(three_pairs, JoinShortestQueue(), (2, 1, 0), alpha=UNIFORM)
    assert report.to_dict() == {
        "delta_f": "-2/3",
        "contributions": ["2/3", "-4/3", "-4/3"],
        "closed_form": "-2/3",
        "closed_form_kind": "jsq",
        "match": True,
    }


def test_pserp_closed_form_examples(three_pairs):
    eps = F(1, 12)
    assert pserp_drift_closed_form(three_pairs, UNIFORM, eps, (2, 1, 0)) == 0
    assert pserp_drift_closed_form(three_pairs, UNIFORM, eps, (3, 3, 3)) == F(2, 3)
    assert pserp_drift_closed_form(three_pairs, UNIFORM, eps, (4, 0, 0)) == F(-2, 3)
    with pytest.raises(ValueError, match="outside"):
        pserp_drift_closed_form(three_pairs, UNIFORM, F(1, 6), (4, 0, 0))


def test_jsq_closed_form_examples(three_pairs):
    assert jsq_drift_closed_form(three_pairs, UNIFORM, (2, 1, 0)) == F(-2, 3)
    assert jsq_drift_closed_form(three_pairs, UNIFORM, (1, 1, 1)) == F(2, 3)
    assert jsq_drift_closed_form(three_pairs, UNIFORM, (4, 0, 0)) == -2


def test_jump_bound_examples(three_pairs, single_pair):
    assert jump_bound_check((2, 1, 0), three_pairs).ok
    result = jump_bound_check((1, 0), single_pair)
    assert result.ok
    assert result.magnitude == F(1, 2)
    with pytest.raises(ValueError, match="positive shape magnitude"):
        jump_bound_check((4, 4, 4), three_pairs)


def test_sqrt_interval_encloses_root():
    two = sqrt_interval(F(2), 40)
    assert two.lo <= F(math.isqrt(2 * 4**40), 2**40) <= two.hi
    assert two.lo * two.lo <= 2 <= two.hi * two.hi
    assert sqrt_interval(F(9, 4), 10).lo == sqrt_interval(F(9, 4), 10).hi == F(3, 2)
    with pytest.raises(ValueError):
        sqrt_interval(F(-1), 10)


def test_g_drift_respects_concavity_bound(three_pairs):
    report = expected_drift_g(three_pairs, JoinShortestQueue(), (2, 1, 0))
    assert report.drift_f == F(-2, 3)
    assert report.bound.hi < -0.2357 + 1e-4
    assert float(report.drift_g.hi) <= float(report.bound.hi) + 1e-9
    assert report.drift_g.width <= F(1e-12)
    assert report.max_jump.hi <= 4


def test_g_drift_single_pair_serp(single_pair):
    serp = EquilibriumPolicy(single_pair, AllocationMatrix(((F(1, 2), F(1, 2)),)), strict=True)
    report = expected_drift_g(single_pair, serp, (1, 0))
    # (2, 0) has magnitude 2 and (1, 1) has magnitude 0
    expected = 0.5 * (math.sqrt(2) - math.sqrt(0.5)) + 0.5 * (0 - math.sqrt(0.5))
    assert abs(report.drift_g.midpoint() - expected) < 1e-12
    assert report.drift_g.hi <= report.bound.hi + F(1, 10**9)


def test_g_drift_refuses_zero_shape_and_reports_precision(three_pairs):
    with pytest.raises(ValueError, match="positive shape magnitude"):
        expected_drift_g(three_pairs, JoinShortestQueue(), (1, 1, 1))
    tight = SqrtPrecision(max_width=0.0, start_bits=8, max_bits=16)
    with pytest.raises(PrecisionError):
        expected_drift_g(three_pairs, JoinShortestQueue(), (2, 1, 0), tight)


def test_jsq_optimality_examples(three_pairs):
    serp = EquilibriumPolicy(three_pairs, UNIFORM, strict=True)
    result = jsq_optimality_check(three_pairs, (2, 1, 0), serp)
    assert result.ok
    assert (result.jsq_value, result.other_value) == (F(-2, 3), F(2, 3))
    balanced = jsq_optimality_check(three_pairs, (3, 3, 3), random_policy(three_pairs, 4))
    assert balanced.ok
    assert balanced.jsq_value == balanced.other_value == F(2, 3)


def test_certificate_drift_examples(singleton_net):
    b = separating_functional(singleton_net).b
    assert certificate_drift_check(singleton_net, JoinShortestQueue(), (0, 0, 0), b) == F(2, 3)
    to_node_one = TablePolicy.constant(singleton_net, [[1], [0, 1, 0]])
    assert certificate_drift_check(singleton_net, to_node_one, (0, 0, 0), b) == F(1, 6)
    for x in sample_configurations(singleton_net, seed=3, count=100, max_load=20):
        for policy in (JoinShortestQueue(), random_policy(singleton_net, sum(x))):
            assert certificate_drift_check(singleton_net, policy, x, b) >= 0


def test_sample_configurations_is_deterministic(three_pairs):
    first = sample_configurations(three_pairs, seed=7, count=20, max_load=5)
    assert first == sample_configurations(three_pairs, seed=7, count=20, max_load=5)
    assert all(len(x) == 3 and all(0 <= v <= 5 for v in x) for x in first)


def test_negative_drift_fit(three_pairs):
    configurations = sample_configurations(three_pairs, seed=1, count=300, max_load=20)
    fit = fit_negative_drift(collect_samples(three_pairs, JoinShortestQueue(), configurations))
    assert fit.ok
    assert fit.c > 0
    assert fit.a is not None and fit.points > 0

    serp = EquilibriumPolicy(three_pairs, UNIFORM, strict=True)
    flat = fit_negative_drift(collect_samples(three_pairs, serp, configurations))
    assert not flat.ok


def _positive_instances(seed: int, nets: int):
    rng = np.random.default_rng(seed)
    produced = 0
    while produced < nets:
        net = random_network(rng, max_n=6, max_k=6)
        alpha = solve_positive_allocation(net)
        if alpha is None:
            continue
        produced += 1
        yield rng, net, alpha


def test_closed_forms_equal_enumeration_on_random_networks():
    cases = 0
    for rng, net, alpha in _positive_instances(seed=31, nets=100):
        pserp = PerturbedEquilibriumPolicy(net, alpha)
        serp = EquilibriumPolicy(net, alpha, strict=True)
        for _ in range(10):
            x = tuple(int(v) for v in rng.integers(0, 21, size=net.n))
            jsq = expected_drift_f(net, JoinShortestQueue(), x, alpha=alpha)
            assert jsq.match is True, (net, x)
            assert expected_drift_f(net, pserp, x).match is True, (net, x)
            assert expected_drift_f(net, serp, x).expected_delta_f == 1 - F(1, net.n)
            if shape_magnitude(x, net) > 0:
                assert jump_bound_check(x, net).ok
            cases += 1
    assert cases >= 1000


def test_jsq_is_one_step_optimal_on_random_instances():
    rng = np.random.default_rng(77)
    for k in range(1000):
        net = random_network(rng, max_n=6)
        x = tuple(int(v) for v in rng.integers(0, 21, size=net.n))
        result = jsq_optimality_check(net, x, random_policy(net, k))
        assert result.ok, (net, x, k)
