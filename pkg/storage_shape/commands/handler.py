from __future__ import annotations

import logging
from collections import Counter
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path

from storage_shape.api.schemas import CertifyFile, DriftCheckFile, PolicySpec, SimConfigFile
from storage_shape.config import (
    DEFAULT_MGF_GRID,
    DEFAULT_SEED,
    DiagnosticThresholds,
    EnumerationLimits,
    SqrtPrecision,
)
from storage_shape.drift.fit import collect_samples, fit_negative_drift
from storage_shape.drift.oracle import certificate_drift_check, expected_drift_f, jump_bound_check
from storage_shape.drift.sampling import sample_configurations
from storage_shape.drift.sqrt_bounds import expected_drift_g
from storage_shape.feasibility.allocation import AllocationMatrix, check_subset_condition, solve_nonneg_allocation
from storage_shape.feasibility.geometry import inner, polytope_vertices, separating_functional
from storage_shape.feasibility.report import FeasibilityStatus, analyze_network
from storage_shape.netmodel.loader import load_document, load_network, network_from_model
from storage_shape.netmodel.network import Configuration, StorageNetwork, require_valid, shape_magnitude, validate
from storage_shape.netmodel.rational import format_rational
from storage_shape.policies.factory import AllocationUnavailableError, build_policy
from storage_shape.policies.routing import JoinShortestQueue, Policy
from storage_shape.policies.table import TablePolicy
from storage_shape.services.reporting import RunManifest, hash_inputs, write_outputs, write_series_csv
from storage_shape.simulate.diagnostics import aggregate, mgf_probe
from storage_shape.simulate.engine import SimConfig, run_replicas

logger = logging.getLogger(__name__)


class CommandError(ValueError):
    pass


def resolve_policy(spec: PolicySpec, net: StorageNetwork) -> tuple[Policy, list[str]]:
    """Build the requested policy; without the allocation it needs, fall back to JSQ and say so."""
    try:
        return build_policy(spec, net), []
    except AllocationUnavailableError as exc:
        notice = f"{spec.policy} unavailable ({exc}); oracle-only results use jsq instead"
        logger.warning(notice)
        return JoinShortestQueue(), [notice]


def cmd_validate(net_path: Path) -> dict:
    net = load_network(net_path)
    check = validate(net)
    return {"ok": check.ok, "violations": check.violations, "network": net.to_dict()}


def cmd_analyze(net_path: Path, output_dir: Path) -> dict:
    net = load_network(net_path)
    check = validate(net)
    if not check.ok:
        return {"ok": False, "violations": check.violations}
    limits = EnumerationLimits()
    report = analyze_network(net, limits)
    payload = {"ok": True, "network": net.to_dict(), **report.to_dict()}
    manifest = RunManifest("analyze", hash_inputs([net_path]), {"limits": asdict(limits)})
    write_outputs(output_dir, manifest, payload)
    return payload


def _drift_case(
    net: StorageNetwork,
    policy: Policy,
    loads: tuple[int, ...],
    alpha: AllocationMatrix | None,
    include_g: bool,
) -> dict:
    report = expected_drift_f(net, policy, loads, alpha=alpha)
    record = {"x": list(loads), **report.to_dict()}
    if shape_magnitude(loads, net) > 0:
        record["jump_bound_ok"] = jump_bound_check(loads, net).ok
        if include_g:
            record["g"] = expected_drift_g(net, policy, loads).to_dict()
    else:
        record["jump_bound_ok"] = None
    return record


def cmd_drift_check(net_path: Path, spec_path: Path, output_dir: Path, seed: int | None = None) -> dict:
    net = load_network(net_path)
    require_valid(net)
    spec = load_document(spec_path, DriftCheckFile)
    if spec.configurations is None and spec.sweep is None:
        raise CommandError("drift-check needs 'configurations' or a 'sweep'")

    policy, notices = resolve_policy(spec.policy, net)
    alpha = None
    if isinstance(policy, JoinShortestQueue):
        alpha = solve_nonneg_allocation(net)
        if alpha is None:
            notices.append("no non-negative allocation: closed forms skipped, oracle-only results")

    configurations = [Configuration(tuple(x)).loads for x in spec.configurations or []]
    sweep = None
    if spec.sweep is not None:
        sweep = spec.sweep.model_copy(update={"seed": seed}) if seed is not None else spec.sweep
        configurations += sample_configurations(net, sweep.seed, sweep.cases, sweep.max_load)

    records = [_drift_case(net, policy, x, alpha, spec.include_g) for x in configurations]
    mismatches = [r for r in records if r["match"] is False]
    jump_violations = [r for r in records if r["jump_bound_ok"] is False]
    payload = {
        "ok": True,
        "policy": policy.describe(),
        "notices": notices,
        "cases": records,
        "summary": {
            "cases": len(records),
            "all_match": not mismatches and all(r["match"] is not None for r in records),
            "mismatches": len(mismatches),
            "jump_violations": len(jump_violations),
        },
    }
    if spec.fit:
        payload["negative_drift_fit"] = fit_negative_drift(collect_samples(net, policy, configurations)).to_dict()

    parameters = {
        "policy": policy.describe(),
        "jsq_alpha": None if alpha is None else alpha.to_strings(),
        "sweep": None if sweep is None else sweep.model_dump(),
        "include_g": spec.include_g,
        "sqrt_precision": asdict(SqrtPrecision()) if spec.include_g else None,
        "fit": spec.fit,
    }
    manifest = RunManifest("drift-check", hash_inputs([net_path, spec_path]), parameters)
    result_path, _ = write_outputs(output_dir, manifest, payload)
    if mismatches or jump_violations:
        raise RuntimeError(
            f"{len(mismatches)} closed-form mismatches and {len(jump_violations)} jump-bound violations; see {result_path}"
        )
    return payload


def _sim_network(config: SimConfigFile, config_path: Path) -> tuple[StorageNetwork, list[Path]]:
    if (config.network is None) == (config.network_file is None):
        raise CommandError("simulation config needs exactly one of 'network' or 'network_file'")
    if config.network is not None:
        return network_from_model(config.network), []
    path = Path(config.network_file)
    if not path.is_absolute():
        path = config_path.parent / path
    return load_network(path), [path]


def cmd_simulate(
    config_path: Path,
    output_dir: Path,
    *,
    seed: int | None = None,
    replicas: int | None = None,
    steps: int | None = None,
    workers: int | None = None,
) -> dict:
    config = load_document(config_path, SimConfigFile)
    net, extra_inputs = _sim_network(config, config_path)
    require_valid(net)
    policy, notices = resolve_policy(config.policy, net)

    seed = seed if seed is not None else (config.seed if config.seed is not None else DEFAULT_SEED)
    cfg = SimConfig(
        net=net,
        policy=policy,
        initial=tuple(config.initial) if config.initial is not None else (0,) * net.n,
        max_steps=steps if steps is not None else config.max_steps,
        replicas=replicas if replicas is not None else config.replicas,
        seed=seed,
        record_every=config.record_every,
        tau_cutoff=config.tau_cutoff,
        continuous_time=config.continuous_time,
    )
    thresholds = DiagnosticThresholds()
    grid = tuple(config.mgf_grid) if config.mgf_grid is not None else DEFAULT_MGF_GRID
    results = run_replicas(cfg, workers or config.workers)
    diagnostic = aggregate(results, cfg.tau_cutoff, thresholds)

    pooled = [t for r in results for t in r.tau_samples]
    histogram = {str(t): c for t, c in sorted(Counter(pooled).items())}
    mgf = None
    if pooled:
        mgf = mgf_probe(pooled, grid, thresholds.mgf_stability, censored=diagnostic.censored_excursions).to_dict()
    else:
        notices.append("no returns to the zero shape: mgf table omitted")

    payload = {
        "ok": True,
        "notices": notices,
        "diagnostic": diagnostic.to_dict(),
        "tau_histogram": histogram,
        "mgf": mgf,
        "replicas": [
            {
                "replica": r.replica_id,
                "tau_samples": len(r.tau_samples),
                "censored": r.censored_count,
                "ended_censored": r.ended_censored,
                "first_hit": r.first_hit,
                "approach_censored": r.approach_censored,
                "final_loads": list(r.final_loads),
                "final_shape": [format_rational(v) for v in r.final_shape.coordinates()],
                "max_abs_shape_coord": format_rational(r.max_abs_shape_coord),
                "initial_shape_returns": r.initial_shape_returns,
                "neighborhood_counts": r.neighborhood_counts,
                "node_counts": r.node_counts,
                "empirical_allocation": r.empirical_allocation(net),
            }
            for r in results
        ],
    }
    parameters = {
        "network": net.to_dict(),
        "policy": policy.describe(),
        "initial": list(cfg.initial),
        "max_steps": cfg.max_steps,
        "replicas": cfg.replicas,
        "seed": cfg.seed,
        "record_every": cfg.record_every,
        "tau_cutoff": cfg.tau_cutoff,
        "continuous_time": cfg.continuous_time,
        "mgf_grid": list(grid),
        "thresholds": thresholds.as_dict(),
    }
    manifest = RunManifest("simulate", hash_inputs([config_path, *extra_inputs]), parameters)
    csv_name = f"simulate_{manifest.fingerprint()}_series.csv"
    payload["series_csv"] = csv_name
    write_outputs(output_dir, manifest, payload)
    write_series_csv(output_dir / csv_name, [(r.replica_id, r.magnitude_series, r.timestamps) for r in results])
    return payload


def cmd_certify(net_path: Path, spec_path: Path | None, output_dir: Path, seed: int | None = None) -> dict:
    net = load_network(net_path)
    require_valid(net)
    spec = load_document(spec_path, CertifyFile) if spec_path is not None else CertifyFile()
    if seed is not None:
        spec = spec.model_copy(update={"seed": seed})

    condition = check_subset_condition(net)
    if condition.slack is None or condition.slack > 0:
        raise CommandError("no certificate: positive solution exists")
    vertices = polytope_vertices(net)
    functional = separating_functional(net, condition, vertices)
    products = [inner(v, functional.b) for v in vertices]

    policy, notices = resolve_policy(spec.policy, net)
    policies: list[Policy] = [policy]
    policies += [TablePolicy.random(net, spec.seed + k + 1) for k in range(spec.random_policies)]
    states = sample_configurations(net, spec.seed, spec.samples, spec.max_load)

    drifts = []
    for candidate in policies:
        for x in states:
            value = certificate_drift_check(net, candidate, x, functional.b)
            drifts.append({"policy": candidate.describe(), "x": list(x), "value": format_rational(value)})
    minimum = min((Fraction(d["value"]) for d in drifts), default=None)

    status = FeasibilityStatus.NONNEG_ONLY if condition.slack == 0 else FeasibilityStatus.INFEASIBLE
    payload = {
        "ok": True,
        "status": status.value,
        "notices": notices,
        "certificate": functional.to_dict(),
        "vertex_check": {
            "vertices": len(vertices),
            "min_product": format_rational(min(products)),
            "all_nonnegative": all(p >= 0 for p in products),
        },
        "drift_checks": drifts,
        "min_drift": None if minimum is None else format_rational(minimum),
    }
    parameters = {
        "policies": [p.describe() for p in policies],
        "samples": spec.samples,
        "seed": spec.seed,
        "max_load": spec.max_load,
    }
    inputs = [net_path] + ([spec_path] if spec_path is not None else [])
    manifest = RunManifest("certify", hash_inputs(inputs), parameters)
    write_outputs(output_dir, manifest, payload)
    return payload
