from storage_shape.drift.fit import NegativeDriftFit, collect_samples, fit_negative_drift
from storage_shape.drift.oracle import (
    DriftReport,
    certificate_drift_check,
    delta_f_unit,
    expected_drift_f,
    jsq_drift_closed_form,
    jsq_optimality_check,
    jump_bound_check,
    pserp_drift_closed_form,
)
from storage_shape.drift.sampling import sample_configurations
from storage_shape.drift.sqrt_bounds import PrecisionError, expected_drift_g, sqrt_interval

__all__ = [
    "DriftReport",
    "NegativeDriftFit",
    "PrecisionError",
    "certificate_drift_check",
    "collect_samples",
    "delta_f_unit",
    "expected_drift_f",
    "expected_drift_g",
    "fit_negative_drift",
    "jsq_drift_closed_form",
    "jsq_optimality_check",
    "jump_bound_check",
    "pserp_drift_closed_form",
    "sample_configurations",
    "sqrt_interval",
]
