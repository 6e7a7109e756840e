from storage_shape.simulate.diagnostics import RecurrenceDiagnostic, Verdict, aggregate, mgf_probe
from storage_shape.simulate.engine import SimConfig, TrajectoryStats, run_replica, run_replicas, step
from storage_shape.simulate.rng import StepStream

__all__ = [
    "RecurrenceDiagnostic",
    "SimConfig",
    "StepStream",
    "TrajectoryStats",
    "Verdict",
    "aggregate",
    "mgf_probe",
    "run_replica",
    "run_replicas",
    "step",
]
