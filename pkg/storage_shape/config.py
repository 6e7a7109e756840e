from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path


PROJECT_ROOT = Path(__file__).resolve().parents[1]
ARTIFACTS_DIR = PROJECT_ROOT / "artifacts"
RUNS_DIR = ARTIFACTS_DIR / "runs"

DEFAULT_TABLE_CLIP = 32
DEFAULT_SEED = 0
MIN_DEFAULT_TAU_CUTOFF = 1000
DEFAULT_MGF_GRID: tuple[float, ...] = (0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2)


@dataclass(frozen=True)
class EnumerationLimits:
    max_subset_neighborhoods: int = 24
    max_polytope_vertices: int = 10**6
    max_epsilon_halvings: int = 64


@dataclass(frozen=True)
class DiagnosticThresholds:
    recurrent_censoring: float = 0.01
    transient_censoring: float = 0.5
    tail_min_r2: float = 0.9
    confidence: float = 0.99
    burn_in_fraction: float = 0.1
    min_survivors: int = 5
    mgf_stability: float = 0.10

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SqrtPrecision:
    max_width: float = 1e-12
    assertion_slack: float = 1e-9
    start_bits: int = 48
    max_bits: int = 512


def ensure_dirs(*extra: Path) -> None:
    for path in [ARTIFACTS_DIR, RUNS_DIR, *extra]:
        path.mkdir(parents=True, exist_ok=True)
