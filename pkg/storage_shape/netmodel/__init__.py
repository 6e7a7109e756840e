from storage_shape.netmodel.network import (
    CheckResult,
    Configuration,
    Shape,
    StorageNetwork,
    is_connected,
    shape_magnitude,
    shape_of,
    validate,
)
from storage_shape.netmodel.rational import format_rational, parse_rational

__all__ = [
    "CheckResult",
    "Configuration",
    "Shape",
    "StorageNetwork",
    "format_rational",
    "is_connected",
    "parse_rational",
    "shape_magnitude",
    "shape_of",
    "validate",
]
