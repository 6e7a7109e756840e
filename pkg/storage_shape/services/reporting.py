from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

from storage_shape import __version__

logger = logging.getLogger(__name__)

UTC = timezone.utc


_FLOAT_SLOT = re.compile(r'"\\u0000(\d+)\\u0000"')


def _slot_floats(value: Any, floats: list[float]) -> Any:
    if isinstance(value, float) and math.isfinite(value):
        floats.append(value)
        return f"\0{len(floats) - 1}\0"
    if isinstance(value, dict):
        return {k: _slot_floats(v, floats) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_slot_floats(v, floats) for v in value]
    return value


def _json_float(value: float) -> str:
    text = _g17(value)
    return text if any(c in text for c in ".en") else text + ".0"


def dump_json(payload: Any) -> str:
    """Stable JSON text; finite floats carry 17 significant digits, like the CSV series."""
    floats: list[float] = []
    text = json.dumps(_slot_floats(payload, floats), ensure_ascii=False, sort_keys=True, indent=2, allow_nan=False)
    return _FLOAT_SLOT.sub(lambda m: _json_float(floats[int(m.group(1))]), text) + "\n"


def hash_inputs(paths: Iterable[Path]) -> str:
    digest = hashlib.sha256()
    for path in paths:
        digest.update(Path(path).read_bytes())
        digest.update(b"\0")
    return digest.hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    input_hash: str
    parameters: dict[str, Any]
    tool_version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(UTC).strftime("%Y-%m-%dT%H:%M:%SZ"))

    def fingerprint(self) -> str:
        payload = {
            "tool_version": self.tool_version,
            "subcommand": self.subcommand,
            "input_hash": self.input_hash,
            "parameters": self.parameters,
        }
        return hashlib.sha1(json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")).hexdigest()[:14]

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "subcommand": self.subcommand,
            "input_hash": self.input_hash,
            "parameters": self.parameters,
            "timestamp": self.timestamp,
            "fingerprint": self.fingerprint(),
        }


def write_outputs(output_dir: Path, manifest: RunManifest, payload: dict) -> tuple[Path, Path]:
    """Write `<subcommand>_<fingerprint>.json` and its manifest; the result file references the manifest only."""
    output_dir.mkdir(parents=True, exist_ok=True)
    fingerprint = manifest.fingerprint()
    manifest_path = output_dir / f"manifest_{fingerprint}.json"
    result_path = output_dir / f"{manifest.subcommand}_{fingerprint}.json"
    payload["manifest"] = {"fingerprint": fingerprint, "file": manifest_path.name}
    manifest_path.write_text(dump_json(manifest.to_dict()), encoding="utf-8")
    result_path.write_text(dump_json(payload), encoding="utf-8")
    logger.info("wrote %s and %s", result_path, manifest_path)
    return result_path, manifest_path


def _g17(value: float) -> str:
    return "%.17g" % value


def write_series_csv(path: Path, series: Sequence[tuple[int, Sequence[tuple[int, Any]], Sequence[float]]]) -> Path:
    """One row per recorded point: replica, step, magnitude and, when present, the continuous time."""
    path.parent.mkdir(parents=True, exist_ok=True)
    timed = any(times for _, _, times in series)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["replica", "step", "magnitude", *(["time"] if timed else [])])
        for replica, points, times in series:
            for k, (step, magnitude) in enumerate(points):
                row = [replica, step, _g17(float(magnitude))]
                if timed:
                    row.append(_g17(times[k]))
                writer.writerow(row)
    return path
