from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from storage_shape.api.schemas import NetworkFile
from storage_shape.netmodel.network import StorageNetwork
from storage_shape.netmodel.rational import parse_rational

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


class NetworkFileError(ValueError):
    """Input file could not be parsed; the message names the line or field at fault."""


def _line_of_key(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def parse_document(text: str, model: type[ModelT], *, source: str = "<input>") -> ModelT:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFileError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return validate_document(raw, model, source=source, text=text)


def validate_document(raw: Any, model: type[ModelT], *, source: str = "<input>", text: str = "") -> ModelT:
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        problems = []
        for error in exc.errors():
            loc = ".".join(str(part) for part in error.get("loc", ())) or "<root>"
            top = str(error["loc"][0]) if error.get("loc") else ""
            line = _line_of_key(text, top) if text and top else None
            where = f"field {loc}" + (f" (line {line})" if line else "")
            problems.append(f"{where}: {error.get('msg', 'invalid value')}")
        raise NetworkFileError(f"{source}: " + "; ".join(problems)) from exc


def network_from_model(model: NetworkFile) -> StorageNetwork:
    return StorageNetwork(
        n=model.n,
        neighborhoods=tuple(tuple(hood) for hood in model.neighborhoods),
        rates=tuple(parse_rational(r) for r in model.rates),
    )


def parse_network(text: str, *, source: str = "<input>") -> StorageNetwork:
    return network_from_model(parse_document(text, NetworkFile, source=source))


def load_network(path: Path | str) -> StorageNetwork:
    path = Path(path)
    if not path.exists():
        raise NetworkFileError(f"{path}: file not found")
    net = parse_network(path.read_text(encoding="utf-8"), source=str(path))
    logger.debug("loaded network n=%d K=%d from %s", net.n, net.K, path)
    return net


def load_document(path: Path | str, model: type[ModelT]) -> ModelT:
    path = Path(path)
    if not path.exists():
        raise NetworkFileError(f"{path}: file not found")
    return parse_document(path.read_text(encoding="utf-8"), model, source=str(path))
