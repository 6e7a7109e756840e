from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from storage_shape.netmodel.network import StorageNetwork


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the long simulation proxies")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long finite-sample proxy runs")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def make_net(n: int, neighborhoods, rates) -> StorageNetwork:
    return StorageNetwork(n=n, neighborhoods=neighborhoods, rates=tuple(Fraction(r) for r in rates))


def three_pairs_with(l0, l1, l2) -> StorageNetwork:
    return make_net(3, [[0, 1], [0, 2], [1, 2]], [l0, l1, l2])


def write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture()
def three_pairs() -> StorageNetwork:
    return three_pairs_with(Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))


@pytest.fixture()
def boundary_pairs() -> StorageNetwork:
    return three_pairs_with(Fraction(2, 3), Fraction(1, 6), Fraction(1, 6))


@pytest.fixture()
def singleton_net() -> StorageNetwork:
    """n=3 with S={{0},{0,1,2}} and equal rates: node 0 is overfed."""
    return make_net(3, [[0], [0, 1, 2]], ["1/2", "1/2"])


@pytest.fixture()
def single_pair() -> StorageNetwork:
    return make_net(2, [[0, 1]], ["1"])


@pytest.fixture()
def six_pairs() -> StorageNetwork:
    hoods = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]
    return make_net(4, hoods, ["1/6"] * 6)


@pytest.fixture()
def network_file(tmp_path):
    def _write(net: StorageNetwork, name: str = "net.json") -> Path:
        return write_json(tmp_path / name, net.to_dict())

    return _write
