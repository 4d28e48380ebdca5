# -*- coding: utf-8 -*-
"""
    Shared fixtures: the shipped grid descriptions and a few small grids.
"""
import copy
from pathlib import Path

import pytest

from wholegrid.config import GridConfig, load_config

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "src" / "wholegrid" / "fixtures"

SG = {"kind": "sg", "R": 0.01, "L": 0.000795775, "J": 4.22171e-05, "D": 0.0001}

RL_GRID = {
    "network": {
        "n_buses": 2,
        "branches": [{"from": 1, "to": 2, "R": 0.01, "L": 0.000265258}],
        "shunts": [],
    },
    "buses": [{"bus": 1, "role": "slack", "V": 1.0, "theta": 0.0}],
    "machines": [
        {"kind": "source", "bus": 1, "L": 0.000132629},
        {"kind": "load", "bus": 2, "load_kind": "shunt_RL", "R": 0.1, "L": 0.0013263},
    ],
}

TWIN_GRID = {
    "network": {
        "n_buses": 3,
        "branches": [
            {"from": 1, "to": 2, "R": 0.01, "L": 0.000265258},
            {"from": 1, "to": 3, "R": 0.01, "L": 0.000265258},
        ],
        "shunts": [],
    },
    "buses": [
        {"bus": 1, "role": "slack", "V": 1.0, "theta": 0.0},
        {"bus": 2, "role": "PV", "P": 0.4, "V": 1.0},
        {"bus": 3, "role": "PV", "P": 0.4, "V": 1.0},
    ],
    "machines": [
        {"kind": "source", "bus": 1, "L": 0.000132629},
        dict(SG, bus=2),
        dict(SG, bus=3),
    ],
}


def fixture_path(name):
    return FIXTURE_DIR / f"{name}.json"


@pytest.fixture
def sg_config():
    return load_config(fixture_path("sg_infinite_bus"))


@pytest.fixture
def gfl_config():
    return load_config(fixture_path("gfl_infinite_bus"))


@pytest.fixture
def composite_config():
    return load_config(fixture_path("composite_3bus"))


@pytest.fixture
def rl_config():
    return GridConfig.from_dict(copy.deepcopy(RL_GRID), name="rl")


@pytest.fixture
def twin_config():
    return GridConfig.from_dict(copy.deepcopy(TWIN_GRID), name="twin")


@pytest.fixture(params=["sg_infinite_bus", "gfl_infinite_bus", "composite_3bus"])
def any_fixture(request):
    return load_config(fixture_path(request.param))
