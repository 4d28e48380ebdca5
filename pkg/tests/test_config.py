# -*- coding: utf-8 -*-
import copy
import json
import math

import pytest

from conftest import TWIN_GRID, fixture_path
from wholegrid.config import GridConfig, load_config, save_config
from wholegrid.errors import SchemaError, UnknownMachineKind


def grid(**changes):
    data = copy.deepcopy(TWIN_GRID)
    data.update(changes)
    return data


def test_defaults_are_filled_in(twin_config):
    assert twin_config.base["f0"] == 60.0
    assert twin_config.w0 == pytest.approx(2 * math.pi * 60)
    assert twin_config.solver["bands"] == [15.0, 45.0, 75.0]
    assert twin_config.machines[1]["R"] == 0.01
    assert twin_config.machines[0]["R"] == 0.0
    assert twin_config.buses[0]["theta"] == 0.0
    assert twin_config.debug_mode is False


def test_nested_overrides_keep_other_defaults():
    config = GridConfig.from_dict(grid(solver={"dt": 1e-5}))
    assert config.solver["dt"] == 1e-5
    assert config.solver["pf_tol"] == 1e-10


def test_missing_buses_become_pq():
    data = grid(buses=[{"bus": 1, "role": "slack"}])
    config = GridConfig.from_dict(data)
    assert [bus["role"] for bus in config.buses] == ["slack", "PQ", "PQ"]


@pytest.mark.parametrize("change, path", [
    (lambda d: d["machines"][0].update(bus=99), "/machines/0/bus"),
    (lambda d: d["machines"][1].update(L=-1.0), "/machines/1/L"),
    (lambda d: d["machines"][2].pop("J"), "/machines/2/J"),
    (lambda d: d["network"]["branches"][1].update(to=7), "/network/branches/1/to"),
    (lambda d: d["network"].update(n_buses=0), "/network/n_buses"),
    (lambda d: d["buses"][1].update(role="PX"), "/buses/1/role"),
    (lambda d: d["buses"][1].update(role="slack"), "/buses"),
    (lambda d: d.update(solver={"bands": [45.0, 15.0, 75.0]}), "/solver/bands"),
    (lambda d: d.update(base={"f0": "sixty"}), "/base/f0"),
])
def test_schema_errors_point_at_the_field(change, path):
    data = grid()
    change(data)
    with pytest.raises(SchemaError) as info:
        GridConfig.from_dict(data)
    assert info.value.path == path
    assert info.value.to_dict()["code"] == "schema_error"


def test_unknown_machine_kind():
    data = grid()
    data["machines"][1]["kind"] = "gfm"
    with pytest.raises(UnknownMachineKind) as info:
        GridConfig.from_dict(data)
    assert info.value.path == "/machines/1/kind"
    assert info.value.to_dict()["code"] == "unknown_machine_kind"


def test_converter_needs_gains_or_bandwidths():
    data = grid()
    data["machines"][2] = {"kind": "gfl", "bus": 3, "Lf": 0.0003, "Cdc": 0.02, "vdc_ref": 2.0,
                           "pll_bandwidth_hz": 10, "current_bandwidth_hz": 250, "kp_dc": 1.0}
    with pytest.raises(SchemaError) as info:
        GridConfig.from_dict(data)
    assert info.value.path == "/machines/2/ki_dc"


def test_save_and_load_give_the_same_config(tmp_path, composite_config):
    target = tmp_path / "saved.json"
    save_config(composite_config, target)
    again = load_config(target)
    assert again == composite_config
    assert json.loads(target.read_text())["_doc"]


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(SchemaError):
        load_config(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(SchemaError):
        load_config(broken)
    broken.write_text("[1, 2]")
    with pytest.raises(SchemaError):
        load_config(broken)
    broken.write_bytes(b"\xff\xfe{")
    with pytest.raises(SchemaError):
        load_config(broken)
    with pytest.raises(SchemaError) as info:
        load_config(tmp_path)
    assert info.value.path == ""


def test_with_value_returns_a_modified_copy(twin_config):
    heavier = twin_config.with_value("machines[1].J", 1.0)
    assert heavier.machines[1]["J"] == 1.0
    assert twin_config.machines[1]["J"] == 4.22171e-05
    assert heavier.name == twin_config.name


def test_with_value_revalidates(twin_config):
    with pytest.raises(SchemaError):
        twin_config.with_value("machines[1].J", -1.0)
    with pytest.raises(SchemaError):
        twin_config.with_value("machines[9].J", 1.0)


def test_fixture_names_come_from_the_file():
    assert load_config(fixture_path("sg_infinite_bus")).name == "sg_infinite_bus"


def test_converter_feed_forward_is_on_by_default(composite_config, gfl_config):
    assert composite_config.machines[2]["decoupling"] is True
    assert gfl_config.machines[1]["decoupling"] is False
