# -*- coding: utf-8 -*-
"""
    wholegrid.config
    ~~~~~~~~~~~~~~~~

    Grid description: defaults, JSON loading, validation and saving

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""
import copy
import json
import math
from pathlib import Path

from wholegrid import utils
from wholegrid.errors import SchemaError, UnknownMachineKind

MACHINE_KINDS = ("sg", "gfl", "load", "source")
LOAD_KINDS = ("shunt_R", "shunt_RC", "shunt_RL")
BUS_ROLES = ("slack", "PV", "PQ")

# (gain keys, bandwidth key) of every converter control loop
GFL_LOOPS = {
    "pll": (("kp_pll", "ki_pll"), "pll_bandwidth_hz"),
    "current": (("kp_i", "ki_i"), "current_bandwidth_hz"),
    "dc": (("kp_dc", "ki_dc"), "dc_bandwidth_hz"),
}

MACHINE_DEFAULTS = {
    "sg": {"R": 0.0, "D": 0.0},
    "gfl": {"Rf": 0.0, "decoupling": True},
    "load": {},
    "source": {"R": 0.0},
}

MACHINE_REQUIRED = {
    "sg": ("L", "J"),
    "gfl": ("Lf", "Cdc", "vdc_ref"),
    "load": ("load_kind", "R"),
    "source": ("L",),
}


class GridConfig:
    """
    Represents a grid description.
    """
    # configuration defaults
    CONFIG = {
        "debug_mode": False,
        "base": {
            "S_base": 100e6,
            "V_base": 230e3,
            "f0": 60.0
        },
        "network": {
            "n_buses": 1,
            "branches": [],
            "shunts": []
        },
        "buses": [],
        "machines": [],
        "solver": {
            "pf_tol": 1e-10,
            "pf_max_iter": 50,
            "eig_tol": 1e-6,
            "dt": 2e-5,
            "bands": [15.0, 45.0, 75.0],
            "min_shunt_c": 1e-4,
            "rcond": 1e-12
        }
    }

    def __init__(self, name=None, config_filename=None, **kwargs):
        """
        Creates a new configuration
        """
        self.name = name or self.__class__.__name__.lower()

        # set defaults
        for key, value in self.CONFIG.items():
            setattr(self, key, copy.deepcopy(value))

        # set from instancing
        for key, value in kwargs.items():
            if key in self.CONFIG:
                setattr(self, key, _merge(getattr(self, key), value))
            elif key.startswith("_"):
                setattr(self, key, copy.deepcopy(value))

        # set from file
        if config_filename is not None:
            try:
                with open(config_filename, encoding="utf-8") as fp:
                    file_config = json.load(fp)
            except FileNotFoundError:
                raise SchemaError(f"config file {config_filename} does not exist", path="")
            except (OSError, UnicodeDecodeError) as exc:
                raise SchemaError(f"cannot read config file {config_filename}: {exc}", path="")
            except json.JSONDecodeError as exc:
                raise SchemaError(f"config file is not valid JSON: {exc}", path="")
            if not isinstance(file_config, dict):
                raise SchemaError("config root must be an object", path="")

            # set attribute if it exists on the json
            for key in self.CONFIG:
                if key in file_config:
                    setattr(self, key, _merge(getattr(self, key), file_config[key]))
            for key, value in file_config.items():
                if key.startswith("_"):
                    setattr(self, key, value)

        validate(self)

    @classmethod
    def from_dict(cls, data, name=None):
        return cls(name=name, **data)

    @property
    def w0(self):
        return 2.0 * math.pi * self.base["f0"]

    def to_dict(self):
        """
        Normalized configuration, defaults filled in.

        Returns:
            dict: JSON-serializable configuration
        """
        res = {key: copy.deepcopy(value) for key, value in self.__dict__.items() if key.startswith("_")}
        res.update({key: copy.deepcopy(getattr(self, key)) for key in self.CONFIG})
        return res

    def with_value(self, locator, value):
        """
        Copy of this configuration with the field at ``locator`` replaced.
        """
        data = self.to_dict()
        utils.set_value(data, locator, value)
        return self.from_dict(data, name=self.name)

    def __getstate__(self):
        return self.__dict__.items()

    def __setstate__(self, items):
        for key, val in items:
            self.__dict__[key] = val

    def __eq__(self, other):
        return isinstance(other, GridConfig) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return "%s(%s)" % (self.__class__.__name__, self.to_dict())

    def __str__(self):
        res = ["{}(name={!r}):".format(self.__class__.__name__, self.name)]
        res = res + [f"  {key} = {value}" for key, value in self.to_dict().items()]
        return "\n".join(res)


def _merge(default, value):
    # nested objects are merged key by key, everything else is replaced
    if isinstance(default, dict) and isinstance(value, dict):
        res = copy.deepcopy(default)
        for key, item in value.items():
            res[key] = _merge(res.get(key), item)
        return res
    return copy.deepcopy(value)


def _number(obj, key, pointer, positive=False, non_negative=False, optional=False):
    path = f"{pointer}/{key}"
    if key not in obj or obj[key] is None:
        if optional:
            return None
        raise SchemaError(f"missing required field {key!r}", path=path)
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SchemaError(f"{key!r} must be a finite number", path=path)
    if positive and not value > 0:
        raise SchemaError(f"{key!r} must be positive", path=path)
    if non_negative and value < 0:
        raise SchemaError(f"{key!r} must be non-negative", path=path)
    return value


def _bus(obj, key, pointer, n_buses):
    path = f"{pointer}/{key}"
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{key!r} must be a bus number", path=path)
    if not 1 <= value <= n_buses:
        raise SchemaError(f"bus {value} does not exist in a {n_buses} bus network", path=path)
    return value


def _list(obj, key, pointer):
    value = obj.get(key, [])
    if not isinstance(value, list):
        raise SchemaError(f"{key!r} must be a list", path=f"{pointer}/{key}")
    return value


def _validate_machine(machine, pointer, n_buses):
    if not isinstance(machine, dict):
        raise SchemaError("machine entries must be objects", path=pointer)
    kind = machine.get("kind")
    if kind not in MACHINE_KINDS:
        raise UnknownMachineKind(f"unknown machine kind {kind!r}", path=f"{pointer}/kind")
    _bus(machine, "bus", pointer, n_buses)
    for key, value in MACHINE_DEFAULTS[kind].items():
        machine.setdefault(key, value)
    for key in MACHINE_REQUIRED[kind]:
        if key not in machine:
            raise SchemaError(f"{kind} machine needs {key!r}", path=f"{pointer}/{key}")

    if kind == "sg":
        _number(machine, "L", pointer, positive=True)
        _number(machine, "J", pointer, positive=True)
        _number(machine, "R", pointer, non_negative=True)
        _number(machine, "D", pointer, non_negative=True)
    elif kind == "source":
        _number(machine, "L", pointer, positive=True)
        _number(machine, "R", pointer, non_negative=True)
    elif kind == "load":
        load_kind = machine["load_kind"]
        if load_kind not in LOAD_KINDS:
            raise SchemaError(f"unknown load kind {load_kind!r}", path=f"{pointer}/load_kind")
        _number(machine, "R", pointer, positive=True)
        if load_kind == "shunt_RC":
            _number(machine, "C", pointer, positive=True)
        elif load_kind == "shunt_RL":
            _number(machine, "L", pointer, positive=True)
    else:
        for key in ("Lf", "Cdc", "vdc_ref"):
            _number(machine, key, pointer, positive=True)
        _number(machine, "Rf", pointer, non_negative=True)
        if not isinstance(machine["decoupling"], bool):
            raise SchemaError("'decoupling' must be true or false", path=f"{pointer}/decoupling")
        for gains, bandwidth in GFL_LOOPS.values():
            if bandwidth in machine:
                _number(machine, bandwidth, pointer, non_negative=True)
            else:
                for key in gains:
                    _number(machine, key, pointer, non_negative=True)


def validate(config):
    """
    Validates a configuration in place, filling machine and bus defaults.

    Args:
        config (GridConfig): configuration to check

    Raises:
        SchemaError: with the JSON pointer of the offending field
        UnknownMachineKind: for machine entries of an unknown kind
    """
    for key in ("S_base", "V_base", "f0"):
        _number(config.base, key, "/base", positive=True)

    net = config.network
    n = net.get("n_buses")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SchemaError("'n_buses' must be a positive integer", path="/network/n_buses")
    for index, branch in enumerate(_list(net, "branches", "/network")):
        pointer = f"/network/branches/{index}"
        _bus(branch, "from", pointer, n)
        _bus(branch, "to", pointer, n)
        _number(branch, "R", pointer, non_negative=True)
        _number(branch, "L", pointer, non_negative=True)
    for index, shunt in enumerate(_list(net, "shunts", "/network")):
        pointer = f"/network/shunts/{index}"
        _bus(shunt, "bus", pointer, n)
        _number(shunt, "R", pointer, positive=True, optional=True)
        shunt.setdefault("C", 0.0)
        _number(shunt, "C", pointer, non_negative=True)

    seen = set()
    buses = _list({"buses": config.buses}, "buses", "")
    for index, bus in enumerate(buses):
        pointer = f"/buses/{index}"
        k = _bus(bus, "bus", pointer, n)
        if k in seen:
            raise SchemaError(f"bus {k} is specified twice", path=f"{pointer}/bus")
        seen.add(k)
        if bus.get("role") not in BUS_ROLES:
            raise SchemaError(f"unknown bus role {bus.get('role')!r}", path=f"{pointer}/role")
        for key in ("P", "Q", "theta"):
            _number(bus, key, pointer, optional=True)
        _number(bus, "V", pointer, positive=True, optional=True)
        for key, value in (("P", 0.0), ("Q", 0.0), ("V", 1.0), ("theta", 0.0)):
            if bus.get(key) is None:
                bus[key] = value
    for k in range(1, n + 1):
        if k not in seen:
            role = "slack" if k == 1 else "PQ"
            buses.append({"bus": k, "role": role, "P": 0.0, "Q": 0.0, "V": 1.0, "theta": 0.0})
    buses.sort(key=lambda bus: bus["bus"])
    config.buses = buses
    slack = [bus["bus"] for bus in config.buses if bus["role"] == "slack"]
    if slack != [1]:
        raise SchemaError("bus 1 must be the one and only slack bus", path="/buses")

    for index, machine in enumerate(_list({"machines": config.machines}, "machines", "")):
        _validate_machine(machine, f"/machines/{index}", n)

    solver = config.solver
    for key in ("pf_tol", "eig_tol", "dt", "min_shunt_c", "rcond"):
        _number(solver, key, "/solver", positive=True)
    _number(solver, "pf_max_iter", "/solver", positive=True)
    bands = solver.get("bands")
    if not isinstance(bands, list) or len(bands) != 3 or sorted(bands) != bands:
        raise SchemaError("'bands' must list three increasing frequencies", path="/solver/bands")
    if not isinstance(config.debug_mode, bool):
        raise SchemaError("'debug_mode' must be true or false", path="/debug_mode")


def load_config(path):
    """
    Loads and validates a grid description file.

    Args:
        path (str|Path): JSON file

    Returns:
        GridConfig: validated configuration, defaults filled in
    """
    return GridConfig(name=Path(path).stem, config_filename=path)


def save_config(config, path):
    """
    Writes the normalized configuration so that loading it again gives the
    same configuration.
    """
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(config.to_dict(), fp, indent=2)
        fp.write("\n")
