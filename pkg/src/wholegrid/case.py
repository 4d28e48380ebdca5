# -*- coding: utf-8 -*-
"""
    wholegrid.case
    ~~~~~~~~~~~~~~

    Turns a grid description into a prepared case: network with folded
    shunts, power flow solution and initialized machines, ready for the
    whole-system model and the time-domain simulation.

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""
from dataclasses import dataclass
from functools import cached_property

from wholegrid import frames, lti, machines, network
from wholegrid.config import GFL_LOOPS
from wholegrid.errors import DuplicateMachineAtBus, SchemaError
from wholegrid.logger import logger

ACTIVE_KINDS = ("sg", "gfl", "source")


def machine_params(entry, w0):
    """
    Builds the parameter object of a machine entry.

    Args:
        entry (dict): validated machine entry of a configuration
        w0 (float): rated angular frequency (rad/s)

    Returns:
        SgParams|GflParams|LoadParams|SourceParams: parameters
    """
    kind = entry["kind"]
    if kind == "sg":
        return machines.SgParams(R=entry["R"], L=entry["L"], J=entry["J"], D=entry["D"], w0=w0)
    if kind == "source":
        return machines.SourceParams(R=entry["R"], L=entry["L"], w0=w0)
    if kind == "load":
        element = {"shunt_RC": entry.get("C"), "shunt_RL": entry.get("L")}.get(entry["load_kind"], 0.0)
        return machines.LoadParams(kind=entry["load_kind"], R=entry["R"], element=element, w0=w0)

    plants = {"pll": 1.0, "current": entry["Lf"], "dc": entry["Cdc"] * entry["vdc_ref"]}
    gains = {}
    for name, (keys, bandwidth) in GFL_LOOPS.items():
        if bandwidth in entry:
            gains[keys[0]], gains[keys[1]] = machines.pi_gains(entry[bandwidth], plants[name])
        else:
            gains[keys[0]], gains[keys[1]] = entry[keys[0]], entry[keys[1]]
    return machines.GflParams(
        Lf=entry["Lf"], Rf=entry["Rf"], Cdc=entry["Cdc"], vdc_ref=entry["vdc_ref"], w0=w0,
        decoupling=entry["decoupling"], **gains,
    )


def network_from_config(config):
    """
    Network of a configuration with shunt RC loads folded into the bus
    shunts and the minimum capacitance added at buses without one.
    """
    w0 = config.w0
    net = config.network
    branches = [network.Branch(b["from"], b["to"], b["R"], b["L"]) for b in net["branches"]]
    shunts = {sh["bus"]: [sh.get("R"), sh["C"]] for sh in net["shunts"]}

    for entry in config.machines:
        if entry["kind"] == "load" and entry["load_kind"] == "shunt_RC":
            R, C = shunts.get(entry["bus"], [None, 0.0])
            R = entry["R"] if R is None else 1.0 / (1.0 / R + 1.0 / entry["R"])
            shunts[entry["bus"]] = [R, C + entry["C"]]

    min_c = config.solver["min_shunt_c"]
    for bus in range(1, net["n_buses"] + 1):
        R, C = shunts.get(bus, [None, 0.0])
        if C <= 0:
            logger.debug("bus %d has no shunt capacitance, inserting %.3g", bus, min_c)
            C = min_c
        shunts[bus] = [R, C]

    return network.NetworkGraph(
        n_buses=net["n_buses"],
        branches=branches,
        shunts=[network.Shunt(bus, R, C) for bus, (R, C) in sorted(shunts.items())],
        w0=w0,
    )


@dataclass(frozen=True)
class MachineState:
    """
    Initialized machine attached to a bus.

    Args:
        index (int): position in the configuration's machine list
        bus (int): bus number
        kind (str): ``sg``, ``gfl``, ``load`` or ``source``
        params: machine parameters
        operating: operating point, ``None`` for loads
        angle (FrameAngle): steady frame angle in the global frame
    """
    index: int
    bus: int
    kind: str
    params: object
    operating: object
    angle: frames.FrameAngle

    def local_impedance(self):
        if self.kind == "sg":
            return machines.sg_steady_impedance(self.params, self.operating)
        if self.kind == "gfl":
            return machines.gfl_steady_impedance(self.params, self.operating)
        if self.kind == "source":
            return machines.source_impedance(self.params)
        return lti.inverse(machines.load_admittance(self.params), allow_improper=True)

    def local_admittance(self):
        if self.kind == "gfl":
            return machines.gfl_steady_admittance(self.params, self.operating)
        if self.kind == "load":
            return machines.load_admittance(self.params)
        return lti.inverse(self.local_impedance())

    def swing_admittance(self):
        """
        Admittance in the machine's own frame with that frame held still.
        """
        if self.kind == "sg":
            return lti.inverse(machines.sg_swing_impedance(self.params))
        if self.kind == "gfl":
            return machines.gfl_swing_admittance(self.params, self.operating)
        return self.local_admittance()

    def impedance(self):
        """
        Steady-frame impedance rotated into the global frame.
        """
        return frames.rotate_to_global(self.local_impedance(), self.angle)

    def admittance(self):
        """
        Steady-frame admittance rotated into the global frame.
        """
        return frames.rotate_to_global(self.local_admittance(), self.angle)


@dataclass(frozen=True)
class Case:
    """
    Prepared case, everything the linear model and the simulation share.
    """
    config: object
    network: network.NetworkGraph
    operating_point: network.OperatingPoint
    machines: tuple

    @property
    def n_buses(self):
        return self.network.n_buses

    @property
    def w0(self):
        return self.network.w0

    def machine_at(self, bus):
        for machine in self.machines:
            if machine.bus == bus:
                return machine
        return None

    @cached_property
    def nodal_admittance(self):
        return network.build_nodal_admittance(self.network)


def prepare_case(config):
    """
    Runs the power flow and initializes every machine.

    Args:
        config (GridConfig): validated configuration

    Returns:
        Case: prepared case

    Raises:
        DuplicateMachineAtBus: more than one machine entry at a bus
        SchemaError: a bus with a power setpoint but no generator
    """
    w0 = config.w0
    net = network_from_config(config)

    entries = []
    seen = {}
    for index, entry in enumerate(config.machines):
        bus = entry["bus"]
        if bus in seen:
            raise DuplicateMachineAtBus(
                f"bus {bus} hosts machines {seen[bus]} and {index}", path=f"/machines/{index}/bus"
            )
        seen[bus] = index
        if entry["kind"] == "load" and entry["load_kind"] == "shunt_RC":
            continue
        entries.append((index, entry, machine_params(entry, w0)))

    active = {entry["bus"] for _, entry, _ in entries if entry["kind"] in ACTIVE_KINDS}
    for position, bus in enumerate(config.buses):
        passive = bus["role"] == "PQ" and bus["P"] == 0 and bus["Q"] == 0
        if bus["bus"] not in active and not passive:
            raise SchemaError(
                f"bus {bus['bus']} has a power setpoint but no generator", path=f"/buses/{position}"
            )

    specs = [network.BusSpec(b["bus"], b["role"], b["P"], b["Q"], b["V"], b["theta"]) for b in config.buses]
    loads = {
        entry["bus"]: machines.load_static_admittance(params)
        for _, entry, params in entries if entry["kind"] == "load"
    }
    op = network.power_flow(
        net, specs, loads=loads, tol=config.solver["pf_tol"], max_iter=config.solver["pf_max_iter"],
        rcond=config.solver["rcond"],
    )
    logger.info("power flow converged in %d iterations", op.iterations)

    states = []
    for index, entry, params in entries:
        bus = entry["bus"]
        v0, i0 = op.V[bus - 1], op.I[bus - 1]
        kind = entry["kind"]
        if kind == "sg":
            operating, angle = machines.sg_init(params, v0, i0)
        elif kind == "gfl":
            operating, angle = machines.gfl_init(params, v0, i0)
        elif kind == "source":
            operating, angle = machines.source_init(params, v0, i0)
        else:
            operating, angle = None, frames.FrameAngle(0.0)
        states.append(MachineState(index, bus, kind, params, operating, angle))

    return Case(config=config, network=net, operating_point=op, machines=tuple(states))
