# -*- coding: utf-8 -*-
"""
    wholegrid.network
    ~~~~~~~~~~~~~~~~~

    Network description, dynamic nodal admittance matrix and AC power flow.

    Buses are numbered from 1 and bus ``k`` occupies the +- rows
    ``2(k-1), 2(k-1)+1`` of every port model. Bus 1 is the slack bus and
    anchors the global steady frame.

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from wholegrid import lti
from wholegrid.errors import (
    DisconnectedGraph, IllConditionedJacobian, PowerFlowDiverged, SchemaError
)
from wholegrid.logger import logger

SLACK = "slack"
PV = "PV"
PQ = "PQ"
BUS_ROLES = (SLACK, PV, PQ)


@dataclass(frozen=True)
class Branch:
    """
    Series RL branch between buses ``k`` and ``l``. ``L = 0`` makes the
    branch a static conductance.
    """
    k: int
    l: int
    R: float
    L: float


@dataclass(frozen=True)
class Shunt:
    """
    Bus shunt: parallel resistance (``None`` for none) and capacitance.
    """
    bus: int
    R: float = None
    C: float = 0.0


@dataclass(frozen=True)
class NetworkGraph:
    """
    Immutable network topology and element values in per unit.

    Args:
        n_buses (int): number of buses
        branches (tuple[Branch]): series branches
        shunts (tuple[Shunt]): bus shunts, at most one per bus
        w0 (float): rated angular frequency (rad/s)
    """
    n_buses: int
    branches: tuple
    shunts: tuple
    w0: float

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "shunts", tuple(self.shunts))
        if self.n_buses < 1:
            raise SchemaError("a network needs at least one bus", path="/network/n_buses")

        pairs = set()
        for index, br in enumerate(self.branches):
            path = f"/network/branches/{index}"
            if not (1 <= br.k <= self.n_buses and 1 <= br.l <= self.n_buses) or br.k == br.l:
                raise SchemaError(f"branch {br.k}-{br.l} does not join two buses", path=path)
            pair = frozenset((br.k, br.l))
            if pair in pairs:
                raise SchemaError(f"parallel branch {br.k}-{br.l}, merge it first", path=path)
            pairs.add(pair)
            if br.R < 0 or br.L < 0 or (br.L == 0 and br.R <= 0):
                raise SchemaError(f"branch {br.k}-{br.l} has invalid R or L", path=path)

        buses = set()
        for index, sh in enumerate(self.shunts):
            path = f"/network/shunts/{index}"
            if not 1 <= sh.bus <= self.n_buses or sh.bus in buses:
                raise SchemaError(f"shunt at bus {sh.bus} is unknown or repeated", path=path)
            if (sh.R is not None and sh.R <= 0) or sh.C < 0:
                raise SchemaError(f"shunt at bus {sh.bus} has invalid R or C", path=path)
            buses.add(sh.bus)

    @property
    def dynamic_branches(self):
        return [br for br in self.branches if br.L > 0]

    def shunt_at(self, bus):
        for sh in self.shunts:
            if sh.bus == bus:
                return sh
        return Shunt(bus)

    def graph(self):
        g = nx.Graph()
        g.add_nodes_from(range(1, self.n_buses + 1))
        g.add_edges_from((br.k, br.l) for br in self.branches)
        return g


@dataclass(frozen=True)
class BusSpec:
    """
    Power flow role and setpoints of a bus. Powers are injections into the
    network.
    """
    bus: int
    role: str
    P: float = 0.0
    Q: float = 0.0
    V: float = 1.0
    theta: float = 0.0


@dataclass(frozen=True)
class OperatingPoint:
    """
    Power flow solution in the global steady frame.

    Args:
        V (ndarray): bus voltage phasors
        I (ndarray): current injected into the network at each bus
        S (ndarray): complex power injected into the network at each bus
        w0 (float): rated angular frequency (rad/s)
        iterations (int): Newton iterations used
    """
    V: np.ndarray
    I: np.ndarray
    S: np.ndarray
    w0: float
    iterations: int = 0
    trace: tuple = field(default=(), compare=False)


def check_connected(net):
    g = net.graph()
    if not nx.is_connected(g):
        islands = [sorted(c) for c in nx.connected_components(g)]
        raise DisconnectedGraph(f"network splits into {len(islands)} islands", islands=islands)


def _incidence(net, branches):
    M = np.zeros((net.n_buses, len(branches)))
    for col, br in enumerate(branches):
        M[br.k - 1, col] = 1.0
        M[br.l - 1, col] = -1.0
    return M


def build_nodal_admittance(net):
    """
    Dynamic nodal admittance matrix in +- coordinates.

    Each dynamic branch carries two states, its +- currents,
    ``L di/dt = v_k - v_l - (R +- j w0 L) i``. Shunt capacitances appear in
    the derivative feedthrough, static conductances in the feedthrough.

    Args:
        net (NetworkGraph): network description

    Returns:
        LtiSystem: 2N x 2N admittance from bus voltages to currents
        injected into the network

    Raises:
        DisconnectedGraph: when the network is not connected
    """
    check_connected(net)
    n, w0 = net.n_buses, net.w0
    dynamic = net.dynamic_branches
    static = [br for br in net.branches if br.L == 0]

    # +- component blocks interleaved per bus
    def interleave(M_plus, M_minus):
        rows, cols = M_plus.shape
        out = np.zeros((2 * rows, 2 * cols), dtype=complex)
        out[0::2, 0::2] = M_plus
        out[1::2, 1::2] = M_minus
        return out

    Minc = _incidence(net, dynamic)
    L = np.array([br.L for br in dynamic])
    R = np.array([br.R for br in dynamic])
    A = interleave(np.diag(-R / L - 1j * w0), np.diag(-R / L + 1j * w0)) if dynamic else np.zeros((0, 0))
    B = interleave(Minc.T / L[:, None], Minc.T / L[:, None]) if dynamic else np.zeros((0, 2 * n))
    C = interleave(Minc, Minc) if dynamic else np.zeros((2 * n, 0))

    G_static = np.zeros((n, n))
    if static:
        Ms = _incidence(net, static)
        G_static = Ms @ np.diag([1.0 / br.R for br in static]) @ Ms.T

    g_sh = np.array([0.0 if net.shunt_at(k).R is None else 1.0 / net.shunt_at(k).R for k in range(1, n + 1)])
    c_sh = np.array([net.shunt_at(k).C for k in range(1, n + 1)])
    D = interleave(G_static + np.diag(g_sh + 1j * w0 * c_sh), G_static + np.diag(g_sh - 1j * w0 * c_sh))
    E = interleave(np.diag(c_sh), np.diag(c_sh))

    logger.debug("nodal admittance: %d buses, %d branch states", n, A.shape[0])
    return lti.LtiSystem(A, B, C, D, E, real_equivalent=True)


def nodal_admittance_at(net, s):
    """
    Pointwise assembly of the nodal admittance at ``s``, element by element.
    """
    n, w0 = net.n_buses, net.w0
    Y = np.zeros((2 * n, 2 * n), dtype=complex)
    for br in net.branches:
        k, l = 2 * (br.k - 1), 2 * (br.l - 1)
        for sign, offset in ((1, 0), (-1, 1)):
            y = 1.0 / (br.R + (s + sign * 1j * w0) * br.L)
            Y[k + offset, k + offset] += y
            Y[l + offset, l + offset] += y
            Y[k + offset, l + offset] -= y
            Y[l + offset, k + offset] -= y
    for sh in net.shunts:
        k = 2 * (sh.bus - 1)
        g = 0.0 if sh.R is None else 1.0 / sh.R
        Y[k, k] += g + (s + 1j * w0) * sh.C
        Y[k + 1, k + 1] += g + (s - 1j * w0) * sh.C
    return Y


def static_admittance(net, loads=None):
    """
    Conventional bus admittance matrix, the + component at ``s = 0``.

    Args:
        net (NetworkGraph): network description
        loads (dict|Optional): bus to extra shunt admittance
    """
    Y = nodal_admittance_at(net, 0.0)[0::2, 0::2]
    for bus, y in (loads or {}).items():
        Y[bus - 1, bus - 1] += y
    return Y


def _power_jacobian(Y, V):
    # derivatives of S = V conj(Y V) w.r.t. angle and magnitude, polar form
    I = Y @ V
    Vnorm = V / np.abs(V)
    dS_dVm = np.diag(V) @ np.conj(Y @ np.diag(Vnorm)) + np.diag(np.conj(I)) @ np.diag(Vnorm)
    dS_dVa = 1j * np.diag(V) @ np.conj(np.diag(I) - Y @ np.diag(V))
    return dS_dVa, dS_dVm


def power_flow(net, specs, loads=None, tol=1e-10, max_iter=50, rcond=lti.RCOND):
    """
    Newton-Raphson power flow in polar coordinates from a flat start.

    Args:
        net (NetworkGraph): network description
        specs (list[BusSpec]): one entry per bus, exactly one slack
        loads (dict|Optional): bus to constant shunt admittance of passive
            loads, part of the power balance but not of the injections
        tol (float|Optional): mismatch infinity norm (pu)
        max_iter (int|Optional): iteration limit
        rcond (float|Optional): smallest reciprocal condition number of
            the Newton Jacobian

    Returns:
        OperatingPoint: bus voltages and the injections into the network

    Raises:
        PowerFlowDiverged: iteration limit reached, carries the mismatch trace
        IllConditionedJacobian: the Newton step cannot be solved
    """
    check_connected(net)
    n = net.n_buses
    by_bus = {spec.bus: spec for spec in specs}
    if sorted(by_bus) != list(range(1, n + 1)) or len(specs) != n:
        raise SchemaError("power flow needs exactly one entry per bus", path="/buses")
    slack = [spec.bus for spec in specs if spec.role == SLACK]
    if slack != [1]:
        raise SchemaError("bus 1 must be the only slack bus", path="/buses")

    Y = static_admittance(net, loads)
    Y_net = static_admittance(net)
    roles = [by_bus[k].role for k in range(1, n + 1)]
    pv = [k for k, role in enumerate(roles) if role == PV]
    pq = [k for k, role in enumerate(roles) if role == PQ]
    pvpq = sorted(pv + pq)
    S_spec = np.array([by_bus[k].P + 1j * by_bus[k].Q for k in range(1, n + 1)])

    Vm = np.ones(n)
    Va = np.zeros(n)
    for k, role in enumerate(roles):
        if role in (SLACK, PV):
            Vm[k] = by_bus[k + 1].V
        if role == SLACK:
            Va[k] = by_bus[k + 1].theta
    V = Vm * np.exp(1j * Va)

    trace = []
    for iteration in range(max_iter + 1):
        mismatch = V * np.conj(Y @ V) - S_spec
        F = np.concatenate([mismatch[pvpq].real, mismatch[pq].imag])
        norm = float(np.max(np.abs(F))) if F.size else 0.0
        trace.append(norm)
        logger.debug("power flow iteration %d: mismatch %.3e", iteration, norm)
        if norm < tol:
            break
        if iteration == max_iter:
            raise PowerFlowDiverged(
                f"no convergence after {max_iter} iterations, mismatch {norm:.3e}", trace=trace
            )

        dS_dVa, dS_dVm = _power_jacobian(Y, V)
        J = np.block([
            [dS_dVa[np.ix_(pvpq, pvpq)].real, dS_dVm[np.ix_(pvpq, pq)].real],
            [dS_dVa[np.ix_(pq, pvpq)].imag, dS_dVm[np.ix_(pq, pq)].imag],
        ])
        if lti.rcond(J) < rcond:
            raise IllConditionedJacobian(f"power flow Jacobian is singular at iteration {iteration}")
        dx = -np.linalg.solve(J, F)
        Va[pvpq] += dx[:len(pvpq)]
        Vm[pq] += dx[len(pvpq):]
        V = Vm * np.exp(1j * Va)

    I = Y_net @ V
    return OperatingPoint(V=V, I=I, S=V * np.conj(I), w0=net.w0, iterations=iteration, trace=tuple(trace))
