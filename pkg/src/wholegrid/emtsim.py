# -*- coding: utf-8 -*-
"""
    wholegrid.emtsim
    ~~~~~~~~~~~~~~~~

    Nonlinear time-domain simulation of a prepared case in the global
    synchronous frame, used as the reference for the linear model:
    equilibrium checks, event scenarios, admittance measurement by
    small-signal injection and the finite-difference Jacobian.

    Every complex state is a real dq pair seen as ``x_d + j x_q``. Speeds,
    angles and dc quantities are real states.

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""
import cmath
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.optimize
import scipy.signal

from wholegrid import lti
from wholegrid.case import Case, machine_params, network_from_config, prepare_case
from wholegrid.errors import (
    EventPathInvalid, LeakageDetected, NoEquilibrium, SchemaError, StateBlowup,
    UnstableAtOperatingPoint
)
from wholegrid.logger import logger
from wholegrid.sysmodel import ORIGIN_TOL

BLOWUP = 1e6
EQUILIBRIUM_TOL = 1e-5
JACOBIAN_STEP = 1e-7
STEADY = "steady"
SWING = "swing"
CHANNELS = ("d", "q", "dq")
PROBE_KINDS = ("v", "i", "omega", "vdc", "delta")


@dataclass(frozen=True)
class Event:
    """
    Sets the configuration field at ``path`` to ``value`` at ``time``.
    """
    time: float
    path: str
    value: float


@dataclass(frozen=True)
class SimScenario:
    """
    Time-domain scenario.

    Args:
        t_end (float): end time (s)
        dt (float|Optional): step (s), the configuration's when omitted
        events (tuple[Event]|Optional): parameter changes, time ordered
        probes (tuple[str]|Optional): ``v:<bus>``, ``i:<bus>``,
            ``omega:<bus>``, ``vdc:<bus>``, ``delta:<bus>``; bus voltages
            and machine speeds when omitted
        record_every (int|Optional): keep one step out of this many
    """
    t_end: float
    dt: float = None
    events: tuple = ()
    probes: tuple = None
    record_every: int = 1

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        times = [event.time for event in self.events]
        if times != sorted(times):
            raise ValueError("events must be time ordered")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")

    @classmethod
    def from_dict(cls, data):
        """
        Reads a scenario from its JSON form, with events given as objects
        holding ``time``, ``path`` and ``value``.
        """
        try:
            events = [Event(float(e["time"]), e["path"], float(e["value"])) for e in data.get("events", [])]
            probes = data.get("probes")
            dt = data.get("dt")
            return cls(
                t_end=float(data["t_end"]),
                dt=None if dt is None else float(dt),
                events=events,
                probes=None if probes is None else tuple(probes),
                record_every=int(data.get("record_every", 1)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"invalid scenario: {exc}", path="")


@dataclass(frozen=True)
class InjectionSpec:
    """
    Small-signal voltage injection at a machine terminal.

    Args:
        target (int): bus of the machine
        frame (str): ``steady`` or ``swing``
        channel (str): ``d``, ``q`` or ``dq``; a single channel fills one
            column of the dq admittance and leaves the other NaN
        amplitude (float): injection amplitude (pu), at most 1e-2
        frequencies (tuple): signed frequencies (Hz), never zero
        settle_cycles (int|Optional): cycles discarded before measuring
        measure_cycles (int|Optional): cycles in the DFT window
        dt (float|Optional): nominal step (s), the configuration's when
            omitted; adjusted per frequency to fit the window exactly
        compensate_delay (bool|Optional): undo the half-step lag of the
            sample-and-hold injection
    """
    target: int
    frame: str = STEADY
    channel: str = "dq"
    amplitude: float = 1e-3
    frequencies: tuple = ()
    settle_cycles: int = 20
    measure_cycles: int = 5
    dt: float = None
    compensate_delay: bool = False

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        if self.frame not in (STEADY, SWING):
            raise ValueError(f"unknown measurement frame {self.frame!r}")
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown injection channel {self.channel!r}")
        if not 0 < self.amplitude <= 1e-2:
            raise ValueError("injection amplitude must lie in (0, 1e-2] pu")
        if any(f == 0 or not math.isfinite(f) for f in self.frequencies):
            raise ValueError("injection frequencies must be finite and nonzero")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        for name, least in (("settle_cycles", 0), ("measure_cycles", 1)):
            value = getattr(self, name)
            if value != int(value) or value < least:
                raise LeakageDetected(f"{name} must be a whole number of cycles, got {value}", path=name)


# machine dynamics; rhs() returns the state derivatives and the current the
# machine injects into the network

class _SgDynamics:
    real_states = (False, True, True)

    def __init__(self, machine):
        self.index = machine.index
        self.bus = machine.bus
        self.params = machine.params
        self.op = machine.operating
        self.xi = machine.angle.xi

    def initial(self, v0, w0):
        # stator current into the machine, rotor frame
        return [complex(self.op.i_d0, self.op.i_q0), w0, self.xi]

    def angle(self, x):
        return x[2].real

    def rhs(self, x, v, w0):
        p, op = self.params, self.op
        i, w, delta = x[0], x[1].real, x[2].real
        rot = cmath.exp(1j * delta)
        v_loc = v / rot
        di = (v_loc - p.R * i - 1j * w * p.L * i - w * op.psi_f) / p.L
        dw = (op.psi_f * i.real - op.Tm - p.D * w) / p.J
        return [di, dw, w - w0], -i * rot

    def probe(self, x, v, w0, name):
        return {"omega": x[1].real, "delta": x[2].real}.get(name)


class _GflDynamics:
    real_states = (False, False, True, True, True, True)

    def __init__(self, machine):
        self.index = machine.index
        self.bus = machine.bus
        self.params = machine.params
        self.op = machine.operating
        self.xi = machine.angle.xi

    def initial(self, v0, w0):
        # filter current towards the grid and current-loop integrator in
        # the PLL frame, dc voltage, dc-loop integrator, PLL angle and
        # PLL integrator
        p, op = self.params, self.op
        dec = 1.0 if p.decoupling else 0.0
        i0 = complex(op.i_d0, op.i_q0)
        v_c0 = op.v_d0 + 1j * w0 * p.Lf * i0 + p.Rf * i0
        x0 = v_c0 - dec * (op.v_d0 + 1j * w0 * p.Lf * i0)
        return [i0, x0, op.vdc0, op.i_d0, self.xi, 0.0]

    def angle(self, x):
        return x[4].real

    def _speed(self, x, v_loc, w0):
        return w0 + self.params.kp_pll * v_loc.imag / self.op.v_d0 + x[5].real

    def rhs(self, x, v, w0):
        p, op = self.params, self.op
        dec = 1.0 if p.decoupling else 0.0
        i, xc = x[0], x[1]
        vdc, xdc, theta = x[2].real, x[3].real, x[4].real
        rot = cmath.exp(1j * theta)
        v_loc = v / rot
        w = self._speed(x, v_loc, w0)
        i_ref = complex(p.kp_dc * (vdc - p.vdc_ref) + xdc, op.iq_ref)
        v_c = dec * (v_loc + 1j * w * p.Lf * i) + p.kp_i * (i_ref - i) + xc
        di = (v_c - v_loc - 1j * w * p.Lf * i - p.Rf * i) / p.Lf
        dx = p.ki_i * (i_ref - i)
        dvdc = (op.pin - (v_c * i.conjugate()).real) / (p.Cdc * vdc)
        dxdc = p.ki_dc * (vdc - p.vdc_ref)
        dz = p.ki_pll * v_loc.imag / op.v_d0
        return [di, dx, dvdc, dxdc, w - w0, dz], i * rot

    def probe(self, x, v, w0, name):
        if name == "omega":
            return self._speed(x, v * cmath.exp(-1j * x[4].real), w0)
        return {"vdc": x[2].real, "delta": x[4].real}.get(name)


class _SourceDynamics:
    real_states = (False,)

    def __init__(self, machine):
        self.index = machine.index
        self.bus = machine.bus
        self.params = machine.params
        self.E = machine.operating.E
        self.xi = 0.0

    def initial(self, v0, w0):
        return [(v0 - self.E) / (self.params.R + 1j * w0 * self.params.L)]

    def angle(self, x):
        return 0.0

    def rhs(self, x, v, w0):
        p = self.params
        i = x[0]
        return [(v - self.E - p.R * i - 1j * w0 * p.L * i) / p.L], -i

    def probe(self, x, v, w0, name):
        return None


class _LoadDynamics:

    def __init__(self, machine):
        self.index = machine.index
        self.bus = machine.bus
        self.params = machine.params
        self.xi = 0.0
        self.real_states = (False,) if self.params.kind == "shunt_RL" else ()

    def initial(self, v0, w0):
        if self.real_states:
            return [v0 / (self.params.R + 1j * w0 * self.params.element)]
        return []

    def angle(self, x):
        return 0.0

    def rhs(self, x, v, w0):
        p = self.params
        if not self.real_states:
            return [], -v / p.R
        i = x[0]
        return [(v - p.R * i - 1j * w0 * p.element * i) / p.element], -i

    def probe(self, x, v, w0, name):
        return None


DYNAMICS = {"sg": _SgDynamics, "gfl": _GflDynamics, "source": _SourceDynamics, "load": _LoadDynamics}


class _Plant:
    """
    Whole-system state equations: dynamic branch currents, bus voltages,
    then the states of every machine in configuration order.
    """

    def __init__(self, case):
        self.case = case
        self.config = case.config
        self.w0 = case.w0
        self.n = case.n_buses
        self._load_network(case.network)
        self.n_branches = len(self.k)

        self.dynamics = [DYNAMICS[m.kind](m) for m in case.machines]
        self.slices = []
        real = [False] * (self.n_branches + self.n)
        for dyn in self.dynamics:
            start = len(real)
            real.extend(dyn.real_states)
            self.slices.append(slice(start, len(real)))
        self.real_mask = np.array(real, dtype=bool)
        self.size = len(real)
        self.nodes = slice(self.n_branches, self.n_branches + self.n)

    def _load_network(self, net):
        branches = net.dynamic_branches
        self.k = np.array([br.k - 1 for br in branches], dtype=int)
        self.l = np.array([br.l - 1 for br in branches], dtype=int)
        self.R = np.array([br.R for br in branches], dtype=float)
        self.L = np.array([br.L for br in branches], dtype=float)

        G = np.zeros((self.n, self.n))
        for br in net.branches:
            if br.L == 0:
                g = 1.0 / br.R
                G[br.k - 1, br.k - 1] += g
                G[br.l - 1, br.l - 1] += g
                G[br.k - 1, br.l - 1] -= g
                G[br.l - 1, br.k - 1] -= g
        self.G = G
        shunts = [net.shunt_at(bus) for bus in range(1, self.n + 1)]
        self.g_sh = np.array([0.0 if sh.R is None else 1.0 / sh.R for sh in shunts])
        self.C = np.array([sh.C for sh in shunts])

    def initial(self):
        V = np.asarray(self.case.operating_point.V, dtype=complex)
        x = np.zeros(self.size, dtype=complex)
        x[:self.n_branches] = (V[self.k] - V[self.l]) / (self.R + 1j * self.w0 * self.L)
        x[self.nodes] = V
        for dyn, sl in zip(self.dynamics, self.slices):
            x[sl] = dyn.initial(V[dyn.bus - 1], self.w0)
        return x

    def rhs(self, x):
        w0 = self.w0
        dx = np.zeros_like(x)
        ib = x[:self.n_branches]
        v = x[self.nodes]
        dx[:self.n_branches] = (v[self.k] - v[self.l] - (self.R + 1j * w0 * self.L) * ib) / self.L

        injection = np.zeros(self.n, dtype=complex)
        for dyn, sl in zip(self.dynamics, self.slices):
            dxm, inj = dyn.rhs(x[sl], v[dyn.bus - 1], w0)
            dx[sl] = dxm
            injection[dyn.bus - 1] += inj

        leaving = np.zeros(self.n, dtype=complex)
        np.add.at(leaving, self.k, ib)
        np.add.at(leaving, self.l, -ib)
        dx[self.nodes] = (
            injection - leaving - self.g_sh * v - 1j * w0 * self.C * v - self.G @ v
        ) / self.C
        return dx

    def apply_event(self, event):
        """
        Sets a configuration field and refreshes the element values. The
        operating constants of the machines (field flux, torque, dc power,
        reactive current setpoint and source voltage) are kept.
        """
        try:
            config = self.config.with_value(event.path, event.value)
            net = network_from_config(config)
            params = {dyn.index: machine_params(config.machines[dyn.index], self.w0) for dyn in self.dynamics}
        except (SchemaError, ValueError) as exc:
            message = exc.message if isinstance(exc, SchemaError) else str(exc)
            raise EventPathInvalid(f"event at {event.time:g} s: {message}", path=event.path)
        if len(net.dynamic_branches) != self.n_branches:
            raise EventPathInvalid(
                f"event at {event.time:g} s changes the set of dynamic branches", path=event.path
            )
        self.config = config
        self._load_network(net)
        for dyn in self.dynamics:
            dyn.params = params[dyn.index]
        logger.info("t=%.6g s: %s set to %g", event.time, event.path, event.value)

    def dynamics_at(self, bus):
        for dyn, sl in zip(self.dynamics, self.slices):
            if dyn.bus == bus:
                return dyn, sl
        return None, None

    def pack(self, x):
        """
        Real coordinates: real and imaginary parts of complex states, then
        the real states.
        """
        cplx = x[~self.real_mask]
        return np.concatenate([cplx.real, cplx.imag, x[self.real_mask].real])

    def unpack(self, y):
        m = int(np.count_nonzero(~self.real_mask))
        x = np.zeros(self.size, dtype=complex)
        x[~self.real_mask] = y[:m] + 1j * y[m:2 * m]
        x[self.real_mask] = y[2 * m:]
        return x


def _rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_state(x, t):
    if not np.all(np.isfinite(x)):
        raise StateBlowup(f"non-finite state at t = {t:.6g} s", time=t)
    peak = float(np.max(np.abs(x))) if x.size else 0.0
    if peak > BLOWUP:
        raise StateBlowup(f"state magnitude {peak:.3g} pu at t = {t:.6g} s", time=t)


def _as_case(config):
    return config if isinstance(config, Case) else prepare_case(config)


def _parse_probe(plant, probe):
    kind, _, bus = probe.partition(":")
    if kind not in PROBE_KINDS or not bus.isdigit() or not 1 <= int(bus) <= plant.n:
        raise SchemaError(f"unknown probe {probe!r}", path="/probes")
    bus = int(bus)
    if kind != "v":
        dyn, _ = plant.dynamics_at(bus)
        if dyn is None:
            raise SchemaError(f"probe {probe!r} needs a machine at bus {bus}", path="/probes")
        if kind in ("omega", "vdc", "delta") and dyn.probe(dyn.initial(1.0, plant.w0), 1.0, plant.w0, kind) is None:
            raise SchemaError(f"machine at bus {bus} has no {kind}", path="/probes")
    return kind, bus


def _default_probes(plant):
    probes = [f"v:{bus}" for bus in range(1, plant.n + 1)]
    for dyn in plant.dynamics:
        if isinstance(dyn, (_SgDynamics, _GflDynamics)):
            probes.append(f"omega:{dyn.bus}")
    return probes


def _record(plant, probes, x, t):
    row = {"t": t}
    v = x[plant.nodes]
    for name, (kind, bus) in probes:
        if kind == "v":
            row[f"{name}_re"], row[f"{name}_im"] = v[bus - 1].real, v[bus - 1].imag
            continue
        dyn, sl = plant.dynamics_at(bus)
        if kind == "i":
            _, inj = dyn.rhs(x[sl], v[bus - 1], plant.w0)
            row[f"{name}_re"], row[f"{name}_im"] = inj.real, inj.imag
        else:
            row[name] = float(np.real(dyn.probe(x[sl], v[bus - 1], plant.w0, kind)))
    return row


def simulate(config, scenario):
    """
    Integrates the whole system from its equilibrium with fixed-step RK4.

    Args:
        config (GridConfig|Case): configuration or prepared case
        scenario (SimScenario): horizon, step, events and probes

    Returns:
        DataFrame: a ``t`` column and one column per real probe signal,
        ``<probe>_re``/``<probe>_im`` for complex ones

    Raises:
        StateBlowup: when a state leaves the ``1e6`` pu envelope
        EventPathInvalid: when an event names an unknown or non-numeric
            field
    """
    case = _as_case(config)
    plant = _Plant(case)
    dt = scenario.dt or case.config.solver["dt"]
    steps = int(round(scenario.t_end / dt))
    names = scenario.probes if scenario.probes is not None else _default_probes(plant)
    probes = [(name, _parse_probe(plant, name)) for name in names]

    # events apply before the first step that starts at or after their time
    pending = [(max(0, math.ceil(event.time / dt - 1e-9)), event) for event in scenario.events]
    logger.info("simulating %d steps of %.3g s with %d states", steps, dt, plant.size)

    x = plant.initial()
    rows = []
    for n in range(steps + 1):
        t = n * dt
        while pending and pending[0][0] <= n:
            plant.apply_event(pending.pop(0)[1])
        if n % scenario.record_every == 0 or n == steps:
            rows.append(_record(plant, probes, x, t))
        if n == steps:
            break
        x = _rk4_step(plant.rhs, x, dt)
        _check_state(x, t + dt)
    return pd.DataFrame(rows)


def equilibrium_residual(config):
    """
    Largest state derivative at the initial state, zero at an exact
    equilibrium.
    """
    plant = _Plant(_as_case(config))
    return float(np.max(np.abs(plant.rhs(plant.initial())), initial=0.0))


def linearize(config, step=JACOBIAN_STEP):
    """
    Central finite-difference Jacobian of the nonlinear state equations at
    the operating point, in real coordinates.

    Args:
        config (GridConfig|Case): configuration or prepared case
        step (float|Optional): perturbation (pu)

    Returns:
        ndarray: real square Jacobian; its eigenvalues are the reference
        pole set of the linear model

    Raises:
        NoEquilibrium: when the initial state is not an equilibrium
    """
    plant = _Plant(_as_case(config))
    x0 = plant.initial()
    residual = float(np.max(np.abs(plant.rhs(x0)), initial=0.0))
    if residual > EQUILIBRIUM_TOL:
        raise NoEquilibrium(f"state derivative {residual:.3e} at the operating point", residual=residual)

    y0 = plant.pack(x0)
    size = y0.size
    jac = np.zeros((size, size))
    for j in range(size):
        dy = np.zeros(size)
        dy[j] = step
        up = plant.pack(plant.rhs(plant.unpack(y0 + dy)))
        down = plant.pack(plant.rhs(plant.unpack(y0 - dy)))
        jac[:, j] = (up - down) / (2.0 * step)
    logger.debug("jacobian of %d real states, equilibrium residual %.3e", size, residual)
    return jac


def match_eigenvalues(reference, candidate):
    """
    Pairs two eigenvalue sets by minimum total distance.

    Returns:
        tuple: ``(reference, matched candidate)`` arrays, element-wise paired
    """
    reference = np.asarray(reference, dtype=complex)
    candidate = np.asarray(candidate, dtype=complex)
    if reference.size != candidate.size:
        raise ValueError(f"cannot pair {reference.size} with {candidate.size} eigenvalues")
    cost = np.abs(reference[:, None] - candidate[None, :])
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    return reference[rows], candidate[cols]


def _measure_channel(plant, dyn, sl, spec, f, h, settle, window, channel):
    # drives the machine alone from an ideal voltage source and returns the
    # DFT bin of the dq current response at the injected frequency
    w0 = plant.w0
    omega = 2.0 * math.pi * abs(f)
    V0 = complex(plant.case.operating_point.V[dyn.bus - 1])
    local0 = V0 * cmath.exp(-1j * dyn.xi)

    def terminal(x, dv):
        if spec.frame == SWING:
            return (local0 + dv) * cmath.exp(1j * dyn.angle(x))
        return V0 + dv * cmath.exp(1j * dyn.xi)

    def frame_current(x, v):
        _, inj = dyn.rhs(x, v, w0)
        angle = dyn.angle(x) if spec.frame == SWING else dyn.xi
        return -inj * cmath.exp(-1j * angle)

    x = np.array(plant.initial()[sl])
    i0 = frame_current(x, V0)
    unit = 1.0 if channel == "d" else 1j
    acc = np.zeros(2, dtype=complex)
    for n in range(settle + window):
        t = n * h
        dv = spec.amplitude * math.cos(omega * t) * unit
        if n >= settle:
            di = frame_current(x, terminal(x, dv)) - i0
            acc += np.array([di.real, di.imag]) * cmath.exp(-1j * omega * t)

        def rhs(state, dv=dv):
            return np.array(dyn.rhs(state, terminal(state, dv), w0)[0], dtype=complex)

        x = _rk4_step(rhs, x, h)
        _check_state(x, t + h)
    return 2.0 * acc / window / spec.amplitude


def measure_admittance(config, spec):
    """
    Measures the terminal admittance of one machine by small-signal
    injection. The machine is driven by an ideal voltage source holding the
    power-flow voltage; a cosine perturbation is added on the d and then the
    q axis of the steady or swing frame and the current response is read by
    a single-bin DFT over whole cycles.

    The voltage perturbation is held over each step, which delays it by half
    a step; ``compensate_delay`` removes the resulting phase lag.

    Args:
        config (GridConfig|Case): configuration or prepared case
        spec (InjectionSpec): measurement settings

    Returns:
        list[FrequencySample]: 2x2 admittances in +- coordinates of the
        requested frame

    Raises:
        SchemaError: the bus does not exist or hosts no machine
        UnstableAtOperatingPoint: when the machine model in the measured
            frame has poles in the closed right half plane away from the
            origin
        LeakageDetected: when the window does not hold whole cycles
    """
    case = _as_case(config)
    if not 1 <= spec.target <= case.n_buses:
        raise SchemaError(f"bus {spec.target} does not exist in a {case.n_buses} bus network", path="/bus")
    machine = case.machine_at(spec.target)
    if machine is None:
        raise SchemaError(f"no machine to measure at bus {spec.target}", path="/bus")
    model = machine.swing_admittance() if spec.frame == SWING else machine.local_admittance()
    # the neutral frame mode of a very heavy rotor sits at the origin
    rightmost = max((p.real for p in lti.poles(model) if abs(p) > ORIGIN_TOL), default=-math.inf)
    if rightmost >= 0:
        raise UnstableAtOperatingPoint(
            f"machine at bus {spec.target} has a pole at real part {rightmost:.3g}", rightmost=rightmost
        )

    plant = _Plant(case)
    dyn, sl = plant.dynamics_at(spec.target)
    dt = spec.dt or case.config.solver["dt"]
    channels = ("d", "q") if spec.channel == "dq" else (spec.channel,)

    samples = []
    for f in spec.frequencies:
        span = spec.measure_cycles / abs(f)
        window = max(1, int(round(span / dt)))
        h = span / window
        settle = int(round(spec.settle_cycles * window / spec.measure_cycles))
        if abs(window * h * abs(f) - spec.measure_cycles) > 1e-9 * spec.measure_cycles:
            raise LeakageDetected(f"window at {f:g} Hz does not hold whole cycles", frequency=f)

        y_dq = np.full((2, 2), np.nan, dtype=complex)
        for channel in channels:
            column = 0 if channel == "d" else 1
            y_dq[:, column] = _measure_channel(plant, dyn, sl, spec, f, h, settle, window, channel)
        if spec.compensate_delay:
            y_dq = y_dq * cmath.exp(1j * math.pi * abs(f) * h)
        if f < 0:
            y_dq = y_dq.conj()
        samples.append(lti.FrequencySample(f, lti.T_PM @ y_dq @ lti.T_PM_INV))
        logger.debug("measured bus %d at %.6g Hz with %d steps of %.3g s", spec.target, f, settle + window, h)
    return samples


def fit_growth_rate(t, y):
    """
    Exponential growth rate of an oscillating signal: a straight line fit
    through the logarithm of its peaks about the mean. Negative values are
    decay rates.

    Args:
        t (array_like): sample times (s)
        y (array_like): signal

    Returns:
        float: rate in 1/s
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    deviation = np.abs(y - y.mean())
    peaks, _ = scipy.signal.find_peaks(deviation)
    peaks = peaks[deviation[peaks] > 0]
    if peaks.size < 2:
        raise ValueError("the signal needs at least two peaks to fit a growth rate")
    slope, _ = np.polyfit(t[peaks], np.log(deviation[peaks]), 1)
    return float(slope)
