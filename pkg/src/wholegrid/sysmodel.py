# -*- coding: utf-8 -*-
"""
    wholegrid.sysmodel
    ~~~~~~~~~~~~~~~~~~

    Whole-system model: the block-diagonal machine matrix closed against the
    nodal admittance matrix. The closed loop has virtual injections
    ``[i_hat; v_hat]`` as inputs and node responses ``[dv; di]`` as outputs,
    so the whole-system impedance and admittance are two port selections of
    one realization and share its state matrix.

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from wholegrid import lti
from wholegrid.case import Case, prepare_case
from wholegrid.errors import (
    DimMismatch, DuplicateMachineAtBus, EigFailure, IllPosedLoop, ImproperSystem, NotAMode, SchemaError,
    SingularAtS, SingularD, WholeGridError
)
from wholegrid.logger import logger

IMPEDANCE = "impedance"
ADMITTANCE = "admittance"

PRIMAL = "primal"
DUAL = "dual"
AUTO = "auto"

GROUP_LABELS = ("swing", "pll", "flux", "current")

# frequency offset used when a spectrum point falls on a pole
NUDGE_HZ = 1e-6
# rad/s
ORIGIN_TOL = 1e-4


@dataclass(frozen=True)
class MachineMatrix:
    """
    Block-diagonal machine matrix, one 2x2 block per bus. ``None`` marks a
    bus without a machine, an open circuit.

    Args:
        blocks (tuple): per-bus LtiSystem or None
        domain (str): ``impedance`` or ``admittance``
    """
    blocks: tuple
    domain: str = IMPEDANCE

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.domain not in (IMPEDANCE, ADMITTANCE):
            raise ValueError(f"unknown machine matrix domain {self.domain!r}")

    @property
    def n_buses(self):
        return len(self.blocks)

    @property
    def has_open_buses(self):
        return any(block is None for block in self.blocks)

    @property
    def is_proper(self):
        return all(block is None or block.is_proper for block in self.blocks)

    @property
    def block_diagonal(self):
        """
        The 2N x 2N system. Open buses are zero admittance blocks; the
        impedance matrix of a grid with open buses does not exist.
        """
        if self.domain == IMPEDANCE and self.has_open_buses:
            raise SingularD("an open bus has no impedance, use the admittance formulation")
        return lti.block_diag(*[lti.zeros(2, 2) if b is None else b for b in self.blocks])

    def inverted(self):
        """
        The same machines in the other domain, inverted block by block.
        """
        other = ADMITTANCE if self.domain == IMPEDANCE else IMPEDANCE
        return MachineMatrix([None if b is None else lti.inverse(b) for b in self.blocks], other)


@dataclass(frozen=True)
class WholeSystemModel:
    """
    Closed-loop whole-system model.

    Args:
        machines (MachineMatrix): machine matrix the loop was closed with
        network (LtiSystem): nodal admittance or its inverse
        closed_loop (LtiSystem): inputs ``[i_hat; v_hat]``, outputs
            ``[dv; di]``
        formulation (str): ``primal`` or ``dual``
        node_index (dict): bus number to block index
    """
    machines: MachineMatrix
    network: lti.LtiSystem
    closed_loop: lti.LtiSystem
    formulation: str
    node_index: dict = field(default_factory=dict)

    @property
    def n_buses(self):
        return self.machines.n_buses

    @property
    def closed_loop_A(self):
        return self.closed_loop.A

    @property
    def Zhat(self):
        n = 2 * self.n_buses
        return _select(self.closed_loop, range(0, n), range(0, n))

    @property
    def Yhat(self):
        n = 2 * self.n_buses
        return _select(self.closed_loop, range(n, 2 * n), range(n, 2 * n))

    def bus_rows(self, bus):
        k = self.node_index[bus]
        return [2 * k, 2 * k + 1]


@dataclass(frozen=True)
class PoleRecord:
    """
    A closed-loop pole in rad/s with reporting metadata.
    """
    value: complex
    group_label: str = None

    @property
    def frequency_hz(self):
        return self.value.imag / (2.0 * np.pi)

    @property
    def damping_ratio(self):
        magnitude = abs(self.value)
        return 0.0 if magnitude == 0 else -self.value.real / magnitude


@dataclass(frozen=True)
class StabilitySummary:
    stable: bool
    rightmost: PoleRecord
    least_damped: PoleRecord


@dataclass(frozen=True)
class SweepPoint:
    """
    Poles at one sweep value, ordered so that position ``j`` follows the
    same trajectory at every point. ``error`` holds the structured error of
    a failed point.
    """
    value: float
    poles: tuple
    error: dict = None


def _select(sys, rows, cols):
    rows, cols = list(rows), list(cols)
    return lti.LtiSystem(
        sys.A, sys.B[:, cols], sys.C[rows, :], sys.D[np.ix_(rows, cols)], sys.E[np.ix_(rows, cols)],
        real_equivalent=sys.real_equivalent,
    )


def assemble_machines(models, n_buses, domain=IMPEDANCE):
    """
    Builds the block-diagonal machine matrix.

    Args:
        models (list): ``(bus, LtiSystem)`` pairs, models already in the
            global frame
        n_buses (int): number of buses
        domain (str|Optional): ``impedance`` or ``admittance``

    Returns:
        MachineMatrix: one block per bus

    Raises:
        DuplicateMachineAtBus: two models at one bus
    """
    blocks = [None] * n_buses
    for bus, model in models:
        if blocks[bus - 1] is not None:
            raise DuplicateMachineAtBus(f"bus {bus} already hosts a machine")
        if model.input_dim != 2 or model.output_dim != 2:
            raise DimMismatch(f"machine at bus {bus} is not a 2x2 port model")
        blocks[bus - 1] = model
    return MachineMatrix(blocks, domain)


def _interconnect(G, H, sign, rcond=lti.RCOND):
    """
    Realizes ``b = G a + sign r2``, ``a = r1 - H b`` with inputs
    ``[r1; r2]`` and outputs ``[a; b]``, states ``[x_G, x_H]``. The loop is
    ill-posed when ``I + D_H D_G`` has a reciprocal condition number below
    ``rcond``.
    """
    if not (G.is_proper and H.is_proper):
        raise ImproperSystem("loop closure needs proper realizations")
    n = G.input_dim
    I = np.eye(n)
    F = I + H.D @ G.D
    if lti.rcond(F) < rcond:
        raise IllPosedLoop("I + D_H D_G is singular, the loop has an algebraic cycle")
    F_inv = np.linalg.inv(F)
    nG, nH = G.state_dim, H.state_dim

    # a = Ka_x x + Ka_r r
    Ka_x = F_inv @ np.hstack([-H.D @ G.C, -H.C])
    Ka_r = F_inv @ np.hstack([I, -sign * H.D])
    # b = Kb_x x + Kb_r r
    Kb_x = np.hstack([G.C, np.zeros((n, nH))]) + G.D @ Ka_x
    Kb_r = np.hstack([np.zeros((n, n)), sign * I]) + G.D @ Ka_r

    A = scipy.linalg.block_diag(G.A, H.A) + np.vstack([G.B @ Ka_x, H.B @ Kb_x])
    B = np.vstack([G.B @ Ka_r, H.B @ Kb_r])
    C = np.vstack([Ka_x, Kb_x])
    D = np.vstack([Ka_r, Kb_r])
    return lti.LtiSystem(A.reshape(nG + nH, nG + nH), B, C.reshape(2 * n, nG + nH), D)


def _node_index(n_buses):
    return {bus: bus - 1 for bus in range(1, n_buses + 1)}


def close_loop(Zm, Yb, rcond=lti.RCOND):
    """
    Primal closure, ``Zhat = Zm (I + Yb Zm)^-1`` and
    ``Yhat = (I + Yb Zm)^-1 Yb``.

    Realized directly when both sides are proper. Improper sides (inductive
    machine impedances, capacitive nodal admittances) are realized through
    the equivalent admittance-domain closure with the same transfer
    matrices.

    Args:
        Zm (MachineMatrix): machine impedances
        Yb (LtiSystem): nodal admittance matrix
        rcond (float|Optional): conditioning limit of the loop closure

    Returns:
        WholeSystemModel: closed loop

    Raises:
        IllPosedLoop: the interconnection has an algebraic cycle
    """
    if Zm.domain != IMPEDANCE:
        raise ValueError("close_loop needs an impedance machine matrix")
    _check_network(Zm, Yb)
    if Zm.has_open_buses or not Zm.is_proper or not Yb.is_proper:
        logger.debug("primal loop has improper sides, closing it in the admittance domain")
        model = close_loop_dual(Zm.inverted(), lti.inverse(Yb), rcond)
        return WholeSystemModel(Zm, Yb, model.closed_loop, PRIMAL, model.node_index)

    G = Zm.block_diagonal
    loop = _interconnect(G, Yb, +1, rcond)
    n = G.input_dim
    I, Z = np.eye(n), np.zeros((n, n))
    # a = i_m, b = v + v_hat: dv = b - v_hat, di = i_hat - a
    out = np.block([[Z, I], [-I, Z]])
    feed = np.block([[Z, -I], [I, Z]])
    closed = lti.LtiSystem(loop.A, loop.B, out @ loop.C, out @ loop.D + feed, real_equivalent=True)
    logger.debug("primal loop closed with %d states", closed.state_dim)
    return WholeSystemModel(Zm, Yb, closed, PRIMAL, _node_index(Zm.n_buses))


def close_loop_dual(Ym, Zb, rcond=lti.RCOND):
    """
    Dual closure, ``Yhat = Ym (I + Zb Ym)^-1`` and
    ``Zhat = (I + Zb Ym)^-1 Zb``. Buses without a machine are zero
    admittance blocks.

    Args:
        Ym (MachineMatrix): machine admittances
        Zb (LtiSystem): inverse of the nodal admittance matrix
        rcond (float|Optional): conditioning limit of the loop closure

    Returns:
        WholeSystemModel: closed loop

    Raises:
        ImproperSystem: a machine admittance or the network impedance has a
            derivative feedthrough
        IllPosedLoop: the interconnection has an algebraic cycle
    """
    if Ym.domain != ADMITTANCE:
        raise ValueError("close_loop_dual needs an admittance machine matrix")
    _check_network(Ym, Zb)
    if not Ym.is_proper:
        raise ImproperSystem("machine admittances must be proper in the dual formulation")
    if not Zb.is_proper:
        raise ImproperSystem("the network impedance must be proper in the dual formulation")

    loop = _interconnect(Zb, Ym.block_diagonal, -1, rcond)
    n = Zb.input_dim
    I, Z = np.eye(n), np.zeros((n, n))
    # a = i_hat - i_m is the network current, b = dv
    out = np.block([[Z, I], [I, Z]])
    closed = lti.LtiSystem(loop.A, loop.B, out @ loop.C, out @ loop.D, real_equivalent=True)
    logger.debug("dual loop closed with %d states", closed.state_dim)
    return WholeSystemModel(Ym, Zb, closed, DUAL, _node_index(Ym.n_buses))


def _check_network(machines, net):
    n = 2 * machines.n_buses
    if net.input_dim != n or net.output_dim != n:
        raise DimMismatch(f"network is {net.output_dim}x{net.input_dim}, machines need {n}x{n}")


def build_model(case, formulation=AUTO):
    """
    Whole-system model of a prepared case.

    ``auto`` closes the primal loop when every bus hosts a machine whose
    impedance can be realized and the dual loop otherwise.

    Args:
        case (Case|GridConfig): prepared case, or a configuration to prepare
        formulation (str|Optional): ``primal``, ``dual`` or ``auto``

    Returns:
        WholeSystemModel: closed loop
    """
    if not isinstance(case, Case):
        case = prepare_case(case)
    Yb = case.nodal_admittance
    n = case.n_buses
    rcond = case.config.solver["rcond"]

    if formulation in (PRIMAL, AUTO):
        try:
            Zm = assemble_machines([(m.bus, m.impedance()) for m in case.machines], n, IMPEDANCE)
            if Zm.has_open_buses:
                raise SingularD("buses without machines")
            return close_loop(Zm, Yb, rcond)
        except SingularD as exc:
            if formulation == PRIMAL:
                raise
            logger.debug("primal formulation unavailable (%s), using the dual", exc.message)
    elif formulation != DUAL:
        raise ValueError(f"unknown formulation {formulation!r}")

    Ym = assemble_machines([(m.bus, m.admittance()) for m in case.machines], n, ADMITTANCE)
    return close_loop_dual(Ym, lti.inverse(Yb), rcond)


def group_label(value, bands=(15.0, 45.0, 75.0)):
    """
    Frequency-band label of a pole: swing, pll, flux or current.
    """
    f = abs(value.imag) / (2.0 * np.pi)
    for label, edge in zip(GROUP_LABELS, bands):
        if f < edge:
            return label
    return GROUP_LABELS[-1]


def system_poles(m, bands=(15.0, 45.0, 75.0)):
    """
    Closed-loop poles with group labels.

    Args:
        m (WholeSystemModel): assembled model
        bands (tuple|Optional): band edges in Hz

    Returns:
        list[PoleRecord]: poles ordered by frequency, then real part
    """
    values = lti.poles(m.closed_loop)
    return [PoleRecord(complex(v), group_label(v, bands)) for v in values]


def stability_summary(poles, tol=ORIGIN_TOL):
    """
    Stability verdict of a pole set: stable when every pole lies strictly in
    the left half plane. Poles within ``tol`` of the origin are the common
    angle mode of a grid without a stiff source and are left out.
    """
    if not poles:
        raise EigFailure("no poles to summarize")
    poles = [p for p in poles if abs(p.value) > tol] or list(poles)
    rightmost = max(poles, key=lambda p: p.value.real)
    oscillatory = [p for p in poles if abs(p.value.imag) > 0] or list(poles)
    least_damped = min(oscillatory, key=lambda p: p.damping_ratio)
    return StabilitySummary(rightmost.value.real < 0, rightmost, least_damped)


def bus_spectrum(m, bus, grid):
    """
    Samples the diagonal 2x2 block of the whole-system admittance at a bus.

    Args:
        m (WholeSystemModel): assembled model
        bus (int): bus number
        grid (iterable): signed frequencies in Hz

    Returns:
        list[FrequencySample]: one sample per grid frequency, at the nudged
        frequency when the grid hits a pole

    Raises:
        SchemaError: the bus is not part of the model
    """
    if bus not in m.node_index:
        raise SchemaError(f"bus {bus} does not exist in a {m.n_buses} bus model", path="/bus")
    rows = [2 * m.n_buses + r for r in m.bus_rows(bus)]
    block = _select(m.closed_loop, rows, rows)
    samples = []
    for f in grid:
        f = float(f)
        try:
            value = lti.evaluate(block, 2j * np.pi * f)
        except SingularAtS:
            logger.debug("spectrum point %.6g Hz sits on a pole, nudging", f)
            f += NUDGE_HZ
            value = lti.evaluate(block, 2j * np.pi * f)
        samples.append(lti.FrequencySample(f, value))
    return samples


def participation(m, pole, tol=1e-6):
    """
    Bus participation in a mode: the residue of each bus's diagonal block of
    the whole-system admittance at the pole, normalized to a maximum of 1.

    Args:
        m (WholeSystemModel): assembled model
        pole (complex): mode in rad/s
        tol (float|Optional): relative distance accepted to the nearest
            eigenvalue

    Returns:
        list[tuple]: ``(bus, magnitude)`` in bus order

    Raises:
        NotAMode: when no eigenvalue is close to ``pole``
    """
    A = m.closed_loop_A
    try:
        values, left, right = scipy.linalg.eig(A, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigFailure(f"eigenvector computation failed: {exc}")
    index = int(np.argmin(np.abs(values - pole)))
    if abs(values[index] - pole) > tol * max(1.0, abs(pole)):
        raise NotAMode(f"{pole} is not an eigenvalue of the closed loop", nearest=str(values[index]))

    w = right[:, index]
    u = left[:, index].conj()
    scale = u @ w
    n = 2 * m.n_buses
    magnitudes = []
    for bus in sorted(m.node_index):
        rows = [n + r for r in m.bus_rows(bus)]
        residue = np.outer(m.closed_loop.C[rows, :] @ w, u @ m.closed_loop.B[:, rows]) / scale
        magnitudes.append(np.linalg.norm(residue))
    magnitudes = np.array(magnitudes)
    peak = magnitudes.max()
    if peak > 0:
        magnitudes = magnitudes / peak
    return [(bus, float(mag)) for bus, mag in zip(sorted(m.node_index), magnitudes)]


def _match(previous, current):
    # greedy nearest-neighbour pairing, closest pairs first
    if previous is None or len(previous) != len(current):
        return list(current)
    prev = np.array([p.value for p in previous])
    cur = np.array([p.value for p in current])
    distance = np.abs(prev[:, None] - cur[None, :])
    order = [None] * len(prev)
    used_prev, used_cur = set(), set()
    for flat in np.argsort(distance, axis=None):
        i, j = np.unravel_index(flat, distance.shape)
        if i in used_prev or j in used_cur:
            continue
        order[i] = current[j]
        used_prev.add(i)
        used_cur.add(j)
    return order


def _sweep_point(config, paths, value, formulation):
    try:
        cfg = config
        for path in paths:
            cfg = cfg.with_value(path, value)
        model = build_model(cfg, formulation)
        return SweepPoint(float(value), tuple(system_poles(model, tuple(cfg.solver["bands"]))))
    except WholeGridError as exc:
        logger.warning("sweep point %s = %g failed: %s", ",".join(paths), value, exc.message)
        return SweepPoint(float(value), (), exc.to_dict())


def parameter_sweep(config, path, values, formulation=AUTO, workers=None):
    """
    Rebuilds the model for every value and collects the poles. Failed points
    are recorded and the sweep goes on. Poles are reordered so that the same
    index follows one trajectory across points.

    Args:
        config (GridConfig): base configuration
        path (str|list): parameter locator, or several locators set to the
            same value
        values (iterable): values to sweep
        formulation (str|Optional): loop formulation
        workers (int|Optional): thread pool size, sequential when omitted

    Returns:
        list[SweepPoint]: one point per value
    """
    paths = [path] if isinstance(path, str) else list(path)
    values = list(values)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda v: _sweep_point(config, paths, v, formulation), values))
    else:
        points = [_sweep_point(config, paths, v, formulation) for v in values]

    matched = []
    previous = None
    for point in points:
        if point.error is not None:
            matched.append(point)
            continue
        ordered = _match(previous, point.poles)
        previous = ordered
        matched.append(SweepPoint(point.value, tuple(ordered)))
    return matched
