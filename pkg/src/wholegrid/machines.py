# -*- coding: utf-8 -*-
"""
    wholegrid.machines
    ~~~~~~~~~~~~~~~~~~

    Machine library: swing-frame port models, frame perturbation laws and
    steady-state initialization for synchronous generators, grid-following
    converters, passive loads and stiff sources.

    Port quantities use the motor convention (current flows into the
    machine) and +- coordinates, ``u+ = u_d + j u_q``. Swing-frame models
    carry a third input, the frame speed deviation, which the frame
    embedding drives with ``s epsilon``.

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""
import cmath
import math
from dataclasses import dataclass

import numpy as np

from wholegrid import frames, lti
from wholegrid.errors import NoEquilibrium, ZeroFieldFlux, ZeroVoltage
from wholegrid.logger import logger

# steady-state residual accepted by the initializers
INIT_TOL = 1e-10

SHUNT_R = "shunt_R"
SHUNT_RC = "shunt_RC"
SHUNT_RL = "shunt_RL"
LOAD_KINDS = (SHUNT_R, SHUNT_RC, SHUNT_RL)


def _check_positive(owner, **values):
    for name, value in values.items():
        if not value > 0:
            raise ValueError(f"{owner}.{name} must be positive, got {value}")


def _check_non_negative(owner, **values):
    for name, value in values.items():
        if not value >= 0:
            raise ValueError(f"{owner}.{name} must be non-negative, got {value}")


@dataclass(frozen=True)
class SgParams:
    """
    Constant-flux synchronous generator.

    Args:
        R (float): stator resistance (pu)
        L (float): stator inductance, reactance over w0 (pu s)
        J (float): rotor inertia (pu s^2), ``2 H / w0^2``
        D (float): damping torque coefficient
        w0 (float): rated angular frequency (rad/s)
    """
    R: float
    L: float
    J: float
    D: float
    w0: float

    def __post_init__(self):
        _check_positive("SgParams", L=self.L, J=self.J, w0=self.w0)
        _check_non_negative("SgParams", R=self.R, D=self.D)


@dataclass(frozen=True)
class SgOperating:
    """
    Steady state in the rotor (swing) frame, q axis on the field flux.
    """
    psi_f: float
    i_d0: float
    i_q0: float
    v_d0: float
    v_q0: float
    Tm: float

    @property
    def phasors(self):
        return frames.SteadyStatePhasors(complex(self.v_d0, self.v_q0), complex(self.i_d0, self.i_q0))


def pi_gains(hz, plant):
    """
    Critically damped PI gains ``(wb plant, wb^2 plant / 4)`` for a
    bandwidth of ``hz``.
    """
    wb = 2.0 * math.pi * hz
    return wb * plant, wb * wb * plant / 4.0


@dataclass(frozen=True)
class GflParams:
    """
    Grid-following converter with PLL, dc-link and current vector control.

    Args:
        Lf (float): filter inductance (pu s)
        Rf (float): filter resistance (pu)
        Cdc (float): dc-link capacitance (pu s)
        kp_pll (float): PLL proportional gain (rad/s per unit of v_q / v_d)
        ki_pll (float): PLL integral gain
        kp_i (float): current loop proportional gain (pu)
        ki_i (float): current loop integral gain (pu/s)
        kp_dc (float): dc-link loop proportional gain
        ki_dc (float): dc-link loop integral gain
        vdc_ref (float): dc voltage setpoint (pu)
        w0 (float): rated angular frequency (rad/s)
        decoupling (bool|Optional): voltage feed-forward and w L cross
            decoupling in the current loop
    """
    Lf: float
    Rf: float
    Cdc: float
    kp_pll: float
    ki_pll: float
    kp_i: float
    ki_i: float
    kp_dc: float
    ki_dc: float
    vdc_ref: float
    w0: float
    decoupling: bool = True

    def __post_init__(self):
        _check_positive("GflParams", Lf=self.Lf, Cdc=self.Cdc, vdc_ref=self.vdc_ref, w0=self.w0)
        _check_non_negative(
            "GflParams", Rf=self.Rf, kp_pll=self.kp_pll, ki_pll=self.ki_pll, kp_i=self.kp_i,
            ki_i=self.ki_i, kp_dc=self.kp_dc, ki_dc=self.ki_dc,
        )

    @classmethod
    def from_bandwidths(cls, Lf, Rf, Cdc, vdc_ref, w0, pll_hz, current_hz, dc_hz, decoupling=True):
        """
        Derives PI gains from loop bandwidths in Hz. With ``wb = 2 pi f``:
        PLL ``kp = wb, ki = wb^2 / 4``; current loop ``kp = wb Lf,
        ki = wb^2 Lf / 4``; dc loop ``kp = wb Cdc vdc_ref,
        ki = wb^2 Cdc vdc_ref / 4``. Every loop is critically damped on its
        nominal plant.
        """
        kp_pll, ki_pll = pi_gains(pll_hz, 1.0)
        kp_i, ki_i = pi_gains(current_hz, Lf)
        kp_dc, ki_dc = pi_gains(dc_hz, Cdc * vdc_ref)
        return cls(
            Lf=Lf, Rf=Rf, Cdc=Cdc, kp_pll=kp_pll, ki_pll=ki_pll, kp_i=kp_i, ki_i=ki_i,
            kp_dc=kp_dc, ki_dc=ki_dc, vdc_ref=vdc_ref, w0=w0, decoupling=decoupling,
        )


@dataclass(frozen=True)
class GflOperating:
    """
    Steady state in the PLL frame, where ``v_q0 = 0``. Currents flow from
    the converter into the grid. ``pin`` and ``iq_ref`` are the constant
    dc-side power and reactive current setpoint that hold this state.
    """
    v_d0: float
    i_d0: float
    i_q0: float
    vdc0: float
    pin: float
    iq_ref: float

    @property
    def phasors(self):
        # port phasors in the motor convention
        return frames.SteadyStatePhasors(complex(self.v_d0, 0.0), -complex(self.i_d0, self.i_q0))


@dataclass(frozen=True)
class LoadParams:
    """
    Passive shunt load. ``element`` is the capacitance of ``shunt_RC`` or
    the inductance of ``shunt_RL`` (pu s) and is ignored for ``shunt_R``.
    """
    kind: str
    R: float
    element: float
    w0: float

    def __post_init__(self):
        if self.kind not in LOAD_KINDS:
            raise ValueError(f"unknown load kind {self.kind!r}")
        _check_positive("LoadParams", R=self.R, w0=self.w0)
        if self.kind != SHUNT_R:
            _check_positive("LoadParams", element=self.element)


@dataclass(frozen=True)
class SourceParams:
    """
    Stiff voltage source behind ``R + s L``.
    """
    R: float
    L: float
    w0: float

    def __post_init__(self):
        _check_positive("SourceParams", L=self.L, w0=self.w0)
        _check_non_negative("SourceParams", R=self.R)


@dataclass(frozen=True)
class SourceOperating:
    """
    Internal voltage in the global steady frame.
    """
    E: complex


def _rl_impedance(R, L, w0, speed_column=None):
    D = np.diag([R + 1j * w0 * L, R - 1j * w0 * L])
    E = np.diag([L, L]).astype(complex)
    if speed_column is not None:
        D = np.hstack([D, np.reshape(speed_column, (2, 1))])
        E = np.hstack([E, np.zeros((2, 1))])
    m = D.shape[1]
    return lti.LtiSystem(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((2, 0)), D, E)


# synchronous generator

def sg_swing_impedance(p):
    """
    Stator impedance in the rotor frame, ``diag(Z_L(s + j w0), Z_L(s - j w0))``
    with ``Z_L(s) = R + s L``. Realized without states through the
    derivative feedthrough; the poles ``-R/L -+ j w0`` belong to its inverse.

    Args:
        p (SgParams): generator parameters

    Returns:
        LtiSystem: 2x2 improper impedance
    """
    return _rl_impedance(p.R, p.L, p.w0)


def sg_swing_model(p, op):
    """
    Rotor-frame stator model with the frame speed as third input. The speed
    column holds the speed voltages ``psi_f + j L i0+`` and its conjugate
    counterpart.
    """
    i0 = complex(op.i_d0, op.i_q0)
    speed = [op.psi_f + 1j * p.L * i0, op.psi_f - 1j * p.L * i0.conjugate()]
    return _rl_impedance(p.R, p.L, p.w0, speed)


def sg_frame_law(p, op):
    """
    Rotor angle driven by the electric torque,
    ``K(s) = psi_f / (2 s (J s + D)) [1 1]``, with states ``[epsilon, dw]``.

    Args:
        p (SgParams): generator parameters
        op (SgOperating): operating point

    Returns:
        FramePerturbationLaw: current-governed, swing-referenced law

    Raises:
        ZeroFieldFlux: when ``psi_f`` is zero
    """
    if op.psi_f == 0:
        raise ZeroFieldFlux("frame dynamics are undefined without field flux")
    gain = op.psi_f / (2.0 * p.J)
    K = lti.LtiSystem(
        [[0.0, 1.0], [0.0, -p.D / p.J]],
        [[0.0, 0.0], [gain, gain]],
        [[1.0, 0.0]],
        [[0.0, 0.0]],
    )
    return frames.FramePerturbationLaw(frames.CURRENT_GOVERNED, K)


def sg_steady_impedance(p, op):
    """
    Steady-frame generator impedance: the rotor-frame model with the rotor
    dynamics embedded. The swing poles are the roots of
    ``J s^2 + D s - i_q0 psi_f``.
    """
    return frames.embed_impedance(sg_swing_model(p, op), sg_frame_law(p, op), op.phasors)


def sg_swing_polynomial(p, op):
    """
    Coefficients of ``J s^2 + D s - i_q0 psi_f``, highest power first.
    """
    return np.array([p.J, p.D, -op.i_q0 * op.psi_f])


def sg_steady_impedance_at(p, op, s):
    """
    Closed form of the steady-frame impedance at ``s``: the flux part
    ``diag(Z_L(s +- j w0))`` plus the frame part
    ``[s + j w0; s - j w0] [1 1] / M(s)`` with
    ``M(s) = 2 (J s^2 + D s - i_q0 psi_f) / psi_f^2``.
    """
    if op.psi_f == 0:
        raise ZeroFieldFlux("frame dynamics are undefined without field flux")
    flux = np.diag([p.R + (s + 1j * p.w0) * p.L, p.R + (s - 1j * p.w0) * p.L])
    M = 2.0 * np.polyval(sg_swing_polynomial(p, op), s) / op.psi_f ** 2
    frame = np.outer([s + 1j * p.w0, s - 1j * p.w0], [1.0, 1.0]) / M
    return flux + frame


def sg_init(p, v0, i0):
    """
    Solves the generator steady state from terminal phasors.

    Args:
        p (SgParams): generator parameters
        v0 (complex): terminal voltage in the global steady frame
        i0 (complex): current injected into the network

    Returns:
        tuple: ``(SgOperating, FrameAngle)``

    Raises:
        NoEquilibrium: when no internal voltage or a residual above tolerance
            remains
    """
    i_m = -complex(i0)
    emf = complex(v0) - (p.R + 1j * p.w0 * p.L) * i_m
    if abs(emf) == 0 or not cmath.isfinite(emf):
        raise NoEquilibrium("the generator has no internal voltage at this operating point")

    xi = cmath.phase(emf)
    rot = cmath.exp(-1j * xi)
    v_loc, i_loc = complex(v0) * rot, i_m * rot
    psi_f = abs(emf) / p.w0
    op = SgOperating(
        psi_f=psi_f, i_d0=i_loc.real, i_q0=i_loc.imag, v_d0=v_loc.real, v_q0=v_loc.imag,
        Tm=psi_f * i_loc.real - p.D * p.w0,
    )

    residual = max(
        abs(op.v_d0 - p.R * op.i_d0 + p.w0 * (p.L * op.i_q0 - op.psi_f)),
        abs(op.v_q0 - p.R * op.i_q0 - p.w0 * p.L * op.i_d0),
    )
    if residual > INIT_TOL * max(1.0, abs(v0)):
        raise NoEquilibrium(f"generator steady-state residual {residual:.3e}", residual=residual)
    logger.debug("sg init: psi_f=%.6g xi=%.6g rad Tm=%.6g", psi_f, xi, op.Tm)
    return op, frames.FrameAngle(xi)


# grid-following converter

def gfl_swing_model(p, op):
    """
    Linearized converter in its PLL frame with inputs ``[v+, v-, dw]`` and
    the port current (into the converter) as output.

    The state vector is ``[i_d, i_q, x_d, x_q, v_dc, x_dc]``: filter current
    towards the grid, current-loop integrators, dc voltage and dc-loop
    integrator.

    Args:
        p (GflParams): converter parameters
        op (GflOperating): operating point

    Returns:
        LtiSystem: 2x3 system in +- coordinates
    """
    L, R, w0 = p.Lf, p.Rf, p.w0
    kp, ki = p.kp_i, p.ki_i
    dec = 1.0 if p.decoupling else 0.0
    i_d0, i_q0 = op.i_d0, op.i_q0
    v_cd0 = op.v_d0 - w0 * L * i_q0 + R * i_d0
    v_cq0 = w0 * L * i_d0 + R * i_q0
    c = -1.0 / (p.Cdc * op.vdc0)

    A = np.array([
        [-(kp + R) / L, (1 - dec) * w0, 1 / L, 0, kp * p.kp_dc / L, kp / L],
        [-(1 - dec) * w0, -(kp + R) / L, 0, 1 / L, 0, 0],
        [-ki, 0, 0, 0, ki * p.kp_dc, ki],
        [0, -ki, 0, 0, 0, 0],
        [
            c * (v_cd0 - i_d0 * kp + i_q0 * dec * w0 * L),
            c * (v_cq0 - i_d0 * dec * w0 * L - i_q0 * kp),
            c * i_d0,
            c * i_q0,
            c * i_d0 * kp * p.kp_dc,
            c * i_d0 * kp,
        ],
        [0, 0, 0, 0, p.ki_dc, 0],
    ])
    # columns: v_d, v_q, dw
    B = np.array([
        [(dec - 1) / L, 0, (1 - dec) * i_q0],
        [0, (dec - 1) / L, -(1 - dec) * i_d0],
        [0, 0, 0],
        [0, 0, 0],
        [c * i_d0 * dec, c * i_q0 * dec, 0],
        [0, 0, 0],
    ])
    C = np.zeros((2, 6))
    C[0, 0] = C[1, 1] = -1.0

    left = lti.T_PM
    right = np.eye(3, dtype=complex)
    right[:2, :2] = lti.T_PM_INV
    g = lti.static_transform(left, lti.LtiSystem(A, B, C, np.zeros((2, 3))), right)
    return lti.LtiSystem(g.A, g.B, g.C, g.D, real_equivalent=True)


def gfl_swing_admittance(p, op):
    """
    Converter admittance in the PLL frame with the frame held still.
    """
    g = gfl_swing_model(p, op)
    return lti.LtiSystem(g.A, g.B[:, :2], g.C, g.D[:, :2], real_equivalent=True)


def pll_frame_law(p, op, reference=frames.STEADY):
    """
    PLL angle driven by the terminal voltage. The PLL integrates
    ``w = w0 + (kp + ki/s) v_q / v_d0``.

    With ``reference="steady"`` the law reads steady-frame voltages and is
    ``K_v(s) = (kp s + ki) / (2j v_d0 (s^2 + kp s + ki)) [1, -1]``, states
    ``[epsilon, z]``. With ``reference="swing"`` it reads PLL-frame voltages
    and is ``(kp s + ki) / (2j v_d0 s^2) [1, -1]``.

    Raises:
        ZeroVoltage: when ``v_d0`` is not positive
    """
    if not op.v_d0 > 0:
        raise ZeroVoltage("the PLL cannot lock to a zero terminal voltage")
    kp, ki = p.kp_pll, p.ki_pll
    b = np.array([[1 / 2j, -1 / 2j]]) / op.v_d0
    B = np.vstack([kp * b, ki * b])
    if reference == frames.STEADY:
        A = [[-kp, 1.0], [-ki, 0.0]]
    elif reference == frames.SWING:
        A = [[0.0, 1.0], [0.0, 0.0]]
    else:
        raise ValueError(f"unknown frame law reference {reference!r}")
    K = lti.LtiSystem(A, B, [[1.0, 0.0]], [[0.0, 0.0]])
    return frames.FramePerturbationLaw(frames.VOLTAGE_GOVERNED, K, reference)


def gfl_steady_admittance(p, op, reference=frames.STEADY):
    """
    Steady-frame converter admittance, the PLL dynamics embedded.
    """
    law = pll_frame_law(p, op, reference)
    return frames.embed_admittance(gfl_swing_model(p, op), law, op.phasors)


def gfl_steady_impedance(p, op):
    """
    Inverse of the steady-frame admittance. Only exists as a realization
    when the admittance has relative degree one, i.e. with ``decoupling``
    off. The feed-forward converter raises SingularD here and is closed in
    the admittance domain.
    """
    return lti.inverse(gfl_steady_admittance(p, op), allow_improper=True)


def gfl_init(p, v0, i0):
    """
    Aligns the PLL frame with the terminal voltage and derives the dc power
    and reactive current setpoint that hold the injection ``i0``.

    Args:
        p (GflParams): converter parameters
        v0 (complex): terminal voltage in the global steady frame
        i0 (complex): current injected into the network

    Returns:
        tuple: ``(GflOperating, FrameAngle)``
    """
    v0, i0 = complex(v0), complex(i0)
    if abs(v0) == 0:
        raise NoEquilibrium("the PLL has no voltage to lock to")
    xi = cmath.phase(v0)
    i_loc = i0 * cmath.exp(-1j * xi)
    v_d0 = abs(v0)
    pin = v_d0 * i_loc.real + p.Rf * abs(i_loc) ** 2
    op = GflOperating(
        v_d0=v_d0, i_d0=i_loc.real, i_q0=i_loc.imag, vdc0=p.vdc_ref, pin=pin, iq_ref=i_loc.imag,
    )

    # dc-side balance against the converter terminal power
    v_c = complex(v_d0 - p.w0 * p.Lf * op.i_q0 + p.Rf * op.i_d0, p.w0 * p.Lf * op.i_d0 + p.Rf * op.i_q0)
    residual = abs(pin - (v_c * i_loc.conjugate()).real)
    if residual > INIT_TOL * max(1.0, abs(pin)):
        raise NoEquilibrium(f"converter power balance residual {residual:.3e}", residual=residual)
    logger.debug("gfl init: v_d0=%.6g xi=%.6g rad pin=%.6g", v_d0, xi, pin)
    return op, frames.FrameAngle(xi)


# passive loads and sources

def load_admittance(p):
    """
    Admittance of a passive shunt load in +- coordinates.

    Args:
        p (LoadParams): load parameters

    Returns:
        LtiSystem: ``shunt_R`` static ``diag(1/R)``, ``shunt_RC``
        ``diag(1/R + (s +- j w0) C)`` (improper) or ``shunt_RL``
        ``diag(1 / (R + (s +- j w0) L))`` with two states
    """
    w0 = p.w0
    if p.kind == SHUNT_R:
        return lti.make_static(np.eye(2) / p.R)
    if p.kind == SHUNT_RC:
        C = p.element
        D = np.diag([1 / p.R + 1j * w0 * C, 1 / p.R - 1j * w0 * C])
        return lti.LtiSystem(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((2, 0)), D, C * np.eye(2))
    L = p.element
    return lti.LtiSystem(
        np.diag([-p.R / L - 1j * w0, -p.R / L + 1j * w0]), np.eye(2) / L, np.eye(2), np.zeros((2, 2)),
        real_equivalent=True,
    )


def load_static_admittance(p):
    """
    Positive-sequence admittance of a load at the rated frequency.
    """
    if p.kind == SHUNT_R:
        return 1 / p.R
    if p.kind == SHUNT_RC:
        return 1 / p.R + 1j * p.w0 * p.element
    return 1 / (p.R + 1j * p.w0 * p.element)


def source_impedance(p):
    """
    Thevenin impedance of a stiff source, frame independent.
    """
    return _rl_impedance(p.R, p.L, p.w0)


def source_init(p, v0, i0):
    """
    Internal voltage that supplies ``i0`` into the network at ``v0``. The
    source sits in the global frame, its angle is zero.
    """
    E = complex(v0) + (p.R + 1j * p.w0 * p.L) * complex(i0)
    return SourceOperating(E), frames.FrameAngle(0.0)

