# -*- coding: utf-8 -*-
"""
    wholegrid.frames
    ~~~~~~~~~~~~~~~~

    Local to global frame alignment in two steps: the frame-dynamics
    embedding from a machine's swing frame into its steady frame, then the
    constant rotation from the steady frame into the global steady frame
    anchored at the slack bus.

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""
import math
from dataclasses import dataclass

import numpy as np

from wholegrid import lti
from wholegrid.errors import DimMismatch
from wholegrid.logger import logger

CURRENT_GOVERNED = "current_governed"
VOLTAGE_GOVERNED = "voltage_governed"

# a swing-referenced law reads port quantities in the swing frame and is
# closed through the embedding loop; a steady-referenced law already
# contains that loop
SWING = "swing"
STEADY = "steady"


@dataclass(frozen=True)
class FramePerturbationLaw:
    """
    Map from port perturbations (current or voltage, +- coordinates) to the
    frame angle perturbation epsilon.

    Args:
        kind (str): ``current_governed`` or ``voltage_governed``
        K (LtiSystem): 1x2 system producing epsilon in rad
        reference (str|Optional): frame the input of ``K`` is expressed in
    """
    kind: str
    K: lti.LtiSystem
    reference: str = SWING

    def __post_init__(self):
        if self.kind not in (CURRENT_GOVERNED, VOLTAGE_GOVERNED):
            raise ValueError(f"unknown frame law kind {self.kind!r}")
        if self.reference not in (SWING, STEADY):
            raise ValueError(f"unknown frame law reference {self.reference!r}")
        if self.K.output_dim != 1 or self.K.input_dim != 2:
            raise DimMismatch(f"frame law must be 1x2, got {self.K.output_dim}x{self.K.input_dim}")


@dataclass(frozen=True)
class SteadyStatePhasors:
    """
    Steady-state voltage and current of a machine in its local frame.

    Args:
        v0p (complex): v_d0 + j v_q0
        i0p (complex): i_d0 + j i_q0
    """
    v0p: complex
    i0p: complex

    @property
    def V0(self):
        return np.array([[1j * self.v0p], [-1j * np.conj(self.v0p)]])

    @property
    def I0(self):
        return np.array([[1j * self.i0p], [-1j * np.conj(self.i0p)]])


@dataclass(frozen=True)
class FrameAngle:
    """
    Constant angle of a local steady frame in the global steady frame,
    normalized to (-pi, pi].
    """
    xi: float

    def __post_init__(self):
        xi = float(self.xi)
        if not math.isfinite(xi):
            raise ValueError("frame angle must be finite")
        xi = math.remainder(xi, 2.0 * math.pi)
        if xi <= -math.pi:
            xi += 2.0 * math.pi
        object.__setattr__(self, "xi", xi)


def _split_speed_input(G):
    # port models may carry a third input column: frame speed deviation
    if G.input_dim == 2:
        return G.B, G.D, np.zeros((G.state_dim, 1)), np.zeros((2, 1))
    if G.E is not None and np.any(G.E[:, 2:]):
        raise DimMismatch("frame speed input cannot have derivative feedthrough")
    return G.B[:, :2], G.D[:, :2], G.B[:, 2:], G.D[:, 2:]


def _embed(G, law, U_in, U_out):
    """
    Realizes the embedding loop with state order ``[x_G, x_K]``.

    With ``u`` the swing-frame port input and ``u'`` the steady-frame one,
    ``u = u' - U_in eps`` and ``y' = y + U_out eps``. A third input column
    of ``G`` is driven by the frame speed ``d eps / dt``.
    """
    K = law.K
    if np.any(K.D) or not K.is_proper:
        return _embed_composed(G, law, U_in, U_out)

    B_u, D_u, B_w, D_w = _split_speed_input(G)
    E_u = G.E[:, :2] if G.E is not None else np.zeros((2, 2))
    A_k = K.A if law.reference == STEADY else K.A - K.B @ U_in @ K.C
    nG, nK = G.state_dim, K.state_dim

    # d eps / dt = S_x x_K + S_u u'
    S_x = K.C @ A_k
    S_u = K.C @ K.B
    W1 = U_out - D_u @ U_in
    W2 = D_w - E_u @ U_in

    A = np.block([
        [G.A, -B_u @ U_in @ K.C + B_w @ S_x],
        [np.zeros((nK, nG)), A_k],
    ])
    B = np.vstack([B_u + B_w @ S_u, K.B])
    C = np.hstack([G.C, W1 @ K.C + W2 @ S_x])
    D = D_u + W2 @ S_u
    E = G.E[:, :2] if G.E is not None else None
    logger.debug("frame embedding adds %d states to a %d state port model", nK, nG)
    return lti.LtiSystem(A, B, C, D, E)


def _embed_composed(G, law, U_in, U_out):
    # K with feedthrough: transformation law built from block operations,
    # valid for proper two-input G
    if G.input_dim != 2:
        raise DimMismatch("frame speed inputs need a strictly proper frame law")
    K = law.K
    if law.reference == STEADY:
        gain = lti.add(lti.make_static(U_out), lti.negate(lti.series(G, lti.make_static(U_in))))
        return lti.add(G, lti.series(gain, K))
    forward = lti.add(G, lti.series(lti.make_static(U_out), K))
    loop = lti.feedback(lti.identity(2), lti.series(lti.make_static(U_in), K), -1)
    return lti.series(forward, loop)


def embed_impedance(Z_dq, law, ph):
    """
    Swing-frame to steady-frame impedance transformation,
    ``Z' = (Z + V0 K_i)(I + I0 K_i)^-1``, realized as the interconnection of
    the port model with the frame law (never by symbolic inversion).

    Args:
        Z_dq (LtiSystem): 2x2 swing-frame impedance in +- coordinates,
            optionally with a third frame speed input
        law (FramePerturbationLaw): current-governed frame law
        ph (SteadyStatePhasors): steady-state voltage and current

    Returns:
        LtiSystem: 2x2 steady-frame impedance
    """
    if law.kind != CURRENT_GOVERNED:
        raise ValueError("embed_impedance needs a current-governed frame law")
    if Z_dq.input_dim not in (2, 3) or Z_dq.output_dim != 2:
        raise DimMismatch("embed_impedance needs a 2x2 or 2x3 port model")
    return _embed(Z_dq, law, ph.I0, ph.V0)


def embed_admittance(Y_dq, law, ph):
    """
    Swing-frame to steady-frame admittance transformation,
    ``Y' = (Y + I0 K_v)(I + V0 K_v)^-1``.

    Args:
        Y_dq (LtiSystem): 2x2 swing-frame admittance in +- coordinates,
            optionally with a third frame speed input
        law (FramePerturbationLaw): voltage-governed frame law
        ph (SteadyStatePhasors): steady-state voltage and current

    Returns:
        LtiSystem: 2x2 steady-frame admittance
    """
    if law.kind != VOLTAGE_GOVERNED:
        raise ValueError("embed_admittance needs a voltage-governed frame law")
    if Y_dq.input_dim not in (2, 3) or Y_dq.output_dim != 2:
        raise DimMismatch("embed_admittance needs a 2x2 or 2x3 port model")
    return _embed(Y_dq, law, ph.V0, ph.I0)


def rotation(angle, ports=1):
    """
    Static rotation ``diag(e^{j xi}, e^{-j xi})`` repeated over ``ports``.
    """
    xi = angle.xi if isinstance(angle, FrameAngle) else float(angle)
    return np.kron(np.eye(ports), np.diag([np.exp(1j * xi), np.exp(-1j * xi)]))


def rotate_to_global(G_local, angle):
    """
    Rotates a steady-frame port model into the global steady frame. Diagonal
    entries are unchanged, ``G+-`` gains ``e^{j2xi}`` and ``G-+`` gains
    ``e^{-j2xi}``.
    """
    if G_local.input_dim != G_local.output_dim or G_local.input_dim % 2:
        raise DimMismatch("rotate_to_global needs square +- port models")
    R = rotation(angle, G_local.input_dim // 2)
    return lti.static_transform(R, G_local, R.conj().T)
