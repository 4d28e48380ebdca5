# -*- coding: utf-8 -*-
"""
    wholegrid.lti
    ~~~~~~~~~~~~~

    Complex-coefficient LTI state-space algebra. A system realizes the
    transfer matrix

        G(s) = C (sI - A)^-1 B + D + s E

    where the derivative feedthrough ``E`` is zero for proper systems and is
    only used to carry inductive impedances and capacitive shunts exactly.

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from wholegrid.errors import (
    DimMismatch, EigFailure, IllPosedLoop, ImproperSystem, SingularAtS, SingularD
)

# reciprocal condition number below which a matrix is treated as singular
RCOND = 1e-12

# complex-signal transform, u_pm = T u_dq with u_+ = u_d + j u_q
T_PM = np.array([[1.0, 1.0j], [1.0, -1.0j]])
T_PM_INV = np.linalg.inv(T_PM)


def rcond(matrix):
    """
    Reciprocal condition number in the 2-norm. Empty matrices count as
    perfectly conditioned.
    """
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 1.0
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(matrix)
    if not np.isfinite(cond):
        return 0.0
    return 1.0 / cond


def _as_matrix(value, rows=None, cols=None):
    arr = np.array(value, dtype=complex, ndmin=2)
    if arr.size == 0 and rows is not None and cols is not None:
        arr = np.zeros((rows, cols), dtype=complex)
    return arr


@dataclass(frozen=True)
class LtiSystem:
    """
    Immutable state-space realization.

    Args:
        A (ndarray): n x n state matrix
        B (ndarray): n x m input matrix
        C (ndarray): p x n output matrix
        D (ndarray): p x m feedthrough
        E (ndarray|Optional): p x m derivative feedthrough, zero when omitted
        real_equivalent (bool|Optional): the system is the complex-signal view
            of a real-coefficient dq system
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray = None
    real_equivalent: bool = field(default=False, compare=False)

    def __post_init__(self):
        D = _as_matrix(self.D)
        p, m = D.shape
        A = np.array(self.A, dtype=complex, ndmin=2)
        if A.size == 0:
            A = np.zeros((0, 0), dtype=complex)
        n = A.shape[0]
        B = _as_matrix(self.B, n, m)
        C = _as_matrix(self.C, p, n)
        E = np.zeros((p, m), dtype=complex) if self.E is None else _as_matrix(self.E, p, m)

        if A.shape != (n, n):
            raise DimMismatch(f"A must be square, got {A.shape}")
        if B.shape != (n, m) or C.shape != (p, n) or E.shape != (p, m):
            raise DimMismatch(
                f"inconsistent realization: A {A.shape}, B {B.shape}, C {C.shape}, "
                f"D {D.shape}, E {E.shape}"
            )

        for name, value in (("A", A), ("B", B), ("C", C), ("D", D), ("E", E)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def state_dim(self):
        return self.A.shape[0]

    @property
    def input_dim(self):
        return self.D.shape[1]

    @property
    def output_dim(self):
        return self.D.shape[0]

    @property
    def is_proper(self):
        return not np.any(self.E)

    def __repr__(self):
        return (
            f"<{self.__class__.__name__}("
            f"states={self.state_dim}, "
            f"inputs={self.input_dim}, "
            f"outputs={self.output_dim}, "
            f"proper={self.is_proper}"
            f")>"
        )


@dataclass(frozen=True)
class FrequencySample:
    """
    A transfer matrix sampled at ``s = j 2 pi frequency``. Frequencies are
    signed, negative values correspond to negative-sequence rotation.
    """
    frequency: float
    value: np.ndarray


def make_static(D):
    """
    Creates a memoryless system.

    Args:
        D (array_like): Feedthrough matrix

    Returns:
        LtiSystem: system with no states
    """
    D = _as_matrix(D)
    p, m = D.shape
    return LtiSystem(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)), D)


def zeros(outputs, inputs):
    return make_static(np.zeros((outputs, inputs)))


def identity(size):
    return make_static(np.eye(size))


def evaluate(sys, s):
    """
    Evaluates the transfer matrix at the complex frequency ``s``.

    Args:
        sys (LtiSystem): System to evaluate
        s (complex): Laplace variable

    Returns:
        ndarray: p x m complex matrix
    """
    value = sys.D + s * sys.E
    if sys.state_dim == 0:
        return np.array(value)
    M = s * np.eye(sys.state_dim) - sys.A
    if rcond(M) < RCOND:
        raise SingularAtS(f"sI - A is singular at s = {s}")
    return sys.C @ np.linalg.solve(M, sys.B) + value


def frequency_response(sys, frequencies):
    """
    Samples a system on the imaginary axis.

    Args:
        sys (LtiSystem): System to evaluate
        frequencies (iterable): Signed frequencies in Hz

    Returns:
        list[FrequencySample]: one sample per frequency
    """
    return [FrequencySample(float(f), evaluate(sys, 2j * np.pi * f)) for f in frequencies]


def static_transform(left, sys, right):
    """
    Pre and post multiplies a system by constant matrices, ``L G(s) R``.
    """
    left = _as_matrix(left)
    right = _as_matrix(right)
    if left.shape[1] != sys.output_dim or right.shape[0] != sys.input_dim:
        raise DimMismatch(
            f"cannot apply {left.shape} x {sys.output_dim}x{sys.input_dim} x {right.shape}"
        )
    return LtiSystem(
        sys.A, sys.B @ right, left @ sys.C, left @ sys.D @ right, left @ sys.E @ right,
        real_equivalent=sys.real_equivalent,
    )


def series(g1, g2):
    """
    Series connection ``g1(s) g2(s)``: the output of ``g2`` drives ``g1``.

    A derivative feedthrough is accepted on ``g1`` when ``g2`` is proper, or on
    ``g2`` when ``g1`` is memoryless.

    Args:
        g1 (LtiSystem): Outer system
        g2 (LtiSystem): Inner system

    Returns:
        LtiSystem: the product
    """
    if g1.input_dim != g2.output_dim:
        raise DimMismatch(
            f"series needs g1 inputs ({g1.input_dim}) == g2 outputs ({g2.output_dim})"
        )
    if not g2.is_proper:
        if g1.state_dim or not g1.is_proper:
            raise ImproperSystem("derivative feedthrough on the inner factor of a dynamic series")
        return static_transform(g1.D, g2, np.eye(g2.input_dim))

    n1, n2 = g1.state_dim, g2.state_dim
    A = np.block([
        [g1.A, g1.B @ g2.C],
        [np.zeros((n2, n1)), g2.A],
    ])
    B = np.vstack([g1.B @ g2.D, g2.B])
    C = np.hstack([g1.C, g1.D @ g2.C])
    D = g1.D @ g2.D
    E = np.zeros_like(D)
    if not g1.is_proper:
        # s E1 P2 = s E1 D2 + E1 C2 B2 + E1 C2 A2 (sI - A2)^-1 B2
        C = C + np.hstack([np.zeros((g1.output_dim, n1)), g1.E @ g2.C @ g2.A])
        D = D + g1.E @ g2.C @ g2.B
        E = g1.E @ g2.D
    return LtiSystem(A, B, C, D, E)


def add(g1, g2):
    """
    Parallel connection ``g1(s) + g2(s)``.
    """
    if g1.input_dim != g2.input_dim or g1.output_dim != g2.output_dim:
        raise DimMismatch(
            f"add needs equal dimensions, got {g1.output_dim}x{g1.input_dim} "
            f"and {g2.output_dim}x{g2.input_dim}"
        )
    return LtiSystem(
        scipy.linalg.block_diag(g1.A, g2.A),
        np.vstack([g1.B, g2.B]),
        np.hstack([g1.C, g2.C]),
        g1.D + g2.D,
        g1.E + g2.E,
        real_equivalent=g1.real_equivalent and g2.real_equivalent,
    )


def negate(g):
    return LtiSystem(g.A, g.B, -g.C, -g.D, -g.E, real_equivalent=g.real_equivalent)


def block_diag(*systems):
    """
    Stacks systems on the diagonal: inputs and outputs are concatenated in
    order and no signal is shared.
    """
    if not systems:
        return make_static(np.zeros((0, 0)))
    A = scipy.linalg.block_diag(*[g.A for g in systems])
    B = scipy.linalg.block_diag(*[g.B for g in systems])
    C = scipy.linalg.block_diag(*[g.C for g in systems])
    D = scipy.linalg.block_diag(*[g.D for g in systems])
    E = scipy.linalg.block_diag(*[g.E for g in systems])
    n = A.shape[0]
    return LtiSystem(
        A, B.reshape(n, D.shape[1]), C.reshape(D.shape[0], n), D, E,
        real_equivalent=all(g.real_equivalent for g in systems),
    )


def feedback(g, h, sign=-1):
    """
    Closes ``h`` around ``g``: returns ``G (I - sign H G)^-1``, the map from
    the external input to the output of ``g``. ``sign=-1`` is negative
    feedback.

    Args:
        g (LtiSystem): Forward path
        h (LtiSystem): Feedback path
        sign (int|Optional): +1 or -1

    Returns:
        LtiSystem: closed loop with states ``[x_g, x_h]``
    """
    if g.input_dim != h.output_dim or g.output_dim != h.input_dim:
        raise DimMismatch("feedback needs h to map g outputs back onto g inputs")
    if not (g.is_proper and h.is_proper):
        raise ImproperSystem("feedback needs proper realizations")

    F = np.eye(g.input_dim) - sign * h.D @ g.D
    if rcond(F) < RCOND:
        raise IllPosedLoop("I - sign * Dh * Dg is singular (algebraic loop)")

    E_D2 = np.linalg.solve(F, h.D)
    E_C2 = np.linalg.solve(F, h.C)
    T1 = np.eye(g.output_dim) + sign * g.D @ E_D2
    T2 = np.eye(g.input_dim) + sign * E_D2 @ g.D

    A = np.block([
        [g.A + sign * g.B @ E_D2 @ g.C, sign * g.B @ E_C2],
        [h.B @ T1 @ g.C, h.A + sign * h.B @ g.D @ E_C2],
    ])
    B = np.vstack([g.B @ T2, h.B @ g.D @ T2])
    C = np.hstack([T1 @ g.C, sign * g.D @ E_C2])
    D = g.D @ T2
    return LtiSystem(A, B, C, D, real_equivalent=g.real_equivalent and h.real_equivalent)


def inverse(g, allow_improper=False):
    """
    Inverts a square transfer matrix.

    Proper systems with invertible ``D`` use the classic realization
    ``(A - B D^-1 C, B D^-1, -D^-1 C, D^-1)``. Systems with an invertible
    derivative feedthrough return the strictly proper inverse
    ``P (I + H P)^-1`` with ``P = (sE + D)^-1``. With ``allow_improper``, a
    strictly proper system of relative degree one is inverted through its
    zero dynamics into an improper one.

    Args:
        g (LtiSystem): Square system
        allow_improper (bool|Optional): accept strictly proper inputs

    Returns:
        LtiSystem: the inverse

    Raises:
        SingularD: when no inverse of the requested kind exists
    """
    if g.input_dim != g.output_dim:
        raise DimMismatch(f"inverse needs a square system, got {g.output_dim}x{g.input_dim}")
    size = g.input_dim

    if not g.is_proper:
        if rcond(g.E) < RCOND:
            raise SingularD("derivative feedthrough is not invertible")
        E_inv = np.linalg.inv(g.E)
        P = LtiSystem(-E_inv @ g.D, E_inv, np.eye(size), np.zeros((size, size)))
        if g.state_dim == 0:
            return P
        H = LtiSystem(g.A, g.B, g.C, np.zeros((size, size)))
        return feedback(P, H, -1)

    if rcond(g.D) >= RCOND:
        D_inv = np.linalg.inv(g.D)
        return LtiSystem(
            g.A - g.B @ D_inv @ g.C, g.B @ D_inv, -D_inv @ g.C, D_inv,
            real_equivalent=g.real_equivalent,
        )

    if not allow_improper or np.any(np.abs(g.D) > RCOND) or g.state_dim < size:
        raise SingularD("D is not invertible, the transfer matrix has no proper inverse")
    return _inverse_relative_degree_one(g)


def _inverse_relative_degree_one(g):
    # u = (CB)^-1 (dy/dt - C A x); the remaining states live in ker C
    CB = g.C @ g.B
    if rcond(CB) < RCOND:
        raise SingularD("C B is not invertible, relative degree is above one")
    Gm = np.linalg.inv(CB)
    Pi = np.eye(g.state_dim) - g.B @ Gm @ g.C
    N = scipy.linalg.null_space(g.C)
    Nh = N.conj().T
    return LtiSystem(
        Nh @ Pi @ g.A @ N,
        Nh @ Pi @ g.A @ g.B @ Gm,
        -Gm @ g.C @ g.A @ N,
        -Gm @ g.C @ g.A @ g.B @ Gm,
        Gm,
    )


def poles(sys):
    """
    Eigenvalues of the state matrix, without any minimality filtering,
    ordered by imaginary part then real part.

    Args:
        sys (LtiSystem): System

    Returns:
        ndarray: complex poles in rad/s
    """
    if sys.state_dim == 0:
        return np.zeros(0, dtype=complex)
    try:
        values = scipy.linalg.eigvals(sys.A)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigFailure(f"eigenvalue iteration failed: {exc}")
    if not np.all(np.isfinite(values)):
        raise EigFailure("eigenvalue iteration returned non-finite values")
    return np.array(sorted(values, key=lambda z: (round(z.imag, 9), z.real)))


def _pm_blocks(dim, matrix):
    if dim % 2:
        raise DimMismatch(f"dq/pm conversion needs even dimensions, got {dim}")
    return np.kron(np.eye(dim // 2), matrix)


def real_to_pm(g_dq):
    """
    Converts a dq system into complex-signal coordinates,
    ``G_pm = T G_dq T^-1`` on every two-dimensional port.
    """
    out_t = _pm_blocks(g_dq.output_dim, T_PM)
    in_t = _pm_blocks(g_dq.input_dim, T_PM_INV)
    result = static_transform(out_t, g_dq, in_t)
    is_real = all(not np.any(np.abs(m.imag) > 1e-12) for m in (g_dq.A, g_dq.B, g_dq.C, g_dq.D, g_dq.E))
    return LtiSystem(result.A, result.B, result.C, result.D, result.E, real_equivalent=is_real)


def pm_to_real(g_pm):
    """
    Converts a complex-signal system back into dq coordinates.
    """
    out_t = _pm_blocks(g_pm.output_dim, T_PM_INV)
    in_t = _pm_blocks(g_pm.input_dim, T_PM)
    return static_transform(out_t, g_pm, in_t)
