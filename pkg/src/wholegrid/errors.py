# -*- coding: utf-8 -*-
"""
    wholegrid.errors
    ~~~~~~~~~~~~~~~~

    Exceptions raised by the modeling library. Every error carries a stable
    ``code`` so the CLI can emit a structured error object.

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""


class WholeGridError(Exception):
    """
    Base class for all model errors

    Args:
        message (str): Human readable description
        path (str|Optional): JSON pointer or parameter locator related to the error
        **details: Extra machine readable fields, copied to ``to_dict()``
    """
    code = "error"

    def __init__(self, message, path=None, **details):
        super().__init__(message)
        self.message = message
        self.path = path
        self.details = details

    def to_dict(self):
        """
        Structured representation used on the CLI standard error.

        Returns:
            dict: code, message, path and any extra details
        """
        res = {"code": self.code, "message": self.message, "path": self.path}
        res.update(self.details)
        return res


class SingularAtS(WholeGridError):
    code = "singular_at_s"


class DimMismatch(WholeGridError):
    code = "dim_mismatch"


class SingularD(WholeGridError):
    code = "singular_d"


class IllPosedLoop(WholeGridError):
    code = "ill_posed_loop"


class EigFailure(WholeGridError):
    code = "eig_failure"


class ImproperSystem(WholeGridError):
    code = "improper_system"


class ZeroFieldFlux(WholeGridError):
    code = "zero_field_flux"


class ZeroVoltage(WholeGridError):
    code = "zero_voltage"


class NoEquilibrium(WholeGridError):
    code = "no_equilibrium"


class DisconnectedGraph(WholeGridError):
    code = "disconnected_graph"


class PowerFlowDiverged(WholeGridError):
    code = "power_flow_diverged"


class IllConditionedJacobian(WholeGridError):
    code = "ill_conditioned_jacobian"


class DuplicateMachineAtBus(WholeGridError):
    code = "duplicate_machine_at_bus"


class NotAMode(WholeGridError):
    code = "not_a_mode"


class StateBlowup(WholeGridError):
    code = "state_blowup"


class EventPathInvalid(WholeGridError):
    code = "event_path_invalid"


class UnstableAtOperatingPoint(WholeGridError):
    code = "unstable_at_operating_point"


class LeakageDetected(WholeGridError):
    code = "leakage_detected"


class SchemaError(WholeGridError):
    code = "schema_error"


class UnknownMachineKind(SchemaError):
    code = "unknown_machine_kind"
