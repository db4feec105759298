"""Exception hierarchy shared by every spinqnet module."""


class SpinqnetError(Exception):
    """Base class for all library errors."""


class InvalidRegisterError(SpinqnetError, ValueError):
    pass


class InvalidTargetError(SpinqnetError, ValueError):
    """Duplicate, missing or out-of-range qubit/electron references."""


class NonUnitaryError(SpinqnetError, ValueError):
    pass


class InvalidStateError(SpinqnetError, ValueError):
    """Amplitudes or density matrices that violate normalisation/positivity."""


class DimensionMismatchError(SpinqnetError, ValueError):
    pass


class InvalidGateError(SpinqnetError, ValueError):
    """A gate or element built with the wrong arity or angle."""


class UnsupportedGateError(SpinqnetError):
    """The hardware element set cannot realise the requested gate."""

    def __init__(self, message, op=None):
        super().__init__(message)
        self.op = op


class InvalidRuleError(SpinqnetError, ValueError):
    pass


class NonTerminatingRulesError(SpinqnetError, RuntimeError):
    pass


class DegenerateSamplesError(SpinqnetError, ValueError):
    pass


class ParseError(SpinqnetError, ValueError):
    """Netlist/circuit text error. ``code`` is a stable short identifier."""

    def __init__(self, code, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message} [{code}]")
        self.code = code
        self.line = line
        self.detail = message
