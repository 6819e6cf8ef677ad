"""Exception hierarchy shared across the package."""


class ConfCompatError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ConfCompatError):
    """Snapshot text violates the grammar or a structural invariant."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", col {col}" if col is not None else "")
            loc = f" ({loc})"
        super().__init__(f"{message}{loc}")


class ContractViolation(ConfCompatError):
    """An operation was invoked outside its documented precondition."""


class ConfigError(ConfCompatError):
    """A configuration-API table or CLI configuration problem."""


class EngineBudgetError(ConfCompatError):
    """Backward execution exceeded its expansion budget for one target."""


class OracleBudgetError(ConfCompatError):
    """Forward enumeration exceeded its state budget; the oracle refuses
    to return a truncated answer."""
