"""Exception hierarchy shared by the simulator, the gate builders and the CLI."""


class LOQCError(Exception):
    """Base class for all simulator errors."""


class RegistryError(LOQCError, KeyError):
    """A mode or rail is missing from, or duplicated in, a registry."""

    def __str__(self):
        # KeyError quotes its message; keep it readable.
        return str(self.args[0]) if self.args else ""


class RegistryConflictError(RegistryError):
    """Two registries being joined share a mode label."""


class ValidationError(LOQCError, ValueError):
    """A numerical input violates its contract (non-unitary matrix, bad distribution...)."""


class DegenerateStateError(LOQCError, ValueError):
    """Operation undefined on the zero vector."""


class PhotonCapError(LOQCError, ValueError):
    """A basis state exceeds the configured total photon number."""


class ContractViolation(LOQCError):
    """A gate or circuit does not implement the action it promises."""


class ParseError(LOQCError):
    """Malformed circuit description; carries a 1-based line and column."""

    def __init__(self, message, line, column=1):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self):
        return f"line {self.line}, column {self.column}: {self.message}"
