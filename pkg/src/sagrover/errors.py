"""Exception hierarchy shared by all modules."""


class SagroverError(ValueError):
    """Base class for every error raised by the toolkit."""


class DimensionError(SagroverError):
    """Assignment or bitstring length does not match the model."""


class CapacityError(SagroverError):
    """A size guard (enumeration limit, qubit cap, backend limit) was exceeded."""


class PartitionError(SagroverError):
    """Fixed and free indices do not partition the variable set."""


class ParseError(SagroverError):
    """Malformed QUBO text. The message names the offending line."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class GateError(SagroverError):
    """Gate indices collide or fall outside the register."""


class SynthesisError(SagroverError):
    """The model cannot be compiled to a reversible circuit."""


class MarkedSetError(SagroverError):
    """Amplification was requested for an empty marked set."""
