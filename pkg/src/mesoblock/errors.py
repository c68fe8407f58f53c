"""Exception hierarchy. Everything raised for bad input derives from ``MesoError``."""


class MesoError(ValueError):
    """Base class for input and precondition errors."""


class ParseError(MesoError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class RejectedInputError(MesoError):
    pass


class DegenerateGraphError(MesoError):
    pass


class UnsupportedNullError(MesoError):
    pass


class NotBipartiteError(MesoError):
    pass
