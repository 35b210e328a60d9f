"""Exception hierarchy shared by all modules."""


class StarcError(Exception):
    """Base class for every error raised by the package."""


class ExpressionSyntaxError(StarcError, SyntaxError):
    """Malformed field expression.

    ``offset`` is the byte offset (UTF-8) of the offending token.
    """

    def __init__(self, message, offset=0, text=""):
        super().__init__(f"{message} at byte offset {offset}")
        self.message = message
        self.offset = offset
        self.text = text


class UnknownIdentifier(StarcError):
    def __init__(self, name, offset=0):
        super().__init__(f"unknown identifier {name!r} at byte offset {offset}")
        self.name = name
        self.offset = offset


class ArityError(StarcError):
    def __init__(self, name, expected, got, offset=0):
        super().__init__(
            f"function {name!r} takes {expected} argument(s), got {got} "
            f"(byte offset {offset})"
        )
        self.name = name
        self.expected = expected
        self.got = got
        self.offset = offset


class DomainError(StarcError, ArithmeticError):
    """Non-finite evaluation or a stencil leaving the chart domain."""


class SingularTetrad(DomainError):
    pass


class NotABivector(StarcError, ValueError):
    pass


class NotARotor(StarcError, ValueError):
    pass


class NotAVector(StarcError, ValueError):
    pass


class TorsionPresent(StarcError, ValueError):
    pass


class NonAbelianGenerator(StarcError, ValueError):
    pass


class UnsupportedScenario(StarcError, ValueError):
    pass


class SchemaError(StarcError, ValueError):
    """Invalid scenario configuration; ``path`` names the offending field."""

    def __init__(self, path, message=""):
        text = path if not message else f"{path}: {message}"
        super().__init__(text)
        self.path = path
        self.message = message


class NotEven(StarcError, ValueError):
    """A spinor representative has odd-grade components."""
