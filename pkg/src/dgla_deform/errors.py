"""Exception hierarchy shared by every layer of the engine."""


class DeformError(Exception):
    """Base class for all engine errors."""


class ShapeMismatch(DeformError):
    pass


class NotAComplex(DeformError):
    pass


class UnknownLabel(DeformError):
    pass


class BaseMismatch(DeformError):
    pass


class DegreeError(DeformError):
    pass


class CarrierMismatch(DeformError):
    pass


class NotFirstOrderMC(DeformError):
    pass


class UnsupportedOrder(DeformError):
    pass


class InvalidSc(DeformError):
    pass


class Unsupported(DeformError):
    """A code path the engine deliberately does not implement."""


class NegativeDegreesPresent(Unsupported):
    pass


class BadParams(DeformError):
    pass


class BadWindow(DeformError):
    pass


class WindowOverflow(DeformError):
    """A Laurent product or restriction left its degree window."""


class WindowUnstable(DeformError):
    """Windowed cohomology changed between window D and D+1."""


class CoverMismatch(DeformError):
    pass


class CocycleError(DeformError):
    pass


class HypothesisViolated(DeformError):
    pass


class KTooLarge(DeformError):
    pass


class ParseError(DeformError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class UnknownCheck(DeformError):
    pass
