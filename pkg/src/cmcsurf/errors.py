"""Exception hierarchy.  Everything raised on bad input derives from CMCError."""


class CMCError(Exception):
    """Base class for all library errors."""


class InputError(CMCError, ValueError):
    """Malformed or inconsistent input data (CLI exit code 2)."""


class GridMismatch(InputError):
    pass


class EmptyField(InputError):
    pass


class EmptyGeometry(EmptyField):
    pass


class PathThroughMask(InputError):
    pass


class ImaginaryResidueTooLarge(CMCError):
    pass


class BranchAmbiguity(CMCError):
    pass


class NotHolomorphic(CMCError):
    pass


class Umbilic(CMCError):
    """The Hopf differential vanishes where a decoupling needs it nonzero."""


class NotCMC1(InputError):
    pass


class NotUnit(InputError):
    pass


class NotUnitary(InputError):
    pass


class BadParameter(InputError):
    pass


class SingularParameter(BadParameter):
    pass


class LabelMismatch(InputError):
    pass


class PoleOnGrid(InputError):
    pass


class ExpressionSyntaxError(InputError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NonRational(InputError):
    pass


class DegreeCap(InputError):
    pass


class UnknownVersion(InputError):
    pass


class MissingField(InputError):
    pass
