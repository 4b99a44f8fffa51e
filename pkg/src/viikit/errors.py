"""Exception hierarchy shared by all viikit modules."""


class ViikitError(Exception):
    """Base class for every error raised by the library."""


class ZeroLeadingCoefficient(ViikitError):
    pass


class ComplexRoots(ViikitError):
    """Raised when a quadratic has a negative discriminant."""

    def __init__(self, discriminant):
        self.discriminant = discriminant
        super().__init__(f"negative discriminant {discriminant}")


class MixedRadicand(ViikitError):
    pass


class ArityTooSmall(ViikitError):
    pass


class ArityCapExceeded(ViikitError):
    pass


class IndexOutOfRange(ViikitError):
    pass


class DegenerateSystem(ViikitError):
    """Some c_j(delta) vanishes, so the cyclic system has no solution."""

    def __init__(self, indices):
        self.indices = list(indices)
        super().__init__(f"c_j(delta) = 0 for j in {self.indices}")


class ForbiddenValue(ViikitError):
    pass


class InvalidChain(ViikitError):
    pass


class InvalidConfiguration(ViikitError):
    pass


class NotPerfectSquare(ViikitError):
    def __init__(self, det):
        self.det = det
        super().__init__(f"determinant {det} is not a perfect square")


class SingularMatrix(ViikitError):
    pass


class SizeCapExceeded(ViikitError):
    pass


class InvalidGerm(ViikitError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class InvalidReduction(ViikitError):
    pass


class OrderMismatch(ViikitError):
    pass


class NonUnit(ViikitError):
    pass


class ExpressionError(ViikitError):
    """Malformed series or polynomial expression string."""


class FixtureError(ViikitError):
    """A fixture file is malformed or violates its own stated relations."""
