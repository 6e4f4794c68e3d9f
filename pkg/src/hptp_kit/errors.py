"""Exception hierarchy shared by every module of the package."""


class HptpKitError(Exception):
    """Base class for all errors raised by hptp_kit."""


class DimensionMismatch(HptpKitError, ValueError):
    pass


class NonHermitianInput(HptpKitError, ValueError):
    pass


class NonHermitianChoi(NonHermitianInput):
    pass


class NullRestriction(HptpKitError, ValueError):
    """Raised when a matrix annihilates the subspace it is restricted to."""


class NonHPTPInput(HptpKitError, ValueError):
    pass


class SingularMap(HptpKitError, ArithmeticError):
    """The transfer matrix of a map is (numerically) not invertible."""


class UnknownRecipe(HptpKitError, KeyError):
    pass


class ParameterOutOfRange(HptpKitError, ValueError):
    pass


class NotSP(HptpKitError):
    pass


class NotSN(HptpKitError):
    pass


class InvalidAnchor(HptpKitError, ValueError):
    """The anchor state (or its image) is not strictly positive definite."""


class UnsupportedForm(HptpKitError, ValueError):
    pass


class NotCPTP(HptpKitError, ValueError):
    pass


class DichotomyViolation(HptpKitError, ArithmeticError):
    """Both or neither branch of the SP / dual-SN alternative held numerically."""


class UnnormalizedNoise(HptpKitError, ValueError):
    pass


class KlViolated(HptpKitError):
    pass


class SignSectorObstruction(HptpKitError):
    """The error-correction matrix couples terms of opposite sign."""


class VerificationFailed(HptpKitError, ArithmeticError):
    """A constructed object failed its own post-condition check."""
