"""Exception hierarchy shared by all modules."""


class SchurFourierError(Exception):
    """Base class for every error raised by the library."""


class ConfigError(SchurFourierError, ValueError):
    """Malformed law/body/experiment specification."""


class UnsupportedEvaluation(SchurFourierError):
    pass


class NonFinite(SchurFourierError, ArithmeticError):
    pass


class NoSampler(SchurFourierError):
    pass


class DivergentMoment(SchurFourierError, ArithmeticError):
    pass


class UnsupportedBody(SchurFourierError):
    pass


class NonPositiveCf(SchurFourierError, ArithmeticError):
    """The characteristic function is not strictly positive where required."""


class NotIntegrable(SchurFourierError, ArithmeticError):
    pass


class QuadratureDiverged(SchurFourierError, ArithmeticError):
    pass


class FrameNotOrthonormal(SchurFourierError, ValueError):
    pass


class IsotropyViolated(SchurFourierError, ValueError):
    pass


class LengthMismatch(SchurFourierError, ValueError):
    pass


class NotComparable(SchurFourierError, ValueError):
    pass


class NonPositive(SchurFourierError, ValueError):
    pass


class NegativeMomentUnstable(UserWarning):
    """Median-of-means blocks disagree for a strongly negative moment.

    Emitted as a warning; the estimate is still returned with its
    ``unstable`` flag set.
    """
