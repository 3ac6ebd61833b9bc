class CatWvaError(Exception):
    """Base class for every error raised by the library"""


class InvalidParameter(CatWvaError, ValueError):
    """A user-supplied value is outside the domain of an operation"""


class InvalidAngularMomentum(InvalidParameter):
    """|m| > j, negative j, or mixed integer/half-integer character"""


class InvalidOrder(InvalidParameter):
    """Spherical-harmonic order with |Q| > K"""


class SpinMismatch(InvalidParameter):
    """Two Dicke vectors belong to different spins"""


class NotNormalized(InvalidParameter):
    """A state that must have unit norm does not"""


class GridTooCoarse(InvalidParameter):
    """Quadrature grid cannot integrate the harmonic content exactly"""


class ZeroPostselection(CatWvaError):
    """Post-selection succeeds with (numerically) zero probability"""


class NoPeak(CatWvaError):
    """No interior local maximum inside the search window"""


class DivergentWeakValue(CatWvaError):
    """Pre- and post-selected states are orthogonal"""


class DegenerateBernoulli(CatWvaError):
    """Success probability is exactly 0 or 1"""


class InlineCheckFailed(CatWvaError):
    """An independent oracle disagreed with the production result"""
