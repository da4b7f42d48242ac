"""Exception types shared across the package."""


class DiffPathError(Exception):
    """Base class for all diffpath errors."""


class DimensionMismatch(DiffPathError):
    """Inputs that must share a dimension do not."""


class InsufficientSamples(DiffPathError):
    """Fewer samples than the operation requires."""


class NotSymmetric(DiffPathError):
    """A matrix required to be symmetric is not (beyond tolerance)."""


class NotPSD(DiffPathError):
    """A matrix required to be positive semi-definite is not."""


class SingularActiveSet(DiffPathError):
    """Extending the active block would make it (numerically) singular.

    Carries the offending vec index in ``index``.
    """

    def __init__(self, index, message=None):
        self.index = int(index)
        super().__init__(message or f"active block becomes singular at vec index {index}")


class OutOfRange(DiffPathError):
    """A regularization value below the range covered by a path.

    Carries the smallest covered value in ``last_lambda``.
    """

    def __init__(self, lam, last_lambda):
        self.lam = float(lam)
        self.last_lambda = float(last_lambda)
        super().__init__(
            f"lambda={lam:.6g} is below the path's covered range (last knot at {last_lambda:.6g})"
        )


class NoStableLambda(DiffPathError):
    """Stability selection found no grid value under the instability threshold.

    Carries the computed ``profile`` (a StabilityProfile).
    """

    def __init__(self, profile):
        self.profile = profile
        super().__init__("no lambda on the grid meets the instability threshold")
