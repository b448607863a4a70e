"""Exception hierarchy shared by all modules.

Errors fall in two families. ``InputError`` covers malformed or degenerate
inputs; ``EstimationError`` covers numerical failures of an estimator. The CLI
maps the second family to exit code 3.
"""


class DensityFMError(Exception):
    """Base class for every error raised by this package."""


class InputError(DensityFMError, ValueError):
    pass


class EstimationError(DensityFMError):
    pass


class DegenerateLine(EstimationError):
    """A homogeneous line with (a, b) == (0, 0), i.e. the line at infinity."""


class SingularInput(EstimationError):
    """A zero matrix was given where a nonzero one is required."""


class DegenerateConfiguration(EstimationError):
    """The linear epipolar system is rank deficient."""


class DegenerateInput(DegenerateConfiguration):
    """All points coincide, so coordinate normalization is undefined."""


class NoConsensus(EstimationError):
    pass


class TooFewPoints(InputError):
    pass


class TooFewClusterInliers(EstimationError):
    def __init__(self, alpha, selected, required=8):
        self.alpha = alpha
        self.selected = selected
        self.required = required
        super().__init__(
            f"cluster selection kept {selected} points with alpha={alpha:g}; "
            f"at least {required} are required"
        )


class CoincidentCenters(EstimationError):
    pass


class FrustumEmpty(EstimationError):
    pass


class RetriesExhausted(EstimationError):
    pass
