"""Exception types shared across the package."""


class EnsembleValidityError(ValueError):
    """The requested parameters fall outside the allowed ensemble region
    (negative transition probabilities, singular values beyond 1, ...)."""


class NumericalError(RuntimeError):
    """A numeric routine failed to converge or hit a singular system."""
