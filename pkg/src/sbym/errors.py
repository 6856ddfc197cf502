"""Exception types shared across the package."""


class CutLocusError(ValueError):
    """Principal-branch logarithm requested at (or too near) the cut locus."""


class TruncationError(ValueError):
    """A certified series tail bound exceeds the requested tolerance."""

    def __init__(self, message, bound=None, tolerance=None):
        super().__init__(message)
        self.bound = bound
        self.tolerance = tolerance


class ShapeMismatch(ValueError):
    """Lattice objects with incompatible link/site counts were combined."""


class InvalidParams(ValueError):
    """Measure or sampler parameters violate their constraints."""


class NonIntegrableError(ValueError):
    """A closed-form norm was requested for a non-integrable combination."""


class ConfigError(ValueError):
    """Experiment configuration failed validation.

    ``fields`` maps offending field names to human-readable diagnostics.
    """

    def __init__(self, message, fields=None):
        super().__init__(message)
        self.fields = dict(fields or {})
