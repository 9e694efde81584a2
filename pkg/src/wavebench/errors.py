"""Exception taxonomy shared across the package.

Everything that can go wrong because the *caller* supplied inconsistent
shapes, sizes, or options derives from ValueError; failures that emerge at
runtime from otherwise valid inputs derive from RuntimeError.
"""

from __future__ import annotations


class DimensionError(ValueError):
    """Array shape or transform size inconsistent with the requested operation."""


class FramingError(ValueError):
    """Payload length does not tile the resource grid it is being packed into."""


class ParameterError(ValueError):
    """A scalar parameter is outside its valid domain."""


class ConfigurationError(ValueError):
    """A waveform or scenario configuration is internally inconsistent."""


class MappingError(ValueError):
    """Bit/symbol mapping request that the constellation tables cannot serve."""


class CapacityError(ValueError):
    """Requested work exceeds a hard search or memory budget."""


class CoverageError(RuntimeError):
    """A measurement finished without meeting its statistical target."""


class OptimizationError(RuntimeError):
    """Iterative refinement diverged.

    Carries the best iterate seen so far in ``best_pair`` so callers can
    decide whether the partial result is still usable.
    """

    def __init__(self, message: str, best_pair=None):
        super().__init__(message)
        self.best_pair = best_pair
