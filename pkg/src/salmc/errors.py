"""Exception types shared across the toolkit."""


class SalmcError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(SalmcError):
    """A config, file, or argument failed validation before any compute ran."""


class NonFiniteError(SalmcError):
    """A tensor operation or loss produced NaN/Inf."""


class DecompositionError(SalmcError):
    """Cholesky factorization hit a non-positive-definite pivot."""

    def __init__(self, pivot_index, message=None):
        self.pivot_index = pivot_index
        super().__init__(
            message
            or f"matrix is not positive definite (pivot {pivot_index} failed)"
        )


class ConditioningError(SalmcError):
    """A kernel-matrix solve failed; a larger ridge usually fixes it."""


class DegenerateBandwidthError(SalmcError):
    """All particles coincide, so a median bandwidth cannot be resolved."""


class WeightDegeneracyError(SalmcError):
    """Density-ratio weights are all zero or non-finite."""


class DivergenceError(SalmcError):
    """Training loss exceeded the divergence threshold."""


class DegenerateChainError(SalmcError):
    """A chain has zero within-variance, so R-hat is undefined."""


class ExperimentError(SalmcError):
    """A run failed mid-pipeline; names the stage and keeps the cause."""

    def __init__(self, stage, original):
        self.stage = stage
        self.original = original
        super().__init__(f"[{stage}] {original}")
