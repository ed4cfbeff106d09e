"""Exception types shared across the package."""


class LLPError(Exception):
    """Base class for all errors raised by this package."""


class DataFormatError(LLPError):
    """A dataset or bag file could not be parsed."""


class ConfigError(LLPError):
    """An experiment configuration is invalid (unknown key, bad value)."""


class EmptyBagError(LLPError):
    """A bag id has no instances assigned to it."""


class ZeroDegreeError(LLPError):
    """A graph row has zero total weight, so it cannot be row-normalized.

    Usually means the kernel bandwidth is too large for the data scale;
    lowering ``gamma_kernel`` densifies the graph.
    """


class IllConditionedError(LLPError):
    """The propagation linear system is numerically near-singular."""

    def __init__(self, message, condition_estimate):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class NonConvergenceError(LLPError):
    """An iterative solve did not reach its tolerance within max_iter.

    Carries the last iterate so the caller can decide whether to accept it.
    """

    def __init__(self, message, *, residual, iterations, iterate=None, diagnostics=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.iterate = iterate
        self.diagnostics = diagnostics


class InfeasibleSpecError(LLPError):
    """Requested bag counts cannot be satisfied by the available labels."""

    def __init__(self, message, *, positive_deficit=0, negative_deficit=0):
        super().__init__(message)
        self.positive_deficit = positive_deficit
        self.negative_deficit = negative_deficit
