"""Exception types raised across the package."""


class DistFregError(Exception):
    """Base class for all package errors."""


class DimensionError(DistFregError, ValueError):
    """Array shapes or grids do not line up."""


class QuadratureError(DistFregError, ValueError):
    """Simpson quadrature requested on a grid that cannot support it."""


class ConfigurationError(DistFregError, ValueError):
    """Invalid basis sizes, component counts or other hyperparameters."""


class SingularDesignError(DistFregError, ValueError):
    """A least-squares design matrix is rank deficient."""


class DegenerateSampleError(DistFregError, ValueError):
    """The sample carries no usable information (e.g. all curves identical)."""


class CollinearityError(DistFregError, ValueError):
    """The smoothed scalar covariate vanishes in the partial linear fit."""


class PartitionError(DistFregError, ValueError):
    """Training indices cannot be split into equal blocks."""


class CalibrationError(DistFregError, ValueError):
    """Interval calibration inputs are invalid."""


class BlockFitError(DistFregError):
    """A local fit failed; carries the offending block id."""

    def __init__(self, block_id, cause):
        self.block_id = block_id
        self.cause = cause
        super().__init__(f"block {block_id}: {type(cause).__name__}: {cause}")


class TecatorParseError(DistFregError, ValueError):
    """The tecator CSV does not follow the canonical schema."""

    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class DegenerateWeightsError(DistFregError):
    """A query receives zero total kernel mass from the training curves."""


class ExperimentError(DistFregError):
    """A Monte Carlo cell failed; carries the replication and block count."""

    def __init__(self, rep, K, cause):
        self.rep = rep
        self.K = K
        self.cause = cause
        super().__init__(f"replication {rep}, K={K}: {type(cause).__name__}: {cause}")
