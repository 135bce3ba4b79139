"""Exception hierarchy shared across the toolkit."""


class SelfCareError(Exception):
    """Base class for all toolkit errors."""


class FormatError(SelfCareError):
    """Input does not match the documented layout or schema."""


class IntegrityError(SelfCareError):
    """Data present but inconsistent with its declared metadata."""


class DesignError(SelfCareError):
    """Filter specification unrealizable at the given sampling rate."""


class InsufficientDataError(SelfCareError):
    """Signal too short for the requested operation."""


class MissingModalityError(SelfCareError):
    """A required channel is absent from the segment or record."""


class InsufficientBeatsError(SelfCareError):
    """Fewer than two beats detected in a cardiac window."""


class DegenerateLabelsError(SelfCareError):
    """Training labels contain a single class."""


class DataError(SelfCareError):
    """Non-finite values or arity mismatch in model input."""


class NumericalError(SelfCareError):
    """Numerical invariant violated (e.g. covariance symmetry loss)."""


class ConfigError(SelfCareError):
    """Invalid run or fusion configuration."""
