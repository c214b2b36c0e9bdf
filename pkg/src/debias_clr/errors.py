"""Exception hierarchy shared across the package.

Every raised condition has a dedicated class so callers (and the CLI exit-code
mapping) can dispatch on the failure kind rather than parse messages.
"""


class DebiasClrError(Exception):
    """Base class for all package errors."""


class ConfigError(DebiasClrError):
    """Invalid configuration object or CLI arguments."""


class InvalidConfig(ConfigError):
    """A config dataclass failed validation."""


class NumericalError(DebiasClrError):
    """Base class for numerical failures (CLI exit code 2)."""


class ZeroNormInput(NumericalError):
    """Cosine similarity requested for a zero-norm vector."""


class EmptyInput(NumericalError):
    """An operation received an empty sequence."""


class InsufficientData(NumericalError):
    """Too few samples for the requested statistic."""


class SingleClassLabels(NumericalError):
    """A label vector contains only one class."""


class SingleClassTraining(NumericalError):
    """Classifier fit received a single-class training set."""


class DimensionMismatch(NumericalError):
    """Vector/matrix shapes are inconsistent."""


class NonFiniteActivation(NumericalError):
    """Encoder forward pass produced NaN or infinity."""


class NonFiniteLoss(NumericalError):
    """Training loss became NaN or infinite."""


class NonFiniteGradient(NumericalError):
    """Backward pass produced NaN or infinite gradients."""


class BatchTooSmall(NumericalError):
    """Contrastive batch holds fewer than two pairs."""


class ZeroVariance(NumericalError):
    """Effect-size denominator collapsed; embeddings are degenerate."""


class TooFewMinoritySamples(NumericalError):
    """Minority class smaller than the oversampler's neighbor count."""


class DegenerateSplit(DebiasClrError):
    """A train/test split would leave one side empty."""


class InvalidClass(DebiasClrError):
    """Stay-length class outside 1..5."""


class ParseError(DebiasClrError):
    """Malformed table file; message names the offending row/column."""


class DuplicateRecordId(ParseError):
    """Two rows share a record id."""


class IoFailure(DebiasClrError):
    """Filesystem failure while reading or emitting artifacts."""


class NonConvergenceWarning(UserWarning):
    """A classifier hit its iteration budget without converging."""
