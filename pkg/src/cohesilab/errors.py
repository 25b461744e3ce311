"""Exception hierarchy shared by all cohesilab modules."""

from __future__ import annotations


class CohesilabError(Exception):
    """Base class for every error raised by the package."""


class NumericError(CohesilabError):
    """A numerical kernel failed to deliver a result."""


class NonConvergence(NumericError):
    """An iterative procedure exhausted its budget before meeting its tolerance."""


class NonFinite(NumericError):
    """An integrand or objective returned NaN or an infinity."""


class DivergentIntegral(NumericError):
    """An endpoint singularity is not integrable."""


class NoSignChange(NumericError):
    """The function has the same sign at both ends of a bracket."""


class OutOfRange(NumericError):
    """A target value lies outside the image of a monotone function."""


class NotUnimodal(NumericError):
    """A coarse scan found more than one interior local maximum."""


class DomainError(NumericError):
    """An argument lies outside the domain of a function."""


class InconclusiveLimit(NumericError):
    """A refinement sequence neither settles nor grows monotonically."""


class IntegrationError(NumericError):
    """Not enough samples to integrate along a sampled curve."""


class StepUnderflow(NumericError):
    """Load-step halving went below the minimum step."""


class SingularCompliance(NumericError):
    """The bar compliance integral is singular."""


class ModelError(CohesilabError):
    """Invalid model construction request."""


class UnknownKind(ModelError):
    """The model kind is not one of the catalog names."""


class MissingBilinearParams(ModelError):
    """Kind ``B`` was requested without bilinear parameters."""


class InvalidRatio(ModelError):
    """Bilinear ratios outside their admissible range."""


class ConfigError(CohesilabError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    """The configuration file is not valid TOML."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(ConfigError):
    """A configuration or dataset field has an invalid value."""

    def __init__(self, field: str, message: str = "invalid value"):
        self.field = field
        super().__init__(f"{field}: {message}")


class ColumnNotFound(CohesilabError):
    """A plot or dataset query names a column that does not exist."""
