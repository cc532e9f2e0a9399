"""
Exceptions raised by privacy calibration, oversampling and reporting.
"""
from typing import Optional


class AnonymizationError(Exception):
    """Base class for anonymization failures."""


class PrivacyConfigError(AnonymizationError, ValueError):
    """A privacy parameter is outside its valid range; ``field`` names it."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(message)


class RiskComputationError(AnonymizationError, ValueError):
    """A prior or epsilon cannot be computed from the given data."""


class MetricError(AnonymizationError, ValueError):
    """A utility metric is undefined for the given logs."""
