"""
Exceptions raised while reading, validating and modelling event logs.
"""
from typing import List, Optional


class EventLogError(Exception):
    """Base class for event log failures."""


class LogParseError(EventLogError):
    """
    Input could not be turned into an event log.

    Carries whatever location is known (XML line, CSV row, case id) plus the
    full list of problems when several events fail at once.
    """

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        row: Optional[int] = None,
        case_id: Optional[str] = None,
        errors: Optional[List[str]] = None,
    ):
        self.line = line
        self.row = row
        self.case_id = case_id
        self.errors = errors or [message]
        super().__init__(message)


class LogValidationError(EventLogError):
    """A log violates a precondition of the requested operation."""


class DafsaError(EventLogError):
    """The automaton cannot be built from the given variants."""


class AnnotationError(EventLogError):
    """A trace follows a variant the automaton does not accept."""
