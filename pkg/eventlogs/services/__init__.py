"""
Services for reading event logs and modelling their case variants.
"""
from .log_io import (
    Event, Trace, EventLog, RelativeTimeView,
    parse_xes, parse_csv, read_log, relative_times, write_log, write_log_file, assemble_log,
)
from .dafsa import (
    Transition, Dafsa, StateAnnotatedLog, ContingencyTable, TransitionVariantLookup,
    build_dafsa, annotate, contingency, build_lookup, to_dot,
)

__all__ = [
    'Event', 'Trace', 'EventLog', 'RelativeTimeView',
    'parse_xes', 'parse_csv', 'read_log', 'relative_times', 'write_log', 'write_log_file', 'assemble_log',
    'Transition', 'Dafsa', 'StateAnnotatedLog', 'ContingencyTable', 'TransitionVariantLookup',
    'build_dafsa', 'annotate', 'contingency', 'build_lookup', 'to_dot',
]
