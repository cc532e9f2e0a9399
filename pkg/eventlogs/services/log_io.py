"""
Event log ingestion and serialization.

Reads the XES subset used by process mining tools (trace/event elements with
concept:name and time:timestamp) and CSV event tables into immutable
EventLog objects, writes them back out, and derives the relative-time view
the anonymizer works on.
"""
import gzip
import io
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import BinaryIO, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import pandas as pd
from dateutil import parser as date_parser
from lxml import etree

from eventlogs.exceptions import LogParseError, LogValidationError

logger = logging.getLogger(__name__)

XES_NAMESPACE = 'http://www.xes-standard.org/'
XES_EXTENSIONS = (
    ('Concept', 'concept', 'http://www.xes-standard.org/concept.xesext'),
    ('Time', 'time', 'http://www.xes-standard.org/time.xesext'),
)
CONCEPT_NAME = 'concept:name'
TIME_TIMESTAMP = 'time:timestamp'

DEFAULT_COLUMNS = ('case', 'activity', 'timestamp')

TIME_UNITS = {
    'seconds': 1.0,
    'minutes': 60.0,
    'hours': 3600.0,
    'days': 86400.0,
}
DEFAULT_TIME_UNIT = 'hours'

# Fallbacks for timestamps dateutil's ISO parser rejects, e.g. "10:20:0.000"
_TIMESTAMP_FORMATS = ('%Y-%m-%d %H:%M:%S.%f', '%Y-%m-%d %H:%M:%S')

Source = Union[bytes, BinaryIO]


@dataclass(frozen=True)
class Event:
    """One execution of an activity within a case."""
    case_id: str
    activity: str
    timestamp: datetime

    def __post_init__(self):
        if not self.activity:
            raise LogValidationError(f"Event of case {self.case_id} has an empty activity label")


@dataclass(frozen=True)
class Trace:
    """The events of one case, ordered by (timestamp, original file position)."""
    case_id: str
    events: Tuple[Event, ...]

    def __post_init__(self):
        if not self.events:
            raise LogValidationError(f"Trace {self.case_id} has no events")
        strangers = [e.case_id for e in self.events if e.case_id != self.case_id]
        if strangers:
            raise LogValidationError(
                f"Trace {self.case_id} contains events of other cases: {sorted(set(strangers))}"
            )

    def __len__(self) -> int:
        return len(self.events)

    @property
    def variant(self) -> Tuple[str, ...]:
        return tuple(event.activity for event in self.events)

    @property
    def start(self) -> datetime:
        return self.events[0].timestamp


@dataclass(frozen=True)
class EventLog:
    """A set of traces with unique case ids, plus where they came from."""
    traces: Tuple[Trace, ...]
    source_meta: Dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        seen = Counter(trace.case_id for trace in self.traces)
        duplicated = sorted(case_id for case_id, n in seen.items() if n > 1)
        if duplicated:
            raise LogValidationError(f"Duplicate case ids in log: {duplicated[:10]}")

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    @property
    def event_count(self) -> int:
        return sum(len(trace) for trace in self.traces)

    def variants(self) -> Set[Tuple[str, ...]]:
        return {trace.variant for trace in self.traces}

    def variant_counts(self) -> Counter:
        return Counter(trace.variant for trace in self.traces)

    def by_case(self) -> Dict[str, Trace]:
        return {trace.case_id: trace for trace in self.traces}


@dataclass(frozen=True)
class RelativeTimeView:
    """
    Per-event time since case start, in ``unit``, plus its [0, 1] normalization.

    ``r_max`` is the largest relative time in the log; it is 1 when every
    relative time is zero so normalization stays defined.
    """
    unit: str
    rel_times: Dict[str, Tuple[float, ...]]
    normalized: Dict[str, Tuple[float, ...]]
    r_max: float

    def normalized_time(self, case_id: str, position: int) -> float:
        return self.normalized[case_id][position]


def normalize_timestamp(value: datetime) -> datetime:
    """UTC, millisecond resolution (sub-millisecond digits are truncated)."""
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    else:
        value = value.astimezone(timezone.utc)
    return value.replace(microsecond=(value.microsecond // 1000) * 1000)


def parse_timestamp(raw: str) -> datetime:
    """
    Parse an ISO-8601 or "YYYY-MM-DD HH:MM:SS.fff" timestamp.

    Raises:
        ValueError: if no supported format matches
    """
    text = raw.strip()
    try:
        return normalize_timestamp(date_parser.isoparse(text))
    except (ValueError, OverflowError):
        pass
    for fmt in _TIMESTAMP_FORMATS:
        try:
            return normalize_timestamp(datetime.strptime(text, fmt))
        except ValueError:
            continue
    raise ValueError(f"Unparseable timestamp: {raw!r}")


def format_timestamp(value: datetime) -> str:
    return normalize_timestamp(value).isoformat(timespec='milliseconds')


def _build_trace(case_id: str, events: List[Event]) -> Trace:
    # sorted() is stable, so equal timestamps keep their file order
    return Trace(case_id=case_id, events=tuple(sorted(events, key=lambda e: e.timestamp)))


def _as_stream(source: Source) -> BinaryIO:
    if isinstance(source, (bytes, bytearray)):
        return io.BytesIO(source)
    return source


def _local_name(element) -> str:
    return etree.QName(element).localname


def _attribute(element, kind: str, key: str) -> Optional[str]:
    for child in element:
        if isinstance(child.tag, str) and _local_name(child) == kind and child.get('key') == key:
            return child.get('value')
    return None


def parse_xes(source: Source) -> EventLog:
    """
    Parse an XES document into an EventLog.

    Only trace/event elements and their concept:name / time:timestamp
    attributes are read; other extensions and attributes are ignored.

    Args:
        source: XES bytes or a binary stream

    Returns:
        EventLog with format metadata ``xes``

    Raises:
        LogParseError: on malformed XML (with line) or missing mandatory attributes
    """
    parser = etree.XMLParser(resolve_entities=False, huge_tree=True, remove_comments=True)
    try:
        tree = etree.parse(_as_stream(source), parser)
    except etree.XMLSyntaxError as e:
        raise LogParseError(f"Malformed XES at line {e.lineno}: {e.msg}", line=e.lineno) from e

    root = tree.getroot()
    errors: List[Tuple[Optional[str], str]] = []
    traces = []
    seen_cases = set()

    trace_elements = [el for el in root if isinstance(el.tag, str) and _local_name(el) == 'trace']
    for trace_number, trace_el in enumerate(trace_elements, 1):
        case_id = _attribute(trace_el, 'string', CONCEPT_NAME)
        if not case_id:
            errors.append((None, f"Trace #{trace_number} (line {trace_el.sourceline}) has no {CONCEPT_NAME}"))
            continue
        if case_id in seen_cases:
            errors.append((case_id, f"Case {case_id} appears in more than one trace (line {trace_el.sourceline})"))
            continue
        seen_cases.add(case_id)

        event_elements = [el for el in trace_el if isinstance(el.tag, str) and _local_name(el) == 'event']
        if not event_elements:
            errors.append((case_id, f"Case {case_id} has no events"))
            continue

        events = []
        for position, event_el in enumerate(event_elements, 1):
            where = f"Case {case_id}: event #{position} (line {event_el.sourceline})"
            activity = _attribute(event_el, 'string', CONCEPT_NAME)
            raw_ts = _attribute(event_el, 'date', TIME_TIMESTAMP)
            if not activity:
                errors.append((case_id, f"{where} has no {CONCEPT_NAME}"))
            elif raw_ts is None:
                errors.append((case_id, f"{where} has no {TIME_TIMESTAMP}"))
            else:
                try:
                    events.append(Event(case_id=case_id, activity=activity, timestamp=parse_timestamp(raw_ts)))
                except ValueError:
                    errors.append((case_id, f"{where} has invalid timestamp {raw_ts!r}"))

        if len(events) == len(event_elements):
            traces.append(_build_trace(case_id, events))

    if errors:
        first_case, first_message = errors[0]
        raise LogParseError(
            f"{len(errors)} problem(s) in XES input; first: {first_message}",
            case_id=first_case,
            errors=[message for _, message in errors],
        )

    logger.info(f"Parsed XES log with {len(traces)} traces")
    return EventLog(traces=tuple(traces), source_meta={'format': 'xes', 'columns': DEFAULT_COLUMNS})


def parse_csv(source: Source, mapping: Sequence[str] = DEFAULT_COLUMNS) -> EventLog:
    """
    Parse a CSV event table (header row, RFC 4180 quoting) into an EventLog.

    Args:
        source: CSV bytes or a binary stream
        mapping: column names holding (case id, activity, timestamp)

    Returns:
        EventLog whose traces appear in order of each case's first row

    Raises:
        LogParseError: on unknown columns or unparseable rows (with row number)
    """
    mapping = tuple(mapping)
    if len(mapping) != 3:
        raise LogParseError(f"Column mapping needs exactly 3 names (case, activity, timestamp), got {mapping}")

    try:
        frame = pd.read_csv(_as_stream(source), dtype=str, keep_default_na=False, encoding='utf-8-sig')
    except pd.errors.EmptyDataError as e:
        raise LogParseError("CSV input has no header row") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise LogParseError(f"Malformed CSV: {e}") from e

    missing = [name for name in mapping if name not in frame.columns]
    if missing:
        raise LogParseError(
            f"Unknown column(s) {', '.join(missing)}; CSV header has: {', '.join(map(str, frame.columns))}"
        )

    grouped: Dict[str, List[Event]] = {}
    case_col, activity_col, ts_col = mapping
    # Header is row 1
    for row, (case_id, activity, raw_ts) in enumerate(
        frame[[case_col, activity_col, ts_col]].itertuples(index=False, name=None), 2
    ):
        if not case_id:
            raise LogParseError(f"Row {row}: empty case id in column {case_col!r}", row=row)
        if not activity:
            raise LogParseError(f"Row {row}: empty activity in column {activity_col!r}", row=row, case_id=case_id)
        try:
            timestamp = parse_timestamp(raw_ts)
        except ValueError as e:
            raise LogParseError(f"Row {row}: {e}", row=row, case_id=case_id) from e
        grouped.setdefault(case_id, []).append(Event(case_id=case_id, activity=activity, timestamp=timestamp))

    traces = tuple(_build_trace(case_id, events) for case_id, events in grouped.items())
    logger.info(f"Parsed CSV log with {len(traces)} traces from {len(frame)} rows")
    return EventLog(traces=traces, source_meta={'format': 'csv', 'columns': mapping})


def detect_format(path: Union[str, Path]) -> str:
    name = str(path).lower()
    if name.endswith('.xes') or name.endswith('.xes.gz'):
        return 'xes'
    if name.endswith('.csv') or name.endswith('.csv.gz'):
        return 'csv'
    raise LogParseError(f"Cannot detect log format of {path}; pass the format explicitly")


def read_log(path: Union[str, Path], fmt: str = 'auto', mapping: Sequence[str] = DEFAULT_COLUMNS) -> EventLog:
    """
    Read an event log file, transparently decompressing ``*.gz``.

    Args:
        path: input file
        fmt: ``auto``, ``xes`` or ``csv``
        mapping: CSV column names

    Returns:
        Parsed EventLog
    """
    path = Path(path)
    if fmt == 'auto':
        fmt = detect_format(path)
    opener = gzip.open if path.suffix.lower() == '.gz' else open
    try:
        with opener(path, 'rb') as handle:
            if fmt == 'xes':
                return parse_xes(handle)
            if fmt == 'csv':
                return parse_csv(handle, mapping)
    except OSError as e:
        raise LogParseError(f"Cannot read {path}: {e}") from e
    raise LogParseError(f"Unsupported log format: {fmt}")


def relative_times(log: EventLog, unit: str = DEFAULT_TIME_UNIT) -> RelativeTimeView:
    """
    Time of every event relative to the start of its case.

    Args:
        log: non-empty event log
        unit: one of TIME_UNITS

    Returns:
        RelativeTimeView keyed by case id, one value per event position
    """
    if not log.traces:
        raise LogValidationError("Relative times need a non-empty log")
    if unit not in TIME_UNITS:
        raise LogValidationError(f"Unknown time unit {unit!r}; expected one of {sorted(TIME_UNITS)}")

    seconds_per_unit = TIME_UNITS[unit]
    rel_times = {}
    for trace in log.traces:
        start = trace.start
        rel_times[trace.case_id] = tuple(
            (event.timestamp - start).total_seconds() / seconds_per_unit for event in trace.events
        )

    r_max = max(max(values) for values in rel_times.values())
    if r_max <= 0:
        logger.warning("All relative times are zero; using a normalization range of 1")
        r_max = 1.0

    normalized = {
        case_id: tuple(value / r_max for value in values)
        for case_id, values in rel_times.items()
    }
    return RelativeTimeView(unit=unit, rel_times=rel_times, normalized=normalized, r_max=r_max)


def _xes_tag(name: str) -> str:
    return f'{{{XES_NAMESPACE}}}{name}'


def render_xes(log: EventLog) -> bytes:
    root = etree.Element(_xes_tag('log'), nsmap={None: XES_NAMESPACE})
    root.set('xes.version', '1.0')
    for name, prefix, uri in XES_EXTENSIONS:
        etree.SubElement(root, _xes_tag('extension'), name=name, prefix=prefix, uri=uri)
    for trace in log.traces:
        trace_el = etree.SubElement(root, _xes_tag('trace'))
        try:
            etree.SubElement(trace_el, _xes_tag('string'), key=CONCEPT_NAME, value=trace.case_id)
            for event in trace.events:
                event_el = etree.SubElement(trace_el, _xes_tag('event'))
                etree.SubElement(event_el, _xes_tag('string'), key=CONCEPT_NAME, value=event.activity)
                etree.SubElement(
                    event_el, _xes_tag('date'), key=TIME_TIMESTAMP, value=format_timestamp(event.timestamp)
                )
        except ValueError as e:
            # lxml rejects control characters that XML 1.0 cannot carry
            raise LogValidationError(f"Case {trace.case_id!r} cannot be written as XES: {e}") from e
    return etree.tostring(root, xml_declaration=True, encoding='UTF-8', pretty_print=True)


def render_csv(log: EventLog, columns: Optional[Sequence[str]] = None) -> bytes:
    columns = list(columns or log.source_meta.get('columns') or DEFAULT_COLUMNS)
    rows = [
        (trace.case_id, event.activity, format_timestamp(event.timestamp))
        for trace in log.traces
        for event in trace.events
    ]
    frame = pd.DataFrame(rows, columns=columns)
    return frame.to_csv(index=False, lineterminator='\n').encode('utf-8')


def write_log(log: EventLog, fmt: str, sink: BinaryIO, columns: Optional[Sequence[str]] = None) -> int:
    """
    Serialize ``log`` as XES or CSV into a binary sink.

    Returns:
        Number of bytes written
    """
    if fmt == 'xes':
        payload = render_xes(log)
    elif fmt == 'csv':
        payload = render_csv(log, columns)
    else:
        raise LogValidationError(f"Unsupported output format: {fmt}")
    sink.write(payload)
    return len(payload)


def write_log_file(log: EventLog, path: Union[str, Path], fmt: str, columns: Optional[Sequence[str]] = None) -> int:
    path = Path(path)
    if path.suffix.lower() == '.gz':
        # Fixed mtime keeps the gzip header reproducible
        handle = gzip.GzipFile(path, 'wb', mtime=0)
    else:
        handle = open(path, 'wb')
    with handle:
        written = write_log(log, fmt, handle, columns)
    logger.info(f"Wrote {len(log)} traces to {path} ({fmt}, {written} bytes)")
    return written


def assemble_log(traces: Iterable[Trace], source_meta: Optional[Dict] = None) -> EventLog:
    return EventLog(traces=tuple(traces), source_meta=dict(source_meta or {}))
