"""
Shared test data: the five-case example log and random log generators.
"""
from datetime import datetime, timedelta, timezone
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from hypothesis import strategies as st

from eventlogs.services.log_io import Event, EventLog, Trace, parse_csv

EXAMPLE_ROWS = [
    ('1', 'A', '2020-08-08 10:20:0.000'),
    ('1', 'B', '2020-08-08 10:50:0.000'),
    ('1', 'C', '2020-08-08 16:15:0.000'),
    ('2', 'D', '2020-08-08 12:07:0.000'),
    ('2', 'A', '2020-08-08 13:37:0.000'),
    ('2', 'E', '2020-08-08 14:07:0.000'),
    ('2', 'C', '2020-08-08 19:07:0.000'),
    ('3', 'A', '2020-08-08 13:30:0.000'),
    ('3', 'B', '2020-08-08 13:55:0.000'),
    ('3', 'C', '2020-08-08 20:55:0.000'),
    ('4', 'D', '2020-08-08 15:00:0.000'),
    ('4', 'A', '2020-08-08 17:00:0.000'),
    ('4', 'B', '2020-08-08 17:40:0.000'),
    ('4', 'C', '2020-08-08 23:45:0.000'),
    ('5', 'A', '2020-08-08 16:40:0.000'),
    ('5', 'E', '2020-08-08 17:55:0.000'),
    ('5', 'C', '2020-08-08 23:55:0.000'),
]

EXAMPLE_VARIANTS = {
    ('A', 'B', 'C'),
    ('D', 'A', 'E', 'C'),
    ('D', 'A', 'B', 'C'),
    ('A', 'E', 'C'),
}

# Transition counts of the example log keyed by the label path leading into the transition
EXAMPLE_COUNTS_BY_PREFIX = {
    ('A',): 3,
    ('A', 'B'): 3,
    ('A', 'B', 'C'): 5,
    ('D',): 2,
    ('D', 'A'): 2,
    ('A', 'E'): 2,
}

BASE_TIME = datetime(2020, 8, 8, 8, 0, tzinfo=timezone.utc)


def example_csv(columns: Sequence[str] = ('case', 'activity', 'timestamp')) -> bytes:
    lines = [','.join(columns)]
    lines.extend(','.join(row) for row in EXAMPLE_ROWS)
    return ('\n'.join(lines) + '\n').encode('utf-8')


def example_xes() -> bytes:
    by_case: Dict[str, List[Tuple[str, str]]] = {}
    for case_id, activity, timestamp in EXAMPLE_ROWS:
        by_case.setdefault(case_id, []).append((activity, timestamp.replace(' ', 'T').replace(':0.000', ':00.000')))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<log xes.version="1.0" xmlns="http://www.xes-standard.org/">',
        '  <extension name="Lifecycle" prefix="lifecycle" uri="http://www.xes-standard.org/lifecycle.xesext"/>',
    ]
    for case_id, events in by_case.items():
        parts.append('  <trace>')
        parts.append(f'    <string key="concept:name" value="{case_id}"/>')
        for activity, timestamp in events:
            parts.append('    <event>')
            parts.append(f'      <string key="concept:name" value="{activity}"/>')
            parts.append('      <string key="lifecycle:transition" value="complete"/>')
            parts.append(f'      <date key="time:timestamp" value="{timestamp}+00:00"/>')
            parts.append('    </event>')
        parts.append('  </trace>')
    parts.append('</log>')
    return '\n'.join(parts).encode('utf-8')


def example_log() -> EventLog:
    return parse_csv(example_csv())


def make_log(
    variants: Iterable[Sequence[str]],
    step_minutes: float = 30,
    prefix: str = 'c',
) -> EventLog:
    """One case per entry of ``variants``, events ``step_minutes`` apart, cases an hour apart."""
    traces = []
    for number, variant in enumerate(variants, 1):
        case_id = f'{prefix}{number}'
        start = BASE_TIME + timedelta(hours=number)
        events = tuple(
            Event(case_id=case_id, activity=activity, timestamp=start + timedelta(minutes=step_minutes * position))
            for position, activity in enumerate(variant)
        )
        traces.append(Trace(case_id=case_id, events=events))
    return EventLog(traces=tuple(traces), source_meta={'format': 'csv', 'columns': ('case', 'activity', 'timestamp')})


def random_log(seed: int, max_cases: int = 50, alphabet_size: int = 8, max_length: int = 6) -> EventLog:
    """
    Random log with up to ``max_cases`` cases over ``alphabet_size`` activities.

    Case variants are drawn from a small pool so that several cases share a
    variant, and event gaps are whole minutes (possibly zero).
    """
    rng = np.random.default_rng(seed)
    alphabet = [chr(ord('A') + i) for i in range(alphabet_size)]
    pool = [
        tuple(rng.choice(alphabet, size=int(rng.integers(1, max_length + 1))))
        for _ in range(int(rng.integers(1, 9)))
    ]
    traces = []
    for number in range(int(rng.integers(1, max_cases + 1))):
        case_id = f'case-{number}'
        variant = pool[int(rng.integers(len(pool)))]
        offsets = np.cumsum(rng.integers(0, 240, size=len(variant)))
        offsets -= offsets[0]
        start = BASE_TIME + timedelta(minutes=int(rng.integers(0, 10_000)))
        events = tuple(
            Event(case_id=case_id, activity=str(activity), timestamp=start + timedelta(minutes=int(offset)))
            for activity, offset in zip(variant, offsets)
        )
        traces.append(Trace(case_id=case_id, events=events))
    return EventLog(traces=tuple(traces), source_meta={'format': 'csv', 'columns': ('case', 'activity', 'timestamp')})


def variant_sets(max_variants: int = 6, max_length: int = 5, alphabet: str = 'ABCD'):
    """Hypothesis strategy for small non-empty sets of non-empty variants."""
    word = st.lists(st.sampled_from(alphabet), min_size=1, max_size=max_length).map(tuple)
    return st.sets(word, min_size=1, max_size=max_variants)


random_logs = st.integers(min_value=0, max_value=2**32 - 1).map(random_log)
