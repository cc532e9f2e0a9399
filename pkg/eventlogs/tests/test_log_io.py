import gzip
import io
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from django.test import SimpleTestCase
from hypothesis import given, settings

from eventlogs.exceptions import LogParseError, LogValidationError
from eventlogs.services.log_io import (
    Event,
    EventLog,
    Trace,
    parse_csv,
    parse_timestamp,
    parse_xes,
    read_log,
    relative_times,
    render_csv,
    write_log,
    write_log_file,
)
from eventlogs.tests.fixtures import EXAMPLE_VARIANTS, example_csv, example_log, example_xes, make_log, random_logs


def _fingerprint(log: EventLog):
    return [(t.case_id, [(e.activity, e.timestamp) for e in t.events]) for t in log.traces]


class ParseXesTests(SimpleTestCase):

    def test_minimal_trace(self):
        xes = b"""<?xml version="1.0"?>
<log xmlns="http://www.xes-standard.org/">
  <trace>
    <string key="concept:name" value="c1"/>
    <event><string key="concept:name" value="A"/><date key="time:timestamp" value="2021-01-01T10:00:00.000+00:00"/></event>
    <event><string key="concept:name" value="B"/><date key="time:timestamp" value="2021-01-01T10:30:00.000+00:00"/></event>
  </trace>
</log>"""
        log = parse_xes(xes)
        self.assertEqual(len(log), 1)
        self.assertEqual(log.event_count, 2)
        self.assertEqual(log.traces[0].variant, ('A', 'B'))
        self.assertEqual(log.source_meta['format'], 'xes')

    def test_example_log(self):
        log = parse_xes(example_xes())
        self.assertEqual(len(log), 5)
        self.assertEqual(log.event_count, 17)
        self.assertEqual(log.variants(), EXAMPLE_VARIANTS)

    def test_xes_and_csv_routes_agree(self):
        self.assertEqual(_fingerprint(parse_xes(example_xes())), _fingerprint(example_log()))

    def test_missing_timestamp_names_the_case(self):
        xes = b"""<log xmlns="http://www.xes-standard.org/">
  <trace>
    <string key="concept:name" value="case-42"/>
    <event><string key="concept:name" value="A"/></event>
  </trace>
</log>"""
        with self.assertRaises(LogParseError) as ctx:
            parse_xes(xes)
        self.assertEqual(ctx.exception.case_id, 'case-42')
        self.assertIn('case-42', str(ctx.exception))
        self.assertIn('time:timestamp', str(ctx.exception))

    def test_all_bad_events_are_listed(self):
        xes = b"""<log xmlns="http://www.xes-standard.org/">
  <trace>
    <string key="concept:name" value="x"/>
    <event><string key="concept:name" value="A"/></event>
    <event><date key="time:timestamp" value="2021-01-01T10:00:00"/></event>
  </trace>
</log>"""
        with self.assertRaises(LogParseError) as ctx:
            parse_xes(xes)
        self.assertEqual(len(ctx.exception.errors), 2)

    def test_malformed_xml_reports_line(self):
        with self.assertRaises(LogParseError) as ctx:
            parse_xes(b'<log>\n<trace>\n</log>')
        self.assertIsNotNone(ctx.exception.line)

    def test_unknown_extensions_are_ignored(self):
        log = parse_xes(example_xes())
        self.assertTrue(all(len(t) >= 3 for t in log.traces))


class ParseCsvTests(SimpleTestCase):

    def test_example_log(self):
        log = example_log()
        self.assertEqual(len(log), 5)
        self.assertEqual(log.event_count, 17)
        self.assertEqual([t.case_id for t in log.traces], ['1', '2', '3', '4', '5'])

    def test_custom_column_mapping(self):
        log = parse_csv(example_csv(('id', 'task', 'time')), ('id', 'task', 'time'))
        self.assertEqual(log.variants(), EXAMPLE_VARIANTS)
        self.assertEqual(log.source_meta['columns'], ('id', 'task', 'time'))

    def test_header_only_gives_empty_log(self):
        log = parse_csv(b'case,activity,timestamp\n')
        self.assertEqual(len(log), 0)

    def test_unknown_column(self):
        with self.assertRaises(LogParseError) as ctx:
            parse_csv(example_csv(), ('case', 'task', 'timestamp'))
        self.assertIn('task', str(ctx.exception))

    def test_bad_timestamp_reports_row(self):
        data = b'case,activity,timestamp\n1,A,2020-01-01 10:00:00\n1,B,yesterday\n'
        with self.assertRaises(LogParseError) as ctx:
            parse_csv(data)
        self.assertEqual(ctx.exception.row, 3)

    def test_equal_timestamps_keep_file_order(self):
        data = (
            b'case,activity,timestamp\n'
            b'1,B,2020-01-01 10:00:00\n'
            b'1,A,2020-01-01 10:00:00\n'
            b'1,C,2020-01-01 09:00:00\n'
        )
        self.assertEqual(parse_csv(data).traces[0].variant, ('C', 'B', 'A'))

    def test_byte_order_mark_is_ignored(self):
        log = parse_csv(b'\xef\xbb\xbf' + example_csv())
        self.assertEqual(log.variants(), EXAMPLE_VARIANTS)
        self.assertEqual(len(log), 5)

    def test_quoted_fields(self):
        data = b'case,activity,timestamp\n"1","Check, then approve","2020-01-01T10:00:00Z"\n'
        self.assertEqual(parse_csv(data).traces[0].variant, ('Check, then approve',))


class TimestampTests(SimpleTestCase):

    def test_sub_millisecond_digits_are_truncated(self):
        ts = parse_timestamp('2020-01-01T10:00:00.123987+00:00')
        self.assertEqual(ts.microsecond, 123000)

    def test_offsets_are_converted_to_utc(self):
        ts = parse_timestamp('2020-01-01T12:00:00+02:00')
        self.assertEqual(ts, datetime(2020, 1, 1, 10, 0, tzinfo=timezone.utc))

    def test_single_digit_seconds(self):
        self.assertEqual(parse_timestamp('2020-08-08 10:20:0.000').minute, 20)


class RelativeTimesTests(SimpleTestCase):

    def test_example_case_in_hours(self):
        view = relative_times(example_log(), 'hours')
        rel = view.rel_times['1']
        self.assertEqual(rel[0], 0.0)
        self.assertAlmostEqual(rel[1], 0.5)
        self.assertAlmostEqual(rel[2], 5 + 55 / 60)

    def test_r_max_and_normalization(self):
        view = relative_times(example_log())
        self.assertAlmostEqual(view.r_max, 8.75)
        values = [v for values in view.normalized.values() for v in values]
        self.assertTrue(all(0.0 <= v <= 1.0 for v in values))
        self.assertAlmostEqual(max(values), 1.0)

    def test_single_event_trace(self):
        view = relative_times(make_log([('A',), ('A', 'B')]))
        self.assertEqual(view.rel_times['c1'], (0.0,))

    def test_all_zero_relative_times(self):
        view = relative_times(make_log([('A', 'B'), ('C',)], step_minutes=0))
        self.assertEqual(view.r_max, 1.0)
        self.assertTrue(all(v == 0.0 for values in view.normalized.values() for v in values))

    def test_units(self):
        log = example_log()
        self.assertAlmostEqual(relative_times(log, 'minutes').rel_times['1'][1], 30.0)
        with self.assertRaises(LogValidationError):
            relative_times(log, 'fortnights')

    def test_empty_log_rejected(self):
        with self.assertRaises(LogValidationError):
            relative_times(EventLog(traces=()))


class WriteLogTests(SimpleTestCase):

    def _round_trip(self, log, fmt):
        sink = io.BytesIO()
        written = write_log(log, fmt, sink)
        self.assertEqual(written, len(sink.getvalue()))
        return parse_xes(sink.getvalue()) if fmt == 'xes' else parse_csv(sink.getvalue())

    def test_example_round_trip(self):
        log = example_log()
        for fmt in ('xes', 'csv'):
            with self.subTest(fmt=fmt):
                self.assertEqual(_fingerprint(self._round_trip(log, fmt)), _fingerprint(log))

    def test_empty_log(self):
        empty = EventLog(traces=())
        self.assertEqual(render_csv(empty), b'case,activity,timestamp\n')
        self.assertEqual(len(self._round_trip(empty, 'xes')), 0)

    def test_unicode_labels_survive(self):
        ts = datetime(2021, 5, 1, 9, 0, tzinfo=timezone.utc)
        label = 'Überprüfung – 審査 ✓'
        log = EventLog(traces=(Trace('ü-1', (Event('ü-1', label, ts),)),))
        for fmt in ('xes', 'csv'):
            with self.subTest(fmt=fmt):
                self.assertEqual(self._round_trip(log, fmt).traces[0].variant, (label,))

    @settings(max_examples=30, deadline=None)
    @given(random_logs)
    def test_round_trip_random_logs(self, log):
        for fmt in ('xes', 'csv'):
            self.assertEqual(_fingerprint(self._round_trip(log, fmt)), _fingerprint(log))

    def test_gzip_files_are_reproducible(self):
        log = example_log()
        with tempfile.TemporaryDirectory() as tmp:
            first, second = Path(tmp) / 'a.xes.gz', Path(tmp) / 'b.xes.gz'
            write_log_file(log, first, 'xes')
            write_log_file(log, second, 'xes')
            self.assertEqual(first.read_bytes(), second.read_bytes())
            self.assertEqual(_fingerprint(read_log(first)), _fingerprint(log))
            with gzip.open(first) as handle:
                self.assertTrue(handle.read().startswith(b'<?xml'))

    def test_unknown_format(self):
        with self.assertRaises(LogValidationError):
            write_log(example_log(), 'json', io.BytesIO())

    def test_control_characters_cannot_be_written_as_xes(self):
        log = parse_csv(b'case,activity,timestamp\n7,"Bell\x07",2020-01-01 10:00:00\n')
        with self.assertRaises(LogValidationError) as ctx:
            write_log(log, 'xes', io.BytesIO())
        self.assertIn("'7'", str(ctx.exception))
        # CSV has no such restriction
        self.assertEqual(self._round_trip(log, 'csv').traces[0].variant, ('Bell\x07',))


class ReadLogTests(SimpleTestCase):

    def test_format_detection(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'log.csv'
            path.write_bytes(example_csv())
            self.assertEqual(len(read_log(path)), 5)

    def test_undetectable_format(self):
        with self.assertRaises(LogParseError):
            read_log('events.json')

    def test_missing_file(self):
        with self.assertRaises(LogParseError):
            read_log('/nonexistent/events.csv')
