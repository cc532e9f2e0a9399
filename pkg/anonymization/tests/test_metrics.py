import math
from datetime import timedelta

from django.test import SimpleTestCase

from anonymization.exceptions import MetricError
from anonymization.services.metrics import (
    active_cases_over_time,
    case_durations,
    epsilon_summary,
    mean_case_duration,
    out_of_order_cases,
    oversampling_ratio,
    smape,
    variant_frequencies,
    variant_set_equal,
)
from anonymization.services.risk import NO_NOISE, EpsilonPlan
from eventlogs.services.log_io import Event, EventLog, Trace
from eventlogs.tests.fixtures import BASE_TIME, example_log, make_log


class SmapeTests(SimpleTestCase):

    def test_identical_times(self):
        times = {'a': (0.0, 1.0, 2.0)}
        self.assertEqual(smape(times, times, {'a': 'a'}), 0.0)

    def test_reference_value(self):
        # |1 - 2| / 3 averaged with two exact zeros
        original = {'a': (0.0, 1.0)}
        anonymized = {'x': (0.0, 2.0)}
        self.assertAlmostEqual(smape(original, anonymized, {'x': 'a'}), 100 / 6)

    def test_single_pair(self):
        self.assertAlmostEqual(smape({'a': (1.0,)}, {'x': (2.0,)}, {'x': 'a'}), 100 / 3)

    def test_zero_pairs_count_as_exact(self):
        self.assertEqual(smape({'a': (0.0, 0.0)}, {'x': (0.0, 0.0)}, {'x': 'a'}), 0.0)

    def test_upper_bound(self):
        self.assertEqual(smape({'a': (0.0,)}, {'x': (5.0,)}, {'x': 'a'}), 100.0)

    def test_replicas_compare_with_their_source(self):
        original = {'a': (0.0, 1.0)}
        anonymized = {'x': (0.0, 1.0), 'y': (0.0, 3.0)}
        self.assertAlmostEqual(smape(original, anonymized, {'x': 'a', 'y': 'a'}), 100 * 0.5 / 4)

    def test_errors(self):
        with self.assertRaises(MetricError):
            smape({'a': (1.0,)}, {'x': (1.0,)}, {})
        with self.assertRaises(MetricError):
            smape({'a': (1.0,)}, {'x': (1.0, 2.0)}, {'x': 'a'})
        with self.assertRaises(MetricError):
            smape({}, {}, {})


class LogComparisonTests(SimpleTestCase):

    def test_oversampling_ratio(self):
        original = make_log([('A',)] * 5)
        released = make_log([('A',)] * 8)
        self.assertAlmostEqual(oversampling_ratio(original, released), 1.6)
        self.assertEqual(oversampling_ratio(original, original), 1.0)

    def test_variant_set_equal(self):
        log = make_log([('A', 'B'), ('C',)])
        self.assertTrue(variant_set_equal(log, make_log([('C',), ('A', 'B'), ('A', 'B')])))
        self.assertFalse(variant_set_equal(log, make_log([('A', 'B')])))
        self.assertFalse(variant_set_equal(log, make_log([('A', 'B'), ('C',), ('B', 'A')])))

    def test_variant_frequencies(self):
        original = example_log()
        released = make_log([('A', 'B', 'C')] * 3 + [('A', 'E', 'C')])
        rows = variant_frequencies(original, released)
        self.assertEqual(rows[0].variant, ('A', 'B', 'C'))
        self.assertEqual((rows[0].original_cases, rows[0].anonymized_cases), (2, 3))
        self.assertEqual(sum(row.original_cases for row in rows), 5)
        self.assertEqual(sum(row.anonymized_cases for row in rows), 4)

    def test_case_durations(self):
        rel_times = {'a': (0.0, 2.0, 5.0), 'b': (0.0,)}
        self.assertEqual(case_durations(rel_times), {'a': 5.0, 'b': 0.0})
        self.assertEqual(mean_case_duration(rel_times), 2.5)
        self.assertEqual(mean_case_duration({}), 0.0)


class EpsilonSummaryTests(SimpleTestCase):

    def test_excludes_no_noise_values(self):
        plan = EpsilonPlan(count_epsilon=math.log(9 / 4), time_epsilons={
            'a': (NO_NOISE, 0.5, 2.0),
            'b': (NO_NOISE, 1.0),
        })
        summary = epsilon_summary(plan)
        self.assertEqual(summary.events, 5)
        self.assertEqual(summary.no_noise_events, 2)
        self.assertEqual((summary.min, summary.median, summary.max), (0.5, 1.0, 2.0))
        self.assertAlmostEqual(summary.count_epsilon, math.log(9 / 4))

    def test_all_no_noise(self):
        summary = epsilon_summary(EpsilonPlan(count_epsilon=1.0, time_epsilons={'a': (NO_NOISE,)}))
        self.assertEqual(summary.no_noise_events, 1)
        self.assertIsNone(summary.median)


def _replica(trace, case_id):
    return Trace(case_id, tuple(Event(case_id, e.activity, e.timestamp) for e in trace.events))


class OutOfOrderCasesTests(SimpleTestCase):

    def test_ordered_log(self):
        self.assertEqual(out_of_order_cases(example_log()), 0)

    def test_counts_cases_going_backwards(self):
        swapped = Trace('x', (
            Event('x', 'A', BASE_TIME),
            Event('x', 'B', BASE_TIME + timedelta(hours=2)),
            Event('x', 'C', BASE_TIME + timedelta(hours=1)),
        ))
        tied = Trace('y', (Event('y', 'A', BASE_TIME), Event('y', 'B', BASE_TIME)))
        self.assertEqual(out_of_order_cases(EventLog(traces=(swapped, tied))), 1)


class ActiveCasesTests(SimpleTestCase):

    def test_replicated_case_raises_the_anonymized_curve(self):
        # c1 is open from 1:00 to 1:30 after BASE_TIME, c2 from 2:00 to 2:30
        original = make_log([('A', 'B'), ('A', 'B')])
        released = EventLog(traces=original.traces + (_replica(original.traces[0], 'r1'),))

        curve = active_cases_over_time(original, released, bins=4)
        self.assertEqual(curve.original, [1, 1, 1, 1])
        self.assertEqual(curve.anonymized, [2, 2, 1, 1])
        self.assertEqual(curve.bin_starts[0], BASE_TIME + timedelta(hours=1))
        self.assertEqual(curve.bin_seconds, 1350.0)

    def test_shared_axis_covers_both_logs(self):
        original = make_log([('A', 'B')])
        late = Trace('late', tuple(
            Event('late', e.activity, e.timestamp + timedelta(hours=3)) for e in original.traces[0].events
        ))
        curve = active_cases_over_time(original, EventLog(traces=(late,)), bins=2)
        self.assertEqual(curve.original, [1, 0])
        self.assertEqual(curve.anonymized, [0, 1])

    def test_single_instant(self):
        log = make_log([('A',)])
        curve = active_cases_over_time(log, log)
        self.assertEqual((curve.original, curve.anonymized, curve.bin_seconds), ([1], [1], 0.0))

    def test_errors(self):
        with self.assertRaises(MetricError):
            active_cases_over_time(example_log(), example_log(), bins=0)
        with self.assertRaises(MetricError):
            active_cases_over_time(example_log(), EventLog(traces=()))
