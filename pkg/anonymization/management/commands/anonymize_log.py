"""
Management command to anonymize an event log under a guessing-advantage bound.

Usage:
    python manage.py anonymize_log sepsis.xes.gz
    python manage.py anonymize_log log.csv --delta 0.2 --precision 0.1 --seed 42
    python manage.py anonymize_log log.csv --columns case_id,task,end_time --output out.csv --report report.json
    python manage.py anonymize_log log.xes --monotonic --dafsa-dot dafsa.dot --record

Exit status is 1 when the input cannot be read and 2 when the configuration is invalid.
"""
import json
import logging

from django.core.management.base import BaseCommand, CommandError

from anonymization.exceptions import AnonymizationError
from anonymization.models import AnonymizationRun
from anonymization.serializers import RunConfigSerializer, format_errors
from anonymization.services.pipeline import run
from eventlogs.exceptions import EventLogError
from eventlogs.services.log_io import TIME_UNITS

logger = logging.getLogger(__name__)

PARSE_FAILURE = 1
INVALID_CONFIG = 2


class Command(BaseCommand):
    help = 'Anonymize an event log: oversample cases and add Laplace noise to event times'

    def add_arguments(self, parser):
        parser.add_argument('input', help='Event log (.xes, .xes.gz, .csv, .csv.gz)')
        parser.add_argument('--output', help='Anonymized log path (default: <input>_anonymized.<format>)')
        parser.add_argument('--report', help='JSON report path (default: <input>_anonymized_report.json)')
        parser.add_argument(
            '--delta',
            type=float,
            default=None,
            help='Guessing-advantage bound in (0, 1) (default from settings: 0.2)',
        )
        parser.add_argument(
            '--precision',
            type=float,
            default=None,
            help='Guess precision p in (0, 1] on the normalized time scale (default: 0.1)',
        )
        parser.add_argument('--time-unit', choices=sorted(TIME_UNITS), default=None, help='Unit of relative times')
        parser.add_argument('--seed', type=int, default=None, help='Master random seed')
        parser.add_argument(
            '--monotonic',
            action='store_true',
            help='Raise each noised timestamp to at least its predecessor in the case',
        )
        parser.add_argument('--epsilon-cap', type=float, default=None, help='Upper bound on any epsilon (default: 50)')
        parser.add_argument('--format', dest='input_format', choices=['auto', 'xes', 'csv'], default='auto')
        parser.add_argument('--output-format', choices=['xes', 'csv'], default=None)
        parser.add_argument('--columns', default=None, help='CSV columns for case,activity,timestamp')
        parser.add_argument('--threads', type=int, default=None, help='Worker threads for time noise')
        parser.add_argument('--dafsa-dot', dest='dafsa_dot_path', default=None, help='Also write the DAFSA as DOT')
        parser.add_argument(
            '--record',
            action='store_true',
            help='Store the run and its report in the database',
        )

    def handle(self, *args, **options):
        payload = {
            'input_path': options['input'],
            'input_format': options['input_format'],
            'output_path': options.get('output'),
            'report_path': options.get('report'),
            'output_format': options.get('output_format'),
            'monotonic': options.get('monotonic', False),
            'dafsa_dot_path': options.get('dafsa_dot_path'),
        }
        for name in ('delta', 'precision', 'time_unit', 'seed', 'epsilon_cap', 'threads', 'columns'):
            if options.get(name) is not None:
                payload[name] = options[name]

        serializer = RunConfigSerializer(data=payload)
        if not serializer.is_valid():
            raise CommandError(f"Invalid configuration: {format_errors(serializer.errors)}", returncode=INVALID_CONFIG)
        config = serializer.save()
        privacy = config.privacy

        self.stdout.write(self.style.SUCCESS(f'Anonymizing {config.input_path}...'))
        self.stdout.write(
            f'delta={privacy.delta}  precision={privacy.precision}  unit={privacy.time_unit}  seed={privacy.seed}'
        )

        try:
            artifacts = run(config)
        except EventLogError as e:
            logger.error(f"Could not process {config.input_path}: {e}")
            raise CommandError(str(e), returncode=PARSE_FAILURE)
        except AnonymizationError as e:
            logger.exception(f"Anonymization of {config.input_path} failed")
            raise CommandError(str(e), returncode=PARSE_FAILURE)

        report = artifacts.report

        if options.get('record'):
            report_data = json.loads(artifacts.report_path.read_text(encoding='utf-8'))
            run_entry = AnonymizationRun.record(config, artifacts, report_data)
            self.stdout.write(f'Recorded as run #{run_entry.pk}')

        # Summary
        self.stdout.write('\n' + '='*60)
        self.stdout.write(self.style.SUCCESS('\nAnonymization completed!'))
        self.stdout.write(f'Cases: {report.original_cases} -> {report.anonymized_cases}')
        self.stdout.write(f'Oversampling ratio: {report.oversampling_ratio:.3f}')
        if report.smape_percent is not None:
            self.stdout.write(f'SMAPE: {report.smape_percent:.2f}%')
        self.stdout.write(f'Count epsilon: {report.epsilon_summary.count_epsilon:.6f}')
        self.stdout.write(f'Residual risk per transition: {report.residual_risk.extra_probability:.4f}')
        if report.epsilon_summary.no_noise_events:
            self.stdout.write(
                self.style.WARNING(f'Events published without time noise: {report.epsilon_summary.no_noise_events}')
            )
        if report.out_of_order_cases:
            self.stdout.write(self.style.WARNING(
                f'Cases with timestamps out of event order: {report.out_of_order_cases} '
                f'(rerun with --monotonic to keep the variants when the log is read back)'
            ))
        for anomaly in report.anomalies:
            self.stdout.write(self.style.WARNING(f'Anomaly: {anomaly}'))
        self.stdout.write(f'Log written to {artifacts.output_path}')
        self.stdout.write(f'Report written to {artifacts.report_path}')
