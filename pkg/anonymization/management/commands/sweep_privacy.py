"""
Management command to measure utility over a grid of privacy parameters.

Runs the anonymizer for every (delta, precision) pair, repeats each setting
over several seeds and reports average SMAPE, oversampling ratio and runtime.

Usage:
    python manage.py sweep_privacy sepsis.xes.gz
    python manage.py sweep_privacy log.csv --deltas 0.1,0.3,0.5 --precisions 0.05,0.1,0.2 --seeds 5
    python manage.py sweep_privacy log.csv --json results.json
"""
import logging
from pathlib import Path
from statistics import fmean

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers
from rest_framework.renderers import JSONRenderer

from anonymization.exceptions import AnonymizationError, PrivacyConfigError
from anonymization.services.pipeline import anonymize
from anonymization.services.risk import PrivacyConfig
from eventlogs.exceptions import EventLogError
from eventlogs.services.log_io import TIME_UNITS, read_log

logger = logging.getLogger(__name__)


class SweepResultSerializer(serializers.Serializer):
    delta = serializers.FloatField()
    precision = serializers.FloatField()
    seeds = serializers.IntegerField()
    smape_percent = serializers.FloatField(allow_null=True)
    oversampling_ratio = serializers.FloatField()
    runtime_seconds = serializers.FloatField()
    variant_set_preserved = serializers.BooleanField()


def _float_list(raw: str, name: str):
    try:
        return [float(part) for part in raw.split(',') if part.strip()]
    except ValueError:
        raise CommandError(f"Invalid configuration: {name}: expected comma-separated numbers, got {raw!r}", returncode=2)


class Command(BaseCommand):
    help = 'Average utility metrics of the anonymizer over a grid of delta and precision values'

    def add_arguments(self, parser):
        parser.add_argument('input', help='Event log (.xes, .xes.gz, .csv, .csv.gz)')
        parser.add_argument('--deltas', default='0.1,0.2,0.3,0.4,0.5', help='Comma-separated delta values')
        parser.add_argument('--precisions', default='0.1', help='Comma-separated precision values')
        parser.add_argument('--seeds', type=int, default=10, help='Repetitions per setting (default: 10)')
        parser.add_argument('--first-seed', type=int, default=0, help='Seed of the first repetition')
        parser.add_argument('--time-unit', choices=sorted(TIME_UNITS), default=None)
        parser.add_argument('--format', dest='input_format', choices=['auto', 'xes', 'csv'], default='auto')
        parser.add_argument('--columns', default=None, help='CSV columns for case,activity,timestamp')
        parser.add_argument('--json', dest='json_path', default=None, help='Also write the results as JSON')

    def handle(self, *args, **options):
        defaults = settings.EVENT_LOG_ANONYMIZATION
        deltas = _float_list(options['deltas'], 'deltas')
        precisions = _float_list(options['precisions'], 'precisions')
        seeds = options['seeds']
        first_seed = options['first_seed']
        time_unit = options.get('time_unit') or defaults['TIME_UNIT']
        columns = tuple(options['columns'].split(',')) if options.get('columns') else tuple(defaults['CSV_COLUMNS'])

        if seeds < 1:
            raise CommandError("Invalid configuration: seeds: must be at least 1", returncode=2)
        try:
            configs = [
                [PrivacyConfig(delta=d, precision=p, time_unit=time_unit, seed=first_seed + s,
                               epsilon_cap=defaults['EPSILON_CAP']) for s in range(seeds)]
                for d in deltas for p in precisions
            ]
        except PrivacyConfigError as e:
            raise CommandError(f"Invalid configuration: {e.field}: {e}", returncode=2)

        try:
            log = read_log(options['input'], options['input_format'], columns)
        except EventLogError as e:
            raise CommandError(str(e), returncode=1)

        self.stdout.write(self.style.SUCCESS(
            f'Sweeping {len(configs)} settings x {seeds} seeds on {options["input"]} ({len(log)} cases)...'
        ))

        results = []
        for idx, repetitions in enumerate(configs, 1):
            delta, precision = repetitions[0].delta, repetitions[0].precision
            reports = []
            for privacy in repetitions:
                try:
                    reports.append(anonymize(log, privacy).report)
                except EventLogError as e:
                    raise CommandError(str(e), returncode=1)
                except AnonymizationError as e:
                    logger.exception(f"Anonymization failed for delta={delta}, p={precision}, seed={privacy.seed}")
                    raise CommandError(str(e), returncode=1)

            smapes = [r.smape_percent for r in reports if r.smape_percent is not None]
            result = {
                'delta': delta,
                'precision': precision,
                'seeds': seeds,
                'smape_percent': fmean(smapes) if smapes else None,
                'oversampling_ratio': fmean(r.oversampling_ratio for r in reports),
                'runtime_seconds': fmean(r.runtime_seconds for r in reports),
                'variant_set_preserved': all(r.variant_set_preserved for r in reports),
            }
            results.append(result)
            logger.info(f"Sweep setting delta={delta}, p={precision} done")

            smape_text = f"{result['smape_percent']:.2f}" if result['smape_percent'] is not None else 'n/a'
            self.stdout.write(
                f'[{idx}/{len(configs)}] delta={delta:<5} p={precision:<5} '
                f'SMAPE={smape_text:>7}  ratio={result["oversampling_ratio"]:.3f}  '
                f'time={result["runtime_seconds"]:.2f}s'
            )
            if not result['variant_set_preserved']:
                self.stdout.write(self.style.ERROR('  ✗ Variant set not preserved'))

        if options.get('json_path'):
            data = SweepResultSerializer(results, many=True).data
            Path(options['json_path']).write_bytes(JSONRenderer().render(data, renderer_context={'indent': 2}))

        # Summary
        self.stdout.write('\n' + '='*60)
        self.stdout.write(self.style.SUCCESS('\nSweep completed!'))
        self.stdout.write(f'Settings: {len(results)}')
        self.stdout.write(f'Runs: {len(results) * seeds}')
        if options.get('json_path'):
            self.stdout.write(f'Results written to {options["json_path"]}')
