from pathlib import Path

from django.conf import settings
from rest_framework import serializers
from rest_framework.renderers import JSONRenderer

from anonymization.exceptions import PrivacyConfigError
from anonymization.services.metrics import UtilityReport
from anonymization.services.pipeline import RunConfig
from anonymization.services.random_streams import MAX_SEED
from anonymization.services.risk import PrivacyConfig
from eventlogs.services.log_io import TIME_UNITS


def _defaults():
    return settings.EVENT_LOG_ANONYMIZATION


class RunConfigSerializer(serializers.Serializer):
    """
    Validates anonymization run parameters and builds a RunConfig.

    Missing values fall back to ``settings.EVENT_LOG_ANONYMIZATION``.
    """
    input_path = serializers.CharField()
    input_format = serializers.ChoiceField(choices=['auto', 'xes', 'csv'], default='auto')
    columns = serializers.CharField(required=False)
    output_path = serializers.CharField(required=False, allow_null=True)
    report_path = serializers.CharField(required=False, allow_null=True)
    output_format = serializers.ChoiceField(choices=['xes', 'csv'], required=False, allow_null=True)
    delta = serializers.FloatField(required=False)
    precision = serializers.FloatField(required=False)
    time_unit = serializers.ChoiceField(choices=sorted(TIME_UNITS), required=False)
    seed = serializers.IntegerField(required=False, min_value=0, max_value=MAX_SEED)
    epsilon_cap = serializers.FloatField(required=False)
    monotonic = serializers.BooleanField(default=False)
    threads = serializers.IntegerField(required=False, min_value=1)
    dafsa_dot_path = serializers.CharField(required=False, allow_null=True)

    def validate_delta(self, value):
        """Guessing advantage must lie strictly between 0 and 1."""
        if not 0 < value < 1:
            raise serializers.ValidationError("Must be strictly between 0 and 1.")
        return value

    def validate_precision(self, value):
        if not 0 < value <= 1:
            raise serializers.ValidationError("Must be greater than 0 and at most 1.")
        return value

    def validate_epsilon_cap(self, value):
        if not value > 0:
            raise serializers.ValidationError("Must be positive.")
        return value

    def validate_columns(self, value):
        """Accept "case,activity,timestamp" and return a 3-tuple."""
        names = tuple(part.strip() for part in value.split(','))
        if len(names) != 3 or not all(names):
            raise serializers.ValidationError("Expected three comma-separated column names: case,activity,timestamp.")
        return names

    def validate(self, data):
        """Fill defaults from settings and check that output locations exist."""
        defaults = _defaults()
        data.setdefault('delta', defaults['DELTA'])
        data.setdefault('precision', defaults['PRECISION'])
        data.setdefault('time_unit', defaults['TIME_UNIT'])
        data.setdefault('seed', defaults['SEED'])
        data.setdefault('epsilon_cap', defaults['EPSILON_CAP'])
        data.setdefault('threads', defaults['THREADS'])
        data.setdefault('columns', tuple(defaults['CSV_COLUMNS']))

        for name in ('output_path', 'report_path', 'dafsa_dot_path'):
            value = data.get(name)
            if value and not Path(value).resolve().parent.is_dir():
                raise serializers.ValidationError({name: f"Directory of {value} does not exist."})

        try:
            data['privacy'] = PrivacyConfig(
                delta=data.pop('delta'),
                precision=data.pop('precision'),
                time_unit=data.pop('time_unit'),
                seed=data.pop('seed'),
                epsilon_cap=data.pop('epsilon_cap'),
            )
        except PrivacyConfigError as e:
            raise serializers.ValidationError({e.field or 'privacy': str(e)})
        return data

    def create(self, validated_data):
        paths = {}
        for name in ('output_path', 'report_path', 'dafsa_dot_path'):
            value = validated_data.get(name)
            paths[name] = Path(value) if value else None
        return RunConfig(
            input_path=Path(validated_data['input_path']),
            privacy=validated_data['privacy'],
            input_format=validated_data['input_format'],
            columns=validated_data['columns'],
            output_format=validated_data.get('output_format'),
            monotonic=validated_data['monotonic'],
            threads=validated_data['threads'],
            **paths,
        )


def format_errors(errors) -> str:
    """Flatten serializer errors into "field: message" text."""
    parts = []
    for field_name, messages in errors.items():
        if isinstance(messages, (list, tuple)):
            messages = ' '.join(str(m) for m in messages)
        parts.append(f"{field_name}: {messages}")
    return '; '.join(parts)


class TransitionRiskSerializer(serializers.Serializer):
    transition = serializers.CharField()
    extra_probability = serializers.FloatField()


class ResidualRiskSerializer(serializers.Serializer):
    count_epsilon = serializers.FloatField()
    extra_probability = serializers.FloatField()
    per_transition = TransitionRiskSerializer(source='entries', many=True)


class EpsilonSummarySerializer(serializers.Serializer):
    events = serializers.IntegerField()
    no_noise_events = serializers.IntegerField()
    count_epsilon = serializers.FloatField()
    min = serializers.FloatField(allow_null=True)
    median = serializers.FloatField(allow_null=True)
    max = serializers.FloatField(allow_null=True)


class VariantFrequencySerializer(serializers.Serializer):
    variant = serializers.ListField(child=serializers.CharField())
    original_cases = serializers.IntegerField()
    anonymized_cases = serializers.IntegerField()


class ActiveCasesSerializer(serializers.Serializer):
    bin_starts = serializers.ListField(child=serializers.DateTimeField())
    bin_seconds = serializers.FloatField()
    original = serializers.ListField(child=serializers.IntegerField())
    anonymized = serializers.ListField(child=serializers.IntegerField())


class UtilityReportSerializer(serializers.Serializer):
    """JSON shape of the report written next to every anonymized log."""
    smape_percent = serializers.FloatField(allow_null=True)
    oversampling_ratio = serializers.FloatField()
    variant_set_preserved = serializers.BooleanField()
    residual_risk = ResidualRiskSerializer()
    epsilon_summary = EpsilonSummarySerializer()
    runtime_seconds = serializers.FloatField()
    time_unit = serializers.CharField()
    original_cases = serializers.IntegerField()
    anonymized_cases = serializers.IntegerField()
    replicated_cases = serializers.IntegerField()
    mean_case_duration_original = serializers.FloatField()
    mean_case_duration_anonymized = serializers.FloatField()
    out_of_order_cases = serializers.IntegerField()
    active_cases = ActiveCasesSerializer(allow_null=True)
    variant_frequencies = VariantFrequencySerializer(many=True)
    parameters = serializers.DictField()
    anomalies = serializers.ListField(child=serializers.CharField())


def render_report(report: UtilityReport) -> bytes:
    data = UtilityReportSerializer(report).data
    return JSONRenderer().render(data, renderer_context={'indent': 2}) + b'\n'
