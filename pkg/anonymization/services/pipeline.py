"""
End-to-end anonymization: parse, build the DAFSA, calibrate epsilon,
oversample cases, perturb times, then write the release and its report.
"""
import logging
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Tuple

from anonymization.exceptions import AnonymizationError, MetricError
from anonymization.services import metrics
from anonymization.services.oversampler import (
    OversamplePlan,
    ReplicationRecord,
    draw_needed_noise,
    oversample,
    replication_groups,
)
from anonymization.services.random_streams import RandomStreams
from anonymization.services.risk import EpsilonPlan, PrivacyConfig, count_epsilon, residual_risk, time_epsilons
from anonymization.services.time_noise import NoisedLog, adjust_epsilons, inject_time_noise
from eventlogs.exceptions import LogParseError, LogValidationError
from eventlogs.services.dafsa import ContingencyTable, Dafsa, annotate, build_dafsa, build_lookup, contingency, to_dot
from eventlogs.services.log_io import (
    DEFAULT_COLUMNS,
    EventLog,
    RelativeTimeView,
    detect_format,
    read_log,
    relative_times,
    write_log_file,
)

logger = logging.getLogger(__name__)

LOG_SUFFIXES = ('.gz', '.xes', '.csv')


@dataclass(frozen=True)
class RunConfig:
    input_path: Path
    privacy: PrivacyConfig
    input_format: str = 'auto'
    columns: Tuple[str, ...] = DEFAULT_COLUMNS
    output_path: Optional[Path] = None
    report_path: Optional[Path] = None
    output_format: Optional[str] = None
    monotonic: bool = False
    threads: int = 1
    dafsa_dot_path: Optional[Path] = None

    @property
    def stem(self) -> str:
        name = self.input_path.name
        for suffix in LOG_SUFFIXES:
            if name.lower().endswith(suffix):
                name = name[:-len(suffix)]
        return name

    def resolve_output_format(self, log: EventLog) -> str:
        if self.output_format:
            return self.output_format
        if self.output_path is not None:
            try:
                return detect_format(self.output_path)
            except LogParseError:
                pass
        return log.source_meta.get('format', 'csv')

    def resolve_output_path(self, fmt: str) -> Path:
        return self.output_path or self.input_path.with_name(f'{self.stem}_anonymized.{fmt}')

    def resolve_report_path(self) -> Path:
        return self.report_path or self.input_path.with_name(f'{self.stem}_anonymized_report.json')


@dataclass
class RunArtifacts:
    original: EventLog
    dafsa: Dafsa
    contingency: ContingencyTable
    epsilon_plan: EpsilonPlan
    adjusted_plan: EpsilonPlan
    oversample_plan: OversamplePlan
    record: ReplicationRecord
    noised: NoisedLog
    report: metrics.UtilityReport
    output_path: Optional[Path] = None
    report_path: Optional[Path] = None

    @property
    def released(self) -> EventLog:
        return self.noised.log


def build_report(
    original: EventLog,
    times: RelativeTimeView,
    dafsa: Dafsa,
    epsilon_plan: EpsilonPlan,
    record: ReplicationRecord,
    noised: NoisedLog,
    privacy: PrivacyConfig,
    monotonic: bool,
    runtime_seconds: float,
) -> metrics.UtilityReport:
    """
    Collect the utility report; a metric that cannot be computed is recorded
    as an anomaly instead of aborting the run.
    """
    anomalies = []
    pairing = {case_id: entry.source_case_id for case_id, entry in record.lineage.items()}

    try:
        smape_percent = metrics.smape(times.rel_times, noised.rel_times, pairing)
    except MetricError as e:
        logger.warning(f"SMAPE not computed: {e}")
        anomalies.append(f"smape: {e}")
        smape_percent = None

    preserved = metrics.variant_set_equal(original, noised.log)
    if not preserved:
        anomalies.append("variant set of the release differs from the input")

    out_of_order = metrics.out_of_order_cases(noised.log)
    if out_of_order:
        logger.warning(f"{out_of_order} released cases have timestamps out of event order")
        anomalies.append(
            f"{out_of_order} released cases have timestamps out of event order; "
            f"readers that sort events by time will see other variants"
        )

    parameters = asdict(privacy)
    parameters['monotonic'] = monotonic
    return metrics.UtilityReport(
        smape_percent=smape_percent,
        oversampling_ratio=metrics.oversampling_ratio(original, noised.log),
        variant_set_preserved=preserved,
        residual_risk=residual_risk(epsilon_plan.count_epsilon, dafsa.transitions),
        epsilon_summary=metrics.epsilon_summary(epsilon_plan),
        runtime_seconds=runtime_seconds,
        time_unit=privacy.time_unit,
        original_cases=len(original),
        anonymized_cases=len(noised.log),
        replicated_cases=record.replica_count,
        mean_case_duration_original=metrics.mean_case_duration(times.rel_times),
        mean_case_duration_anonymized=metrics.mean_case_duration(noised.rel_times),
        out_of_order_cases=out_of_order,
        active_cases=metrics.active_cases_over_time(original, noised.log),
        variant_frequencies=metrics.variant_frequencies(original, noised.log),
        parameters=parameters,
        anomalies=anomalies,
    )


def anonymize(log: EventLog, privacy: PrivacyConfig, monotonic: bool = False, threads: int = 1) -> RunArtifacts:
    """
    Anonymize an in-memory log.

    Args:
        log: non-empty input log
        privacy: delta, precision, time unit, seed and epsilon cap
        monotonic: keep released timestamps non-decreasing within each case
        threads: worker threads for the time-noise stage

    Returns:
        RunArtifacts with the released log and its report
    """
    if not len(log):
        raise LogValidationError("Cannot anonymize an empty log")

    started = time.perf_counter()
    streams = RandomStreams(privacy.seed)

    times = relative_times(log, privacy.time_unit)
    dafsa = build_dafsa(log.variants())
    annotated = annotate(log, dafsa)
    table = contingency(annotated)

    epsilon_plan = time_epsilons(annotated, times, privacy)
    lookup = build_lookup(annotated, dafsa)
    oversample_plan = draw_needed_noise(dafsa, count_epsilon(privacy), streams)
    released, record = oversample(log, lookup, oversample_plan, streams.stream('oversample'))

    adjusted = adjust_epsilons(epsilon_plan, replication_groups(record))
    noised = inject_time_noise(released, times, adjusted, streams, record, monotonic=monotonic, threads=threads)

    report = build_report(
        log, times, dafsa, epsilon_plan, record, noised, privacy, monotonic,
        runtime_seconds=time.perf_counter() - started,
    )
    return RunArtifacts(
        original=log,
        dafsa=dafsa,
        contingency=table,
        epsilon_plan=epsilon_plan,
        adjusted_plan=adjusted,
        oversample_plan=oversample_plan,
        record=record,
        noised=noised,
        report=report,
    )


def run(config: RunConfig) -> RunArtifacts:
    """
    Read the input, anonymize it and write the release, the JSON report and
    (optionally) the DAFSA as DOT.

    Raises:
        LogParseError: the input cannot be read
        AnonymizationError: the release violates an invariant (the report is written first)
    """
    from anonymization.serializers import render_report

    logger.info(f"Anonymizing {config.input_path} with delta={config.privacy.delta}, p={config.privacy.precision}")
    log = read_log(config.input_path, config.input_format, config.columns)
    artifacts = anonymize(log, config.privacy, monotonic=config.monotonic, threads=config.threads)

    fmt = config.resolve_output_format(log)
    artifacts.output_path = config.resolve_output_path(fmt)
    artifacts.report_path = config.resolve_report_path()

    if config.dafsa_dot_path:
        Path(config.dafsa_dot_path).write_text(to_dot(artifacts.dafsa), encoding='utf-8')

    write_log_file(artifacts.released, artifacts.output_path, fmt)
    artifacts.report_path.write_bytes(render_report(artifacts.report))
    logger.info(f"Report written to {artifacts.report_path}")

    if not artifacts.report.variant_set_preserved:
        raise AnonymizationError("Released log does not preserve the input's case variants")
    return artifacts
