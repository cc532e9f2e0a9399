"""
Utility and risk metrics comparing an input log with its anonymized release.
"""
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from statistics import fmean
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from anonymization.exceptions import MetricError
from anonymization.services.risk import NO_NOISE, EpsilonPlan, ResidualRisk
from eventlogs.services.log_io import EventLog

logger = logging.getLogger(__name__)

DEFAULT_ACTIVE_CASE_BINS = 50


@dataclass(frozen=True)
class EpsilonSummary:
    events: int
    no_noise_events: int
    count_epsilon: float
    min: Optional[float] = None
    median: Optional[float] = None
    max: Optional[float] = None


@dataclass(frozen=True)
class VariantFrequency:
    variant: Tuple[str, ...]
    original_cases: int
    anonymized_cases: int


@dataclass(frozen=True)
class ActiveCases:
    """Number of open cases per time bin, for the input and the release on a shared axis."""
    bin_starts: List[datetime]
    bin_seconds: float
    original: List[int]
    anonymized: List[int]


@dataclass
class UtilityReport:
    smape_percent: Optional[float]
    oversampling_ratio: float
    variant_set_preserved: bool
    residual_risk: ResidualRisk
    epsilon_summary: EpsilonSummary
    runtime_seconds: float
    time_unit: str
    original_cases: int
    anonymized_cases: int
    replicated_cases: int
    mean_case_duration_original: float
    mean_case_duration_anonymized: float
    out_of_order_cases: int = 0
    active_cases: Optional[ActiveCases] = None
    variant_frequencies: List[VariantFrequency] = field(default_factory=list)
    parameters: Dict = field(default_factory=dict)
    anomalies: List[str] = field(default_factory=list)


def smape(
    original: Mapping[str, Tuple[float, ...]],
    anonymized: Mapping[str, Tuple[float, ...]],
    pairing: Mapping[str, str],
) -> float:
    """
    Symmetric mean absolute percentage error between true and released relative times.

    Every released event is compared with the true time of the event at the
    same position of its source case; pairs where both times are 0 count as 0.

    Args:
        original: true relative times keyed by input case id
        anonymized: released relative times keyed by released case id
        pairing: released case id -> input case id

    Returns:
        SMAPE in percent, in [0, 100]
    """
    terms = []
    for case_id, released in anonymized.items():
        if case_id not in pairing:
            raise MetricError(f"Released case {case_id} has no source case")
        true = original[pairing[case_id]]
        if len(true) != len(released):
            raise MetricError(f"Released case {case_id} has {len(released)} events, its source has {len(true)}")
        for t, a in zip(true, released):
            denominator = abs(t) + abs(a)
            terms.append(0.0 if denominator == 0 else abs(t - a) / denominator)

    if not terms:
        raise MetricError("SMAPE is undefined for an empty pairing")
    return 100.0 * fmean(terms)


def oversampling_ratio(original: EventLog, anonymized: EventLog) -> float:
    if not len(original):
        raise MetricError("Oversampling ratio is undefined for an empty original log")
    return len(anonymized) / len(original)


def variant_set_equal(a: EventLog, b: EventLog) -> bool:
    return a.variants() == b.variants()


def variant_frequencies(original: EventLog, anonymized: EventLog) -> List[VariantFrequency]:
    """Cases per variant before and after, most frequent original variant first."""
    before, after = original.variant_counts(), anonymized.variant_counts()
    variants = sorted(set(before) | set(after), key=lambda v: (-before.get(v, 0), v))
    return [VariantFrequency(v, before.get(v, 0), after.get(v, 0)) for v in variants]


def out_of_order_cases(log: EventLog) -> int:
    """
    Cases whose released timestamps go backwards somewhere.

    Readers that order events by time see such a case with a different variant.
    """
    return sum(
        1 for trace in log.traces
        if any(later.timestamp < earlier.timestamp for earlier, later in zip(trace.events, trace.events[1:]))
    )


def _case_spans(log: EventLog) -> np.ndarray:
    return np.array(
        [(trace.start.timestamp(), max(e.timestamp for e in trace.events).timestamp()) for trace in log.traces],
        dtype=float,
    ).reshape(-1, 2)


def _open_per_bin(spans: np.ndarray, edges: np.ndarray) -> List[int]:
    # A case is open in a bin when its [start, end] interval overlaps it
    starts, ends = spans[:, 0][:, None], spans[:, 1][:, None]
    open_cases = (starts <= edges[1:][None, :]) & (ends >= edges[:-1][None, :])
    return [int(n) for n in open_cases.sum(axis=0)]


def active_cases_over_time(original: EventLog, anonymized: EventLog, bins: int = DEFAULT_ACTIVE_CASE_BINS) -> ActiveCases:
    """
    Open cases over time for both logs, binned over the span both logs cover.

    Args:
        original: the input log
        anonymized: its release
        bins: number of equal-width bins

    Returns:
        ActiveCases with one count per bin and log
    """
    if bins < 1:
        raise MetricError(f"Active cases need at least one bin, got {bins}")
    if not len(original) or not len(anonymized):
        raise MetricError("Active cases are undefined for an empty log")

    before, after = _case_spans(original), _case_spans(anonymized)
    lo = float(min(before[:, 0].min(), after[:, 0].min()))
    hi = float(max(before[:, 1].max(), after[:, 1].max()))
    if hi <= lo:
        bins = 1
    edges = np.linspace(lo, hi, bins + 1)
    return ActiveCases(
        bin_starts=[datetime.fromtimestamp(edge, tz=timezone.utc) for edge in edges[:-1]],
        bin_seconds=(hi - lo) / bins,
        original=_open_per_bin(before, edges),
        anonymized=_open_per_bin(after, edges),
    )


def case_durations(rel_times: Mapping[str, Tuple[float, ...]]) -> Dict[str, float]:
    """Duration of every case: its largest relative time."""
    return {case_id: max(values) for case_id, values in rel_times.items()}


def mean_case_duration(rel_times: Mapping[str, Tuple[float, ...]]) -> float:
    durations = case_durations(rel_times)
    return fmean(durations.values()) if durations else 0.0


def epsilon_summary(plan: EpsilonPlan) -> EpsilonSummary:
    values = plan.all_epsilons()
    finite = np.array([v for v in values if v != NO_NOISE], dtype=float)
    if not finite.size:
        return EpsilonSummary(events=len(values), no_noise_events=len(values), count_epsilon=plan.count_epsilon)
    return EpsilonSummary(
        events=len(values),
        no_noise_events=len(values) - finite.size,
        count_epsilon=plan.count_epsilon,
        min=float(finite.min()),
        median=float(np.median(finite)),
        max=float(finite.max()),
    )
