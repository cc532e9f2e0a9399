"""
Laplace noise on relative event times.

Times are perturbed on the normalized scale, mapped back with the log's
range and re-anchored at the (unchanged) start of each case. Events keep
their position in the trace, so noise never changes a case variant.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Dict, List, Optional, Tuple

from anonymization.exceptions import RiskComputationError
from anonymization.services.oversampler import ReplicationRecord
from anonymization.services.random_streams import RandomStreams
from anonymization.services.risk import NO_NOISE, TIME_SENSITIVITY, EpsilonPlan, laplace_sample
from eventlogs.services.log_io import TIME_UNITS, Event, EventLog, RelativeTimeView, Trace, assemble_log, normalize_timestamp

logger = logging.getLogger(__name__)

LATEST_TIMESTAMP = datetime.max.replace(microsecond=0, tzinfo=timezone.utc)


@dataclass(frozen=True)
class NoisedLog:
    """
    The released log plus, per released case and event position, the epsilon
    applied, the noise drawn (in the log's time unit) and the resulting
    relative time.
    """
    log: EventLog
    applied_epsilons: Dict[str, Tuple[float, ...]]
    noise: Dict[str, Tuple[float, ...]]
    rel_times: Dict[str, Tuple[float, ...]]
    unit: str


def adjust_epsilons(plan: EpsilonPlan, groups: Dict[str, int]) -> EpsilonPlan:
    """
    Divide every time epsilon of a replicated case by its group size k.

    Args:
        plan: epsilons keyed by input case id
        groups: group size per input case; cases not listed keep k = 1

    Returns:
        New plan; NO_NOISE entries stay NO_NOISE
    """
    unknown = set(groups) - set(plan.time_epsilons)
    if unknown:
        raise RiskComputationError(f"Replication groups name cases missing from the epsilon plan: {sorted(unknown)[:10]}")

    adjusted = {}
    for case_id, values in plan.time_epsilons.items():
        k = groups.get(case_id, 1)
        if k < 1:
            raise RiskComputationError(f"Group size of case {case_id} must be at least 1, got {k}")
        adjusted[case_id] = tuple(value if value == NO_NOISE else value / k for value in values)
    return EpsilonPlan(count_epsilon=plan.count_epsilon, time_epsilons=adjusted, priors=plan.priors, r=plan.r)


def _shift(start: datetime, rel_time: float, seconds_per_unit: float) -> Tuple[datetime, bool]:
    try:
        return normalize_timestamp(start + timedelta(seconds=rel_time * seconds_per_unit)), False
    except OverflowError:
        return LATEST_TIMESTAMP, True


def inject_time_noise(
    log: EventLog,
    times: RelativeTimeView,
    plan: EpsilonPlan,
    streams: RandomStreams,
    record: Optional[ReplicationRecord] = None,
    monotonic: bool = False,
    threads: int = 1,
) -> NoisedLog:
    """
    Perturb every non-initial event's relative time with Lap(1/epsilon) on the normalized scale.

    The noised value is scaled back by ``times.r_max``, floored at 0 and added
    to the case start. The first event of each case stays at its start, and
    NO_NOISE events keep their exact timestamps.

    Args:
        log: released log (possibly with replicas)
        times: relative times of the input log
        plan: epsilons keyed by input case id
        streams: substream factory; event (i, k) of the released log uses its own stream
        record: maps released case ids to input cases (identity when omitted)
        monotonic: raise each event's time to at least its predecessor's
        threads: worker threads for the per-trace noise

    Returns:
        NoisedLog with rebuilt timestamps
    """
    record = record or ReplicationRecord.identity(log)
    seconds_per_unit = TIME_UNITS[times.unit]

    def noise_trace(index: int):
        trace = log.traces[index]
        source = record.source_of(trace.case_id)
        normalized = times.normalized[source]
        true_rel = times.rel_times[source]

        events: List[Event] = [trace.events[0]]
        # The first event is pinned to the case start
        applied, noise, rel = [NO_NOISE], [0.0], [0.0]
        clipped = 0
        for position in range(1, len(trace.events)):
            event = trace.events[position]
            epsilon = plan.epsilon(source, position)
            if epsilon == NO_NOISE:
                drawn = 0.0
                rel_time = true_rel[position]
            else:
                rng = streams.stream('time-noise', index, position)
                drawn = laplace_sample(TIME_SENSITIVITY / epsilon, rng)
                rel_time = max((normalized[position] + drawn) * times.r_max, 0.0)
            if monotonic:
                rel_time = max(rel_time, rel[-1])

            if epsilon == NO_NOISE and rel_time == true_rel[position]:
                timestamp = event.timestamp
            else:
                timestamp, overflowed = _shift(trace.start, rel_time, seconds_per_unit)
                clipped += overflowed

            events.append(Event(case_id=trace.case_id, activity=event.activity, timestamp=timestamp))
            applied.append(epsilon)
            noise.append(drawn * times.r_max)
            rel.append(rel_time)

        return Trace(case_id=trace.case_id, events=tuple(events)), tuple(applied), tuple(noise), tuple(rel), clipped

    indices = range(len(log.traces))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(noise_trace, indices))
    else:
        results = [noise_trace(index) for index in indices]

    clipped = sum(result[4] for result in results)
    if clipped:
        logger.warning(f"{clipped} noised timestamps exceeded the representable range and were set to {LATEST_TIMESTAMP}")

    traces = [result[0] for result in results]
    noised = NoisedLog(
        log=assemble_log(traces, log.source_meta),
        applied_epsilons={t.case_id: result[1] for t, result in zip(traces, results)},
        noise={t.case_id: result[2] for t, result in zip(traces, results)},
        rel_times={t.case_id: result[3] for t, result in zip(traces, results)},
        unit=times.unit,
    )
    logger.info(f"Injected time noise into {noised.log.event_count} events of {len(noised.log)} cases")
    return noised
