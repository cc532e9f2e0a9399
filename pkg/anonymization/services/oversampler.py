"""
Weighted case oversampling.

Every DAFSA transition gets a non-negative noise target drawn from the
absolute Laplace distribution. Whole cases are then replicated, so no case
variant is ever created or removed, until every transition has received at
least its target number of extra events.
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Set, Tuple

import numpy as np

from anonymization.services.random_streams import RandomStreams
from anonymization.services.risk import COUNT_SENSITIVITY, laplace_sample
from eventlogs.services.dafsa import Dafsa, Transition, TransitionVariantLookup
from eventlogs.services.log_io import Event, EventLog, Trace, assemble_log

logger = logging.getLogger(__name__)


@dataclass
class OversamplePlan:
    """Noise targets per transition and how much of them the replicas have covered."""
    needed_noise: Dict[Transition, int]
    added_noise: Dict[Transition, int] = field(default_factory=dict)

    def __post_init__(self):
        for transition in self.needed_noise:
            self.added_noise.setdefault(transition, 0)

    @property
    def total_needed(self) -> int:
        return sum(self.needed_noise.values())

    def is_satisfied(self) -> bool:
        return all(self.added_noise[t] >= needed for t, needed in self.needed_noise.items())


class Lineage(NamedTuple):
    source_case_id: str
    group_size: int
    replica: bool


@dataclass(frozen=True)
class ReplicationRecord:
    """Maps every released case id to the input case it was copied from."""
    lineage: Dict[str, Lineage]

    def __len__(self) -> int:
        return len(self.lineage)

    def source_of(self, case_id: str) -> str:
        return self.lineage[case_id].source_case_id

    @property
    def replica_count(self) -> int:
        return sum(1 for entry in self.lineage.values() if entry.replica)

    @classmethod
    def identity(cls, log: EventLog) -> 'ReplicationRecord':
        return cls(lineage={trace.case_id: Lineage(trace.case_id, 1, False) for trace in log.traces})


def draw_needed_noise(dafsa: Dafsa, count_eps: float, streams: RandomStreams) -> OversamplePlan:
    """
    Draw ceil(|z_t|) with z_t ~ Lap(1/epsilon) independently for every transition.

    Each transition reads its own substream, so the draw for a transition does
    not depend on how many other transitions the automaton has.
    """
    if math.isinf(count_eps):
        return OversamplePlan(needed_noise={t: 0 for t in dafsa.transitions})

    scale = COUNT_SENSITIVITY / count_eps
    needed = {
        transition: math.ceil(abs(laplace_sample(scale, streams.stream('count-noise', transition))))
        for transition in dafsa.transitions
    }
    plan = OversamplePlan(needed_noise=needed)
    logger.info(f"Drew count noise for {len(needed)} transitions, {plan.total_needed} extra events needed in total")
    return plan


def _weighted_index(weights: List[float], rng: np.random.Generator) -> int:
    probabilities = np.asarray(weights, dtype=float)
    return int(rng.choice(len(probabilities), p=probabilities / probabilities.sum()))


def _fresh_case_id(rng: np.random.Generator, taken: Set[str]) -> str:
    while True:
        case_id = rng.bytes(16).hex()
        if case_id not in taken:
            taken.add(case_id)
            return case_id


def _relabel(trace: Trace, case_id: str) -> Trace:
    return Trace(
        case_id=case_id,
        events=tuple(Event(case_id=case_id, activity=e.activity, timestamp=e.timestamp) for e in trace.events),
    )


def oversample(
    log: EventLog,
    lookup: TransitionVariantLookup,
    plan: OversamplePlan,
    rng: np.random.Generator,
) -> Tuple[EventLog, ReplicationRecord]:
    """
    Replicate whole cases until every transition's noise target is met.

    Each step picks a deficient transition (weighted by its event count), a
    variant through it (weighted by its number of cases) and a uniformly
    random case of that variant. The copy raises the added noise of every
    transition on the variant's path. Afterwards all cases get fresh ids and
    the trace order is shuffled.

    Args:
        log: the input log
        lookup: transition to variant lookup built from ``log``
        plan: noise targets; its ``added_noise`` is filled in
        rng: generator driving every choice of the loop

    Returns:
        (released log, record of where each released case came from)
    """
    for transition, needed in plan.needed_noise.items():
        lookup[transition].needed_noise = needed
        lookup[transition].added_noise = 0

    replicas: List[str] = []
    deficient = lookup.deficient()
    while deficient:
        entry = deficient[_weighted_index([e.count for e in deficient], rng)]

        variants = sorted(entry.variants)
        variant = variants[_weighted_index([entry.variants[v] for v in variants], rng)]

        cases = lookup.variant_cases[variant]
        replicas.append(cases[int(rng.integers(len(cases)))])

        for transition in lookup.variant_paths[variant]:
            lookup[transition].added_noise += 1
        deficient = lookup.deficient()

    for transition in plan.needed_noise:
        plan.added_noise[transition] = lookup[transition].added_noise

    copies = Counter(replicas)
    by_case = log.by_case()
    taken = set(by_case)
    traces, lineage = [], {}
    sources = [(trace.case_id, False) for trace in log.traces] + [(case_id, True) for case_id in replicas]
    for source_id, is_replica in sources:
        new_id = _fresh_case_id(rng, taken)
        traces.append(_relabel(by_case[source_id], new_id))
        lineage[new_id] = Lineage(source_id, copies[source_id] + 1, is_replica)

    order = rng.permutation(len(traces))
    released = assemble_log((traces[i] for i in order), log.source_meta)
    logger.info(f"Oversampled {len(replicas)} cases: {len(log)} -> {len(released)} cases")
    return released, ReplicationRecord(lineage=lineage)


def replication_groups(record: ReplicationRecord) -> Dict[str, int]:
    """Group size k (original plus its copies) per input case."""
    return {entry.source_case_id: entry.group_size for entry in record.lineage.values()}
