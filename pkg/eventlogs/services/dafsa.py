"""
Minimal deterministic acyclic automaton (DAFSA) over the case variants of a log.

Variants are inserted in lexicographic order and equivalent states are merged
as soon as they can no longer change (incremental construction of minimal
acyclic automata). Every state groups the prefixes sharing one set of
suffixes, so each transition stands for a group of prefixes/suffixes whose
frequency the anonymizer protects.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Set, Tuple

from eventlogs.exceptions import AnnotationError, DafsaError
from eventlogs.services.log_io import Event, EventLog

logger = logging.getLogger(__name__)

Variant = Tuple[str, ...]


class Transition(NamedTuple):
    source: int
    label: str
    target: int

    def __str__(self) -> str:
        return f"(s{self.source},{self.label},s{self.target})"


@dataclass(frozen=True)
class Dafsa:
    """
    Immutable automaton; state ids are dense integers in construction order
    and the initial state is 0.
    """
    states: FrozenSet[int]
    initial: int
    finals: FrozenSet[int]
    transitions: Tuple[Transition, ...]
    _delta: Dict[Tuple[int, str], Transition] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        delta = {}
        for transition in self.transitions:
            key = (transition.source, transition.label)
            if key in delta:
                raise DafsaError(f"Non-deterministic transitions from s{transition.source} on {transition.label!r}")
            delta[key] = transition
        object.__setattr__(self, '_delta', delta)

    def step(self, state: int, label: str) -> Optional[Transition]:
        return self._delta.get((state, label))

    def outgoing(self, state: int) -> List[Transition]:
        return [t for t in self.transitions if t.source == state]

    def path(self, word: Iterable[str]) -> Optional[Tuple[Transition, ...]]:
        """Accepting path of ``word``, or None if the word is not accepted."""
        state = self.initial
        path = []
        for label in word:
            transition = self._delta.get((state, label))
            if transition is None:
                return None
            path.append(transition)
            state = transition.target
        if state not in self.finals:
            return None
        return tuple(path)

    def words(self) -> Set[Variant]:
        """Enumerate the accepted language (finite, since the graph is acyclic)."""
        by_source: Dict[int, List[Transition]] = {}
        for transition in self.transitions:
            by_source.setdefault(transition.source, []).append(transition)

        accepted = set()
        stack = [(self.initial, ())]
        while stack:
            state, prefix = stack.pop()
            if state in self.finals and prefix:
                accepted.add(prefix)
            for transition in by_source.get(state, ()):
                stack.append((transition.target, prefix + (transition.label,)))
        return accepted


class _Node:
    __slots__ = ('id', 'final', 'edges')

    def __init__(self, node_id: int):
        self.id = node_id
        self.final = False
        self.edges: Dict[str, '_Node'] = {}

    def signature(self) -> Tuple:
        # Equal signatures mean equal right languages once children are minimized
        return (self.final, tuple(sorted((label, child.id) for label, child in self.edges.items())))


class _DafsaBuilder:
    """Sorted-insertion builder; ``insert`` must see words in strictly increasing order."""

    def __init__(self):
        self._next_id = 0
        self.root = self._new_node()
        self.previous: Variant = ()
        self.unchecked: List[Tuple[_Node, str, _Node]] = []
        self.minimized: Dict[Tuple, _Node] = {}

    def _new_node(self) -> _Node:
        node = _Node(self._next_id)
        self._next_id += 1
        return node

    def insert(self, word: Variant):
        if word <= self.previous:
            raise DafsaError(f"Variants must be inserted in sorted order: {word} after {self.previous}")

        common = 0
        for a, b in zip(word, self.previous):
            if a != b:
                break
            common += 1

        self._minimize(common)

        node = self.unchecked[-1][2] if self.unchecked else self.root
        for label in word[common:]:
            child = self._new_node()
            node.edges[label] = child
            self.unchecked.append((node, label, child))
            node = child

        node.final = True
        self.previous = word

    def _minimize(self, down_to: int):
        for i in range(len(self.unchecked) - 1, down_to - 1, -1):
            parent, label, child = self.unchecked[i]
            signature = child.signature()
            if signature in self.minimized:
                parent.edges[label] = self.minimized[signature]
            else:
                self.minimized[signature] = child
            self.unchecked.pop()

    def finish(self) -> Dafsa:
        self._minimize(0)

        reachable: Dict[int, _Node] = {}
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.id in reachable:
                continue
            reachable[node.id] = node
            stack.extend(node.edges.values())

        dense = {old_id: new_id for new_id, old_id in enumerate(sorted(reachable))}
        transitions = sorted(
            Transition(dense[node.id], label, dense[child.id])
            for node in reachable.values()
            for label, child in node.edges.items()
        )
        return Dafsa(
            states=frozenset(dense.values()),
            initial=dense[self.root.id],
            finals=frozenset(dense[node.id] for node in reachable.values() if node.final),
            transitions=tuple(transitions),
        )


def build_dafsa(variants: Iterable[Iterable[str]]) -> Dafsa:
    """
    Build the minimal DAFSA accepting exactly ``variants``.

    Args:
        variants: activity-label sequences; duplicates are inserted once

    Returns:
        Dafsa whose language equals the distinct variants

    Raises:
        DafsaError: if there are no variants or one of them is empty
    """
    words = sorted({tuple(variant) for variant in variants})
    if not words:
        raise DafsaError("Cannot build a DAFSA from an empty variant set")
    if words[0] == ():
        raise DafsaError("Case variants must contain at least one activity")

    builder = _DafsaBuilder()
    for word in words:
        builder.insert(word)
    dafsa = builder.finish()
    logger.info(
        f"Built DAFSA with {len(dafsa.states)} states and {len(dafsa.transitions)} transitions "
        f"from {len(words)} variants"
    )
    return dafsa


class AnnotatedEvent(NamedTuple):
    event: Event
    transition: Transition

    @property
    def source_state(self) -> int:
        return self.transition.source

    @property
    def target_state(self) -> int:
        return self.transition.target


@dataclass(frozen=True)
class StateAnnotatedLog:
    """An event log whose k-th event of every trace carries the k-th transition of its variant's path."""
    log: EventLog
    paths: Dict[str, Tuple[Transition, ...]]

    def transition_of(self, case_id: str, position: int) -> Transition:
        return self.paths[case_id][position]

    def events(self) -> Iterator[AnnotatedEvent]:
        for trace in self.log.traces:
            for event, transition in zip(trace.events, self.paths[trace.case_id]):
                yield AnnotatedEvent(event, transition)


def annotate(log: EventLog, dafsa: Dafsa) -> StateAnnotatedLog:
    """
    Tag every event with the DAFSA transition it traverses.

    Raises:
        AnnotationError: if a trace's variant is not accepted by ``dafsa``
    """
    variant_paths: Dict[Variant, Tuple[Transition, ...]] = {}
    paths = {}
    for trace in log.traces:
        variant = trace.variant
        if variant not in variant_paths:
            path = dafsa.path(variant)
            if path is None:
                raise AnnotationError(
                    f"Case {trace.case_id} follows variant {list(variant)} which the DAFSA does not accept; "
                    f"was the automaton built from a different log?"
                )
            variant_paths[variant] = path
        paths[trace.case_id] = variant_paths[variant]
    return StateAnnotatedLog(log=log, paths=paths)


@dataclass(frozen=True)
class ContingencyTable:
    """Histogram of events per DAFSA transition."""
    counts: Dict[Transition, int]

    def __getitem__(self, transition: Transition) -> int:
        return self.counts[transition]

    def __len__(self) -> int:
        return len(self.counts)

    def items(self):
        return self.counts.items()

    def total(self) -> int:
        return sum(self.counts.values())


def contingency(annotated: StateAnnotatedLog) -> ContingencyTable:
    counts = Counter()
    for path in annotated.paths.values():
        counts.update(path)
    return ContingencyTable(counts=dict(sorted(counts.items())))


@dataclass
class LookupEntry:
    """Variants through one transition plus the oversampling counters for it."""
    transition: Transition
    count: int
    variants: Dict[Variant, int]
    needed_noise: int = 0
    added_noise: int = 0

    @property
    def deficit(self) -> int:
        return max(self.needed_noise - self.added_noise, 0)


@dataclass
class TransitionVariantLookup:
    entries: Dict[Transition, LookupEntry]
    variant_paths: Dict[Variant, Tuple[Transition, ...]]
    variant_cases: Dict[Variant, Tuple[str, ...]]

    def __getitem__(self, transition: Transition) -> LookupEntry:
        return self.entries[transition]

    def deficient(self) -> List[LookupEntry]:
        return [entry for entry in self.entries.values() if entry.added_noise < entry.needed_noise]


def build_lookup(annotated: StateAnnotatedLog, dafsa: Dafsa) -> TransitionVariantLookup:
    """
    Map every DAFSA transition to the variants (with instance counts) whose path uses it.

    All noise counters start at zero.
    """
    variant_cases: Dict[Variant, List[str]] = {}
    variant_paths: Dict[Variant, Tuple[Transition, ...]] = {}
    for trace in annotated.log.traces:
        variant_cases.setdefault(trace.variant, []).append(trace.case_id)
        variant_paths.setdefault(trace.variant, annotated.paths[trace.case_id])

    table = contingency(annotated)
    entries = {
        transition: LookupEntry(transition=transition, count=table.counts.get(transition, 0), variants={})
        for transition in dafsa.transitions
    }
    for variant, path in variant_paths.items():
        instances = len(variant_cases[variant])
        for transition in path:
            entries[transition].variants[variant] = instances

    return TransitionVariantLookup(
        entries=entries,
        variant_paths=variant_paths,
        variant_cases={variant: tuple(cases) for variant, cases in variant_cases.items()},
    )


def to_dot(dafsa: Dafsa) -> str:
    """Graphviz rendering; final states are drawn with a double circle."""
    lines = ['digraph dafsa {', '  rankdir=LR;', '  node [shape=circle];']
    for state in sorted(dafsa.finals):
        lines.append(f'  s{state} [shape=doublecircle];')
    for transition in dafsa.transitions:
        label = transition.label.replace('\\', '\\\\').replace('"', '\\"')
        lines.append(f'  s{transition.source} -> s{transition.target} [label="{label}"];')
    lines.append('}')
    return '\n'.join(lines) + '\n'
