"""
Privacy calibration: turn a guessing-advantage bound into epsilon values.

The attacker's prior chance of guessing a value (within the precision window)
is estimated either in the worst case or from the empirical distribution of
the values that share a DAFSA transition. epsilon is then the largest value
for which publishing with Laplace noise raises that chance by at most delta.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from anonymization.exceptions import PrivacyConfigError, RiskComputationError
from eventlogs.services.dafsa import StateAnnotatedLog, Transition
from eventlogs.services.log_io import DEFAULT_TIME_UNIT, TIME_UNITS, RelativeTimeView

logger = logging.getLogger(__name__)

# Marks events whose advantage bound holds without noise (prior + delta >= 1)
NO_NOISE = math.inf

PRIOR_FLOOR = 1e-6
PRIOR_CEILING = 1.0 - 1e-6
# Absorbs float error when a window edge lands on a group value
CDF_TOLERANCE = 1e-12
DEFAULT_EPSILON_CAP = 50.0

# Adding or removing one case prefix/suffix changes one transition count by 1
COUNT_SENSITIVITY = 1.0
# Relative times are normalized to [0, 1]
TIME_SENSITIVITY = 1.0


def _check_open_unit(value: float, name: str):
    if not 0.0 < value < 1.0:
        raise PrivacyConfigError(f"{name} must be strictly between 0 and 1, got {value}", field=name)


@dataclass(frozen=True)
class PrivacyConfig:
    delta: float
    precision: float = 0.1
    time_unit: str = DEFAULT_TIME_UNIT
    seed: int = 0
    epsilon_cap: float = DEFAULT_EPSILON_CAP

    def __post_init__(self):
        _check_open_unit(self.delta, 'delta')
        if not 0.0 < self.precision <= 1.0:
            raise PrivacyConfigError(f"precision must be in (0, 1], got {self.precision}", field='precision')
        if self.time_unit not in TIME_UNITS:
            raise PrivacyConfigError(
                f"time_unit must be one of {sorted(TIME_UNITS)}, got {self.time_unit!r}", field='time_unit'
            )
        if not self.epsilon_cap > 0 or math.isinf(self.epsilon_cap):
            raise PrivacyConfigError(f"epsilon_cap must be a positive number, got {self.epsilon_cap}", field='epsilon_cap')


@dataclass(frozen=True)
class EpsilonPlan:
    """
    Epsilon of the transition counts plus one time epsilon per event.

    ``time_epsilons`` and ``priors`` are keyed by case id with one value per
    event position; NO_NOISE entries are published without time noise.
    """
    count_epsilon: float
    time_epsilons: Dict[str, Tuple[float, ...]]
    priors: Dict[str, Tuple[float, ...]] = field(default_factory=dict)
    r: float = 1.0

    def epsilon(self, case_id: str, position: int) -> float:
        return self.time_epsilons[case_id][position]

    def all_epsilons(self) -> List[float]:
        return [value for values in self.time_epsilons.values() for value in values]

    def no_noise_count(self) -> int:
        return sum(1 for value in self.all_epsilons() if value == NO_NOISE)


class TransitionRisk(NamedTuple):
    transition: str
    extra_probability: float


@dataclass(frozen=True)
class ResidualRisk:
    """Chance that an absolute Laplace draw falls inside [0, sensitivity), per transition."""
    count_epsilon: float
    extra_probability: float
    per_transition: Dict[Transition, float] = field(default_factory=dict)

    @property
    def entries(self) -> List[TransitionRisk]:
        return [TransitionRisk(str(t), p) for t, p in self.per_transition.items()]


def worst_case_prior(delta: float) -> float:
    """
    Prior of an attacker who knows nothing about the data beyond the bound.

    Args:
        delta: guessing-advantage bound in (0, 1)

    Returns:
        (1 - delta) / 2
    """
    _check_open_unit(delta, 'delta')
    return (1.0 - delta) / 2.0


def _sorted_group(group_values: Sequence[float], precision: float) -> np.ndarray:
    values = np.asarray(group_values, dtype=float)
    if values.size == 0:
        raise RiskComputationError("Cannot estimate a prior from an empty group")
    if values.min() < 0.0 or values.max() > 1.0:
        raise RiskComputationError("Group values must be normalized to [0, 1]")
    if not 0.0 < precision <= 1.0:
        raise PrivacyConfigError(f"precision must be in (0, 1], got {precision}", field='precision')
    return np.sort(values)


def _window_mass(ordered: np.ndarray, points, precision: float) -> np.ndarray:
    # Right-continuous step CDF: CDF(x) = #{v <= x} / n
    points = np.asarray(points, dtype=float)
    upper = np.searchsorted(ordered, points + precision + CDF_TOLERANCE, side='right')
    lower = np.searchsorted(ordered, points - precision + CDF_TOLERANCE, side='right')
    return np.clip((upper - lower) / ordered.size, PRIOR_FLOOR, PRIOR_CEILING)


def empirical_priors(group_values: Sequence[float], precision: float) -> np.ndarray:
    """
    Vectorized ``empirical_prior`` for every member of a group at once.

    Returns:
        array of clamped priors aligned with ``group_values``
    """
    ordered = _sorted_group(group_values, precision)
    return _window_mass(ordered, group_values, precision)


def empirical_prior(group_values: Sequence[float], t_k: float, precision: float) -> float:
    """
    Probability mass of the group within the guess window around ``t_k``.

    Computed as CDF(t_k + p) - CDF(t_k - p) over the group's empirical CDF,
    clamped to [1e-6, 1 - 1e-6].

    Args:
        group_values: normalized relative times sharing one transition
        t_k: the value being protected
        precision: window half-width on the normalized scale

    Returns:
        The prior
    """
    ordered = _sorted_group(group_values, precision)
    return float(_window_mass(ordered, t_k, precision))


def epsilon_from_advantage(
    prior: float,
    delta: float,
    r: float = 1.0,
    epsilon_cap: float = DEFAULT_EPSILON_CAP,
) -> float:
    """
    Largest epsilon keeping the guessing advantage over ``prior`` at most ``delta``.

    Args:
        prior: attacker's success probability before publication, in (0, 1)
        delta: allowed increase of that probability, in (0, 1)
        r: range of the protected values
        epsilon_cap: upper bound on the returned epsilon

    Returns:
        epsilon in (0, epsilon_cap], or NO_NOISE when prior + delta >= 1
    """
    _check_open_unit(prior, 'prior')
    _check_open_unit(delta, 'delta')
    if not r > 0:
        raise PrivacyConfigError(f"r must be positive, got {r}", field='r')
    if not epsilon_cap > 0:
        raise PrivacyConfigError(f"epsilon_cap must be positive, got {epsilon_cap}", field='epsilon_cap')

    if prior + delta >= 1.0:
        return NO_NOISE

    ratio = (prior / (1.0 - prior)) * (1.0 / (delta + prior) - 1.0)
    return min(-math.log(ratio) / r, epsilon_cap)


def count_epsilon(config: PrivacyConfig) -> float:
    """Epsilon shared by all transition counts, calibrated against the worst-case prior."""
    return epsilon_from_advantage(worst_case_prior(config.delta), config.delta, 1.0, config.epsilon_cap)


def time_epsilons(annotated: StateAnnotatedLog, times: RelativeTimeView, config: PrivacyConfig) -> EpsilonPlan:
    """
    Per-event time epsilons, grouping events by the DAFSA transition they traverse.

    Each event's prior is the empirical mass of its transition group inside
    the precision window around its own normalized relative time.

    Args:
        annotated: log annotated with DAFSA transitions
        times: relative-time view of the same log
        config: privacy parameters

    Returns:
        EpsilonPlan keyed by case id, also carrying the count epsilon
    """
    groups: Dict[Transition, List[Tuple[str, int]]] = {}
    for case_id, path in annotated.paths.items():
        if len(path) != len(times.normalized[case_id]):
            raise RiskComputationError(f"Annotation and relative times disagree on the length of case {case_id}")
        for position, transition in enumerate(path):
            groups.setdefault(transition, []).append((case_id, position))

    epsilons: Dict[str, List[float]] = {case_id: [0.0] * len(path) for case_id, path in annotated.paths.items()}
    priors: Dict[str, List[float]] = {case_id: [0.0] * len(path) for case_id, path in annotated.paths.items()}
    memo: Dict[float, float] = {}

    for transition, members in groups.items():
        values = [times.normalized_time(case_id, position) for case_id, position in members]
        for (case_id, position), prior in zip(members, empirical_priors(values, config.precision)):
            prior = float(prior)
            if prior not in memo:
                memo[prior] = epsilon_from_advantage(prior, config.delta, 1.0, config.epsilon_cap)
            priors[case_id][position] = prior
            epsilons[case_id][position] = memo[prior]

    plan = EpsilonPlan(
        count_epsilon=count_epsilon(config),
        time_epsilons={case_id: tuple(values) for case_id, values in epsilons.items()},
        priors={case_id: tuple(values) for case_id, values in priors.items()},
        r=1.0,
    )
    logger.info(
        f"Calibrated {len(plan.all_epsilons())} time epsilons over {len(groups)} transition groups "
        f"({plan.no_noise_count()} without noise), count epsilon {plan.count_epsilon:.6f}"
    )
    return plan


def laplace_from_uniform(u, scale: float):
    """Inverse Laplace CDF (location 0); works on scalars and numpy arrays."""
    centered = np.asarray(u, dtype=float) - 0.5
    return -scale * np.sign(centered) * np.log1p(-2.0 * np.abs(centered))


def laplace_sample(scale: float, rng: np.random.Generator) -> float:
    """
    One Laplace(0, scale) draw by inverse transform sampling.

    Args:
        scale: noise scale (sensitivity / epsilon), positive
        rng: seeded generator the uniform is drawn from

    Returns:
        The sample
    """
    if not scale > 0:
        raise PrivacyConfigError(f"Laplace scale must be positive, got {scale}", field='scale')
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return float(laplace_from_uniform(u, scale))


def laplace_samples(scale: float, size: int, rng: np.random.Generator) -> np.ndarray:
    if not scale > 0:
        raise PrivacyConfigError(f"Laplace scale must be positive, got {scale}", field='scale')
    u = rng.random(size)
    zero = u == 0.0
    while zero.any():
        u[zero] = rng.random(int(zero.sum()))
        zero = u == 0.0
    return laplace_from_uniform(u, scale)


def residual_risk(count_eps: float, transitions: Optional[Sequence[Transition]] = None) -> ResidualRisk:
    """
    Extra disclosure probability caused by publishing only the absolute count noise.

    Reported per transition; epsilon itself is not adjusted.
    """
    if math.isinf(count_eps) or not count_eps > 0:
        raise RiskComputationError(f"Residual risk needs a finite positive epsilon, got {count_eps}")
    extra = -math.expm1(-count_eps / COUNT_SENSITIVITY)
    return ResidualRisk(
        count_epsilon=count_eps,
        extra_probability=extra,
        per_transition={transition: extra for transition in (transitions or ())},
    )
