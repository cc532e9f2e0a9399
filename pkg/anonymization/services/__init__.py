"""
Services for privacy calibration, case oversampling, time noise and reporting.
"""
from .random_streams import RandomStreams
from .risk import (
    NO_NOISE, PrivacyConfig, EpsilonPlan, ResidualRisk,
    worst_case_prior, empirical_prior, epsilon_from_advantage, count_epsilon, time_epsilons,
    laplace_sample, residual_risk,
)
from .oversampler import OversamplePlan, ReplicationRecord, draw_needed_noise, oversample, replication_groups
from .time_noise import NoisedLog, adjust_epsilons, inject_time_noise
from .metrics import UtilityReport, smape, oversampling_ratio, variant_set_equal, variant_frequencies
from .pipeline import RunConfig, RunArtifacts, anonymize, run

__all__ = [
    'RandomStreams',
    'NO_NOISE', 'PrivacyConfig', 'EpsilonPlan', 'ResidualRisk',
    'worst_case_prior', 'empirical_prior', 'epsilon_from_advantage', 'count_epsilon', 'time_epsilons',
    'laplace_sample', 'residual_risk',
    'OversamplePlan', 'ReplicationRecord', 'draw_needed_noise', 'oversample', 'replication_groups',
    'NoisedLog', 'adjust_epsilons', 'inject_time_noise',
    'UtilityReport', 'smape', 'oversampling_ratio', 'variant_set_equal', 'variant_frequencies',
    'RunConfig', 'RunArtifacts', 'anonymize', 'run',
]
