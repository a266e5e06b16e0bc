"""
Simulation Module

Monte Carlo coverage harnesses for every certified bound.
"""

from .coverage import (
    COVERAGE_COLUMNS,
    COVERAGE_METHODS,
    THRESHOLD_TRAIN,
    CoverageReport,
    ThresholdTrial,
    coverage_kl,
    coverage_split_kl,
    coverage_sampling,
    coverage_recursive,
)

__all__ = [
    'COVERAGE_COLUMNS',
    'COVERAGE_METHODS',
    'THRESHOLD_TRAIN',
    'CoverageReport',
    'ThresholdTrial',
    'coverage_kl',
    'coverage_split_kl',
    'coverage_sampling',
    'coverage_recursive',
]
