"""
Ingestion Module

Datasets, IDX loading, synthetic threshold data and experiment configuration.
"""

from .datasets import Dataset, DatasetError, DatasetView, stratified_subsample
from .synthetic import ThresholdDistribution, gen_threshold_data, true_risk_threshold
from .parsers.idx import load_idx, read_idx_images, read_idx_labels, write_idx
from .validators import ConfigError, ExperimentConfig, ValidationResult, load_experiment, parse_experiment

__all__ = [
    'Dataset',
    'DatasetError',
    'DatasetView',
    'stratified_subsample',
    'ThresholdDistribution',
    'gen_threshold_data',
    'true_risk_threshold',
    'load_idx',
    'read_idx_images',
    'read_idx_labels',
    'write_idx',
    'ConfigError',
    'ExperimentConfig',
    'ValidationResult',
    'load_experiment',
    'parse_experiment',
]
