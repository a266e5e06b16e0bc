"""
RPB Bounds Module

kl inversion, split-kl and PAC-Bayes bounds.
"""

from .concentration import (
    BoundInputError,
    SupportError,
    DiscreteSupport,
    BinaryDecomposition,
    bern_kl,
    kl_inv_upper,
    kl_inv_lower,
    binarify,
    reconstruct,
    indicator_matrix,
    split_kl_upper,
    kl_bound_upper,
    kl_bound_lower,
)
from .pacbayes import (
    ConfidenceBudget,
    BoundInputs,
    log_term,
    pb_kl_upper,
    pb_split_kl_upper,
    mcallester_relaxed,
    sampling_upper,
)

__all__ = [
    'BoundInputError',
    'SupportError',
    'DiscreteSupport',
    'BinaryDecomposition',
    'bern_kl',
    'kl_inv_upper',
    'kl_inv_lower',
    'binarify',
    'reconstruct',
    'indicator_matrix',
    'split_kl_upper',
    'kl_bound_upper',
    'kl_bound_lower',
    'ConfidenceBudget',
    'BoundInputs',
    'log_term',
    'pb_kl_upper',
    'pb_split_kl_upper',
    'mcallester_relaxed',
    'sampling_upper',
]
