"""
RPB Recursion Module

Split schedules, excess losses, the recursive bound evaluator and pipeline.
"""

from .schedule import ScheduleError, SplitSchedule, geometric_split
from .excess import (
    ExcessSupport,
    ExcessEstimate,
    TripletSet,
    excess_value,
    excess_indicators,
    excess_indicator_means,
    build_triplets,
    estimate_excess_means,
)
from .evaluator import (
    TRACE_COLUMNS,
    StepRecord,
    BoundTrace,
    step_bound_first,
    step_bound_next,
    evaluate_recursive,
    select_gamma,
)
from .pipeline import RecursivePipeline, RecursiveResult
from .checkpoint import save_checkpoint, load_checkpoint, save_run, load_run, verify_run

__all__ = [
    'ScheduleError',
    'SplitSchedule',
    'geometric_split',
    'ExcessSupport',
    'ExcessEstimate',
    'TripletSet',
    'excess_value',
    'excess_indicators',
    'excess_indicator_means',
    'build_triplets',
    'estimate_excess_means',
    'TRACE_COLUMNS',
    'StepRecord',
    'BoundTrace',
    'step_bound_first',
    'step_bound_next',
    'evaluate_recursive',
    'select_gamma',
    'RecursivePipeline',
    'RecursiveResult',
    'save_checkpoint',
    'load_checkpoint',
    'save_run',
    'load_run',
    'verify_run',
]
