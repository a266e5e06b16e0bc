"""
Baselines Module

Non-recursive certificates: uninformed, informed and informed-excess priors.
"""

from .methods import (
    BASELINES,
    REPORT_COLUMNS,
    TERNARY_SUPPORT,
    BaselineReport,
    run_uninformed,
    run_informed,
    run_informed_excess,
)
from .checkpoint import save_report, verify_report

__all__ = [
    'BASELINES',
    'REPORT_COLUMNS',
    'TERNARY_SUPPORT',
    'BaselineReport',
    'run_uninformed',
    'run_informed',
    'run_informed_excess',
    'save_report',
    'verify_report',
]
