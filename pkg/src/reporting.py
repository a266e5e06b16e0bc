"""
Result Reporting

Tabular views of traces, baseline reports, coverage reports and method comparisons,
and the CSV/JSON writers of the CLI. CSV files use a fixed column order, dot decimal
and a fixed float format so identical inputs give byte-identical files.

Examples:
    >>> df = trace_frame(result.trace)
    >>> write_csv(df, Path("results/run/trace.csv"))
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List

import pandas as pd

from src.baselines.methods import REPORT_COLUMNS, BaselineReport
from src.recursion.evaluator import TRACE_COLUMNS, BoundTrace
from src.simulation.coverage import COVERAGE_COLUMNS, CoverageReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


def trace_frame(trace: BoundTrace) -> pd.DataFrame:
    """One row per recursion step."""
    return pd.DataFrame(trace.rows(), columns=TRACE_COLUMNS)


def baseline_frame(reports: Iterable[BaselineReport]) -> pd.DataFrame:
    return pd.DataFrame([report.row() for report in reports], columns=REPORT_COLUMNS)


def coverage_frame(reports: Iterable[CoverageReport]) -> pd.DataFrame:
    """One summary row per harness."""
    return pd.DataFrame([report.summary() for report in reports], columns=COVERAGE_COLUMNS)


def compare_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    """
    Comparison table over methods.

    Rows keep their input order. A method that appears more than once (repeated seeds)
    is followed by two aggregate rows, "<method> mean" and "<method> std", holding the
    mean and sample standard deviation of every numeric column.

    Args:
        rows: Dicts with the keys method, train01, test01, bound

    Returns:
        DataFrame with columns (method, train01, test01, bound)
    """
    df = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    if df.empty:
        return df

    numeric = REPORT_COLUMNS[1:]
    df[numeric] = df[numeric].astype(float)
    blocks = []
    for method in df['method'].drop_duplicates():
        group = df[df['method'] == method]
        blocks.append(group)
        if len(group) > 1:
            mean = group[numeric].mean()
            std = group[numeric].std()
            blocks.append(pd.DataFrame([
                {'method': f"{method} mean", **mean.to_dict()},
                {'method': f"{method} std", **std.to_dict()},
            ], columns=REPORT_COLUMNS))
    return pd.concat(blocks, ignore_index=True)


def write_csv(df: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(df)} rows to {path}")
    return path


def write_json(payload: Dict[str, Any], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, default=str)
    logger.debug(f"Wrote {path}")
    return path
