"""Tests for comparison tables and CSV output."""

import pandas as pd
import pytest

from src.reporting import compare_frame, write_csv


def test_compare_keeps_order_and_aggregates():
    rows = [
        {'method': 'rpb', 'train01': 0.1, 'test01': 0.12, 'bound': 0.2},
        {'method': 'informed', 'train01': 0.1, 'test01': 0.11, 'bound': 0.3},
        {'method': 'rpb', 'train01': 0.2, 'test01': 0.14, 'bound': 0.4},
    ]
    df = compare_frame(rows)
    assert df['method'].tolist() == ['rpb', 'rpb', 'rpb mean', 'rpb std', 'informed']
    assert df.loc[2, 'bound'] == pytest.approx(0.3)
    assert df.loc[3, 'bound'] == pytest.approx(pd.Series([0.2, 0.4]).std())


def test_compare_empty():
    assert compare_frame([]).empty


def test_missing_test_error_is_blank(tmp_path):
    df = compare_frame([{'method': 'uninformed', 'train01': 0.25, 'test01': None, 'bound': 1 / 3}])
    path = write_csv(df, tmp_path / "nested" / "table.csv")
    assert path.read_text() == "method,train01,test01,bound\nuninformed,0.25,,0.3333333333\n"
