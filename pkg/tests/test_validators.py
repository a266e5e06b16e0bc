"""Tests for experiment configuration parsing and cross-field checks."""

import json
from pathlib import Path

import pytest

from src.ingestion.validators import (
    ConfigError,
    ExperimentConfig,
    ValidationResult,
    load_experiment,
    parse_experiment,
    validate_experiment,
)


def test_defaults_are_valid():
    config, result = parse_experiment({})
    assert result.is_valid, str(result)
    assert config.method == 'rpb'
    assert config.delta == 0.025
    assert config.delta_prime == 0.01


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        parse_experiment({'learning_rte': 0.1})


@pytest.mark.parametrize("payload", [
    {'delta': 0.0},
    {'T': 0},
    {'gamma': 1.0},
    {'method': 'oracle'},
    {'eta': 0.5},
])
def test_schema_violations(payload):
    with pytest.raises(ConfigError):
        parse_experiment(payload)


@pytest.mark.parametrize("payload, fragment", [
    ({'T': 12, 'n': 100}, "too small"),
    ({'delta': 0.6, 'delta_prime': 0.5}, "delta + delta_prime"),
    ({'gamma_grid': [0.5, 1.2]}, "outside (0, 1)"),
    ({'dataset': 'idx', 'model': 'network'}, "train_images"),
    ({'dataset': 'idx', 'model': 'finite', 'train_images': 'a', 'train_labels': 'b'}, "synthetic"),
    ({'model': 'network', 'mode': 'exact'}, "mode='exact'"),
    ({'method': 'informed', 'n': 1}, "at least two"),
])
def test_cross_field_errors(payload, fragment):
    _, result = parse_experiment(payload)
    assert not result.is_valid
    assert any(fragment in error for error in result.errors), result.errors


def test_estimation_mode_follows_model():
    assert ExperimentConfig(model='finite').estimation_mode == 'exact'
    assert ExperimentConfig(model='network').estimation_mode == 'sampled'
    assert ExperimentConfig(model='finite', mode='sampled').estimation_mode == 'sampled'


def test_gamma_grid_sorted():
    assert ExperimentConfig(gamma_grid=[0.7, 0.3, 0.5]).grid == [0.3, 0.5, 0.7]
    assert ExperimentConfig(gamma=0.4).grid == [0.4]


def test_warnings():
    _, result = parse_experiment({'epochs': 0, 'method': 'uninformed', 'gamma_grid': [0.5]})
    assert result.is_valid
    assert len(result.warnings) == 2


def test_validation_result_str():
    result = validate_experiment(ExperimentConfig(T=12, n=100))
    text = str(result)
    assert text.startswith("Validation: INVALID")
    assert "Errors: 1" in text
    assert str(ValidationResult(is_valid=True)) == "Validation: VALID"


class TestLoadExperiment:

    def test_round_trip(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({'n': 256, 'T': 3, 'seed': 4}))
        config, result = load_experiment(path)
        assert result.is_valid
        assert (config.n, config.T, config.seed) == (256, 3, 4)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_experiment(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_experiment(tmp_path / "absent.json")

    def test_not_an_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            load_experiment(path)


EXPERIMENTS = sorted((Path(__file__).resolve().parent.parent / "experiments").glob("*.json"))


@pytest.mark.parametrize("path", EXPERIMENTS, ids=lambda p: p.stem)
def test_shipped_experiments_are_valid(path):
    _, result = load_experiment(path)
    assert result.is_valid, str(result)


@pytest.mark.parametrize("payload, mode, grid", [
    ({}, 'exact', [0.5]),
    ({'gamma_grid': [0.7, 0.3]}, 'exact', [0.3, 0.7]),
    ({'model': 'network', 'n_classes': 2}, 'sampled', [0.5]),
    ({'method': 'informed', 'gamma_grid': [0.3]}, 'exact', []),
])
def test_resolved_settings(payload, mode, grid):
    _, result = parse_experiment({'n': 64, 'gamma': 0.5, **payload})
    assert result.resolved == {'mode': mode, 'grid': grid, 'n': 64}
    assert f"Resolved: mode={mode}" in str(result)
