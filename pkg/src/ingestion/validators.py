"""
Experiment Validators

Schema and cross-field validation of experiment configurations. A configuration
is one flat JSON document; unknown keys are rejected by the schema, and
constraints between keys are collected into a ValidationResult.

Examples:
    >>> config, result = load_experiment(Path("experiments/synthetic_rpb.json"))
    >>> if not result.is_valid:
    ...     print(result.errors)
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.config import settings

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Exception raised for malformed or inconsistent experiment configurations."""
    pass


@dataclass
class ValidationResult:
    """Result of a validation."""
    is_valid: bool
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    resolved: Dict[str, Any] = field(default_factory=dict)

    def add_error(self, message: str):
        """Add an error message."""
        self.errors.append(message)
        self.is_valid = False

    def add_warning(self, message: str):
        """Add a warning message."""
        self.warnings.append(message)

    def __str__(self) -> str:
        status = "VALID" if self.is_valid else "INVALID"
        parts = [f"Validation: {status}"]

        if self.errors:
            parts.append(f"Errors: {len(self.errors)}")
            for error in self.errors:
                parts.append(f"  - {error}")

        if self.warnings:
            parts.append(f"Warnings: {len(self.warnings)}")
            for warning in self.warnings:
                parts.append(f"  - {warning}")

        if self.resolved:
            parts.append("Resolved: " + ", ".join(f"{key}={value}" for key, value in self.resolved.items()))

        return "\n".join(parts)


Method = Literal['rpb', 'uninformed', 'informed', 'informed-excess']


class ExperimentConfig(BaseModel):
    """Flat experiment configuration; defaults come from settings."""

    model_config = ConfigDict(extra="forbid")

    # What to run
    method: Method = 'rpb'
    mode: Optional[Literal['exact', 'sampled']] = None
    seed: int = Field(default=0, ge=0)
    repetitions: int = Field(default=1, ge=1)

    # Data
    dataset: Literal['synthetic', 'idx'] = 'synthetic'
    train_images: Optional[str] = None
    train_labels: Optional[str] = None
    test_images: Optional[str] = None
    test_labels: Optional[str] = None
    n_classes: int = Field(default=10, ge=2)
    subsample: Optional[int] = Field(default=None, ge=1)
    test_subsample: Optional[int] = Field(default=None, ge=1)
    n: int = Field(default=1000, ge=1)
    n_test: int = Field(default=1000, ge=0)
    theta_star: float = Field(default=0.5, ge=0.0, le=1.0)
    eta: float = Field(default=0.1, ge=0.0, lt=0.5)

    # Recursion and budget
    T: int = Field(default=4, ge=1)
    gamma: float = Field(default=settings.DEFAULT_GAMMA, gt=0.0, lt=1.0)
    gamma_grid: Optional[List[float]] = None
    delta: float = Field(default=settings.DEFAULT_DELTA, gt=0.0, lt=1.0)
    delta_prime: float = Field(default=settings.DEFAULT_DELTA_PRIME, gt=0.0, lt=1.0)

    # Hypothesis space
    model: Literal['finite', 'network'] = 'finite'
    n_hypotheses: int = Field(default=101, ge=1)
    hidden_layers: List[int] = Field(default_factory=lambda: [100])
    sigma0: float = Field(default=settings.SIGMA0, gt=0.0)
    c1: float = Field(default=settings.C1, gt=0.0)
    c2: float = Field(default=settings.C2, gt=0.0)
    p_min: float = Field(default=settings.P_MIN, gt=0.0, lt=1.0)

    # Training
    learning_rate: float = Field(default=settings.LEARNING_RATE, gt=0.0)
    momentum: float = Field(default=settings.MOMENTUM, ge=0.0, lt=1.0)
    batch_size: int = Field(default=settings.BATCH_SIZE, ge=1)
    epochs: int = Field(default=settings.EPOCHS, ge=0)

    # Output
    output_dir: str = settings.OUTPUT_DIR
    run_name: str = 'run'

    @property
    def estimation_mode(self) -> str:
        """Explicit mode, else exact for finite classes and sampled for networks."""
        if self.mode is not None:
            return self.mode
        return 'exact' if self.model == 'finite' else 'sampled'

    @property
    def grid(self) -> List[float]:
        return sorted(self.gamma_grid) if self.gamma_grid else [self.gamma]


def validate_experiment(config: ExperimentConfig) -> ValidationResult:
    """
    Cross-field checks of an experiment configuration.

    Checks:
    - delta + delta_prime < 1
    - every gamma on the grid lies in (0, 1)
    - the sample is large enough for T nonempty geometric chunks
    - IDX runs name their files; synthetic runs use the finite threshold class
    - exact mode is only requested for finite classes

    Args:
        config: Parsed configuration

    Returns:
        ValidationResult with errors and warnings; `resolved` holds the estimation mode,
        gamma grid and sample size the run will use

    Examples:
        >>> result = validate_experiment(ExperimentConfig(T=12, n=100))
        >>> print(result.is_valid)
        False
    """
    result = ValidationResult(is_valid=True)

    if config.delta + config.delta_prime >= 1.0:
        result.add_error(f"delta + delta_prime must be below 1 (got {config.delta + config.delta_prime})")

    if config.gamma_grid is not None:
        if not config.gamma_grid:
            result.add_error("gamma_grid must not be empty")
        for g in config.gamma_grid:
            if not 0.0 < g < 1.0:
                result.add_error(f"gamma_grid value {g} outside (0, 1)")
        if config.method != 'rpb':
            result.add_warning(f"gamma_grid is ignored by method '{config.method}'")

    if config.dataset == 'idx':
        for key in ('train_images', 'train_labels'):
            if not getattr(config, key):
                result.add_error(f"dataset='idx' requires {key}")
        if bool(config.test_images) != bool(config.test_labels):
            result.add_error("test_images and test_labels must be given together")
        if config.model == 'finite':
            result.add_error("Threshold classes only apply to the synthetic dataset; use model='network'")
        n = config.subsample
    else:
        n = config.n
        if 'n_classes' in config.model_fields_set and config.n_classes != 2:
            result.add_warning("Synthetic data is binary; n_classes is ignored")

    if config.method == 'rpb' and n is not None and n < 2 ** (config.T - 1):
        result.add_error(f"n={n} is too small for T={config.T} (need at least {2 ** (config.T - 1)})")
    if config.method != 'rpb' and n is not None and n < 2:
        result.add_error(f"Baselines need at least two points (got n={n})")

    if config.estimation_mode == 'exact' and config.model != 'finite':
        result.add_error("mode='exact' requires model='finite'")
    if config.model == 'network' and not all(width >= 1 for width in config.hidden_layers):
        result.add_error(f"hidden_layers must be positive widths (got {config.hidden_layers})")

    if config.epochs == 0:
        result.add_warning("epochs=0: posteriors equal their priors")

    result.resolved = {
        'mode': config.estimation_mode,
        'grid': config.grid if config.method == 'rpb' else [],
        'n': n,
    }

    return result


def load_experiment(path: Path) -> Tuple[ExperimentConfig, ValidationResult]:
    """
    Parse and validate a JSON experiment configuration.

    Raises:
        ConfigError: If the file is unreadable or violates the schema
    """
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read configuration {path}: {e}")
    return parse_experiment(payload)


def parse_experiment(payload: Dict[str, Any]) -> Tuple[ExperimentConfig, ValidationResult]:
    """Schema-validate a configuration dictionary and run the cross-field checks."""
    if not isinstance(payload, dict):
        raise ConfigError(f"Configuration must be a JSON object (got {type(payload).__name__})")
    try:
        config = ExperimentConfig(**payload)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}")
    result = validate_experiment(config)
    for warning in result.warnings:
        logger.warning(warning)
    return config, result
