"""
Baseline Checkpoints

Checkpoints of a baseline certificate and re-validation of its report row.

Layout of a baseline run directory:
    report.json         the report (row, KL, components, metadata)
    manifest.json       method, mode, seed, budget and checkpoint names
    prior.json          pi_0 (uninformed) or pi_1 (informed, informed-excess)
    posterior.json      rho
    reference.json      zero-one losses of h* on S_2 (informed-excess)

Examples:
    >>> save_report(report, Path("results/informed"), seed=3, budget=budget)
    >>> check = verify_report(Path("results/informed"), dataset)
    >>> check.is_valid
    True
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from src.baselines.methods import (
    BaselineReport,
    certify_excess,
    certify_gibbs,
    gibbs_errors,
    split_halves,
)
from src.bounds.pacbayes import ConfidenceBudget
from src.ingestion.datasets import Dataset
from src.ingestion.validators import ValidationResult
from src.recursion.checkpoint import VERIFY_TOL, load_checkpoint, save_checkpoint
from src.streams import SeedStreams

logger = logging.getLogger(__name__)


def _write_json(payload: Dict[str, Any], path: Path):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, default=str)


def _read_json(path: Path) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def save_report(report: BaselineReport, directory: Path, seed: int, budget: ConfidenceBudget,
                extra: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write a baseline report with the checkpoints its bound was computed from.

    Args:
        report: Report returned by one of the baseline methods
        directory: Output directory
        seed: Root seed the report was produced with
        budget: Budget the report was certified with
        extra: Additional report entries (e.g. the experiment config)

    Returns:
        Path of the manifest
    """
    if report.posterior is None or report.prior is None:
        raise ValueError(f"Report of '{report.method}' carries no distributions to checkpoint")

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_checkpoint(report.prior, directory / "prior.json")
    save_checkpoint(report.posterior, directory / "posterior.json")
    checkpoints = ['prior.json', 'posterior.json']
    if report.reference is not None:
        _write_json({'losses': np.asarray(report.reference).tolist()}, directory / "reference.json")
        checkpoints.append('reference.json')

    _write_json({**report.to_dict(), **(extra or {})}, directory / "report.json")
    manifest = {
        'method': report.method,
        'mode': report.metadata['mode'],
        'seed': seed,
        'delta': budget.delta,
        'delta_prime': budget.delta_prime,
        'checkpoints': checkpoints,
    }
    manifest_path = directory / "manifest.json"
    _write_json(manifest, manifest_path)

    logger.info(f"Saved {report.method} checkpoints to {directory}")
    return manifest_path


def verify_report(directory: Path, dataset: Dataset,
                  test_dataset: Optional[Dataset] = None) -> ValidationResult:
    """
    Recompute the bound and errors of a saved baseline report from its checkpoints.

    `dataset` must be the sample the report was trained on; the S_1/S_2 split is
    replayed from the root seed. test01 is only checked when a test sample is given.

    Returns:
        ValidationResult listing every mismatching value
    """
    directory = Path(directory)
    manifest = _read_json(directory / "manifest.json")
    stored = _read_json(directory / "report.json")
    prior = load_checkpoint(directory / "prior.json")
    posterior = load_checkpoint(directory / "posterior.json")

    method, mode = manifest['method'], manifest['mode']
    budget = ConfidenceBudget(delta=manifest['delta'], delta_prime=manifest['delta_prime'])
    streams = SeedStreams(manifest['seed'])

    if method == 'uninformed':
        bound = certify_gibbs(posterior, prior, dataset.view(), budget, mode, streams)[0]
    else:
        _, s2 = split_halves(dataset, streams)
        if method == 'informed':
            bound = certify_gibbs(posterior, prior, s2, budget, mode, streams)[0]
        else:
            reference = np.asarray(_read_json(directory / "reference.json")['losses'], dtype=float)
            bound = certify_excess(posterior, prior, s2, reference, budget, mode, streams)[0]
    train01, test01 = gibbs_errors(posterior, dataset, test_dataset, mode, streams)

    recomputed = {'bound': bound, 'train01': train01}
    if test_dataset is not None:
        recomputed['test01'] = test01

    result = ValidationResult(is_valid=True)
    for column, value in recomputed.items():
        a = stored.get(column)
        if a is None or value is None:
            if a is not value:
                result.add_error(f"{method} {column}: stored {a}, recomputed {value}")
        elif abs(float(a) - float(value)) > VERIFY_TOL:
            result.add_error(f"{method} {column}: stored {a}, recomputed {value}")

    logger.info(f"Checkpoint re-validation of {directory}: {'ok' if result.is_valid else 'FAILED'}")
    return result
