"""
Posterior Checkpoints

JSON checkpoints of hypothesis distributions and of complete recursive runs, and
re-validation of a run's bound rows from its checkpoints.

Layout of a run directory:
    manifest.json       run parameters (T, gammas, schedule, budget, mode, seed)
    trace.json          the certified BoundTrace
    pi_0.json .. pi_T.json

Examples:
    >>> save_run(result, pipeline.prior, Path("results/run"), budget)
    >>> trace, report = verify_run(Path("results/run"), dataset)
    >>> report.is_valid
    True
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from src.bounds.pacbayes import ConfidenceBudget
from src.hypotheses.base import HypothesisDistribution, HypothesisError
from src.hypotheses.finite import CategoricalDistribution
from src.hypotheses.network import GaussianNetworkDistribution
from src.ingestion.datasets import Dataset
from src.ingestion.validators import ValidationResult
from src.recursion.evaluator import TRACE_COLUMNS, BoundTrace, evaluate_recursive
from src.recursion.schedule import SplitSchedule
from src.streams import SeedStreams

logger = logging.getLogger(__name__)

VERIFY_TOL = 1e-12


def distribution_from_dict(payload: Dict[str, Any]) -> HypothesisDistribution:
    kind = payload.get('kind')
    if kind == 'categorical':
        return CategoricalDistribution.from_dict(payload)
    if kind == 'gaussian-network':
        return GaussianNetworkDistribution.from_dict(payload)
    raise HypothesisError(f"Unknown checkpoint kind: {kind}")


def save_checkpoint(dist: HypothesisDistribution, path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(dist.to_dict(), f, indent=2, default=str)


def load_checkpoint(path: Path) -> HypothesisDistribution:
    with open(path, 'r', encoding='utf-8') as f:
        return distribution_from_dict(json.load(f))


def save_run(result, prior: HypothesisDistribution, directory: Path, budget: ConfidenceBudget,
             extra: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write the prior, every posterior, the trace and a manifest of a recursive run.

    Args:
        result: RecursiveResult of the pipeline
        prior: Data-free prior pi_0
        directory: Output directory
        budget: Budget the run was certified with
        extra: Additional manifest entries

    Returns:
        Path of the manifest
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_checkpoint(prior, directory / "pi_0.json")
    for t, posterior in enumerate(result.posteriors, start=1):
        save_checkpoint(posterior, directory / f"pi_{t}.json")

    metadata = result.trace.metadata
    manifest = {
        'T': result.schedule.T,
        'chunk_sizes': list(result.schedule.chunk_sizes),
        'gammas': list(result.gammas),
        'grid_size': metadata.get('grid_size', 1),
        'mode': metadata['mode'],
        'seed': result.lineage['root_seed'],
        'delta': budget.delta,
        'delta_prime': budget.delta_prime,
        'union_factor': budget.union_factor,
        'sampling_parts': budget.sampling_parts,
        'checkpoints': ['pi_0.json'] + [f"pi_{t}.json" for t in range(1, len(result.posteriors) + 1)],
        **(extra or {}),
    }
    with open(directory / "trace.json", 'w', encoding='utf-8') as f:
        json.dump(result.trace.to_dict(), f, indent=2, default=str)
    manifest_path = directory / "manifest.json"
    with open(manifest_path, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, default=str)

    logger.info(f"Saved {len(result.posteriors) + 1} checkpoints to {directory}")
    return manifest_path


def load_run(directory: Path) -> Tuple[Dict[str, Any], HypothesisDistribution, List[HypothesisDistribution]]:
    """Manifest, prior and posteriors of a saved run."""
    directory = Path(directory)
    with open(directory / "manifest.json", 'r', encoding='utf-8') as f:
        manifest = json.load(f)
    distributions = [load_checkpoint(directory / name) for name in manifest['checkpoints']]
    return manifest, distributions[0], distributions[1:]


def verify_run(directory: Path, dataset: Dataset,
               test_dataset: Optional[Dataset] = None) -> Tuple[BoundTrace, ValidationResult]:
    """
    Recompute every bound row of a saved run from its checkpoints.

    The split permutation is replayed from the root seed, so `dataset` must be the
    sample the run was trained on.

    Returns:
        (recomputed trace, ValidationResult listing every mismatching cell)
    """
    directory = Path(directory)
    manifest, prior, posteriors = load_run(directory)
    with open(directory / "trace.json", 'r', encoding='utf-8') as f:
        stored = json.load(f)['steps']

    schedule = SplitSchedule(total_n=len(dataset), chunk_sizes=tuple(manifest['chunk_sizes']))
    budget = ConfidenceBudget(
        delta=manifest['delta'],
        union_factor=manifest['union_factor'],
        delta_prime=manifest['delta_prime'],
        sampling_parts=manifest['sampling_parts'],
    )
    permutation = SeedStreams(manifest['seed']).rng("split").permutation(len(dataset))
    trace = evaluate_recursive(
        posteriors, prior, manifest['gammas'], schedule, dataset.view(permutation), budget,
        manifest['mode'], manifest['seed'],
        test_view=test_dataset.view() if test_dataset is not None else None,
        grid_size=manifest['grid_size'],
    )

    result = ValidationResult(is_valid=True)
    if len(stored) != len(trace.records):
        result.add_error(f"Stored trace has {len(stored)} steps, recomputed {len(trace.records)}")
        return trace, result
    for row, record in zip(stored, trace.records):
        recomputed = record.row()
        for column in TRACE_COLUMNS:
            a, b = row.get(column), recomputed[column]
            if a is None or b is None:
                if a is not b:
                    result.add_error(f"t={record.t} {column}: stored {a}, recomputed {b}")
            elif abs(float(a) - float(b)) > VERIFY_TOL:
                result.add_error(f"t={record.t} {column}: stored {a}, recomputed {b}")

    logger.info(f"Checkpoint re-validation of {directory}: {'ok' if result.is_valid else 'FAILED'}")
    return trace, result
