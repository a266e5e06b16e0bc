"""
Monte Carlo Coverage

Repeats a certified computation over independent samples and counts how often the
bound fails to cover the truth. Each harness knows its truth exactly:

- coverage_kl:        Bernoulli(p) means against the kl inequality
- coverage_split_kl:  a discrete distribution on a fixed grid against split-kl
- coverage_sampling:  i.i.d. draws of a [0, 1]-valued quantity against the sampling bound
- coverage_recursive: the recursive pipeline (or a baseline) on the threshold family,
                      where the Gibbs risk of a posterior is computed in closed form

Trials use per-trial seeds spawned from one root seed, so results do not depend on
execution order or the number of workers.

Examples:
    >>> report = coverage_split_kl(DiscreteSupport((-0.5, 0.0, 0.5, 1.0)), [0.1, 0.4, 0.4, 0.1],
    ...                            n=100, delta=0.05, trials=10000, seed=0)
    >>> print(report)
    CoverageReport(split-kl: coverage=1.0000, target=0.9500, violations=0/10000)
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

try:
    from tqdm import tqdm
    HAS_TQDM = True
except ImportError:
    HAS_TQDM = False
    logging.warning("tqdm not installed, progress bars disabled")

from src.baselines.methods import BASELINES
from src.bounds.concentration import BoundInputError, DiscreteSupport, kl_bound_upper, split_kl_upper
from src.bounds.pacbayes import ConfidenceBudget, sampling_upper
from src.config import settings
from src.hypotheses.finite import CategoricalDistribution, FiniteHypothesisClass
from src.hypotheses.training import TrainConfig
from src.ingestion.synthetic import ThresholdDistribution, gen_threshold_data, true_risk_threshold
from src.recursion.pipeline import RecursivePipeline
from src.streams import SeedStreams, trial_seeds

logger = logging.getLogger(__name__)

# Rounding slack when comparing a bound to its truth
VIOLATION_TOL = 1e-12

# Softmax logits of a 101-threshold class move slowly; coverage runs use a larger step
THRESHOLD_TRAIN = TrainConfig(learning_rate=10.0, momentum=0.9, epochs=100)

COVERAGE_COLUMNS = ['harness', 'trials', 'violations', 'coverage', 'target', 'slack', 'mean_gap', 'passed']
COVERAGE_METHODS = ('rpb',) + tuple(BASELINES)


@dataclass
class CoverageReport:
    """Bounds and truths of every trial of one harness."""
    harness: str
    trials: int
    violations: int
    target: float
    bounds: np.ndarray
    truths: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def coverage(self) -> float:
        return 1.0 - self.violations / self.trials

    @property
    def mean_gap(self) -> float:
        """Average of bound minus truth."""
        return float(np.mean(self.bounds - self.truths))

    @property
    def slack(self) -> float:
        """Binomial slack 3 * sqrt(d * (1 - d) / R) around the failure level d = 1 - target."""
        failure = 1.0 - self.target
        return 3.0 * math.sqrt(failure * (1.0 - failure) / self.trials)

    def passed(self) -> bool:
        return self.coverage >= self.target - self.slack

    def summary(self) -> Dict[str, Any]:
        return {
            'harness': self.harness,
            'trials': self.trials,
            'violations': self.violations,
            'coverage': self.coverage,
            'target': self.target,
            'slack': self.slack,
            'mean_gap': self.mean_gap,
            'passed': self.passed(),
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.summary(),
            'bounds': self.bounds.tolist(),
            'truths': self.truths.tolist(),
            'metadata': dict(self.metadata),
        }

    def __repr__(self) -> str:
        return (
            f"CoverageReport({self.harness}: coverage={self.coverage:.4f}, "
            f"target={self.target:.4f}, violations={self.violations}/{self.trials})"
        )


def _report(harness: str, bounds: np.ndarray, truths: np.ndarray, target: float,
            metadata: Dict[str, Any]) -> CoverageReport:
    bounds = np.asarray(bounds, dtype=float)
    truths = np.broadcast_to(np.asarray(truths, dtype=float), bounds.shape).copy()
    violations = int(np.sum(bounds < truths - VIOLATION_TOL))
    report = CoverageReport(
        harness=harness, trials=len(bounds), violations=violations, target=target,
        bounds=bounds, truths=truths, metadata=metadata,
    )
    logger.info(f"{report!r}, mean gap {report.mean_gap:.4f}")
    if not report.passed():
        logger.warning(f"{harness} coverage {report.coverage:.4f} below target {target:.4f}")
    return report


def _check_trials(trials: int):
    if trials < 1:
        raise BoundInputError(f"trials must be positive (got {trials})")


def _check_weights(weights: Sequence[float], size: int) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (size,):
        raise BoundInputError(f"Expected {size} weights, got shape {weights.shape}")
    if np.any(weights < 0.0) or not math.isclose(weights.sum(), 1.0, abs_tol=1e-9):
        raise BoundInputError(f"Weights must be a probability vector: {weights.tolist()}")
    return weights / weights.sum()


def coverage_kl(p: float, n: int, delta: float, trials: int = None, seed: int = 0) -> CoverageReport:
    """
    Coverage of kl_bound_upper on Bernoulli(p) samples of size n.

    Args:
        p: True mean in [0, 1]
        n: Sample size per trial
        delta: Confidence parameter
        trials: Number of trials (default: settings.COVERAGE_TRIALS)
        seed: Root seed

    Returns:
        CoverageReport with target 1 - delta
    """
    trials = trials or settings.COVERAGE_TRIALS
    _check_trials(trials)
    if not 0.0 <= p <= 1.0:
        raise BoundInputError(f"p must lie in [0, 1] (got {p})")

    rng = SeedStreams(seed).rng("trials")
    means = rng.binomial(n, p, size=trials) / n
    bounds = np.atleast_1d(kl_bound_upper(means, n, delta))
    return _report('kl', bounds, p, 1.0 - delta, {'p': p, 'n': n, 'delta': delta, 'seed': seed})


def coverage_split_kl(
    support: DiscreteSupport,
    weights: Sequence[float],
    n: int,
    delta: float,
    trials: int = None,
    seed: int = 0
) -> CoverageReport:
    """
    Coverage of split_kl_upper for a discrete distribution over `support`.

    Each trial draws n values, forms the K threshold-indicator means and compares the
    bound with the exact mean sum_i weights_i * b_i.

    Args:
        support: Value grid b_0 < ... < b_K
        weights: Probabilities of the K + 1 grid points
        n: Sample size per trial
        delta: Confidence parameter
        trials: Number of trials (default: settings.COVERAGE_TRIALS)
        seed: Root seed

    Returns:
        CoverageReport with target 1 - delta

    Raises:
        BoundInputError: If the weights are not a distribution over the grid
    """
    trials = trials or settings.COVERAGE_TRIALS
    _check_trials(trials)
    weights = _check_weights(weights, support.K + 1)
    truth = float(weights @ np.asarray(support.points))

    rng = SeedStreams(seed).rng("trials")
    counts = rng.multinomial(n, weights, size=trials)
    # mean of 1[Z >= b_j] is the share of draws at or above grid point j
    tails = np.cumsum(counts[:, ::-1], axis=1)[:, ::-1]
    indicator_means = tails[:, 1:] / n
    bounds = np.atleast_1d(split_kl_upper(indicator_means, support, n, delta))

    return _report('split-kl', bounds, truth, 1.0 - delta, {
        'support': list(support.points), 'weights': weights.tolist(), 'n': n, 'delta': delta, 'seed': seed,
    })


def coverage_sampling(
    values: Sequence[float],
    weights: Sequence[float],
    m: int,
    delta: float,
    trials: int = None,
    seed: int = 0
) -> CoverageReport:
    """
    Coverage of sampling_upper for m i.i.d. draws of f(h), h ~ pi.

    `values` are the [0, 1]-valued f(h) of the hypotheses and `weights` their
    probabilities under pi.
    """
    trials = trials or settings.COVERAGE_TRIALS
    _check_trials(trials)
    values = np.asarray(values, dtype=float)
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise BoundInputError("Sampled values must lie in [0, 1]")
    weights = _check_weights(weights, len(values))
    truth = float(weights @ values)

    rng = SeedStreams(seed).rng("trials")
    means = rng.multinomial(m, weights, size=trials) @ values / m
    bounds = np.array([sampling_upper(min(mean, 1.0), m, delta) for mean in means])
    return _report('sampling', bounds, truth, 1.0 - delta, {'m': m, 'delta': delta, 'seed': seed})


@dataclass(frozen=True)
class ThresholdTrial:
    """One certified run on a fresh threshold sample; picklable for worker processes."""
    method: str
    n: int
    T: int
    budget: ConfidenceBudget
    dist: ThresholdDistribution
    n_hypotheses: int
    train_cfg: TrainConfig
    gamma_grid: Tuple[float, ...]

    def run(self, trial_seed: int) -> Tuple[float, float]:
        """(certified bound, exact Gibbs risk of the certified posterior)."""
        streams = SeedStreams(trial_seed)
        dataset = gen_threshold_data(self.dist, self.n, streams.seed("data"))
        hclass = FiniteHypothesisClass.uniform_thresholds(self.n_hypotheses)
        prior = CategoricalDistribution.uniform(hclass)

        if self.method == 'rpb':
            result = RecursivePipeline(
                dataset, prior, self.T, gamma_grid=self.gamma_grid, budget=self.budget, mode='exact',
                train_cfg=self.train_cfg, seed=streams.seed("pipeline"),
            ).run()
            bound, posterior = result.trace.final_bound, result.posteriors[-1]
        else:
            report = BASELINES[self.method](
                dataset, prior, self.budget, 'exact', self.train_cfg, seed=streams.seed("pipeline"),
            )
            bound, posterior = report.bound, report.posterior

        truth = float(posterior.weights @ true_risk_threshold(hclass.thresholds, self.dist))
        return bound, truth


def coverage_recursive(
    n: int,
    T: int,
    budget: Optional[ConfidenceBudget] = None,
    trials: int = 1000,
    seed: int = 0,
    method: str = 'rpb',
    dist: Optional[ThresholdDistribution] = None,
    n_hypotheses: int = 101,
    train_cfg: Optional[TrainConfig] = None,
    gamma_grid: Sequence[float] = (settings.DEFAULT_GAMMA,),
    workers: int = None
) -> CoverageReport:
    """
    Coverage of a certified method on the threshold family in exact mode.

    Every trial draws a fresh sample, trains and certifies with `method` and compares
    the bound with the exact risk E_rho[L(h)] of the returned posterior. Exact mode
    consumes no delta_prime, so the target is 1 - delta.

    Args:
        n: Sample size per trial
        T: Recursion depth (ignored by baselines)
        budget: Confidence budget (default: for_recursion(T) for rpb, delta alone for baselines)
        trials: Number of trials
        seed: Root seed of the per-trial seeds
        method: "rpb", "uninformed", "informed" or "informed-excess"
        dist: Threshold distribution (default theta*=0.5, eta=0.1)
        n_hypotheses: Size of the uniform threshold grid
        train_cfg: Optimizer settings (default THRESHOLD_TRAIN)
        gamma_grid: Candidate gamma values of the recursion
        workers: Worker processes (default: settings.MAX_WORKERS; 1 runs in-process)

    Returns:
        CoverageReport with target 1 - delta

    Raises:
        ValueError: On an unknown method
    """
    if method not in COVERAGE_METHODS:
        raise ValueError(f"Unknown method '{method}'. Choose from {list(COVERAGE_METHODS)}")
    _check_trials(trials)
    if budget is None:
        budget = ConfidenceBudget.for_recursion(T) if method == 'rpb' else ConfidenceBudget()
    workers = workers or settings.MAX_WORKERS

    trial = ThresholdTrial(
        method=method, n=n, T=T, budget=budget, dist=dist or ThresholdDistribution(),
        n_hypotheses=n_hypotheses, train_cfg=train_cfg or THRESHOLD_TRAIN,
        gamma_grid=tuple(float(g) for g in gamma_grid),
    )
    seeds = trial_seeds(seed, trials)
    logger.info(f"Coverage of {method}: {trials} trials, n={n}, T={T}, workers={workers}")

    results: List[Optional[Tuple[float, float]]] = [None] * trials
    progress_bar = tqdm(total=trials, desc=f"{method} coverage", disable=not settings.DEBUG) if HAS_TQDM else None

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(trial.run, s): r for r, s in enumerate(seeds)}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                if progress_bar:
                    progress_bar.update(1)
    else:
        for r, s in enumerate(seeds):
            results[r] = trial.run(s)
            if progress_bar:
                progress_bar.update(1)

    if progress_bar:
        progress_bar.close()

    bounds = np.array([bound for bound, _ in results])
    truths = np.array([truth for _, truth in results])
    return _report(method, bounds, truths, 1.0 - budget.delta, {
        'n': n, 'T': T, 'delta': budget.delta, 'union_factor': budget.union_factor,
        'n_hypotheses': n_hypotheses, 'theta_star': trial.dist.theta_star, 'eta': trial.dist.eta,
        'gamma_grid': list(trial.gamma_grid), 'seed': seed,
    })
