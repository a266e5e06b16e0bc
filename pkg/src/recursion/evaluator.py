"""
Recursive Bound Evaluator

Certifies a sequence of posteriors pi_1..pi_T built on growing data prefixes:

    B_1 = PAC-Bayes-kl bound of pi_1 on all n points (union factor T)
    E_t = PAC-Bayes-split-kl bound of the excess loss of pi_t against draws of
          pi_{t-1} on the validation suffix S_t..S_T (union factor T * grid size)
    B_t = E_t + gamma_t * B_{t-1}

In sampled mode every empirical mean is first inflated by the sampling bound with
delta_prime / sampling_parts; the final B_T then holds with probability at least
1 - delta - delta_prime.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.bounds.pacbayes import BoundInputs, ConfidenceBudget, pb_kl_upper, pb_split_kl_upper, sampling_upper
from src.hypotheses.base import EstimationMode, HypothesisDistribution, empirical_gibbs_loss
from src.ingestion.datasets import DatasetView
from src.ingestion.validators import ConfigError
from src.recursion.excess import ExcessSupport, TripletSet, build_triplets, estimate_excess_means
from src.recursion.schedule import ScheduleError, SplitSchedule
from src.streams import SeedStreams

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['t', 'n_val', 'F_hat', 'KL_over_nval', 'E_t', 'B_t', 'test01']


@dataclass
class StepRecord:
    """One row of a bound trace."""
    t: int
    n_val: int
    F_hat: float
    kl: float
    E_t: float
    B_t: float
    gamma: float = 0.0
    means: List[float] = field(default_factory=list)
    inflated_means: List[float] = field(default_factory=list)
    m: int = 0
    test01: Optional[float] = None

    @property
    def KL_over_nval(self) -> float:
        return self.kl / self.n_val

    @property
    def vacuous(self) -> bool:
        return self.B_t >= 1.0

    def row(self) -> Dict[str, Any]:
        return {
            't': self.t,
            'n_val': self.n_val,
            'F_hat': self.F_hat,
            'KL_over_nval': self.KL_over_nval,
            'E_t': self.E_t,
            'B_t': self.B_t,
            'test01': self.test01,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.row(),
            'kl': self.kl,
            'gamma': self.gamma,
            'means': list(self.means),
            'inflated_means': list(self.inflated_means),
            'm': self.m,
            'vacuous': self.vacuous,
        }


@dataclass
class BoundTrace:
    """Per-step records of a recursive certificate plus run metadata."""
    records: List[StepRecord] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def final_bound(self) -> float:
        return self.records[-1].B_t

    def rows(self) -> List[Dict[str, Any]]:
        return [record.row() for record in self.records]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'metadata': dict(self.metadata),
            'steps': [record.to_dict() for record in self.records],
            'final_bound': self.final_bound if self.records else None,
        }


def _test_error(dist: HypothesisDistribution, test_view: Optional[DatasetView],
                mode: EstimationMode, seed: int) -> Optional[float]:
    if test_view is None or len(test_view) == 0:
        return None
    return empirical_gibbs_loss(dist, test_view, mode, seed)[0]


def step_bound_first(
    pi1: HypothesisDistribution,
    pi0: HypothesisDistribution,
    full_data: DatasetView,
    budget: ConfidenceBudget,
    mode: EstimationMode,
    seed: int = 0
) -> StepRecord:
    """
    B_1: PAC-Bayes-kl bound of pi_1 against pi_0 on every point.

    Args:
        pi1: First posterior (built from S_1 only)
        pi0: Data-free prior
        full_data: All n points of the schedule
        budget: Confidence budget; union_factor is T
        mode: "exact" or "sampled"
        seed: Seed of the per-point posterior draws

    Returns:
        StepRecord with E_1 = B_1
    """
    n = len(full_data)
    emp, m = empirical_gibbs_loss(pi1, full_data, mode, seed)
    inflated = sampling_upper(emp, m, budget.delta_part) if mode == 'sampled' else emp
    kl = pi1.kl(pi0)
    bound = pb_kl_upper(BoundInputs(min(max(inflated, 0.0), 1.0), kl, n), budget.delta, budget.union_factor)

    logger.debug(f"t=1: emp={emp:.6f} inflated={inflated:.6f} KL={kl:.4f} B_1={bound:.6f}")
    return StepRecord(
        t=1, n_val=n, F_hat=emp, kl=kl, E_t=bound, B_t=bound,
        means=[emp], inflated_means=[inflated], m=m,
    )


def step_bound_next(
    pi_t: HypothesisDistribution,
    pi_prev: HypothesisDistribution,
    gamma_t: float,
    triplets: TripletSet,
    budget: ConfidenceBudget,
    B_prev: float,
    mode: EstimationMode,
    seed: int = 0,
    t: int = 2,
    union_factor: Optional[int] = None
) -> StepRecord:
    """
    E_t and B_t = E_t + gamma_t * B_prev for a later step.

    Args:
        pi_t: Posterior of step t
        pi_prev: Posterior of step t-1, the prior of the KL term
        gamma_t: Scale of the prior's loss in (0, 1)
        triplets: Validation suffix S_t..S_T with recorded pi_{t-1} draws
        budget: Confidence budget
        B_prev: Bound of step t-1
        mode: "exact" or "sampled"
        seed: Seed of the per-point posterior draws
        t: Step number (for the record)
        union_factor: Applications sharing delta (defaults to budget.union_factor)

    Raises:
        HypothesisError: If gamma_t is outside (0, 1)
    """
    support = ExcessSupport(gamma_t)
    estimate = estimate_excess_means(pi_t, triplets, support, mode, seed)
    if mode == 'sampled':
        inflated = np.array([sampling_upper(mean, estimate.m, budget.delta_part) for mean in estimate.means])
    else:
        inflated = estimate.means.copy()
    inflated = np.clip(inflated, 0.0, 1.0)

    kl = pi_t.kl(pi_prev)
    n_val = len(triplets)
    factor = budget.union_factor if union_factor is None else union_factor
    E_t = pb_split_kl_upper(inflated, support.support, kl, n_val, budget.delta, factor)
    B_t = E_t + gamma_t * B_prev

    logger.debug(f"t={t}: means={estimate.means} KL={kl:.4f} E_t={E_t:.6f} B_t={B_t:.6f}")
    return StepRecord(
        t=t, n_val=n_val, F_hat=estimate.F_hat, kl=kl, E_t=E_t, B_t=B_t, gamma=gamma_t,
        means=estimate.means.tolist(), inflated_means=inflated.tolist(), m=estimate.m,
    )


def evaluate_recursive(
    posteriors: Sequence[HypothesisDistribution],
    pi0: HypothesisDistribution,
    gammas: Sequence[float],
    schedule: SplitSchedule,
    data: DatasetView,
    budget: ConfidenceBudget,
    mode: EstimationMode,
    seed: int,
    test_view: Optional[DatasetView] = None,
    grid_size: int = 1
) -> BoundTrace:
    """
    Certify pi_1..pi_T with the recursive bound.

    Args:
        posteriors: pi_1..pi_T, pi_t built from S_1..S_t only
        pi0: Data-free prior
        gammas: gamma_2..gamma_T
        schedule: Split schedule; position i of `data` is schedule position i
        data: All n points in schedule order
        budget: Confidence budget with union_factor T
        mode: "exact" or "sampled"
        seed: Root seed of the named draw streams
        test_view: Optional held-out points for the test01 column
        grid_size: Number of gamma candidates searched per step

    Returns:
        BoundTrace with one record per step

    Raises:
        ScheduleError: On size mismatches between posteriors, gammas, schedule and data
    """
    T = schedule.T
    if len(data) != schedule.total_n:
        raise ScheduleError(f"Data has {len(data)} points but the schedule covers {schedule.total_n}")
    if len(posteriors) != T or len(gammas) != T - 1:
        raise ScheduleError(
            f"Need {T} posteriors and {T - 1} gammas (got {len(posteriors)} and {len(gammas)})"
        )

    streams = SeedStreams(seed)
    records = [step_bound_first(posteriors[0], pi0, data, budget, mode, streams.seed("posterior-draws:1"))]
    records[0].test01 = _test_error(posteriors[0], test_view, mode, streams.seed("test-draws:1"))

    for t in range(2, T + 1):
        triplets = build_triplets(
            data.subset(schedule.val_suffix(t)), posteriors[t - 2], streams.seed(f"prior-draws:{t}")
        )
        record = step_bound_next(
            posteriors[t - 1], posteriors[t - 2], gammas[t - 2], triplets, budget,
            records[-1].B_t, mode, streams.seed(f"posterior-draws:{t}"), t=t,
            union_factor=budget.union_factor * grid_size,
        )
        record.test01 = _test_error(posteriors[t - 1], test_view, mode, streams.seed(f"test-draws:{t}"))
        records.append(record)

    for record in records:
        if record.vacuous:
            logger.warning(f"Step {record.t} bound is vacuous: B_t={record.B_t:.4f}")

    metadata = {
        'T': T,
        'chunk_sizes': list(schedule.chunk_sizes),
        'gammas': [float(g) for g in gammas],
        'mode': mode,
        'delta': budget.delta,
        'delta_prime': budget.delta_prime if mode == 'sampled' else 0.0,
        'union_factor': budget.union_factor,
        'grid_size': grid_size,
        'sampling_parts': budget.sampling_parts,
        'total_failure': budget.total_failure if mode == 'sampled' else budget.delta,
        'seeds': streams.lineage(),
    }
    logger.info(f"Recursive bound over T={T}: B_T={records[-1].B_t:.6f}")
    return BoundTrace(records=records, metadata=metadata)


def select_gamma(grid: Sequence[float], candidate_bounds: Sequence[float]) -> float:
    """
    Grid value with the smallest candidate bound, ties toward the smaller gamma.

    The candidate bounds must already account for the grid in their union factor.

    Raises:
        ConfigError: On an empty grid or a value outside (0, 1)
        ValueError: If grid and candidate bounds differ in length

    Examples:
        >>> select_gamma([0.3, 0.5, 0.7], [0.2, 0.1, 0.1])
        0.5
    """
    if len(grid) == 0:
        raise ConfigError("Cannot select gamma from an empty grid")
    if len(grid) != len(candidate_bounds):
        raise ValueError(f"Grid has {len(grid)} values but {len(candidate_bounds)} bounds were given")
    if any(not 0.0 < g < 1.0 for g in grid):
        raise ConfigError(f"Grid values must lie in (0, 1): {list(grid)}")
    best = min(zip(candidate_bounds, grid), key=lambda pair: (pair[0], pair[1]))
    return float(best[1])
