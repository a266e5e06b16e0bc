"""
Recursive PAC-Bayes Pipeline

Orchestrates a complete recursive run:
1. Shuffles the sample with the "split" stream and cuts it geometrically
2. Trains pi_1 on S_1 against the data-free prior pi_0
3. For t = 2..T, draws pi_{t-1} once per point of S_t..S_T, trains pi_t on the
   excess loss over S_t (one candidate per gamma on the grid) and keeps the
   candidate with the smallest bound
4. Certifies the chosen sequence with evaluate_recursive

Examples:
    >>> pipeline = RecursivePipeline(dataset, prior, T=4, train_cfg=TrainConfig(epochs=20))
    >>> result = pipeline.run()
    >>> print(f"B_T = {result.trace.final_bound:.4f}")
"""

import logging
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.bounds.pacbayes import ConfidenceBudget
from src.config import settings
from src.hypotheses.base import EstimationMode, HypothesisDistribution, HypothesisError
from src.hypotheses.surrogates import SurrogateConfig
from src.hypotheses.training import TrainConfig, train_pi1, train_pit
from src.ingestion.datasets import Dataset
from src.ingestion.validators import ConfigError
from src.recursion.evaluator import BoundTrace, evaluate_recursive, select_gamma, step_bound_first, step_bound_next
from src.recursion.excess import build_triplets
from src.recursion.schedule import SplitSchedule, geometric_split
from src.streams import SeedStreams

logger = logging.getLogger(__name__)


@dataclass
class RecursiveResult:
    """Certified posteriors and their trace."""
    trace: BoundTrace
    posteriors: List[HypothesisDistribution]
    gammas: List[float]
    schedule: SplitSchedule
    permutation: np.ndarray
    candidate_bounds: List[Dict[float, float]] = field(default_factory=list)
    lineage: Dict[str, int] = field(default_factory=dict)


class RecursivePipeline:
    """Sequential prior-update training and certification."""

    def __init__(
        self,
        dataset: Dataset,
        prior: HypothesisDistribution,
        T: int,
        gamma_grid: Sequence[float] = (settings.DEFAULT_GAMMA,),
        budget: Optional[ConfidenceBudget] = None,
        mode: EstimationMode = 'sampled',
        train_cfg: Optional[TrainConfig] = None,
        surrogate: Optional[SurrogateConfig] = None,
        seed: int = 0,
        test_dataset: Optional[Dataset] = None
    ):
        """
        Initialize a recursive pipeline.

        Args:
            dataset: Training sample S
            prior: Data-free prior pi_0
            T: Number of recursion steps
            gamma_grid: Candidate gamma values (a single value fixes gamma)
            budget: Confidence budget (default: ConfidenceBudget.for_recursion(T))
            mode: "exact" (finite backend) or "sampled"
            train_cfg: Optimizer settings shared by all steps; seeds come from the streams
            surrogate: Surrogate parameters of the network trainers
            seed: Root seed
            test_dataset: Optional held-out sample for the test01 column

        Raises:
            HypothesisError: If exact mode is requested on a non-finite prior
            ConfigError: On an empty gamma grid or a value outside (0, 1)
        """
        if mode == 'exact' and not prior.is_finite:
            raise HypothesisError("Exact mode requires a finite hypothesis class")
        if len(gamma_grid) == 0:
            raise ConfigError("gamma_grid must contain at least one value")
        if any(not 0.0 < g < 1.0 for g in gamma_grid):
            raise ConfigError(f"gamma_grid values must lie in (0, 1): {list(gamma_grid)}")

        self.dataset = dataset
        self.prior = prior
        self.T = T
        self.gamma_grid = sorted(float(g) for g in gamma_grid)
        self.budget = budget or ConfidenceBudget.for_recursion(T)
        self.mode = mode
        self.train_cfg = train_cfg or TrainConfig()
        self.surrogate = surrogate
        self.seed = seed
        self.test_dataset = test_dataset
        self.streams = SeedStreams(seed)

        if self.budget.union_factor != T:
            logger.warning(f"Budget union factor {self.budget.union_factor} differs from T={T}")

    def _cfg(self, t: int) -> TrainConfig:
        return replace(self.train_cfg, seed=self.streams.seed(f"trainer:{t}"))

    def run(self) -> RecursiveResult:
        """
        Train and certify pi_1..pi_T.

        Returns:
            RecursiveResult with the trace, posteriors, chosen gammas and schedule
        """
        start_time = datetime.now()
        n = len(self.dataset)
        schedule = geometric_split(n, self.T)
        permutation = self.streams.rng("split").permutation(n)
        data = self.dataset.view(permutation)
        grid_size = len(self.gamma_grid)
        logger.info(f"Recursive run: n={n}, T={self.T}, chunks={schedule.chunk_sizes}, mode={self.mode}")

        posteriors = [train_pi1(self.prior, data.subset(schedule.chunk(1)), n, self.budget, self.T,
                                self._cfg(1), self.surrogate)]
        gammas: List[float] = []
        candidate_bounds: List[Dict[float, float]] = []
        B_prev = None
        if grid_size > 1 and self.T > 1:
            B_prev = step_bound_first(posteriors[0], self.prior, data, self.budget, self.mode,
                                      self.streams.seed("posterior-draws:1")).B_t

        for t in range(2, self.T + 1):
            pi_prev = posteriors[-1]
            triplets = build_triplets(
                data.subset(schedule.val_suffix(t)), pi_prev, self.streams.seed(f"prior-draws:{t}")
            )
            train_triplets = triplets.subset(np.arange(schedule.chunk_sizes[t - 1]))
            candidates = {}
            for gamma in self.gamma_grid:
                candidates[gamma] = train_pit(pi_prev, train_triplets, schedule.n_val(t), gamma,
                                              self.budget, self.T, self._cfg(t), self.surrogate)

            if grid_size == 1:
                gamma_t = self.gamma_grid[0]
            else:
                records = {
                    gamma: step_bound_next(
                        candidates[gamma], pi_prev, gamma, triplets, self.budget, B_prev, self.mode,
                        self.streams.seed(f"posterior-draws:{t}"), t=t,
                        union_factor=self.budget.union_factor * grid_size,
                    )
                    for gamma in self.gamma_grid
                }
                bounds = [records[gamma].B_t for gamma in self.gamma_grid]
                gamma_t = select_gamma(self.gamma_grid, bounds)
                candidate_bounds.append(dict(zip(self.gamma_grid, bounds)))
                B_prev = records[gamma_t].B_t
                logger.info(f"Step {t}: selected gamma={gamma_t} (B_t={B_prev:.6f})")

            gammas.append(gamma_t)
            posteriors.append(candidates[gamma_t])

        test_view = self.test_dataset.view() if self.test_dataset is not None else None
        trace = evaluate_recursive(
            posteriors, self.prior, gammas, schedule, data, self.budget, self.mode, self.seed,
            test_view=test_view, grid_size=grid_size,
        )
        for record in trace.records:
            logger.info(
                f"t={record.t}: n_val={record.n_val} E_t={record.E_t:.4f} B_t={record.B_t:.4f}"
                + (f" test01={record.test01:.4f}" if record.test01 is not None else "")
            )

        duration = (datetime.now() - start_time).total_seconds()
        logger.info(f"Recursive run finished in {duration:.1f}s: B_T={trace.final_bound:.6f}")

        lineage = {**self.streams.lineage(), **trace.metadata['seeds']}
        trace.metadata['seeds'] = lineage
        return RecursiveResult(
            trace=trace,
            posteriors=posteriors,
            gammas=gammas,
            schedule=schedule,
            permutation=permutation,
            candidate_bounds=candidate_bounds,
            lineage=lineage,
        )
