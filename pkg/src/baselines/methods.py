"""
Baseline Certificates

The three non-recursive ways of certifying a randomized classifier:

- uninformed:       data-free prior pi_0, posterior trained and bounded on all of S
- informed:         prior pi_1 trained on S_1, posterior trained and bounded on S_2
- informed-excess:  as informed, but the bound is split into the excess loss of the
                    posterior over an ERM h* (trained on S_1) plus a kl bound on h*

S_1 and S_2 are the two halves of a seeded shuffle of S.

Examples:
    >>> report = run_informed(dataset, prior, budget, mode='exact', cfg=TrainConfig(epochs=100))
    >>> print(f"{report.method}: bound={report.bound:.4f}")
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.bounds.concentration import DiscreteSupport, kl_bound_upper
from src.bounds.pacbayes import BoundInputs, ConfidenceBudget, pb_kl_upper, pb_split_kl_upper, sampling_upper
from src.hypotheses.base import (
    EstimationMode,
    HypothesisDistribution,
    HypothesisError,
    empirical_gibbs_loss,
    zero_one_losses,
)
from src.hypotheses.surrogates import SurrogateConfig
from src.hypotheses.training import TrainConfig, erm_train, train_excess_posterior, train_gibbs_posterior
from src.ingestion.datasets import Dataset, DatasetView
from src.recursion.excess import excess_indicator_means
from src.recursion.schedule import geometric_split
from src.streams import SeedStreams

logger = logging.getLogger(__name__)

TERNARY_SUPPORT = DiscreteSupport((-1.0, 0.0, 1.0))
REPORT_COLUMNS = ['method', 'train01', 'test01', 'bound']


@dataclass
class BaselineReport:
    """Outcome of one certified method."""
    method: str
    train01: float
    test01: Optional[float]
    bound: float
    kl: float
    n: int
    components: Dict[str, float] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)
    posterior: Optional[HypothesisDistribution] = field(default=None, repr=False)
    prior: Optional[HypothesisDistribution] = field(default=None, repr=False)
    reference: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def kl_over_n(self) -> float:
        return self.kl / self.n

    def row(self) -> Dict[str, Any]:
        return {'method': self.method, 'train01': self.train01, 'test01': self.test01, 'bound': self.bound}

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.row(),
            'kl': self.kl,
            'n': self.n,
            'kl_over_n': self.kl_over_n,
            'components': dict(self.components),
            'metadata': dict(self.metadata),
        }


def split_halves(dataset: Dataset, streams: SeedStreams) -> Tuple[DatasetView, DatasetView]:
    schedule = geometric_split(len(dataset), 2)
    data = dataset.view(streams.rng("split").permutation(len(dataset)))
    return data.subset(schedule.chunk(1)), data.subset(schedule.chunk(2))


def _inflate(mean: float, m: int, mode: EstimationMode, delta_part: float) -> float:
    return sampling_upper(mean, m, delta_part) if mode == 'sampled' else mean


def gibbs_errors(rho: HypothesisDistribution, dataset: Dataset, test_dataset: Optional[Dataset],
                 mode: EstimationMode, streams: SeedStreams) -> Tuple[float, Optional[float]]:
    train01 = empirical_gibbs_loss(rho, dataset.view(), mode, streams.seed("train-draws"))[0]
    test01 = None
    if test_dataset is not None and len(test_dataset):
        test01 = empirical_gibbs_loss(rho, test_dataset.view(), mode, streams.seed("test-draws"))[0]
    return train01, test01


def certify_gibbs(rho: HypothesisDistribution, prior: HypothesisDistribution, view: DatasetView,
                  budget: ConfidenceBudget, mode: EstimationMode,
                  streams: SeedStreams) -> Tuple[float, float, float]:
    """
    PAC-Bayes-kl bound of rho on a view against a prior.

    Returns:
        (bound, empirical Gibbs loss, KL(rho || prior))
    """
    emp, m = empirical_gibbs_loss(rho, view, mode, streams.seed("posterior-draws"))
    kl = rho.kl(prior)
    bound = pb_kl_upper(BoundInputs(_inflate(emp, m, mode, budget.delta_prime), kl, len(view)), budget.delta)
    return bound, emp, kl


def certify_excess(rho: HypothesisDistribution, pi1: HypothesisDistribution, view: DatasetView,
                   reference: np.ndarray, budget: ConfidenceBudget, mode: EstimationMode,
                   streams: SeedStreams) -> Tuple[float, Dict[str, float], float]:
    """
    Excess-loss certificate of rho over a reference classifier with losses `reference` on the view.

    The two indicators of the excess loss share 2 delta / 3 through PAC-Bayes-split-kl,
    the reference gets delta / 3 through the kl inequality. In sampled mode delta_prime
    is split between the two indicator estimates.

    Returns:
        (bound, components, KL(rho || pi1))
    """
    n = len(view)
    if len(reference) != n:
        raise HypothesisError(f"Reference losses cover {len(reference)} points, view has {n}")
    means = excess_indicator_means(rho, view, reference, 1.0, TERNARY_SUPPORT, mode,
                                   streams.seed("posterior-draws"))
    inflated = np.array([_inflate(mean, n, mode, budget.delta_prime / 2.0) for mean in means])
    kl = rho.kl(pi1)
    excess_bound = pb_split_kl_upper(np.clip(inflated, 0.0, 1.0), TERNARY_SUPPORT, kl, n,
                                     2.0 * budget.delta / 3.0)
    h_star_loss = float(np.mean(reference))
    h_star_bound = float(kl_bound_upper(h_star_loss, n, budget.delta / 3.0))
    components = {
        'excess_bound': excess_bound,
        'h_star_bound': h_star_bound,
        'excess_mean': float(TERNARY_SUPPORT.low + means @ TERNARY_SUPPORT.gaps),
        'h_star_loss': h_star_loss,
        'empirical_loss': empirical_gibbs_loss(rho, view, mode, streams.seed("posterior-draws"))[0],
    }
    return excess_bound + h_star_bound, components, kl


def _metadata(budget: ConfidenceBudget, mode: EstimationMode, streams: SeedStreams, **extra) -> Dict[str, Any]:
    return {
        'mode': mode,
        'delta': budget.delta,
        'delta_prime': budget.delta_prime if mode == 'sampled' else 0.0,
        'seeds': streams.lineage(),
        **extra,
    }


def run_uninformed(
    dataset: Dataset,
    prior: HypothesisDistribution,
    budget: ConfidenceBudget,
    mode: EstimationMode,
    cfg: TrainConfig,
    surrogate: Optional[SurrogateConfig] = None,
    seed: int = 0,
    test_dataset: Optional[Dataset] = None
) -> BaselineReport:
    """
    PAC-Bayes-kl certificate of a posterior trained on all of S against a data-free prior.

    Args:
        dataset: Training sample S
        prior: Data-free prior pi_0
        budget: delta for the kl bound, delta_prime for the sampling estimate
        mode: "exact" (finite backend) or "sampled"
        cfg: Optimizer settings (seed overridden by the "trainer:posterior" stream)
        surrogate: Surrogate parameters of network trainers
        seed: Root seed
        test_dataset: Optional held-out sample

    Returns:
        BaselineReport tagged "uninformed"
    """
    streams = SeedStreams(seed)
    view = dataset.view()
    n = len(view)
    rho = train_gibbs_posterior(prior, view, n, budget.delta, 1,
                                replace(cfg, seed=streams.seed("trainer:posterior")), surrogate)

    bound, emp, kl = certify_gibbs(rho, prior, view, budget, mode, streams)
    train01, test01 = gibbs_errors(rho, dataset, test_dataset, mode, streams)

    logger.info(f"uninformed: emp={emp:.4f} KL/n={kl / n:.4f} bound={bound:.4f}")
    return BaselineReport(
        method='uninformed', train01=train01, test01=test01, bound=bound, kl=kl, n=n,
        components={'empirical_loss': emp},
        metadata=_metadata(budget, mode, streams),
        posterior=rho,
        prior=prior,
    )


def run_informed(
    dataset: Dataset,
    prior: HypothesisDistribution,
    budget: ConfidenceBudget,
    mode: EstimationMode,
    cfg: TrainConfig,
    surrogate: Optional[SurrogateConfig] = None,
    seed: int = 0,
    test_dataset: Optional[Dataset] = None
) -> BaselineReport:
    """
    PAC-Bayes-kl certificate on S_2 of a posterior whose prior pi_1 was trained on S_1.
    """
    streams = SeedStreams(seed)
    s1, s2 = split_halves(dataset, streams)
    pi1 = train_gibbs_posterior(prior, s1, len(s1), budget.delta, 1,
                                replace(cfg, seed=streams.seed("trainer:prior")), surrogate)
    rho = train_gibbs_posterior(pi1, s2, len(s2), budget.delta, 1,
                                replace(cfg, seed=streams.seed("trainer:posterior")), surrogate)

    bound, emp, kl = certify_gibbs(rho, pi1, s2, budget, mode, streams)
    train01, test01 = gibbs_errors(rho, dataset, test_dataset, mode, streams)

    logger.info(f"informed: emp={emp:.4f} KL/n={kl / len(s2):.4f} bound={bound:.4f}")
    return BaselineReport(
        method='informed', train01=train01, test01=test01, bound=bound, kl=kl, n=len(s2),
        components={'empirical_loss': emp},
        metadata=_metadata(budget, mode, streams, split=[len(s1), len(s2)]),
        posterior=rho,
        prior=pi1,
    )


def run_informed_excess(
    dataset: Dataset,
    prior: HypothesisDistribution,
    budget: ConfidenceBudget,
    mode: EstimationMode,
    cfg: TrainConfig,
    surrogate: Optional[SurrogateConfig] = None,
    seed: int = 0,
    test_dataset: Optional[Dataset] = None
) -> BaselineReport:
    """
    Informed prior plus excess loss over an ERM reference h*.

    The excess loss(h) - loss(h*) lives on {-1, 0, 1}; see `certify_excess` for how
    delta and delta_prime are shared.

    Returns:
        BaselineReport with components excess_bound, h_star_bound, excess_mean,
        h_star_loss and empirical_loss (bound = excess_bound + h_star_bound)
    """
    streams = SeedStreams(seed)
    s1, s2 = split_halves(dataset, streams)
    pi1 = train_gibbs_posterior(prior, s1, len(s1), budget.delta, 1,
                                replace(cfg, seed=streams.seed("trainer:prior")), surrogate)
    h_star = erm_train(s1, prior, replace(cfg, seed=streams.seed("trainer:erm")), surrogate)
    reference = zero_one_losses(h_star, s2.X, s2.y)

    rho = train_excess_posterior(pi1, s2, reference, len(s2), 1.0, TERNARY_SUPPORT,
                                 2.0 * budget.delta / 3.0, 1,
                                 replace(cfg, seed=streams.seed("trainer:posterior")), surrogate)

    bound, components, kl = certify_excess(rho, pi1, s2, reference, budget, mode, streams)
    train01, test01 = gibbs_errors(rho, dataset, test_dataset, mode, streams)

    logger.info(
        f"informed-excess: excess bound={components['excess_bound']:.4f} "
        f"h* bound={components['h_star_bound']:.4f} total={bound:.4f}"
    )
    return BaselineReport(
        method='informed-excess', train01=train01, test01=test01, bound=bound, kl=kl, n=len(s2),
        components=components,
        metadata=_metadata(budget, mode, streams, split=[len(s1), len(s2)]),
        posterior=rho,
        prior=pi1,
        reference=reference,
    )


BASELINES = {
    'uninformed': run_uninformed,
    'informed': run_informed,
    'informed-excess': run_informed_excess,
}
