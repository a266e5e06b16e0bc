"""
Recursive PAC-Bayes Command Line

Subcommands:
    split      print the geometric chunk sizes of (n, T)
    run        train and certify one experiment configuration
    validate   Monte Carlo coverage of a bound
    compare    merge several configurations into one comparison table

Exit codes: 0 success, 1 configuration error, 2 runtime or data error,
3 validation failure.

Examples:
    $ python -m src.cli split --n 60000 --T 4
    7500,7500,15000,30000
    $ python -m src.cli run experiments/synthetic_rpb.json --verify
    $ python -m src.cli validate --harness split-kl --trials 10000
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from src.baselines.checkpoint import save_report, verify_report
from src.baselines.methods import BASELINES, BaselineReport
from src.bounds.concentration import BoundInputError, DiscreteSupport
from src.bounds.pacbayes import ConfidenceBudget
from src.config import settings
from src.hypotheses.base import HypothesisDistribution, HypothesisError, empirical_gibbs_loss
from src.hypotheses.finite import CategoricalDistribution, FiniteHypothesisClass
from src.hypotheses.network import GaussianNetworkDistribution, NetworkShape
from src.hypotheses.surrogates import SurrogateConfig
from src.hypotheses.training import TrainConfig
from src.ingestion.datasets import Dataset, DatasetError, stratified_subsample
from src.ingestion.parsers.idx import IDXParseError, load_idx
from src.ingestion.synthetic import ThresholdDistribution, gen_threshold_data
from src.ingestion.validators import ConfigError, ExperimentConfig, load_experiment
from src.recursion.checkpoint import save_run, verify_run
from src.recursion.pipeline import RecursivePipeline
from src.recursion.schedule import ScheduleError, geometric_split
from src.reporting import (
    baseline_frame,
    compare_frame,
    coverage_frame,
    trace_frame,
    write_csv,
    write_json,
)
from src.simulation.coverage import (
    CoverageReport,
    coverage_kl,
    coverage_recursive,
    coverage_sampling,
    coverage_split_kl,
)
from src.streams import SeedStreams

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_VALIDATION = 3

RUNTIME_ERRORS = (DatasetError, IDXParseError, HypothesisError, BoundInputError, ScheduleError, OSError)

SPLIT_KL_SUPPORT = DiscreteSupport((-0.5, 0.0, 0.5, 1.0))
SPLIT_KL_WEIGHTS = (0.1, 0.4, 0.4, 0.1)


class ValidationFailure(Exception):
    """A certified output failed re-validation or a coverage target was missed."""
    pass


def setup_logging(debug: bool = False, log_file: Optional[str] = None):
    """Configure root logging the same way for every subcommand."""
    log_level = logging.DEBUG if debug else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)
    log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    if log_file:
        logging.basicConfig(
            level=log_level,
            format=log_format,
            handlers=[
                logging.FileHandler(log_file),
                logging.StreamHandler()
            ],
            force=True,
        )
    else:
        logging.basicConfig(level=log_level, format=log_format, force=True)


def _require_valid(path: Path) -> ExperimentConfig:
    config, result = load_experiment(path)
    if not result.is_valid:
        raise ConfigError(f"{path}: {'; '.join(result.errors)}")
    logger.info(f"{path}: " + ", ".join(f"{key}={value}" for key, value in result.resolved.items()))
    return config


def load_data(config: ExperimentConfig, seed: int) -> Tuple[Dataset, Optional[Dataset]]:
    """Training and optional test data of a configuration."""
    streams = SeedStreams(seed)
    if config.dataset == 'synthetic':
        dist = ThresholdDistribution(config.theta_star, config.eta)
        train = gen_threshold_data(dist, config.n, streams.seed("data"))
        test = gen_threshold_data(dist, config.n_test, streams.seed("test-data")) if config.n_test > 0 else None
        return train, test

    train = load_idx(Path(config.train_images), Path(config.train_labels), config.n_classes)
    if config.subsample:
        train = stratified_subsample(train, config.subsample, streams.seed("subsample"))
    test = None
    if config.test_images:
        test = load_idx(Path(config.test_images), Path(config.test_labels), config.n_classes)
        if config.test_subsample:
            test = stratified_subsample(test, config.test_subsample, streams.seed("test-subsample"))
    return train, test


def build_prior(config: ExperimentConfig, dataset: Dataset, seed: int) -> HypothesisDistribution:
    """Data-free prior pi_0 of the configured hypothesis space."""
    if config.model == 'finite':
        return CategoricalDistribution.uniform(FiniteHypothesisClass.uniform_thresholds(config.n_hypotheses))
    shape = NetworkShape((dataset.n_features, *config.hidden_layers, dataset.n_classes))
    return GaussianNetworkDistribution.init_prior(shape, config.sigma0, seed=SeedStreams(seed).seed("init"))


def _train_cfg(config: ExperimentConfig) -> TrainConfig:
    return TrainConfig(
        learning_rate=config.learning_rate,
        momentum=config.momentum,
        batch_size=config.batch_size,
        epochs=config.epochs,
    )


def _surrogate(config: ExperimentConfig, dataset: Dataset) -> Optional[SurrogateConfig]:
    if config.model == 'finite':
        return None
    return SurrogateConfig(k=dataset.n_classes, c1=config.c1, c2=config.c2, p_min=config.p_min)


def run_experiment(config: ExperimentConfig, output_dir: Path, seed: int, verify: bool = False) -> Dict[str, Any]:
    """
    Train and certify one repetition of a configuration and write its outputs.

    Returns:
        Comparison row (method, train01, test01, bound)

    Raises:
        ValidationFailure: If --verify finds a bound row that does not re-validate
    """
    dataset, test_dataset = load_data(config, seed)
    prior = build_prior(config, dataset, seed)
    mode = config.estimation_mode

    if config.method == 'rpb':
        budget = ConfidenceBudget.for_recursion(config.T, config.delta, config.delta_prime)
        result = RecursivePipeline(
            dataset, prior, config.T, gamma_grid=config.grid, budget=budget, mode=mode,
            train_cfg=_train_cfg(config), surrogate=_surrogate(config, dataset), seed=seed,
            test_dataset=test_dataset,
        ).run()
        save_run(result, prior, output_dir, budget, extra={'config': config.model_dump()})
        write_csv(trace_frame(result.trace), output_dir / "trace.csv")

        if verify:
            _, check = verify_run(output_dir, dataset, test_dataset)
            if not check.is_valid:
                raise ValidationFailure(str(check))
            logger.info(f"All {config.T} bound rows re-validated from checkpoints")

        final = result.trace.records[-1]
        train01 = empirical_gibbs_loss(
            result.posteriors[-1], dataset.view(), mode, SeedStreams(seed).seed("train-draws")
        )[0]
        return {'method': 'rpb', 'train01': train01, 'test01': final.test01, 'bound': final.B_t}

    budget = ConfidenceBudget(delta=config.delta, delta_prime=config.delta_prime)
    report: BaselineReport = BASELINES[config.method](
        dataset, prior, budget, mode, _train_cfg(config), _surrogate(config, dataset),
        seed=seed, test_dataset=test_dataset,
    )
    save_report(report, output_dir, seed, budget, extra={'config': config.model_dump()})
    write_csv(baseline_frame([report]), output_dir / "report.csv")

    if verify:
        check = verify_report(output_dir, dataset, test_dataset)
        if not check.is_valid:
            raise ValidationFailure(str(check))
        logger.info(f"{config.method} bound row re-validated from checkpoints")
    return report.row()


def _repetition_dirs(config: ExperimentConfig) -> List[Tuple[int, Path]]:
    base = Path(config.output_dir) / config.run_name
    if config.repetitions == 1:
        return [(config.seed, base)]
    return [(config.seed + r, base / f"rep_{r}") for r in range(config.repetitions)]


def cmd_split(args: argparse.Namespace) -> int:
    schedule = geometric_split(args.n, args.T)
    print(",".join(str(size) for size in schedule.chunk_sizes))
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = _require_valid(Path(args.config))
    if args.output:
        config = config.model_copy(update={'output_dir': args.output})

    rows = [run_experiment(config, directory, seed, verify=args.verify)
            for seed, directory in _repetition_dirs(config)]
    df = compare_frame(rows)
    summary = write_csv(df, Path(config.output_dir) / config.run_name / "summary.csv")

    print(df.to_string(index=False))
    print(f"\nSummary written to {summary}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    trials = args.trials or settings.COVERAGE_TRIALS
    report: CoverageReport
    if args.harness == 'kl':
        report = coverage_kl(args.p, args.n, args.delta, trials, args.seed)
    elif args.harness == 'split-kl':
        report = coverage_split_kl(SPLIT_KL_SUPPORT, SPLIT_KL_WEIGHTS, args.n, args.delta, trials, args.seed)
    elif args.harness == 'sampling':
        values = FiniteHypothesisClass.uniform_thresholds(101).thresholds
        weights = [1.0 / len(values)] * len(values)
        report = coverage_sampling(values, weights, args.n, args.delta, trials, args.seed)
    else:
        if not args.config:
            raise ConfigError("--harness pipeline requires --config")
        config = _require_valid(Path(args.config))
        if config.dataset != 'synthetic' or config.model != 'finite':
            raise ConfigError("Pipeline coverage needs dataset='synthetic' and model='finite'")
        budget = (ConfidenceBudget.for_recursion(config.T, config.delta, config.delta_prime)
                  if config.method == 'rpb' else ConfidenceBudget(config.delta, delta_prime=config.delta_prime))
        report = coverage_recursive(
            n=config.n, T=config.T, budget=budget, trials=args.trials or 1000, seed=config.seed,
            method=config.method, dist=ThresholdDistribution(config.theta_star, config.eta),
            n_hypotheses=config.n_hypotheses, train_cfg=_train_cfg(config), gamma_grid=config.grid,
            workers=args.workers,
        )

    output = Path(args.output or settings.OUTPUT_DIR) / f"coverage_{report.harness}"
    write_csv(coverage_frame([report]), output.with_suffix(".csv"))
    write_json(report.to_dict(), output.with_suffix(".json"))
    print(repr(report))

    if not report.passed():
        raise ValidationFailure(
            f"Coverage {report.coverage:.4f} below target {report.target:.4f} - {report.slack:.4f}"
        )
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    configs = [_require_valid(Path(path)) for path in args.configs]
    rows = []
    for config in configs:
        for seed, directory in _repetition_dirs(config):
            rows.append(run_experiment(config, directory, seed))

    df = compare_frame(rows)
    write_csv(df, Path(args.output))
    print(df.to_string(index=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Recursive PAC-Bayes bounds")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument("--log-file", type=str, help="Log file path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="Print geometric chunk sizes")
    p.add_argument("--n", type=int, required=True, help="Sample size")
    p.add_argument("--T", type=int, required=True, help="Number of chunks")
    p.set_defaults(handler=cmd_split)

    p = sub.add_parser("run", help="Train and certify an experiment")
    p.add_argument("config", type=str, help="Experiment configuration (JSON)")
    p.add_argument("--output", type=str, help="Override output_dir")
    p.add_argument("--verify", action="store_true", help="Re-validate bound rows from checkpoints")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("validate", help="Monte Carlo coverage of a bound")
    p.add_argument("--harness", choices=["kl", "split-kl", "sampling", "pipeline"], default="split-kl")
    p.add_argument("--config", type=str, help="Experiment configuration of the pipeline harness")
    p.add_argument("--trials", type=int, help="Number of trials")
    p.add_argument("--n", type=int, default=100, help="Sample size of the kl, split-kl and sampling harnesses")
    p.add_argument("--p", type=float, default=0.1, help="Bernoulli mean of the kl harness")
    p.add_argument("--delta", type=float, default=0.05, help="Confidence parameter")
    p.add_argument("--seed", type=int, default=0, help="Root seed")
    p.add_argument("--workers", type=int, help="Worker processes of the pipeline harness")
    p.add_argument("--output", type=str, help="Output directory")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("compare", help="Comparison table across configurations")
    p.add_argument("configs", nargs="+", help="Experiment configurations (JSON)")
    p.add_argument("--output", type=str, required=True, help="Output CSV path")
    p.set_defaults(handler=cmd_compare)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Command-line entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.debug, args.log_file)

    try:
        return args.handler(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except ValidationFailure as e:
        logger.error(f"Validation failed: {e}")
        return EXIT_VALIDATION
    except RUNTIME_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
