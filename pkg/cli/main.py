"""
Main CLI interface for the fusion emotion toolkit.

This module provides the command-line interface with argument
parsing, config-file merging and the exit-code contract:
0 success, 1 numerical failure, 2 I/O or configuration error,
3 unexpected internal error.
"""

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from config import get_settings, setup_logging
from src.data.folds import make_folds
from src.dsp.feature_io import load_features
from src.exceptions import ConfigurationError, FusionError, NumericalError, ProbeError
from src.gradcheck import case_registry, initialize_cases, run_case
from src.models import PRESETS, ModelConfig, RunConfig
from src.services import (
    CorpusService, EvaluationService, ExperimentService, FeaturizeService,
    GridSearchService, ReportService, TrainingService, alpha_grid,
)
from src.training.checkpoint import load_checkpoint, save_checkpoint

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

# keys that configure the process rather than the run
_PROCESS_KEYS = ("command", "config", "log_level")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument('--config', help='JSON file with run settings (flags take precedence)')
    common.add_argument('--seed', type=int, help='Random seed (default: 0)')
    common.add_argument('--out', help='Output directory (default: FUSION_OUTPUT_DIR or ./runs)')
    common.add_argument('--threads', type=int, help='Worker threads (default: FUSION_THREADS or 1)')
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Override the log level')
    return common


def _training_options() -> argparse.ArgumentParser:
    training = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    training.add_argument('--alpha', type=float, help='Regularization weight in [0, 1] (default: 0.1)')
    training.add_argument('--epochs', type=int, help='Training epochs (default: 30)')
    training.add_argument('--learning-rate', type=float, help='Adam step size (default: 0.001)')
    training.add_argument('--batch-size', type=int, help='Mini-batch size (default: 64)')
    training.add_argument('--baseline', action='store_true',
                          help='Train without discriminator (forces alpha = 0)')
    training.add_argument('--folds', type=int, help='Cross-validation folds (default: 10)')
    return training


def _synth_options() -> argparse.ArgumentParser:
    synth = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    synth.add_argument('--classes', type=int, help='Number of emotion classes (default: 4)')
    synth.add_argument('--per-class', type=int, help='Samples per class (default: 400)')
    synth.add_argument('--rho', type=float, help='Conflict probability (default: 0.3)')
    synth.add_argument('--sigma', type=float, help='Noise scale (default: 0.5)')
    synth.add_argument('--proportions', choices=['iemocap'],
                       help='Use four-emotion benchmark class proportions')
    return synth


def create_parser() -> argparse.ArgumentParser:
    """Create the command-line argument parser."""

    parser = argparse.ArgumentParser(
        description="Contrastive-regularized audio/text emotion fusion",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s gencorpus --classes 4 --per-class 400 --rho 0.3 --sigma 0.5 --seed 7 --out data/
  %(prog)s train --data data/manifest.txt --alpha 0.1 --out runs/a01
  %(prog)s eval --checkpoint runs/a01/checkpoint.cfck --data data/manifest.txt --fold 0
  %(prog)s gridsearch --data data/manifest.txt --grid-step 0.1 --threads 4
  %(prog)s compare --preset desk --seeds 5
  %(prog)s gradcheck
        """
    )
    common, training, synth = _common_options(), _training_options(), _synth_options()

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    subparsers.add_parser(
        'gencorpus', parents=[common, synth],
        help='Generate a synthetic corpus with controllable modality conflict'
    )

    featurize_parser = subparsers.add_parser(
        'featurize', parents=[common],
        help='Extract spectrogram features from WAV files'
    )
    featurize_parser.add_argument('--wav-dir', help='Directory with <utterance_id>.wav files')
    featurize_parser.add_argument('--manifest', help='CSV with utterance_id,label,embedding columns')
    featurize_parser.add_argument('--classes', type=int, help='Number of emotion classes (default: 4)')

    train_parser = subparsers.add_parser(
        'train', parents=[common, training],
        help='Train one model on a fold split'
    )
    train_parser.add_argument('--data', help='Feature manifest')
    train_parser.add_argument('--classes', type=int, help='Number of emotion classes (default: 4)')
    train_parser.add_argument('--fold', type=int, help='Test fold (default: 0)')

    eval_parser = subparsers.add_parser(
        'eval', parents=[common],
        help='Evaluate a checkpoint'
    )
    eval_parser.add_argument('--checkpoint', help='Checkpoint file')
    eval_parser.add_argument('--data', help='Feature manifest')
    eval_parser.add_argument('--folds', type=int, help='Fold count used for training (default: 10)')
    eval_parser.add_argument('--fold', type=int, help='Evaluate only this test fold (default: all data)')

    grid_parser = subparsers.add_parser(
        'gridsearch', parents=[common, training],
        help='Sweep alpha over cross-validation folds'
    )
    grid_parser.add_argument('--data', help='Feature manifest')
    grid_parser.add_argument('--classes', type=int, help='Number of emotion classes (default: 4)')
    grid_parser.add_argument('--grid-step', type=float, help='Alpha step (default: 0.1)')
    grid_parser.add_argument('--grid-folds', type=int, help='Folds trained per alpha (default: 3)')

    gradcheck_parser = subparsers.add_parser(
        'gradcheck', parents=[common],
        help='Check analytic gradients against finite differences'
    )
    gradcheck_parser.add_argument('--h', type=float, help='Finite-difference step (default: 1e-5)')
    gradcheck_parser.add_argument('--tol', type=float, help='Max relative error (default: 1e-4)')
    gradcheck_parser.add_argument('--max-coords', type=int, help='Probe at most this many coordinates per parameter')
    gradcheck_parser.add_argument('--cases', nargs='+', help='Run only these cases')

    compare_parser = subparsers.add_parser(
        'compare', parents=[common, training, synth],
        help='Compare alphas over several seeds on synthetic corpora'
    )
    compare_parser.add_argument('--alphas', type=float, nargs='+', help='Alphas to compare (default: 0.0 0.1)')
    compare_parser.add_argument('--seeds', type=int, help='Number of seeds (default: 5)')
    compare_parser.add_argument('--fold', type=int, help='Test fold (default: 0)')
    compare_parser.add_argument('--preset', choices=sorted(PRESETS),
                                help='Reduced network and run defaults (desk: 16x16 spectrograms, 10 epochs)')

    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < preset < JSON config file < explicit flags."""
    values: Dict[str, Any] = {}
    config_path = getattr(args, 'config', None)
    if config_path:
        try:
            values = json.loads(Path(config_path).read_text(encoding='utf-8'))
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{config_path}: invalid JSON ({e})") from e
        if not isinstance(values, dict):
            raise ConfigurationError(f"{config_path}: top level must be an object")
    flags = {k: v for k, v in vars(args).items() if k not in _PROCESS_KEYS and v is not None}
    preset = flags.get('preset', values.get('preset'))
    if preset is not None and getattr(args, 'command', 'compare') != 'compare':
        raise ConfigurationError(f"preset {preset!r} only applies to compare")
    defaults = PRESETS.get(preset, {}) if isinstance(preset, str) else {}
    return RunConfig(**{**defaults, **values, **flags})


def _output_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out or get_settings().output.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _threads(cfg: RunConfig) -> int:
    return cfg.threads or get_settings().compute.threads


def _train_dtype() -> np.dtype:
    return np.dtype(get_settings().compute.train_dtype)


def _require_file(value: Optional[str], flag: str) -> Path:
    if not value:
        raise ConfigurationError(f"{flag} is required")
    path = Path(value)
    if not path.is_file():
        raise FileNotFoundError(2, f"{flag} file not found", str(path))
    return path


def handle_gencorpus_command(cfg: RunConfig) -> int:
    """Handle the gencorpus command."""
    out = _output_dir(cfg)
    summary = CorpusService().generate_to(cfg.synth_config(), out)

    print(f"Generated {summary.samples} samples in {out}")
    for c, count in enumerate(summary.class_counts):
        print(f"  class {c}: {count}")
    print(f"  conflicted: {summary.conflicts} ({summary.conflict_rate:.1%})")
    return EXIT_OK


def handle_featurize_command(cfg: RunConfig) -> int:
    """Handle the featurize command."""
    manifest = _require_file(cfg.manifest, '--manifest')
    if not cfg.wav_dir or not Path(cfg.wav_dir).is_dir():
        raise FileNotFoundError(2, "--wav-dir directory not found", str(cfg.wav_dir))
    out = _output_dir(cfg)

    service = FeaturizeService(num_classes=cfg.classes, max_workers=_threads(cfg))
    summary = service.featurize(cfg.wav_dir, manifest, out)

    print(f"Extracted {summary.segments} segments from {summary.utterances} utterances into {out}")
    if summary.skipped:
        print(f"  skipped (too short): {', '.join(summary.skipped)}")
    return EXIT_OK


def handle_train_command(cfg: RunConfig) -> int:
    """Handle the train command."""
    data = _require_file(cfg.data, '--data')
    out = _output_dir(cfg)
    train_cfg = cfg.train_config()

    corpus = load_features(data, cfg.classes)
    split = make_folds(corpus, k=cfg.folds, seed=cfg.seed).split(cfg.fold or 0)
    test_set = corpus.subset(split.test)

    evaluation = EvaluationService(batch_size=train_cfg.eval_batch_size)
    trainer = TrainingService(ModelConfig(num_classes=cfg.classes), evaluation, dtype=_train_dtype())
    result = trainer.train(corpus.subset(split.train), corpus.subset(split.validation), train_cfg)

    reports = ReportService()
    save_checkpoint(out / "checkpoint.cfck", result.checkpoint)
    reports.write_frame(out / "loss_curve.csv", reports.loss_curve_frame(result.curve))
    test_report = evaluation.evaluate(result.checkpoint, test_set)
    reports.write_json(out / "train_summary.json", {
        "alpha": train_cfg.alpha,
        "seed": train_cfg.seed,
        "fold": split.fold,
        "discriminator": train_cfg.use_discriminator,
        "best_epoch": result.best_epoch,
        "best_val_wa": result.best_val_wa,
        "best_val_ua": result.best_val_ua,
        "train_config": train_cfg.model_dump(),
        "test": test_report.to_dict(),
    })

    print(f"Kept epoch {result.best_epoch}: val UA {result.best_val_ua:.4f}, "
          f"test WA {test_report.wa:.4f}, test UA {test_report.ua:.4f}")
    return EXIT_OK


def handle_eval_command(cfg: RunConfig) -> int:
    """Handle the eval command."""
    checkpoint = load_checkpoint(_require_file(cfg.checkpoint, '--checkpoint'))
    data = _require_file(cfg.data, '--data')
    out = _output_dir(cfg)

    samples = load_features(data, checkpoint.model_config.num_classes)
    extra = {"checkpoint": str(cfg.checkpoint)}
    if cfg.fold is not None:
        # the split must match training unless a seed is given explicitly
        seed = cfg.seed if 'seed' in cfg.model_fields_set else checkpoint.train_config.seed
        plan = make_folds(samples, k=cfg.folds, seed=seed)
        samples = samples.subset(plan.split(cfg.fold).test)
        extra.update(fold=cfg.fold, folds=cfg.folds, fold_seed=seed)

    report = EvaluationService().evaluate(checkpoint, samples)
    ReportService().write_eval_report(out, report, extra=extra)

    print(f"WA {report.wa:.4f}  UA {report.ua:.4f}  "
          f"({report.n_utterances} utterances, {report.n_samples} segments)")
    return EXIT_OK


def handle_gridsearch_command(cfg: RunConfig) -> int:
    """Handle the gridsearch command."""
    data = _require_file(cfg.data, '--data')
    out = _output_dir(cfg)
    corpus = load_features(data, cfg.classes)
    plan = make_folds(corpus, k=cfg.folds, seed=cfg.seed)
    base_cfg = cfg.model_copy(update={"baseline": False}).train_config()
    trainer = TrainingService(ModelConfig(num_classes=cfg.classes), dtype=_train_dtype())
    service = GridSearchService(trainer, max_workers=_threads(cfg))
    result = service.run(corpus, base_cfg, plan, alphas=alpha_grid(cfg.grid_step), folds=cfg.grid_folds)

    reports = ReportService()
    reports.write_frame(out / "alpha_grid.csv", reports.grid_frame(result.points))
    reports.write_json(out / "alpha_grid.json", {
        "points": result.points,
        "selected_alpha": result.selected_alpha,
        "reference_alpha": result.reference_alpha,
        "folds": cfg.folds,
        "grid_folds": cfg.grid_folds,
        "seed": cfg.seed,
    })

    print(f"Selected alpha* = {result.selected_alpha} (reference {result.reference_alpha})")
    failed = [p.alpha for p in result.points if p.error]
    if failed:
        print(f"Failed grid points: {failed}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def handle_gradcheck_command(cfg: RunConfig) -> int:
    """Handle the gradcheck command."""
    initialize_cases()
    try:
        cases = case_registry.select(cfg.cases)
    except KeyError as e:
        raise ConfigurationError(str(e.args[0])) from e
    out = _output_dir(cfg)

    with ThreadPoolExecutor(max_workers=_threads(cfg)) as executor:
        results = list(executor.map(
            lambda case: run_case(case, h=cfg.h, tol=cfg.tol, max_coords=cfg.max_coords, seed=cfg.seed),
            cases,
        ))

    reports = ReportService()
    reports.write_frame(out / "gradcheck.csv", reports.gradcheck_frame(results))

    for result in results:
        mark = "ok" if result.passed else "FAIL"
        print(f"  {result.case_name:<20} {result.report.max_rel_error:.3e}  {mark}")
    failed = [r.case_name for r in results if not r.passed]
    if failed:
        print(f"Gradient check failed for: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"All {len(results)} cases passed (tol {cfg.tol})")
    return EXIT_OK


def handle_compare_command(cfg: RunConfig) -> int:
    """Handle the compare command."""
    if not cfg.alphas:
        raise ConfigurationError("--alphas needs at least one value")
    out = _output_dir(cfg)
    base_cfg = cfg.model_copy(update={"baseline": False}).train_config()

    evaluation = EvaluationService()
    trainer = TrainingService(cfg.network_config(), evaluation, dtype=_train_dtype())
    service = ExperimentService(trainer, evaluation, max_workers=_threads(cfg))
    result = service.compare(cfg.synth_config(), base_cfg, alphas=cfg.alphas, seeds=cfg.seeds,
                             folds=cfg.folds, fold=cfg.fold or 0)

    reports = ReportService()
    reports.write_frame(out / "comparison.csv", reports.comparison_frame(result.rows))
    reports.write_json(out / "comparison.json", {
        "rows": result.rows,
        "summaries": result.summaries,
        "baseline_alpha": result.baseline_alpha,
        "gains_over_baseline": result.gains,
    })

    for summary in result.summaries:
        print(f"alpha={summary.alpha}: test WA {summary.mean_test_wa:.4f}  UA {summary.mean_test_ua:.4f}  "
              f"agreement {summary.mean_modality_agreement:.4f}  ({summary.runs} runs)")
    return EXIT_OK if all(s.runs for s in result.summaries) else EXIT_NUMERICAL


_HANDLERS = {
    'gencorpus': handle_gencorpus_command,
    'featurize': handle_featurize_command,
    'train': handle_train_command,
    'eval': handle_eval_command,
    'gridsearch': handle_gridsearch_command,
    'gradcheck': handle_gradcheck_command,
    'compare': handle_compare_command,
}


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    Main CLI entry point.

    Args:
        argv: Command line arguments. If None, uses sys.argv

    Returns:
        Exit code (0 success, 1 numerical failure, 2 I/O or configuration
        error, 3 unexpected internal error)
    """

    parser = create_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_INPUT

    try:
        setup_logging(level=getattr(args, 'log_level', None))
        cfg = load_run_config(args)
        return _HANDLERS[args.command](cfg)
    except (NumericalError, ProbeError, FloatingPointError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"Numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, FusionError, ValidationError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        print(f"Internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    """Main entry point for the CLI application."""
    sys.exit(cli_main())


if __name__ == '__main__':
    main()
