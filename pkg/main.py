#!/usr/bin/env python3
"""
Rough-Set Gene Selector

Command line front end: discretize expression data, select genes with
Quick Reduct, cluster and classify the reduced data, and report the
confusion-matrix metrics.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from core.clustering import DEFAULT_FUZZINESS, fcm, kmeans, predict_hard
from core.decision_table import from_coded_matrix, rescale_codes, save_codes_csv
from core.discretizer import DEFAULT_BINS, discretize, fit_discretizer
from core.errors import DataError, StageError
from core.evaluation import confusion, map_clusters_to_classes, metrics_table
from core.matrix_loader import MatrixLoader
from core.network import NetworkConfig, init_network, predict, train
from core.pipeline import (
    CLUSTER_ALGORITHMS,
    METHOD_LABELS,
    PipelineConfig,
    aggregate_runs,
    run_pipeline,
    stratified_split,
)
from core.roughset import exhaustive_reduct_result, quick_reduct
from core.synthetic import SyntheticConfig, write_synthetic
from utils.artifact_writer import dump_json, load_json, preview_reduct, to_jsonable
from utils.seeding import derive_seed

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_STAGE = 3


class ToolArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _add_input_options(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument('--input', '-i', required=required, default=None,
                        help='Input CSV/TSV file (one row per sample)')
    parser.add_argument('--class-column', default=None,
                        help='Class column: index, name, or "last" (default: last)')
    parser.add_argument('--no-header', action='store_true',
                        help='Input file has no header row')
    parser.add_argument('--delimiter', choices=['comma', 'tab'], default=None,
                        help='Field separator (default: comma)')


def _add_output_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--out', '-o', default=None, help='Output directory')
    parser.add_argument('--format', choices=['json', 'table'], default='table',
                        help='Console output format (default: table)')
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging')


def build_parser() -> argparse.ArgumentParser:
    """Assemble the command line interface."""
    parser = ToolArgumentParser(
        prog='main.py',
        description="Rough-set gene selection with clustering and BPN evaluation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
How it works:
  1. Loads a samples x genes CSV with one class column
  2. Discretizes every gene with 1-D K-Means (default 3 bins)
  3. Selects genes with Quick Reduct (rough-set dependency degree)
  4. Clusters the selected genes with K-Means and Fuzzy C-Means
  5. Trains a back-propagation network on the selected genes
  6. Reports TP/FP/TN/FN rates, accuracy and error per method

Examples:
  # Make a synthetic dataset and run everything
  python main.py synth --out data/demo.csv --seed 3
  python main.py pipeline --input data/demo.csv --out runs/demo --seed 3

  # Run stages one at a time
  python main.py discretize --input data/demo.csv --out runs/demo
  python main.py reduct --input runs/demo/discretized.csv --format json
        """
    )
    sub = parser.add_subparsers(dest='command', metavar='command', parser_class=ToolArgumentParser)

    synth = sub.add_parser('synth', help='Generate a synthetic expression dataset')
    synth.add_argument('--out', '-o', required=True, help='Destination CSV path')
    synth.add_argument('--samples', type=int, default=60, help='Number of samples (default: 60)')
    synth.add_argument('--informative', type=int, default=2, help='Informative genes (default: 2)')
    synth.add_argument('--noise', type=int, default=48, help='Noise genes (default: 48)')
    synth.add_argument('--classes', type=int, default=2, help='Class count (default: 2)')
    synth.add_argument('--separation', type=float, default=4.0,
                       help='Class mean separation in standard deviations (default: 4)')
    synth.add_argument('--seed', type=int, default=0, help='RNG seed (default: 0)')
    synth.add_argument('--format', choices=['json', 'table'], default='table')
    synth.add_argument('--verbose', '-v', action='store_true')

    disc = sub.add_parser('discretize', help='K-Means discretization of every gene')
    _add_input_options(disc)
    disc.add_argument('--bins', type=int, default=DEFAULT_BINS, help=f'Bins per gene (default: {DEFAULT_BINS})')
    disc.add_argument('--seed', type=int, default=0, help='Master seed (default: 0)')
    disc.add_argument('--workers', type=int, default=1, help='Threads for per-gene fitting')
    _add_output_options(disc)

    reduct = sub.add_parser('reduct', help='Select genes from a discretized table')
    _add_input_options(reduct)
    reduct.add_argument('--method', choices=['quick', 'exhaustive'], default='quick',
                        help='Reduct search (default: quick)')
    _add_output_options(reduct)

    cluster = sub.add_parser('cluster', help='Cluster samples and align clusters with classes')
    _add_input_options(cluster)
    cluster.add_argument('--cluster', type=_csv_list, default=list(CLUSTER_ALGORITHMS),
                         help='Algorithms, comma separated (default: kmeans,fcm)')
    cluster.add_argument('--fcm-m', type=float, default=DEFAULT_FUZZINESS, help='FCM fuzzification m (default: 2.0)')
    cluster.add_argument('--seed', type=int, default=0, help='Master seed (default: 0)')
    cluster.add_argument('--positive-class', type=int, default=None, help='Positive class code')
    _add_output_options(cluster)

    classify = sub.add_parser('classify', help='Train and test a BPN on a discretized table')
    _add_input_options(classify)
    classify.add_argument('--epochs', type=int, default=500, help='Training epochs (default: 500)')
    classify.add_argument('--hidden', type=_int_list, default=None, help='Hidden layer widths, e.g. 5 or 8,4')
    classify.add_argument('--learning-rate', type=float, default=0.5, help='Learning rate (default: 0.5)')
    classify.add_argument('--train-fraction', type=float, default=0.7, help='Training share (default: 0.7)')
    classify.add_argument('--seed', type=int, default=0, help='Master seed (default: 0)')
    classify.add_argument('--positive-class', type=int, default=None, help='Positive class code')
    _add_output_options(classify)

    evaluate = sub.add_parser('evaluate', help='Confusion metrics for predictions vs truth, or across runs',
                              formatter_class=argparse.RawDescriptionHelpFormatter,
                              epilog="Give --predicted and --truth, or --runs with pipeline output directories.")
    evaluate.add_argument('--predicted', default=None, help='File with one predicted class index per line')
    evaluate.add_argument('--truth', default=None, help='File with one true class index per line')
    evaluate.add_argument('--runs', nargs='+', default=None, metavar='DIR',
                          help='Pipeline output directories to combine into one multi-dataset report')
    evaluate.add_argument('--positive-class', type=int, default=1, help='Positive class code (default: 1)')
    evaluate.add_argument('--dataset', default='dataset', help='Dataset name for the report')
    evaluate.add_argument('--method', default='method', help='Method name for the report')
    _add_output_options(evaluate)

    pipeline = sub.add_parser('pipeline', help='Run every stage end to end',
                              formatter_class=argparse.RawDescriptionHelpFormatter,
                              epilog="Flags override values from --config.")
    _add_input_options(pipeline, required=False)
    pipeline.add_argument('--config', default=None, help='JSON config file')
    pipeline.add_argument('--bins', type=int, default=None, help=f'Bins per gene (default: {DEFAULT_BINS})')
    pipeline.add_argument('--seed', type=int, default=None, help='Master seed (default: 0)')
    pipeline.add_argument('--method', choices=['quick', 'exhaustive'], default=None, help='Reduct search')
    pipeline.add_argument('--cluster', type=_csv_list, default=None, help='Algorithms (default: kmeans,fcm)')
    pipeline.add_argument('--fcm-m', type=float, default=None, help='FCM fuzzification m')
    pipeline.add_argument('--epochs', type=int, default=None, help='BPN epochs')
    pipeline.add_argument('--hidden', type=_int_list, default=None, help='BPN hidden layer widths')
    pipeline.add_argument('--positive-class', type=int, default=None, help='Positive class code')
    pipeline.add_argument('--workers', type=int, default=None, help='Threads for concurrent fits')
    _add_output_options(pipeline)

    return parser


def _loader(args) -> MatrixLoader:
    delimiter = '\t' if args.delimiter == 'tab' else ','
    return MatrixLoader(delimiter=delimiter, has_header=not args.no_header)


def _emit(args, data: Dict[str, Any], text: Optional[str] = None) -> None:
    if args.format == 'json':
        print(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False, default=to_jsonable))
    elif text is not None:
        print(text)


def _out_dir(args) -> Optional[Path]:
    if not args.out:
        return None
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_synth(args) -> int:
    config = SyntheticConfig(args.samples, args.informative, args.noise, args.classes, args.separation, args.seed)
    truth = write_synthetic(config, args.out)
    _emit(args, truth, f"🧪 Wrote {args.out} ({config.samples} samples, "
                       f"{config.informative + config.noise} genes)\n"
                       f"📄 Ground truth: {truth['truth_path']} (informative: {', '.join(truth['informative'])})")
    return EXIT_OK


def cmd_discretize(args) -> int:
    matrix = _loader(args).load_csv(args.input, args.class_column or 'last')
    if args.bins < 1:
        raise DataError(f"bins must be >= 1, got {args.bins}")
    disc = fit_discretizer(matrix, args.bins, derive_seed(args.seed, 'discretize'), workers=args.workers)
    table = discretize(matrix, disc)
    report = disc.to_dict()
    out = _out_dir(args)
    if out:
        dump_json(report, str(out / 'discretization.json'))
        save_codes_csv(table, str(out / 'discretized.csv'))
    _emit(args, report, f"📊 Discretized {matrix.n_attributes} genes into up to {args.bins} bins"
                        f" ({len(disc.clamped)} clamped)")
    return EXIT_OK


def cmd_reduct(args) -> int:
    matrix = _loader(args).load_csv(args.input, args.class_column or 'last')
    table = from_coded_matrix(matrix)
    result = exhaustive_reduct_result(table) if args.method == 'exhaustive' else quick_reduct(table)
    report = result.to_dict()
    out = _out_dir(args)
    if out:
        dump_json(report, str(out / 'reduct.json'))
    if args.format == 'json':
        _emit(args, report)
    else:
        preview_reduct(result)
    return EXIT_OK


def cmd_cluster(args) -> int:
    matrix = _loader(args).load_csv(args.input, args.class_column or 'last')
    unknown = [c for c in args.cluster if c not in CLUSTER_ALGORITHMS]
    if unknown:
        raise DataError(f"unknown cluster algorithm(s): {', '.join(unknown)}")
    k = matrix.n_classes
    positive = args.positive_class if args.positive_class is not None else (1 if k > 1 else 0)
    out = _out_dir(args)
    results = {}
    rows = []
    for algorithm in args.cluster:
        seed = derive_seed(args.seed, algorithm)
        if algorithm == 'kmeans':
            model = kmeans(matrix.values, k, seed=seed)
        else:
            model = fcm(matrix.values, k, m=args.fcm_m, seed=seed)
        clusters = predict_hard(model, matrix.values)
        mapping = map_clusters_to_classes(clusters, matrix.class_labels, n_clusters=k, n_classes=k)
        report = confusion(mapping.apply(clusters), matrix.class_labels, positive)
        results[algorithm] = {"model": model.to_dict(), "mapping": mapping.to_dict(), "confusion": report.to_dict()}
        rows.append((Path(args.input).stem, METHOD_LABELS[algorithm], report))
        if out:
            dump_json(results[algorithm], str(out / f'{algorithm}.json'))
    _emit(args, results, metrics_table(rows).render())
    return EXIT_OK


def cmd_classify(args) -> int:
    matrix = _loader(args).load_csv(args.input, args.class_column or 'last')
    table = from_coded_matrix(matrix)
    if not 0.0 < args.train_fraction < 1.0:
        raise DataError(f"train fraction must be in (0, 1), got {args.train_fraction}")
    inputs = rescale_codes(table)
    labels = table.decision
    train_idx, test_idx = stratified_split(labels, args.train_fraction, derive_seed(args.seed, 'split'))
    if test_idx.size == 0:
        test_idx = train_idx
    config = NetworkConfig(
        input_dim=table.n_attributes,
        output_dim=len(table.class_names),
        hidden_sizes=args.hidden,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        seed=derive_seed(args.seed, 'bpn'),
    )
    net = init_network(config)
    train_report = train(net, inputs[train_idx], labels[train_idx], config)
    predicted = predict(net, inputs[test_idx])
    positive = args.positive_class if args.positive_class is not None else (1 if len(table.class_names) > 1 else 0)
    report = confusion(predicted, labels[test_idx], positive)
    result = {
        "train": train_idx.tolist(),
        "test": test_idx.tolist(),
        "predicted": predicted.tolist(),
        "training": train_report.to_dict(),
        "confusion": report.to_dict(),
    }
    out = _out_dir(args)
    if out:
        dump_json(net.to_dict(config), str(out / 'bpn_network.json'))
        dump_json(result, str(out / 'bpn.json'))
        train_report.to_csv(str(out / 'bpn_loss.csv'))
    _emit(args, result, metrics_table([(Path(args.input).stem, 'BPN', report)]).render())
    return EXIT_OK


def _read_labels(path: str) -> np.ndarray:
    if not Path(path).exists():
        raise FileNotFoundError(f"file not found: {path}")
    try:
        frame = pd.read_csv(path, header=None)
    except pd.errors.EmptyDataError:
        raise DataError(f"{path}: no rows") from None
    column = pd.to_numeric(frame.iloc[:, 0], errors='coerce')
    bad = (column.isna() | (column != column.round())).to_numpy()
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise DataError(f"{path}: class indices must be integers, got '{frame.iloc[row, 0]}' at line {row + 1}")
    return column.to_numpy(dtype=int)


def _evaluate_runs(args) -> int:
    table, selected = aggregate_runs(args.runs)
    report = table.to_dict()
    report['selected_features'] = selected.reset_index().to_dict(orient='records')
    text = selected.to_string() + '\n\n' + table.render()
    out = _out_dir(args)
    if out:
        dump_json(report, str(out / 'metrics.json'))
        (out / 'metrics.txt').write_text(text, encoding='utf-8')
        table.to_csv(str(out / 'metrics.csv'))
    _emit(args, report, f"📊 Combined {len(args.runs)} run(s)\n\n{text}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if args.runs:
        return _evaluate_runs(args)
    predicted = _read_labels(args.predicted)
    truth = _read_labels(args.truth)
    report = confusion(predicted, truth, args.positive_class)
    table = metrics_table([(args.dataset, args.method, report)])
    out = _out_dir(args)
    if out:
        dump_json(table.to_dict(), str(out / 'metrics.json'))
        (out / 'metrics.txt').write_text(table.render(), encoding='utf-8')
    _emit(args, report.to_dict(), table.render())
    return EXIT_OK


def _pipeline_config(args) -> PipelineConfig:
    base: Dict[str, Any] = {}
    if args.config:
        base = load_json(args.config)
        if not isinstance(base, dict):
            raise DataError(f"{args.config}: config must be a JSON object")
    overrides = {
        'input_path': args.input,
        'class_column': args.class_column,
        'bins': args.bins,
        'seed': args.seed,
        'method': args.method,
        'clusterers': args.cluster,
        'fcm_m': args.fcm_m,
        'epochs': args.epochs,
        'hidden': args.hidden,
        'positive_class': args.positive_class,
        'workers': args.workers,
        'output_dir': args.out,
    }
    if args.no_header:
        overrides['has_header'] = False
    if args.delimiter:
        overrides['delimiter'] = '\t' if args.delimiter == 'tab' else ','
    base.update({key: value for key, value in overrides.items() if value is not None})
    config = PipelineConfig.from_dict(base)
    config.validate()
    return config


def cmd_pipeline(args) -> int:
    config = _pipeline_config(args)
    if args.format == 'table':
        print("🧬 Rough-Set Gene Selector")
        print("=" * 26)
        print(f"📝 Input: {config.input_path}")
        print(f"🎲 Seed: {config.seed}   Bins: {config.bins}   Reduct: {config.method}")
        print(f"\n🚀 Running pipeline...")

    report = run_pipeline(config)

    summary = {key: value for key, value in report.items() if key != 'metrics'}
    summary['metrics'] = report['metrics'].to_dict()
    if args.format == 'json':
        _emit(args, summary)
    else:
        print(f"\n🧬 Selected genes: {', '.join(report['selected'])}")
        print(f"   γ_C(D) = {report['gamma_full']:.4f}  reached: {'yes' if report['reached_full'] else 'no'}\n")
        print(report['metrics'].render())
        print(f"✅ Pipeline completed!")
        print(f"📄 Manifest: {report['manifest']}")
    return EXIT_OK


COMMANDS = {
    'synth': cmd_synth,
    'discretize': cmd_discretize,
    'reduct': cmd_reduct,
    'cluster': cmd_cluster,
    'classify': cmd_classify,
    'evaluate': cmd_evaluate,
    'pipeline': cmd_pipeline,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point; returns the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_USAGE
    if args.command == 'evaluate' and not args.runs and not (args.predicted and args.truth):
        parser.error('evaluate needs --predicted and --truth, or --runs')

    logging.basicConfig(
        level=logging.DEBUG if getattr(args, 'verbose', False) else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
    )

    try:
        return COMMANDS[args.command](args)
    except StageError as e:
        print(f"❌ Stage '{e.stage}' failed: {e.cause}", file=sys.stderr)
        return EXIT_STAGE
    except (DataError, FileNotFoundError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        print("\n\n⏹️  Operation cancelled by user", file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
