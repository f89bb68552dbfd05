"""Command-line interface: synthesize data, run the comparison, re-render reports.

Exit codes: 0 success, 1 usage error, 2 data/input error, 3 convergence
failure escalated by --strict. All diagnostics go to standard error.
"""

import argparse
import os
import sys
from pathlib import Path

from .dataset import SynthConfig, load_csv, save_csv, synthesize_dataset
from .errors import CvpoolError, DataError
from .experiment import ExperimentConfig, run_experiment
from .report import (
    CSV_NAMES,
    JSON_NAME,
    MARKDOWN_NAME,
    emit_report,
    load_report_json,
    write_report_files,
)
from .svm import TrainConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CONVERGENCE = 3


class _Parser(argparse.ArgumentParser):
    """argparse's default usage-error exit code is 2; this tool reserves 2
    for data errors, so remap usage problems to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_planted(text: str) -> tuple:
    """Parse ``"10:1.2,14:1.0"`` into ((10, 1.2), (14, 1.0))."""
    text = text.strip()
    if not text:
        return ()
    pairs = []
    for chunk in text.split(","):
        try:
            idx, delta = chunk.split(":")
            pairs.append((int(idx), float(delta)))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"bad planted spec {chunk!r}: expected INDEX:DELTA"
            ) from None
    return tuple(pairs)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cvpool", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    synth = sub.add_parser(
        "synth",
        help="write a synthetic dataset CSV",
        description="Generate a two-class Gaussian dataset with optional planted features.",
    )
    synth.add_argument("--out", required=True, help="output CSV path")
    synth.add_argument("--seed", required=True, type=int, help="generator seed")
    synth.add_argument("--n-right", type=int, default=31, help="samples in the +1 class")
    synth.add_argument("--n-left", type=int, default=25, help="samples in the -1 class")
    synth.add_argument("--d", type=int, default=16, help="number of features")
    synth.add_argument(
        "--planted",
        type=_parse_planted,
        default=(),
        help='class-separating features as "INDEX:DELTA,INDEX:DELTA,..."',
    )
    synth.add_argument("--force", action="store_true", help="overwrite an existing file")

    run = sub.add_parser(
        "run",
        help="run the two-recipe comparison experiment",
        description="Run the tandem fold-first vs. pooled-loss comparison and write report files.",
    )
    run.add_argument("--data", required=True, help="input dataset CSV")
    run.add_argument("--seed", required=True, type=int, help="master seed (all randomness derives from it)")
    run.add_argument("--out", required=True, help="output directory for report files")
    run.add_argument("--iterations", type=int, default=30, help="number of repetitions")
    run.add_argument("--folds", type=int, default=5, help="number of cross-validation folds")
    run.add_argument("--test-fraction", type=float, default=0.3, help="holdout fraction")
    run.add_argument("--max-subset", type=int, default=2, help="largest feature-subset size")
    run.add_argument("--box-constraint", type=float, default=1.0, help="SVM box constraint C")
    run.add_argument("--kkt-tolerance", type=float, default=1e-3, help="solver KKT tolerance")
    run.add_argument("--max-sweeps", type=int, default=100_000, help="solver sweep cap")
    run.add_argument(
        "--no-standardize",
        action="store_true",
        help="train on raw features instead of per-fold z-scores",
    )
    run.add_argument("--relevance-cutoff", type=float, default=0.8, help="feature-score relevance cutoff")
    run.add_argument("--alpha", type=float, default=0.05, help="U-test significance level")
    run.add_argument(
        "--threads",
        type=int,
        default=0,
        help="iteration worker threads (0 = auto); never changes results",
    )
    run.add_argument("--force", action="store_true", help="overwrite existing report files")
    run.add_argument(
        "--strict",
        action="store_true",
        help="exit 3 if any solver cell failed to converge",
    )

    rerender = sub.add_parser(
        "report",
        help="re-render an existing report.json to CSV and markdown",
        description="Re-render the tables of a previously written report.json.",
    )
    rerender.add_argument("report_json", help="path to report.json")
    rerender.add_argument("--out", required=True, help="output directory for the tables")
    rerender.add_argument("--force", action="store_true", help="overwrite existing files")

    return parser


def _refuse_overwrite(paths, force: bool) -> None:
    if force:
        return
    existing = [str(p) for p in paths if Path(p).exists()]
    if existing:
        raise UsageError(
            f"refusing to overwrite existing output ({', '.join(existing)}); use --force"
        )


class UsageError(Exception):
    pass


def _cmd_synth(args) -> int:
    out = Path(args.out)
    _refuse_overwrite([out], args.force)
    cfg = SynthConfig(
        n_per_class=(args.n_right, args.n_left),
        d=args.d,
        planted=args.planted,
        seed=args.seed,
    )
    dataset = synthesize_dataset(cfg)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(dataset, out)
    print(f"wrote {dataset.n_samples}x{dataset.n_features} dataset to {out}")
    return EXIT_OK


def _cmd_run(args) -> int:
    out_dir = Path(args.out)
    targets = [out_dir / JSON_NAME, *(out_dir / n for n in CSV_NAMES), out_dir / MARKDOWN_NAME]
    _refuse_overwrite(targets, args.force)
    dataset = load_csv(args.data)
    cfg = ExperimentConfig(
        master_seed=args.seed,
        iterations=args.iterations,
        K=args.folds,
        test_fraction=args.test_fraction,
        max_subset_size=args.max_subset,
        train_cfg=TrainConfig(
            box_constraint=args.box_constraint,
            kkt_tolerance=args.kkt_tolerance,
            max_sweeps=args.max_sweeps,
        ),
        standardize=not args.no_standardize,
        relevance_cutoff=args.relevance_cutoff,
        alpha=args.alpha,
    )
    threads = args.threads if args.threads > 0 else min(4, os.cpu_count() or 1)
    report = run_experiment(dataset, cfg, threads=threads)
    written = emit_report(report, out_dir)
    print(f"wrote {len(written)} report files to {out_dir}")
    unconverged = sum(r.unconverged_cells for r in report.records) + sum(
        0 if r.classic.model.converged and r.pooled.model.converged else 1
        for r in report.records
    )
    if unconverged:
        print(f"warning: {unconverged} solver cells did not converge", file=sys.stderr)
        if args.strict:
            return EXIT_CONVERGENCE
    return EXIT_OK


def _cmd_report(args) -> int:
    out_dir = Path(args.out)
    targets = [*(out_dir / n for n in CSV_NAMES), out_dir / MARKDOWN_NAME]
    _refuse_overwrite(targets, args.force)
    doc = load_report_json(args.report_json)
    written = write_report_files(doc, out_dir, formats=("csv", "markdown"))
    print(f"wrote {len(written)} table files to {out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_OK
    handler = {"synth": _cmd_synth, "run": _cmd_run, "report": _cmd_report}[args.command]
    try:
        return handler(args)
    except UsageError as exc:
        print(f"cvpool: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, CvpoolError) as exc:
        print(f"cvpool: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"cvpool: i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
