"""Command-line entry point: ``loair <subcommand> ...``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
"""

import argparse
import csv
import logging
import sys

from . import bench
from .data import load_csv, save_csv, split
from .errors import ConfigError, DataError, FeatureLookupError, NumericError
from .model import TrainConfig, explain, load_model, predict, save_model, train
from .montecarlo import pick_samples, simulate_error_surface
from .ols import (design_matrix, expand_quadratic, fit_dataset, ols_predict, regression_metrics,
                  summary_table)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _training_args(parser):
    g = parser.add_argument_group("training")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--lr", type=float, default=1e-3)
    g.add_argument("--epochs", type=int, default=5000, help="maximum epochs")
    g.add_argument("--patience", type=int, default=100)
    g.add_argument("--batch", type=int, default=32)
    g.add_argument("--clip", type=float, default=10.0, help="global gradient-norm clip")
    g.add_argument("--no-clip", action="store_true", help="disable gradient clipping")
    g.add_argument("--eps", type=float, default=1e-6)
    g.add_argument("--tau", type=float, default=1e-5)
    g.add_argument("--hidden", type=_ints, default=(64, 64, 16), help="comma-separated hidden sizes")
    g.add_argument("--normalize", choices=("zscore", "minmax"), default="zscore")


def _train_config(args, architecture="shared"):
    return TrainConfig(architecture=architecture, hidden_sizes=args.hidden, lr=args.lr,
                       max_epochs=args.epochs, patience=args.patience, batch_size=args.batch,
                       clip_norm=None if args.no_clip else args.clip, epsilon=args.eps, tau=args.tau,
                       seed=args.seed, normalization=args.normalize)


def _drop(text):
    return tuple(s for s in (text or "").split(",") if s)


def cmd_fit(args):
    ds = load_csv(args.csv, args.target, drop=_drop(args.drop))
    print(summary_table(fit_dataset(ds), args.alpha))


def cmd_train(args):
    ds = load_csv(args.csv, args.target, drop=_drop(args.drop))
    parts = split(ds, seed=args.seed)
    model, history = train(parts.train, parts.val, _train_config(args, args.arch))
    save_model(model, args.out)
    if args.log:
        with open(args.log, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["epoch", "train_mse", "val_mse"])
            writer.writerows(history.to_rows())
    test = regression_metrics(predict(model, parts.test.X), parts.test.y)
    print(f"stopped at epoch {history.stopped_epoch} ({history.stop_reason}); "
          f"best epoch {history.best_epoch}, val MSE {history.best_val_loss:.6g}")
    print(f"held-out test: RMSE {test.rmse:.6g}  MAE {test.mae:.6g}  R2 {test.r2:.6g}")
    print(f"model written to {args.out}")


def _load_for_model(model, path, target):
    ds = load_csv(path, target or model.target_name)
    extra = [f for f in ds.feature_names if f not in model.feature_names]
    return ds.drop(extra) if extra else ds


def cmd_eval(args):
    model = load_model(args.model)
    ds = _load_for_model(model, args.csv, args.target)
    loair = regression_metrics(predict(model, ds.X), ds.y)
    ols = regression_metrics(ols_predict(model.ols, design_matrix(ds.X)), ds.y)
    print(f"{'model':<8}{'RMSE':>14}{'MAE':>14}{'R-squared':>14}")
    for name, m in (("LoAIR", loair), ("OLS", ols)):
        print(f"{name:<8}{m.rmse:>14.6g}{m.mae:>14.6g}{m.r2:>14.6g}")


def cmd_explain(args):
    model = load_model(args.model)
    ds = _load_for_model(model, args.csv, args.target)
    trace = explain(model, ds)
    trace.write_csv(args.out)
    print(f"{len(trace)} trace rows written to {args.out}")


def cmd_simulate(args):
    ds = load_csv(args.csv, args.target, drop=_drop(args.drop))
    fit = fit_dataset(ds)
    pool = load_csv(args.test_csv, args.target, drop=_drop(args.drop)) if args.test_csv else ds
    rows = pick_samples(pool.n, args.samples, args.seed)
    result = simulate_error_surface(fit, pool.subset(rows), args.draws, args.alpha, args.seed)
    if args.out:
        result.write_csv(args.out)
    print(f"samples (rows {rows.tolist()}): center RMSE {result.center_error:.6g}, "
          f"best of {result.n_draws} draws {result.min_rmse:.6g} (draw {result.best_draw})")


def cmd_bench(args):
    models = tuple(m for m in args.models.split(",") if m)
    seeds = tuple(range(args.seeds)) if args.seed_list is None else _ints(args.seed_list)
    config = bench.ExperimentConfig(bench.load_manifest(args.manifest), models, seeds,
                                    _train_config(args), args.out, args.workers)
    report = bench.run_experiment(config)
    print(bench.format_table(report))
    if "ols" in models:
        for m in models:
            if m != "ols":
                for row in bench.compare_report(report, "ols", m):
                    print(f"{row['dataset']}: {m}/ols RMSE ratio {row['ratio']:.3f}"
                          f"{' (win)' if row['win'] else ''}")


def _last_column(path):
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise DataError(f"{path}: empty file")
    return header[-1].strip()


def cmd_expand(args):
    target = args.target or _last_column(args.csv)
    ds = expand_quadratic(load_csv(args.csv, target), args.feature)
    save_csv(ds, args.out if args.out else sys.stdout)


def build_parser():
    parser = argparse.ArgumentParser(prog="loair", description="Locally adaptive interpretable regression")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="OLS coefficients, standard errors and intervals")
    p.add_argument("csv")
    p.add_argument("--target", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--drop", help="comma-separated columns to ignore")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("train", help="train a model on a 75/15/10 split and save it")
    p.add_argument("csv")
    p.add_argument("--target", required=True)
    p.add_argument("--arch", choices=("shared", "multiple"), default="shared")
    p.add_argument("--out", default="model.json")
    p.add_argument("--log", help="CSV file for the per-epoch training log")
    p.add_argument("--drop", help="comma-separated columns to ignore")
    _training_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="RMSE/MAE/R2 of a saved model and its OLS base")
    p.add_argument("model")
    p.add_argument("csv")
    p.add_argument("--target", help="defaults to the target the model was trained on")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("explain", help="per-observation probabilities and coefficients as CSV")
    p.add_argument("model")
    p.add_argument("csv")
    p.add_argument("--out", required=True)
    p.add_argument("--target")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("simulate", help="Monte Carlo error surface within the confidence intervals")
    p.add_argument("csv")
    p.add_argument("--target", required=True)
    p.add_argument("--draws", type=int, default=5000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-csv", help="draw samples from this file instead of the fitting data")
    p.add_argument("--drop", help="comma-separated columns to ignore")
    p.add_argument("--out", help="CSV export of every draw")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="run the benchmark protocol over a dataset manifest")
    p.add_argument("manifest")
    p.add_argument("--models", default="ols,shared,multiple")
    p.add_argument("--seeds", type=int, default=5, help="use seeds 0..N-1")
    p.add_argument("--seed-list", help="explicit comma-separated seeds")
    p.add_argument("--out", help="directory for report.json, cells.csv, timings.json")
    p.add_argument("--workers", type=int, default=1)
    _training_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("expand-quadratic", help="append the square of one feature")
    p.add_argument("csv")
    p.add_argument("--feature", required=True)
    p.add_argument("--target", help="target column, kept last (default: last column)")
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_expand)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, FeatureLookupError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
