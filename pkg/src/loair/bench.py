"""Benchmark protocol: repeated random splits, OLS vs. both meta-learner architectures."""

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .data import SealedDataset, load_csv, split, synth_locally_varying
from .errors import ConfigError, FeatureLookupError, LoairError
from .model import TrainConfig, predict, train
from .ols import design_matrix, fit_dataset, ols_predict, regression_metrics

log = logging.getLogger(__name__)

MODELS = ("ols", "shared", "multiple")
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
RATIOS = (0.75, 0.15, 0.10)
STD_CONVENTION = "sample standard deviation over seeds (ddof=1); 0 for a single seed"


@dataclass(frozen=True)
class ManifestEntry:
    """One dataset: a CSV with a target column, or a synthetic generator spec."""

    name: str
    path: str = None
    target: str = None
    drop: tuple = ()
    n_seeds: int = None
    synthetic: dict = None

    def load(self):
        if self.synthetic is not None:
            spec = dict(self.synthetic)
            kind = spec.pop("kind", "locally_varying")
            if kind != "locally_varying":
                raise ConfigError(f"unknown synthetic kind {kind!r}")
            return synth_locally_varying(**spec)
        return load_csv(self.path, self.target, drop=self.drop)


def load_manifest(path):
    """Read a JSON manifest: {"datasets": [{"name", "path", "target", ...}, ...]}.

    Relative paths resolve against the manifest's directory.
    """
    with open(path) as fh:
        raw = json.load(fh)
    items = raw["datasets"] if isinstance(raw, dict) else raw
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    for item in items:
        if "synthetic" not in item and ("path" not in item or "target" not in item):
            raise ConfigError(f"manifest entry needs path and target: {item}")
        p = item.get("path")
        if p is not None and not os.path.isabs(p):
            p = os.path.join(base, p)
        entries.append(ManifestEntry(item["name"], p, item.get("target"), tuple(item.get("drop", ())),
                                     item.get("seeds"), item.get("synthetic")))
    return entries


@dataclass
class ExperimentConfig:
    datasets: list
    models: tuple = MODELS
    seeds: tuple = DEFAULT_SEEDS
    train: TrainConfig = field(default_factory=TrainConfig)
    output_dir: str = None
    workers: int = 1

    def __post_init__(self):
        self.models = tuple(self.models)
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.datasets or not self.models or not self.seeds:
            raise ConfigError("need at least one dataset, one model and one seed")
        unknown = set(self.models) - set(MODELS)
        if unknown:
            raise ConfigError(f"unknown models {sorted(unknown)}; choose from {MODELS}")

    def to_dict(self):
        return {"datasets": [{"name": d.name, "path": d.path, "target": d.target, "drop": list(d.drop),
                              "seeds": d.n_seeds, "synthetic": d.synthetic} for d in self.datasets],
                "models": list(self.models), "seeds": list(self.seeds), "ratios": list(RATIOS),
                "train": self.train.to_dict()}


@dataclass
class ExperimentReport:
    config: dict
    results: list  # one dict per (dataset, model)
    cells: list  # one dict per (dataset, model, seed)
    errors: list
    timings: dict = field(default_factory=dict)
    audit: dict = field(default_factory=dict)

    def to_dict(self):
        return {"metadata": {"std_convention": STD_CONVENTION, "config": self.config},
                "results": self.results, "errors": self.errors}

    def result(self, dataset, model):
        for r in self.results:
            if r["dataset"] == dataset and r["model"] == model:
                return r
        raise FeatureLookupError(f"no result for dataset {dataset!r}, model {model!r}")


def _summary(values):
    arr = np.asarray(values, dtype=float)
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return {"mean": float(np.mean(arr)), "std": std}


def run_cell(dataset, model_name, seed, train_config):
    """Split, fit on train(/val), then open the test part once for scoring."""
    access = []
    parts = split(dataset, RATIOS, seed)
    test = SealedDataset(parts.test, access)
    cell = {"model": model_name, "seed": seed}
    t0 = time.perf_counter()
    if model_name == "ols":
        access.append("fit:ols")
        fit = fit_dataset(parts.train)
        test_set = test.open()
        pred = ols_predict(fit, design_matrix(test_set.X))
    else:
        access.append(f"train:{model_name}")
        model, history = train(parts.train, parts.val, replace(train_config, architecture=model_name, seed=seed))
        cell["best_epoch"] = history.best_epoch
        cell["stopped_epoch"] = history.stopped_epoch
        test_set = test.open()
        pred = predict(model, test_set.X)
    m = regression_metrics(pred, test_set.y)
    cell.update(rmse=m.rmse, mae=m.mae, r2=m.r2)
    return cell, access, time.perf_counter() - t0


def _cell_job(args):
    entry, model_name, seed, train_config = args
    dataset = entry.load()
    try:
        return run_cell(dataset, model_name, seed, train_config), None
    except LoairError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def run_experiment(config):
    """Run every (dataset, model, seed) cell and aggregate mean/std of the test metrics."""
    jobs, job_keys, errors, loaded = [], [], [], []
    for entry in config.datasets:
        try:
            entry.load()
        except (LoairError, OSError) as exc:
            log.warning("dataset %s failed to load: %s", entry.name, exc)
            errors.append({"dataset": entry.name, "stage": "load", "message": f"{type(exc).__name__}: {exc}"})
            continue
        loaded.append(entry)
        seeds = config.seeds[:entry.n_seeds] if entry.n_seeds else config.seeds
        for model_name in config.models:
            for seed in seeds:
                jobs.append((entry, model_name, seed, config.train))
                job_keys.append((entry.name, model_name, seed))

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_cell_job, jobs))
    else:
        outcomes = [_cell_job(job) for job in jobs]

    cells, timings, audit = [], {}, {}
    for (name, model_name, seed), (done, err) in zip(job_keys, outcomes):
        if err is not None:
            errors.append({"dataset": name, "model": model_name, "seed": seed, "stage": "cell", "message": err})
            continue
        cell, access, seconds = done
        cell = {"dataset": name, **cell}
        cells.append(cell)
        timings[f"{name}/{model_name}/{seed}"] = seconds
        audit[(name, model_name, seed)] = access

    results = []
    for entry in loaded:
        for model_name in config.models:
            rows = [c for c in cells if c["dataset"] == entry.name and c["model"] == model_name]
            if not rows:
                continue
            res = {"dataset": entry.name, "model": model_name, "n_seeds": len(rows)}
            for metric in ("rmse", "mae", "r2"):
                res[metric] = _summary([c[metric] for c in rows])
            res["per_seed"] = [{k: v for k, v in c.items() if k not in ("dataset", "model")} for c in rows]
            results.append(res)

    report = ExperimentReport(config.to_dict(), results, cells, errors, timings, audit)
    if config.output_dir:
        write_report(report, config.output_dir)
    return report


def write_report(report, output_dir):
    """report.json (deterministic), cells.csv, timings.json and a text table."""
    os.makedirs(output_dir, exist_ok=True)
    with open(os.path.join(output_dir, "report.json"), "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    with open(os.path.join(output_dir, "timings.json"), "w") as fh:
        json.dump(report.timings, fh, indent=2)
    with open(os.path.join(output_dir, "cells.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "model", "seed", "rmse", "mae", "r2"])
        for c in report.cells:
            writer.writerow([c["dataset"], c["model"], c["seed"], repr(c["rmse"]), repr(c["mae"]), repr(c["r2"])])
    with open(os.path.join(output_dir, "table.txt"), "w") as fh:
        fh.write(format_table(report) + "\n")


def format_table(report):
    """Mean ± std test metrics, one line per (dataset, model)."""
    lines = [f"{'dataset':<24}{'model':<10}{'seeds':>6}{'RMSE':>22}{'MAE':>22}{'R2':>22}"]
    for r in report.results:
        cols = "".join(f"{r[m]['mean']:>12.4g} ± {r[m]['std']:<7.3g}" for m in ("rmse", "mae", "r2"))
        lines.append(f"{r['dataset']:<24}{r['model']:<10}{r['n_seeds']:>6}{cols}")
    for e in report.errors:
        where = "/".join(str(e[k]) for k in ("dataset", "model", "seed") if k in e)
        lines.append(f"ERROR {where}: {e['message']}")
    return "\n".join(lines)


def compare_report(report, baseline, challenger):
    """Per-dataset mean RMSE of `challenger` relative to `baseline`; a win means ratio < 1."""
    models = {r["model"] for r in report.results}
    for name in (baseline, challenger):
        if name not in models:
            raise FeatureLookupError(f"model {name!r} not in report (have {sorted(models)})")
    out = []
    for dataset in dict.fromkeys(r["dataset"] for r in report.results):
        try:
            b = report.result(dataset, baseline)["rmse"]["mean"]
            c = report.result(dataset, challenger)["rmse"]["mean"]
        except FeatureLookupError:
            continue
        ratio = c / b if b != 0 else (1.0 if c == 0 else float("inf"))
        out.append({"dataset": dataset, "baseline": baseline, "challenger": challenger,
                    "baseline_rmse": b, "challenger_rmse": c, "ratio": ratio, "win": ratio < 1.0})
    return out
