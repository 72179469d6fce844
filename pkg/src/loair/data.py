"""Datasets, CSV I/O, train/validation/test splitting and feature normalization."""

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DataError, DomainError, FeatureLookupError, ParseError


@dataclass(frozen=True)
class Dataset:
    """Named feature matrix and target vector in raw units."""

    feature_names: tuple
    X: np.ndarray
    y: np.ndarray
    provenance: str = ""
    target_name: str = "y"

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).reshape(-1)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DataError("feature matrix must be two-dimensional")
        n, p = X.shape
        if n < 1 or p < 1:
            raise DataError(f"dataset needs n >= 1 and p >= 1, got n={n}, p={p}")
        if y.shape[0] != n:
            raise DataError(f"{n} feature rows but {y.shape[0]} targets")
        names = tuple(str(s) for s in self.feature_names)
        if len(names) != p:
            raise DataError(f"{len(names)} feature names for {p} columns")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DataError("dataset contains non-finite values")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def subset(self, rows, provenance=None):
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.feature_names, self.X[rows], self.y[rows],
                       provenance if provenance is not None else self.provenance,
                       self.target_name)

    def column(self, name):
        try:
            j = self.feature_names.index(name)
        except ValueError:
            raise FeatureLookupError(f"unknown feature {name!r}; have {list(self.feature_names)}") from None
        return self.X[:, j]

    def drop(self, names):
        names = list(names)
        for name in names:
            self.column(name)
        keep = [j for j, f in enumerate(self.feature_names) if f not in names]
        return Dataset([self.feature_names[j] for j in keep], self.X[:, keep], self.y,
                       self.provenance, self.target_name)

    def equals(self, other):
        return (self.feature_names == other.feature_names
                and self.target_name == other.target_name
                and np.array_equal(self.X, other.X)
                and np.array_equal(self.y, other.y))


def _parse_cell(text, row, column):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"row {row}, column {column!r}: cannot parse {text!r} as a number",
                         row=row, column=column) from None
    if not math.isfinite(value):
        raise ParseError(f"row {row}, column {column!r}: non-finite value {text!r}",
                         row=row, column=column)
    return value


def load_csv(path, target_column, drop=()):
    """Read a headed numeric CSV; `target_column` becomes y, the rest X in header order.

    Rows are numbered from 1 for the first data line in error messages.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if target_column not in header:
            raise FeatureLookupError(f"{path}: target column {target_column!r} not in header {header}")
        for name in drop:
            if name not in header:
                raise FeatureLookupError(f"{path}: column {name!r} not in header {header}")
        rows = []
        for i, record in enumerate(reader, start=1):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise ParseError(f"{path}: row {i} has {len(record)} cells, header has {len(header)}", row=i)
            rows.append([_parse_cell(c.strip(), i, header[j]) for j, c in enumerate(record)])
    if not rows:
        raise DataError(f"{path}: no data rows")
    table = np.array(rows, dtype=float)
    t = header.index(target_column)
    keep = [j for j, h in enumerate(header) if j != t and h not in drop]
    return Dataset([header[j] for j in keep], table[:, keep], table[:, t],
                   provenance=f"csv:{path}", target_name=target_column)


def save_csv(dataset, path):
    """Write `dataset` as CSV with features first and the target last.

    `path` may also be an open text file.
    """
    if hasattr(path, "write"):
        _write_rows(dataset, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(dataset, fh)


def _write_rows(dataset, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(list(dataset.feature_names) + [dataset.target_name])
    for xi, yi in zip(dataset.X, dataset.y):
        writer.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])


class Splits(NamedTuple):
    train: Dataset
    val: Dataset
    test: Dataset


def split_sizes(n, ratios=(0.75, 0.15, 0.10)):
    """Train and validation sizes are rounded half-up; the test part takes the rest.

    If rounding would leave the test part empty, one row moves from train to test.
    """
    if len(ratios) != 3 or min(ratios) <= 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise DomainError(f"ratios must be three positive numbers summing to 1, got {ratios}")
    n_train = int(math.floor(ratios[0] * n + 0.5))
    n_val = int(math.floor(ratios[1] * n + 0.5))
    n_test = n - n_train - n_val
    if n_test < 1 and n_train > 1:
        n_train, n_test = n_train - 1, n_test + 1
    if n < 10 or min(n_train, n_val, n_test) < 1:
        raise DomainError(f"n={n} too small to split into three nonempty parts")
    return n_train, n_val, n_test


def split_indices(n, ratios=(0.75, 0.15, 0.10), seed=0):
    n_train, n_val, _ = split_sizes(n, ratios)
    order = np.random.default_rng(seed).permutation(n)
    return order[:n_train], order[n_train:n_train + n_val], order[n_train + n_val:]


def split(dataset, ratios=(0.75, 0.15, 0.10), seed=0):
    """Shuffle deterministically by `seed` and slice into train/val/test."""
    tr, va, te = split_indices(dataset.n, ratios, seed)
    tag = f"{dataset.provenance}|seed={seed}"
    return Splits(dataset.subset(tr, tag + "|train"),
                  dataset.subset(va, tag + "|val"),
                  dataset.subset(te, tag + "|test"))


class SealedDataset:
    """Wraps a held-out part so every read goes through `open()` and is logged."""

    def __init__(self, dataset, log, label="test"):
        self._dataset = dataset
        self._log = log
        self.label = label

    def open(self):
        self._log.append(f"open:{self.label}")
        return self._dataset


@dataclass(frozen=True)
class Normalizer:
    """Per-feature affine map x' = (x - loc) / scale fitted on training rows.

    For the z-score kind `loc` is the mean and `scale` the population
    standard deviation; for min-max they are the minimum and the range.
    Constant columns get scale 1 and are flagged, so they map to 0.
    """

    loc: np.ndarray
    scale: np.ndarray
    constant: np.ndarray
    kind: str = "zscore"

    @property
    def mean(self):
        return self.loc

    @property
    def std(self):
        return self.scale

    def apply(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.loc.shape[0]:
            raise DataError(f"expected {self.loc.shape[0]} features, got {X.shape[-1]}")
        return (X - self.loc) / self.scale

    def invert(self, X_norm):
        return np.asarray(X_norm, dtype=float) * self.scale + self.loc

    def to_dict(self):
        return {"kind": self.kind, "loc": self.loc.tolist(), "scale": self.scale.tolist(),
                "constant": self.constant.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["loc"], dtype=float), np.array(d["scale"], dtype=float),
                   np.array(d["constant"], dtype=bool), d["kind"])


def fit_normalizer(train, kind="zscore"):
    X = train.X if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    if X.shape[0] < 1:
        raise DataError("cannot fit a normalizer on zero rows")
    if kind == "zscore":
        loc = X.mean(axis=0)
        scale = X.std(axis=0)
    elif kind == "minmax":
        loc = X.min(axis=0)
        scale = X.max(axis=0) - loc
    else:
        raise DomainError(f"unknown normalization {kind!r}")
    constant = np.ptp(X, axis=0) == 0
    scale = np.where(constant | (scale == 0), 1.0, scale)
    return Normalizer(loc, scale, constant, kind)


def apply_normalizer(norm, X):
    return norm.apply(X)


def synth_locally_varying(n, seed=0, band=1.0, noise=0.1, p=2):
    """Linear model whose coefficients drift smoothly with the inputs.

    x is uniform on [0, 4]^p and coefficient j oscillates around a fixed
    center as b_j(x) = c_j + band * sin(1.5 * x_k + j) for a feature k that
    cycles with j. With band = 0 and noise = 0 the data is exactly linear.
    """
    if n < 100:
        raise DomainError("synth_locally_varying needs n >= 100")
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 4.0, size=(n, p))
    centers = np.arange(1, p + 2, dtype=float)
    coefs = np.empty((n, p + 1))
    for j in range(p + 1):
        coefs[:, j] = centers[j] + band * np.sin(1.5 * X[:, j % p] + j)
    y = coefs[:, 0] + np.sum(coefs[:, 1:] * X, axis=1) + noise * rng.standard_normal(n)
    names = [f"x{j + 1}" for j in range(p)]
    return Dataset(names, X, y, provenance=f"synth_locally_varying(n={n},seed={seed},band={band},noise={noise},p={p})")
