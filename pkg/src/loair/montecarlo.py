"""Error surface of an OLS fit under coefficient draws inside their confidence intervals."""

import csv
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DomainError, ShapeError
from .ols import confidence_bounds, critical_value, design_matrix


@dataclass
class SimResult:
    """Draw 0 is the fitted coefficient vector itself."""

    coefficients: np.ndarray  # (n_draws, p+1)
    sq_errors: np.ndarray  # (n_draws, n_samples)
    rmse: np.ndarray  # (n_draws,)
    lower: np.ndarray
    upper: np.ndarray
    alpha: float
    seed: int

    @property
    def n_draws(self):
        return self.coefficients.shape[0]

    @property
    def center_error(self):
        return float(self.rmse[0])

    @property
    def best_draw(self):
        return int(np.argmin(self.rmse))

    @property
    def min_rmse(self):
        return float(self.rmse.min())

    def contained(self):
        return bool(np.all((self.coefficients >= self.lower) & (self.coefficients <= self.upper)))

    def header(self):
        k = self.coefficients.shape[1]
        return (["draw"] + [f"coef_{j}" for j in range(k)] + ["rmse"]
                + [f"err_sample_{i}" for i in range(self.sq_errors.shape[1])])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.header())
            for d in range(self.n_draws):
                writer.writerow([d] + [repr(float(v)) for v in self.coefficients[d]]
                                + [repr(float(self.rmse[d]))]
                                + [repr(float(v)) for v in self.sq_errors[d]])


def pick_samples(n, count, seed=0):
    """`count` distinct row indices out of n, sorted, chosen by `seed`."""
    if not 1 <= count <= n:
        raise DomainError(f"cannot pick {count} samples from {n} rows")
    return np.sort(np.random.default_rng(seed).choice(n, size=count, replace=False))


def draw_coefficients(fit, n_draws, alpha=0.05, seed=0):
    """Center draw followed by n_draws - 1 independent uniform draws per coordinate."""
    if n_draws < 1:
        raise DomainError(f"n_draws must be >= 1, got {n_draws}")
    half = critical_value(alpha) * fit.std_errors
    u = np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n_draws - 1, fit.p + 1))
    # beta + t with |t| <= half rounds inside [beta - half, beta + half]
    return np.vstack([fit.coefficients, fit.coefficients + u * half])


def simulate_error_surface(fit, samples, n_draws=5000, alpha=0.05, seed=0):
    """Squared errors and RMSE on `samples` for coefficients drawn within the intervals.

    `samples` is a Dataset or an (X_raw, y) pair.
    """
    if isinstance(samples, Dataset):
        X, y = samples.X, samples.y
    else:
        X, y = samples
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] == 0:
        raise DomainError("simulation needs at least one sample")
    if X.shape[1] != fit.p or y.shape[0] != X.shape[0]:
        raise ShapeError(f"samples have shape {X.shape}, fit expects {fit.p} features")
    coefs = draw_coefficients(fit, n_draws, alpha, seed)
    preds = coefs @ design_matrix(X).T
    sq = (preds - y) ** 2
    lo, hi = confidence_bounds(fit, alpha)
    return SimResult(coefs, sq, np.sqrt(sq.mean(axis=1)), lo, hi, alpha, seed)
