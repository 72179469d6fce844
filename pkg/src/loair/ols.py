"""Ordinary least squares with intercept, standard errors and Gaussian intervals."""

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .data import Dataset
from .errors import DomainError, InsufficientDataError, ShapeError, SingularityError
from .gaussian import probit

MAX_CONDITION = 1e12


def design_matrix(X):
    """Prepend the all-ones intercept column to a raw (n, p) feature matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return np.column_stack([np.ones(X.shape[0]), X])


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    std_errors: np.ndarray
    sigma2: float
    r_squared: float
    n: int
    p: int
    names: tuple = field(default=())

    def to_dict(self):
        return {"coefficients": self.coefficients.tolist(), "std_errors": self.std_errors.tolist(),
                "sigma2": self.sigma2, "r_squared": self.r_squared, "n": self.n, "p": self.p,
                "names": list(self.names)}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["coefficients"], dtype=float), np.array(d["std_errors"], dtype=float),
                   float(d["sigma2"]), float(d["r_squared"]), int(d["n"]), int(d["p"]),
                   tuple(d["names"]))


def _r2(resid, y):
    rss = float(resid @ resid)
    centered = y - y.mean()
    tss = float(centered @ centered)
    if tss == 0.0:
        warnings.warn("target has zero variance; R^2 set to 0", RuntimeWarning, stacklevel=3)
        return 0.0
    return 1.0 - rss / tss


def _offending_columns(R_eq, names):
    _, s, vt = np.linalg.svd(R_eq)
    v = np.abs(vt[-1])
    return [names[j] for j in np.flatnonzero(v > 0.1)]


def ols_fit(X, y, names=None):
    """Least-squares fit of `y` on the design matrix `X` (intercept column first).

    The solve goes through a Householder QR factorization of the
    column-equilibrated design, so XᵀX is never formed. Standard errors
    use the homoskedastic estimate sigma2 = RSS / (n - p - 1).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim != 2:
        raise ShapeError("design matrix must be two-dimensional")
    n, k = X.shape
    if y.shape[0] != n:
        raise ShapeError(f"design has {n} rows but y has {y.shape[0]}")
    if not np.all(X[:, 0] == 1.0):
        raise ShapeError("first design column must be the all-ones intercept")
    if names is None:
        names = ["const"] + [f"x{j}" for j in range(1, k)]
    names = tuple(names)
    if n <= k:
        raise InsufficientDataError(f"need n > p + 1 observations, got n={n} for {k} coefficients")

    col_norm = np.linalg.norm(X, axis=0)
    if np.any(col_norm == 0):
        bad = [names[j] for j in np.flatnonzero(col_norm == 0)]
        raise SingularityError(f"all-zero design columns: {bad}", bad)
    Q, R = np.linalg.qr(X / col_norm)
    cond = np.linalg.cond(R) ** 2
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        bad = _offending_columns(R, names)
        raise SingularityError(
            f"design is rank deficient or ill-conditioned (cond(XᵀX) ~ {cond:.3g}); "
            f"nearly collinear columns: {bad}", bad)

    R_inv = np.linalg.solve(R, np.eye(k))
    beta = (R_inv @ (Q.T @ y)) / col_norm
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / (n - k)
    # diag((XᵀX)^-1) = row sums of (R^-1)^2, undoing the column scaling
    xtx_inv_diag = np.sum(R_inv * R_inv, axis=1) / col_norm ** 2
    se = np.sqrt(sigma2 * xtx_inv_diag)
    return OlsFit(beta, se, sigma2, _r2(resid, y), n, k - 1, names)


def fit_dataset(dataset: Dataset) -> OlsFit:
    return ols_fit(design_matrix(dataset.X), dataset.y, ("const",) + dataset.feature_names)


def critical_value(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return probit(1.0 - alpha / 2.0)


def confidence_interval(fit, j, alpha=0.05):
    """Gaussian interval beta_j -/+ z_{1-alpha/2} * se_j."""
    z = critical_value(alpha)
    if not 0 <= j <= fit.p:
        raise DomainError(f"coefficient index {j} out of range 0..{fit.p}")
    half = z * fit.std_errors[j]
    return float(fit.coefficients[j] - half), float(fit.coefficients[j] + half)


def confidence_bounds(fit, alpha=0.05):
    """Vectorized lower and upper interval bounds for every coefficient."""
    half = critical_value(alpha) * fit.std_errors
    return fit.coefficients - half, fit.coefficients + half


def ols_predict(fit, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != fit.p + 1:
        raise ShapeError(f"design has {X.shape[1]} columns, fit has {fit.p + 1} coefficients")
    return X @ fit.coefficients


class Metrics(NamedTuple):
    rmse: float
    mae: float
    r2: float


def regression_metrics(predictions, targets):
    pred = np.asarray(predictions, dtype=float).reshape(-1)
    y = np.asarray(targets, dtype=float).reshape(-1)
    if pred.shape != y.shape:
        raise ShapeError(f"{pred.shape[0]} predictions for {y.shape[0]} targets")
    if y.size == 0:
        raise DomainError("metrics need at least one observation")
    resid = y - pred
    return Metrics(float(np.sqrt(np.mean(resid ** 2))), float(np.mean(np.abs(resid))), _r2(resid, y))


def expand_quadratic(dataset, feature_name):
    """Append the elementwise square of one feature as column "<feature>^2"."""
    col = dataset.column(feature_name)
    return Dataset(dataset.feature_names + (f"{feature_name}^2",),
                   np.column_stack([dataset.X, col * col]), dataset.y,
                   dataset.provenance, dataset.target_name)


def summary_table(fit, alpha=0.05):
    """Plain-text coefficient table with standard errors and intervals."""
    lo, hi = confidence_bounds(fit, alpha)
    width = max(12, max(len(s) for s in fit.names) + 2)
    pct = f"{100 * (1 - alpha):g}%"
    lines = [f"{'variable':<{width}}{'coef':>14}{'std err':>14}{pct + ' lo':>14}{pct + ' hi':>14}"]
    for name, b, s, l, h in zip(fit.names, fit.coefficients, fit.std_errors, lo, hi):
        lines.append(f"{name:<{width}}{b:>14.6g}{s:>14.6g}{l:>14.6g}{h:>14.6g}")
    lines.append(f"n = {fit.n}, p = {fit.p}, sigma^2 = {fit.sigma2:.6g}, R-squared = {fit.r_squared:.6g}")
    return "\n".join(lines)
