# %% [markdown]
# # Per-observation coefficients
#
# After training, `explain` returns the probabilities and adapted
# coefficients for every row. Plotting a coefficient against an input
# shows how its effect changes across the input range. Here we fit the
# linear and the quadratic specification and save both traces as CSV.

# %%
import numpy as np

from loair.data import Dataset, split
from loair.model import TrainConfig, explain, train
from loair.ols import expand_quadratic

rng = np.random.default_rng(1)
log_gnp = rng.uniform(6.5, 11.5, 1500)
log_co2 = -18.8 + 3.1 * log_gnp - 0.105 * log_gnp ** 2 + rng.normal(0, 0.4, log_gnp.size)
panel = Dataset(["log_gnp"], log_gnp, log_co2, target_name="log_co2")

# %%
for name, data in (("linear", panel), ("quadratic", expand_quadratic(panel, "log_gnp"))):
    parts = split(data, seed=0)
    model, _ = train(parts.train, parts.val, TrainConfig(max_epochs=200, seed=0))
    trace = explain(model, parts.test)
    order = np.argsort(trace.X[:, 0])
    slope = trace.coefficients[order, 1]
    print(f"{name}: slope on log_gnp ranges {slope.min():.4f} .. {slope.max():.4f} "
          f"(OLS {model.ols.coefficients[1]:.4f} +/- {model.ols.std_errors[1]:.4f})")
    trace.write_csv(f"trace_{name}.csv")
