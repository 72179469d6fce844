# %% [markdown]
# # OLS with standard errors and Gaussian confidence intervals
#
# A stand-in for an emissions-versus-income panel: log emissions rise with
# log income and bend down at high income. We fit the linear model and the
# model with a squared income term, and print coefficient tables.

# %%
import numpy as np

from loair.data import Dataset
from loair.ols import expand_quadratic, fit_dataset, summary_table

rng = np.random.default_rng(0)
log_gnp = rng.uniform(6.5, 11.5, 3000)
log_co2 = -18.8 + 3.1 * log_gnp - 0.105 * log_gnp ** 2 + rng.normal(0, 0.6, log_gnp.size)
panel = Dataset(["log_gnp"], log_gnp, log_co2, provenance="demo panel", target_name="log_co2")

# %%
linear = fit_dataset(panel)
print(summary_table(linear))

# %%
quadratic = fit_dataset(expand_quadratic(panel, "log_gnp"))
print(summary_table(quadratic, alpha=0.01))
