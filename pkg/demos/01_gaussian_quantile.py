# %% [markdown]
# # The standard normal quantile and its derivative
#
# Every adapted coefficient is `beta + probit(prob) * se`, and training
# backpropagates through `probit`. This script checks the quantile against
# the CDF and shows how steep the derivative gets near the smoothing bounds.

# %%
import numpy as np

from loair.gaussian import probit, probit_derivative, std_normal_cdf
from loair.meta_net import smooth

# %%
for p in (0.5, 0.9, 0.975, 0.995):
    print(f"probit({p}) = {probit(p):.10f}")

x = np.arange(-600, 601) / 100.0
print("max round-trip error on [-6, 6]:", np.max(np.abs(probit(std_normal_cdf(x)) - x)))

# %% [markdown]
# Smoothing with eps = 1e-6, tau = 1e-5 keeps probabilities inside (0, 1),
# which caps each coefficient shift at roughly +/- 4.75 standard errors.

# %%
lo, hi = smooth(np.array([0.0, 1.0]), 1e-6, 1e-5)
print(f"probability range [{lo:.3e}, {hi:.10f}]")
print(f"coefficient shift range [{probit(lo):.4f}, {probit(hi):.4f}] standard errors")
for p in (0.5, 0.9, 0.999, hi):
    print(f"d probit/dp at {p:.6f}: {probit_derivative(p):.4g}")
