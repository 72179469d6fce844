# %% [markdown]
# # Training the meta-learner
#
# Both architectures on data whose true coefficients drift with the
# inputs. The network starts with outputs near 0.5, i.e. at the OLS fit,
# and learns where to push each coefficient within its interval.

# %%
from loair.data import split, synth_locally_varying
from loair.model import TrainConfig, predict, train
from loair.ols import design_matrix, fit_dataset, ols_predict, regression_metrics

parts = split(synth_locally_varying(2000, seed=0), seed=0)
ols = fit_dataset(parts.train)
print("OLS test:", regression_metrics(ols_predict(ols, design_matrix(parts.test.X)), parts.test.y))

# %%
for arch in ("shared", "multiple"):
    model, history = train(parts.train, parts.val, TrainConfig(architecture=arch, max_epochs=300))
    metrics = regression_metrics(predict(model, parts.test.X), parts.test.y)
    print(f"{arch:>8}: stopped at epoch {history.stopped_epoch} ({history.stop_reason}), "
          f"val MSE {history.val_loss[0]:.4f} -> {history.best_val_loss:.4f}; test {metrics}")
