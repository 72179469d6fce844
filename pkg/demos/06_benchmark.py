# %% [markdown]
# # Benchmark protocol
#
# Each dataset is split 75/15/10 once per seed; OLS is fit on the
# training part, the meta-learner trains on train with early stopping on
# validation, and all models are scored on the untouched test part.
# Real datasets are listed in a JSON manifest, e.g.
#
#     {"datasets": [{"name": "energy", "path": "ENB2012.csv", "target": "Y1", "drop": ["Y2", "X2"]}]}
#
# This demo uses two synthetic entries so it runs anywhere.

# %%
from loair.bench import ExperimentConfig, ManifestEntry, compare_report, format_table, run_experiment
from loair.model import TrainConfig

datasets = [
    ManifestEntry("drifting", synthetic={"n": 600, "seed": 0}),
    ManifestEntry("linear", synthetic={"n": 600, "seed": 0, "band": 0.0, "noise": 0.5}),
]
config = ExperimentConfig(datasets, ("ols", "shared", "multiple"), seeds=(0, 1, 2),
                          train=TrainConfig(max_epochs=100), output_dir="bench_out")
report = run_experiment(config)
print(format_table(report))

# %%
for row in compare_report(report, "ols", "shared"):
    print(f"{row['dataset']}: shared/OLS RMSE ratio {row['ratio']:.3f}")
