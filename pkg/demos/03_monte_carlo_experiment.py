"""Misidentification probability against budget, and its exponential decay.

Equivalent CLI call: ``gnabai run demos/configs/small_gap.json`` then
``gnabai decay small_gap.results.csv``.
"""

import tempfile
from pathlib import Path

from gnabai import engine, harness
from gnabai.engine import AlgorithmSpec
from gnabai.harness import ExperimentConfig, InstanceConfig

config = ExperimentConfig(
    master_seed=2024,
    trials=1000,
    algorithms=tuple(AlgorithmSpec(k) for k in (engine.GNA, engine.UNIFORM, engine.SUCCESSIVE_REJECTS,
                                                engine.GJ_ORACLE)),
    instance=InstanceConfig("gaussian", means=(1.0, 0.8, 0.8), sds=(3.0, 1.0, 1.0)),
    budgets=(500, 1000, 1500, 2000, 2500),
)
summary = harness.run_experiment(config)

out = Path(tempfile.mkdtemp()) / "results.csv"
harness.write_results(summary, out)
print(out.read_text())

for name in (a.name for a in config.algorithms):
    fit = harness.fit_decay(summary.decay_points(name))
    print(f"{name:18s} decay rate {fit.rate:.2e} +- {fit.slope_se:.1e}   R^2 {fit.r_squared:.3f}")

# Instances drawn like the simulation study: a fresh random instance per trial.
study = ExperimentConfig(7, 500, (AlgorithmSpec(engine.GNA), AlgorithmSpec(engine.UNIFORM)),
                         InstanceConfig("paper_generator", K=5, mu_pattern="two-fixed", sigma_bar=3.0),
                         (1000, 2000))
for cell in harness.run_experiment(study).sorted_cells():
    print(f"{cell.algorithm:8s} T={cell.T}  p_hat={cell.p_hat:.3f} (se {cell.se:.3f})")
