# %% [markdown]
# Compare the front search against the epsilon-constraint baseline.
#
# The baseline minimizes the loss under a covariance bound, swept over evenly
# spaced thresholds. On this convex bi-objective problem both methods should
# trace the same curve; the quality metrics quantify how closely they agree.

# %%
import numpy as np

from fairpareto import data
from fairpareto.epsfair import EpsSweepConfig, sweep_front
from fairpareto.metrics import (
    downsample,
    hypervolume,
    performance_profile,
    purity,
    reference_point,
    spread_delta,
    spread_gamma,
)
from fairpareto.objectives import ObjectiveSpec, build_objectives
from fairpareto.pfsmg import PfsmgConfig, SmgSchedules, pfsmg_run
from fairpareto.smg import BatchSchedule, StepSchedule

dataset = data.generate_synthetic(1200, seed=3)
train, _, _ = data.split(dataset, data.SplitSpec(0.6, 0.1, 0.3, seed=4))

specs = [ObjectiveSpec("logistic_loss"),
         ObjectiveSpec("di_binary", attribute="group")]
schedules = SmgSchedules(
    step=StepSchedule(alpha0=2.1, decay_factor=1 / 3, decay_period=40),
    batches=(BatchSchedule(80, 1.018), BatchSchedule(50, 1.018)))
searched, _ = pfsmg_run(build_objectives(specs, train), schedules,
                        PfsmgConfig(iterate_budget=100, max_rounds=30,
                                    thinning_cell_fraction=1 / 120), seed=3)
swept, _ = sweep_front(train, "group", EpsSweepConfig(n_thresholds=30))
print(f"front search: {len(searched)} points; threshold sweep: {len(swept)}")

# %%
# Down-sample the searched front to the sweep's size for a fair comparison,
# then score purity, spread and hypervolume against a shared reference.
F = np.array([p.f for p in searched])
E = np.array([p.f for p in swept])
F_cmp = downsample(F, min(len(E), len(F)))
ref = reference_point([F_cmp, E])
ratios = purity({"search": F_cmp, "sweep": E})
for name, front in (("search", F_cmp), ("sweep", E)):
    print(f"{name:7s} purity {ratios[name]:.2f}  gamma {spread_gamma(front):.4f}  "
          f"delta {spread_delta(front):.3f}  "
          f"hypervolume {hypervolume(front, ref):.4f}")

# %%
# Profiles summarize many problems at once; with one problem each curve is a
# single step showing which method needed the smaller tau.
curves = performance_profile({"search": [hypervolume(F_cmp, ref)],
                              "sweep": [hypervolume(E, ref)]},
                             higher_is_better=True)
for name, curve in curves.items():
    print(name, "profile breakpoints:", np.round(curve, 3).tolist())
