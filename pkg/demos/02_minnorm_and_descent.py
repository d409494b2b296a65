# %% [markdown]
# The core step: the minimum-norm convex combination of objective gradients.
#
# Descending along the negated combination decreases every objective at once
# (when possible); the combination vanishes exactly at Pareto-critical points.

# %%
import numpy as np

from fairpareto.smg import BatchSchedule, StepSchedule, smg_run, solve_minnorm

g1 = np.array([1.0, 0.0])
g2 = np.array([0.0, 1.0])
weights = solve_minnorm([g1, g2])
print("orthogonal gradients ->", weights, "combination", weights @ [g1, g2])

weights = solve_minnorm([np.array([1.0, 0.0]), np.array([2.0, 0.0])])
print("aligned gradients    ->", weights, "(the shorter one wins)")

# %%
# Three conflicting gradients: the solver finds the simplex weights whose
# combination has the smallest norm, matching a brute-force grid search.
rng = np.random.default_rng(0)
G = rng.normal(size=(3, 2))
weights = solve_minnorm(G)
grid = min(
    (np.linalg.norm(np.array([i, j, 1000 - i - j]) / 1000 @ G), (i, j))
    for i in range(0, 1001, 10)
    for j in range(0, 1001 - i, 10)
)
print("solver:", np.linalg.norm(weights @ G), " coarse grid:", grid[0])

# %%
# A short run on two quadratic bowls: the iterate slides onto the segment of
# Pareto-critical points between the two minima and stops moving.


class Bowl:
    def __init__(self, center):
        self.center = np.asarray(center, dtype=float)
        self.n_samples = 0
        self.dim = 2

    def value(self, x, batch=None):
        d = np.asarray(x) - self.center
        return float(d @ d)

    def grad(self, x, batch=None):
        return 2.0 * (np.asarray(x) - self.center)


objectives = [Bowl([1.0, 0.0]), Bowl([-1.0, 0.0])]
schedules = (BatchSchedule(1), BatchSchedule(1))
x = np.array([0.3, 2.0])
for k in (1, 5, 25):
    result = smg_run(x, objectives, StepSchedule(alpha0=0.25), schedules, k,
                     np.random.default_rng(0))
    print(f"after {k:2d} steps: x = {np.round(result.x, 4)}")
