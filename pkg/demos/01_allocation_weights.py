"""How the generalized Neyman weights compare with the full-information allocation.

The GNA rule only needs standard deviations and a guess of the best arm.
The GJ allocation also uses the gaps, so it is an oracle benchmark.
"""

import numpy as np

from gnabai import allocation as al

sigmas = np.array([2.0, 1.0, 1.0])
print("GNA weights, arm 0 best, sigma =", sigmas)
print("  ", np.round(al.gna_target_weights(0, sigmas), 6))

# With two arms both rules collapse to the Neyman ratio s1 / (s1 + s2).
print("two arms, sigma = (3, 1):", al.gna_target_weights(0, [3.0, 1.0]),
      al.gj_oracle_weights([1.0, 0.9], [9.0, 1.0]).round(6))

# Unequal gaps: GJ shifts mass towards the hard arm, GNA does not look at gaps.
means = np.array([1.0, 0.95, 0.6])
var = sigmas**2
gj = al.gj_oracle_weights(means, var)
gna = al.gna_target_weights(0, sigmas)
obj = al.gj_rate_objective(means, var)
print("\nmeans =", means)
print(f"  GJ  weights {np.round(gj, 4)}  worst pairwise rate {obj(gj[None])[0]:.6f}")
print(f"  GNA weights {np.round(gna, 4)}  worst pairwise rate {obj(gna[None])[0]:.6f}")

# The exhaustive grid is the independent check both solvers are tested against.
grid = al.bruteforce_maxmin_weights(obj, 3, 0.005)
print(f"  grid optimum {np.round(grid, 4)}  rate {obj(grid[None])[0]:.6f}")

# When every gap is equal and small, GNA is the max-min solution.
gna_obj = al.gna_rate_objective(0, sigmas)
grid = al.bruteforce_maxmin_weights(gna_obj, 3, 0.005)
print("\nequal small gaps: grid optimum", np.round(grid, 3), "vs closed form", np.round(gna, 3))
