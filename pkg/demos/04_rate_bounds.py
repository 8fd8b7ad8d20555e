"""Worst-case rate constants, divergences and the optimality check."""

import math

import numpy as np

from gnabai import bounds as bd

sigmas = [2.0, 1.0, 1.0]
for a in range(3):
    print(f"V(arm {a}) = {bd.rate_V(a, sigmas):.6f}")

# Bernoulli arms: variance depends on the mean, so the worst case is a search over means.
cf = bd.bernoulli_closed_forms(3)
print(f"\nBernoulli K=3: w_best={cf.w_best:.6f} w_other={cf.w_other:.6f}")
print(f"  V* as printed formula {cf.v_star_printed:.6f}, from the rate function {cf.v_star_derived:.6f}"
      f" at mu={cf.mu_dagger:.3f}")

rep = bd.v_star(lambda mu: np.sqrt([mu * (1 - mu), 0.25, mu * (1 - mu)]), bd.ThetaGrid(0.05, 0.95), 3)
print(f"  mixed profile: V*={rep.v_star:.6f} at mu={rep.mu_dagger:.4f}, arm {rep.arm}")

# Small gaps: KL(mu, mu + d) / d^2 approaches half the Fisher information.
fam = bd.BernoulliFamily()
print("\nmu=0.3, I/2 =", round(bd.fisher_information(fam, 0.3) / 2, 6))
for d in (1e-1, 1e-2, 1e-3, 1e-4):
    print(f"  delta={d:g}  ratio={bd.small_gap_ratio(fam, 0.3, d):.6f}")

print("\nKL(0.5 || 0.25) =", round(bd.kl_bernoulli(0.5, 0.25), 6), " KL(0.25 || 0.5) =",
      round(bd.kl_bernoulli(0.25, 0.5), 6))
print("d(0, 0) =", bd.binary_relative_entropy(0, 0), " d(0, 1/2) = log 2:",
      math.isclose(bd.binary_relative_entropy(0, 0.5), math.log(2)))

report = bd.kkt_verify([3.0, 0.5, 1.5, 2.0], best=0)
print("\noptimality residuals for sigma=(3, 0.5, 1.5, 2):")
for name, value in report.residuals.items():
    print(f"  {name:22s} {value:.1e}")
