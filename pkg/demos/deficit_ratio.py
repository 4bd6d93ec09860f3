"""Ratio of the torsion deficit to the Alexandrov-Fenchel deficit near the ball.

Run with ``python demos/deficit_ratio.py``.  Takes about half a minute; set
``HIGH_MODE = False`` to skip the k = 6 run.
"""

# %%
from fractions import Fraction

from matorsion import expansion
from matorsion.sphere import ModeVector

HIGH_MODE = True


def mode(n, k):
    return ModeVector.from_modes(n, {(k, k if n == 2 else 0): 1.0})


# %% [markdown]
# Second-order prediction.  For a single mode of degree k the expansion gives
# a ratio f(k) that decreases to (n-1)/n.  Taking the cofactor of S_k as the
# derivative of S_k gives the alternative (n+1)/(k+n-1) instead.

# %%
print(f"{'k':>3}  {'f(k), n=2':>10}  {'(n+1)/(k+n-1)':>14}")
for k in range(2, 9):
    f = expansion.mode_ratio(k, 2)
    g = expansion.mode_ratio(k, 2, cofactor="derivative")
    print(f"{k:>3}  {str(f):>10}  {str(g):>14}")

rep = expansion.infimum_analysis(2, kmax=10_000)
print(f"\nf(k) > 1/2 for all k <= 10^4: {rep.all_above_limit}; "
      f"f(10^4) - 1/2 = {rep.min_value - Fraction(1, 2)} = 5/(2(k+1))")

# %% [markdown]
# Exact oracle for degree two: the constrained family of V = cos 2 theta is
# matched by ellipses at fixed perimeter, whose torsion is known in closed form.

# %%
fam = expansion.build_family(mode(2, 2), t_values=(0.1, 0.05, 0.02, 0.01), check_convex=False)
ex = expansion.ratio_experiment(fam, "ellipsoid")
print("\nellipse oracle, n = 2, k = 2")
for r in ex.reports:
    print(f"  t = {r.t:<5}  deltaT/deltaAF = {r.ratio_oracle:.12f}   expansion f(2) = {r.ratio_expansion:.4f}")

# %% [markdown]
# Numerical oracle for higher modes: solve det D^2 u = 1 on each body of the
# family and extrapolate the ratio to t = 0.

# %%
print("\nMonge-Ampere oracle, n = 2")
cases = [(3, (0.04, 0.02, 0.01), None), (4, (0.04, 0.02, 0.01), None)]
if HIGH_MODE:
    cases.append((6, (0.02, 0.01, 0.005), {"grid": (32, 96)}))
for k, ts, solver in cases:
    fam = expansion.build_family(mode(2, k), t_values=ts)
    ex = expansion.ratio_experiment(fam, "ma2d", solver=solver, workers=len(ts))
    f = float(expansion.mode_ratio(k, 2))
    g = float(expansion.mode_ratio(k, 2, cofactor="derivative"))
    print(f"  k = {k}: limit {ex.limit:.4f} +- {ex.limit_error:.1e}   f(k) = {f:.4f}   3/(k+1) = {g:.4f}")

# %% [markdown]
# The measured limits follow 3/(k+1), not f(k).  At k = 6 this is 3/7, below
# 1/2.  If the pattern continues, single-mode ratios tend to zero as k grows.
