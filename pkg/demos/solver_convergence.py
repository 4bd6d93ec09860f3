"""Convergence of the planar Monge-Ampere solver on bodies with a closed form.

Run with ``python demos/solver_convergence.py``.  Cells are marked ``# %%``.
"""

# %%
import math

import numpy as np

from matorsion import body, sphere, torsion

exact = math.pi ** 2 / 16
disk = body.from_radial(sphere.make_grid(2, 256), np.ones(256))

# %% [markdown]
# The unit disk.  With det D^2 u = 1 and u = 0 on the circle the solution is
# u = (|x|^2 - 1)/2, and T = (int -u)^2 = pi^2/16.  The finite-difference
# scheme is second order; the spectral scheme reaches roundoff quickly.

# %%
print("finite differences on the disk")
print(f"{'grid':>10}  {'T':>14}  {'rel. error':>10}  {'Newton':>6}")
prev = None
for nr in (16, 32, 64, 128):
    sol = torsion.ma_solve_2d(disk, grid=(nr, 2 * nr))
    err = abs(sol.T - exact) / exact
    rate = "" if prev is None else f"  order {math.log2(prev / err):.2f}"
    print(f"{nr:>4}x{2 * nr:<5}  {sol.T:14.10f}  {err:10.2e}  {sol.iterations:>6}{rate}")
    prev = err

# %%
rich = torsion.ma_solve_2d(disk, grid=(32, 64), richardson=True)
print(f"\nRichardson on 32x64: rel. error {abs(rich.T - exact) / exact:.2e}")

spec = torsion.ma_solve_2d(disk, scheme="spectral")
print(f"spectral: T = {spec.T:.15f}, rel. error {abs(spec.T - exact) / exact:.1e}")

# %% [markdown]
# An ellipse with perimeter 2 pi.  The quadratic u = (ab/2)(x^2/a^2 + y^2/b^2 - 1)
# solves the problem exactly, so the numerical T can be compared with the
# closed form on a body that is not a disk.

# %%
a = 1.15
b = body.ellipse_minor_axis_for_perimeter(a)
ell = body.ellipsoid_body(sphere.make_grid(2, 256), (a, b))
_, T_ell = torsion.ellipsoid_torsion((a, b))
print(f"\nellipse a = {a}, b = {b:.6f}: closed form T = {T_ell:.12f}")
for scheme in ("fd", "spectral"):
    sol = torsion.ma_solve_2d(ell, scheme=scheme)
    print(f"  {scheme:8s} T = {sol.T:.12f}  rel. error {abs(sol.T - T_ell) / T_ell:.1e}  residual {sol.residual:.1e}")

# %% [markdown]
# The torsion deficit of the ellipse equals its Alexandrov-Fenchel deficit
# exactly.  For a generic perturbed disk the torsion deficit is strictly
# smaller.

# %%
prof = body.quermass(ell)
print(f"\nellipse: deltaT = {torsion.torsion_deficit(T_ell, prof):.6e}, deltaAF = {body.af_deficit(prof):.6e}")

g = sphere.make_grid(2, 256)
bump = body.from_radial(g, 1 + 0.04 * np.cos(3 * g.theta) - 0.02 * np.sin(4 * g.theta))
sol = torsion.ma_solve_2d(bump, scheme="spectral")
prof = body.quermass(bump)
print(f"perturbed disk: deltaT = {torsion.torsion_deficit(sol.T, prof):.6e}, "
      f"deltaAF = {body.af_deficit(prof):.6e}")
