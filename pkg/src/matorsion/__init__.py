"""Monge-Ampere torsional rigidity, quermassintegrals and second-order deficit expansions.

Modules
-------
symmfunc
    generalized Kronecker delta, elementary symmetric functions, Newton tensors
sphere
    grids, quadrature, harmonic analysis and surface calculus on S^1 and S^2
body
    radial-graph bodies, curvatures, quermassintegrals, Alexandrov-Fenchel deficit
torsion
    exact ball/ellipsoid solutions, the planar Monge-Ampere solver, harmonic extensions
expansion
    mode-space expansions of the deficits, the mode-ratio analysis and oracle experiments
checks
    named identity and acceptance checks used by the command line
"""

__version__ = "0.1.0"

from . import body, expansion, io, sphere, symmfunc, torsion  # noqa: E402
from .body import QuermassProfile, StarBody, af_deficit, quermass  # noqa: E402
from .expansion import build_family, deficit_expansion, mode_ratio, ratio_experiment  # noqa: E402
from .sphere import ModeVector, make_grid  # noqa: E402
from .torsion import TorsionSolution, ball_torsion, ellipsoid_torsion, ma_solve_2d  # noqa: E402

__all__ = [
    "ModeVector",
    "QuermassProfile",
    "StarBody",
    "TorsionSolution",
    "af_deficit",
    "ball_torsion",
    "body",
    "build_family",
    "deficit_expansion",
    "ellipsoid_torsion",
    "expansion",
    "io",
    "ma_solve_2d",
    "make_grid",
    "mode_ratio",
    "quermass",
    "ratio_experiment",
    "sphere",
    "symmfunc",
    "torsion",
]
