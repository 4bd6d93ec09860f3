"""Second-order expansions around the unit ball and the mode-ratio analysis.

A perturbation family is the radial graph ``r(xi, t) = 1 + t V + t^2 A / 2``
with ``V`` given in the harmonic basis.  Keeping ``W_{n-1}`` fixed to second
order forces ``int V = 0`` and fixes ``int A``; every second-order quantity
below depends on ``A`` only through that integral.

Mode-space formulas take ``P_k = sum_m a_{k,m}^2`` and are exact in ``n``.
The numerical side compares them with deficits measured on actual bodies:
exact ellipsoids (any ``n``) or the planar Monge-Ampere solver.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import body as bodymod
from . import sphere
from .sphere import InvalidInput, ModeVector, sphere_area, unit_ball_volume
from .torsion import ellipsoid_torsion, ma_solve_2d, torsion_deficit

__all__ = [
    "DeficitCoefficients",
    "DeficitReport",
    "FamilyNotConvex",
    "InfimumReport",
    "OracleUnavailable",
    "PerturbationFamily",
    "RatioExperiment",
    "WExpansion",
    "acceleration_integral",
    "build_family",
    "deficit_expansion",
    "f_tilde",
    "infimum_analysis",
    "mode_ratio",
    "ratio_experiment",
    "w_expansion",
]

DEFAULT_T = (0.04, 0.02, 0.01, 0.005)
RATIO_FLOOR = 1e-12


class FamilyNotConvex(InvalidInput):
    def __init__(self, t):
        super().__init__(f"perturbed body is not convex at t={t}")
        self.t = t


class OracleUnavailable(InvalidInput):
    pass


def _power(V: ModeVector):
    P = V.degree_power()
    return np.arange(len(P)), P


def _mean_coefficient(V: ModeVector) -> float:
    """``int_{S^{n-1}} V``, read off the degree-0 coefficient."""
    return float(np.sum(V.coeffs[V.degrees == 0])) * math.sqrt(sphere_area(V.n))


def _require_zero_mean(V: ModeVector):
    if np.any(V.coeffs[V.degrees == 0] != 0):
        raise InvalidInput("degree-0 coefficient must vanish (the family must keep int V = 0)")


def acceleration_integral(V: ModeVector, n: int | None = None) -> float:
    """``int A = -sum_k P_k k (k + n - 2)``: the value that keeps ``W_{n-1}`` fixed."""
    n = V.n if n is None else n
    _require_zero_mean(V)
    k, P = _power(V)
    return -float(np.sum(P * k * (k + n - 2)))


def _constant_mode(n: int, integral: float, kmax: int) -> ModeVector:
    A = ModeVector.zeros(n, kmax) if n in (2, 3) else ModeVector.from_modes(n, {0: 0.0}, kmax)
    c = A.coeffs.copy()
    c[0] = integral / math.sqrt(sphere_area(n))
    return ModeVector(n, A.degrees, A.orders, c)


# ---------------------------------------------------------------------------
# perturbation families


@dataclass(frozen=True, eq=False)
class PerturbationFamily:
    """``r(xi, t) = 1 + t V + t^2 A / 2`` sampled on ``grid`` (``n`` in {2, 3})."""

    n: int
    V: ModeVector
    A: ModeVector
    A_policy: str
    t_values: tuple
    grid: sphere.SphereGrid | None = None

    def radial(self, t: float) -> np.ndarray:
        if self.grid is None:
            raise InvalidInput(f"no quadrature grid for n={self.n}")
        return 1.0 + t * sphere.synthesize(self.V, self.grid) + 0.5 * t * t * sphere.synthesize(self.A, self.grid)

    def body(self, t: float) -> bodymod.StarBody:
        return bodymod.from_radial(self.grid, self.radial(t))


def build_family(V: ModeVector, n: int | None = None, A_policy: str = "constant",
                 t_values=DEFAULT_T, grid=None, check_convex: bool = True) -> PerturbationFamily:
    """Family with ``int A`` chosen so that ``W_{n-1}`` is stationary to second order.

    Only ``A_policy="constant"`` is implemented: ``A`` is the constant with the
    required integral.  Raises :class:`FamilyNotConvex` naming the first ``t``
    whose body fails the curvature-sign test.
    """
    n = V.n if n is None else n
    if n != V.n:
        raise InvalidInput("dimension mismatch")
    _require_zero_mean(V)
    if A_policy != "constant":
        raise InvalidInput(f"unknown A policy {A_policy!r}")
    A = _constant_mode(n, acceleration_integral(V), V.kmax)
    t_values = tuple(float(t) for t in t_values)
    if grid is None and n in (2, 3):
        kmax = max(V.kmax, 2)
        grid = sphere.make_grid(2, max(256, 16 * kmax)) if n == 2 else \
            sphere.make_grid(3, (max(32, 4 * kmax), max(64, 8 * kmax)))
    fam = PerturbationFamily(n, V, A, A_policy, t_values, grid)
    if check_convex and grid is not None:
        for t in t_values:
            if not fam.body(t).convex:
                raise FamilyNotConvex(t)
    return fam


# ---------------------------------------------------------------------------
# closed-form coefficients


@dataclass(frozen=True)
class WExpansion:
    """Coefficients of ``t^0, t^1, t^2`` for ``W_0(t)`` and ``W_{n-1}(t)``."""

    W0: tuple
    W_last: tuple


def w_expansion(V: ModeVector, A: ModeVector | None = None, n: int | None = None) -> WExpansion:
    """Second-order expansions of the volume and of ``W_{n-1}``.

    ``A=None`` uses the constrained value of ``int A``.  The ``S_2(D^2 V)``
    integral is reduced to ``(n-2)/2 int |grad V|^2``.
    """
    n = V.n if n is None else n
    om = unit_ball_volume(n)
    k, P = _power(V)
    grad_sq = float(np.sum(P * k * (k + n - 2)))
    s2 = 0.5 * (n - 2) * grad_sq
    int_V = _mean_coefficient(V)
    int_A = acceleration_integral(V.without_degrees(0), n) if A is None else _mean_coefficient(A)
    W0 = (om, int_V, 0.5 * (int_A + (n - 1) * float(np.sum(P))))
    c2 = ((n - 1) * int_A + 2 * (n - 3) * s2 - (n * n - 6 * n + 7) * grad_sq) / (2 * n * (n - 1))
    return WExpansion(W0, (om, int_V / n, c2))


@dataclass(frozen=True)
class DeficitCoefficients:
    """``delta ~ c t^2`` for the torsion and Alexandrov-Fenchel deficits."""

    cT: float
    cAF: float
    ratio: float | None
    flags: tuple = ()


def _nt_weight(cofactor: str, n: int) -> float:
    # weight of sum P_k (k^2 - k) in the torsion bracket
    if cofactor == "one-over-k":
        return 1.0 / n
    if cofactor == "derivative":
        return 1.0
    raise InvalidInput(f"unknown cofactor normalization {cofactor!r}")


def deficit_expansion(V: ModeVector, n: int | None = None, cofactor: str = "one-over-k") -> DeficitCoefficients:
    """Leading coefficients ``cT`` and ``cAF`` of the two deficits.

    Degree-1 content (a translation) is projected out first; it contributes
    nothing to either coefficient.  With nothing left the ratio is undefined
    and flagged.

    ``cofactor`` selects how the Monge-Ampere nonlinearity term is normalized.
    ``"one-over-k"`` writes the cofactor matrix as ``(1/k)[T_{k-1}]``, giving
    the term ``(1/n) sum P_k (k^2 - k)``.  ``"derivative"`` uses the cofactor
    matrix as the true derivative ``dS_k/dA = [T_{k-1}]``, which multiplies
    that term by ``n``.
    """
    n = V.n if n is None else n
    _require_zero_mean(V)
    w = _nt_weight(cofactor, n)
    flags = []
    if np.any(V.coeffs[V.degrees == 1] != 0):
        flags.append("degree-1 content removed: no contribution")
    W = V.without_degrees(1)
    k, P = _power(W)
    om = unit_ball_volume(n)
    int_A = acceleration_integral(W, n)
    pre = -0.5 * (n + 2) / om
    sumP = float(np.sum(P))
    cT = pre * ((n + 1) * sumP - 2 * float(np.sum(k * P)) + int_A + w * float(np.sum(P * (k * k - k))))
    cAF = pre * (int_A + (n - 1) * sumP)
    if sumP == 0.0:
        flags.append("ratio undefined: no modes of degree >= 2")
        return DeficitCoefficients(cT, cAF, None, tuple(flags))
    return DeficitCoefficients(cT, cAF, cT / cAF, tuple(flags))


def _ratio_parts(x, n, w=None):
    w = 1 / n if w is None else w
    N = n + 1 - 2 * x - x * (x + n - 2) + w * (x * x - x)
    D = n - 1 - x * (x + n - 2)
    return N, D


def mode_ratio(k: int, n: int, cofactor: str = "one-over-k") -> Fraction:
    """Predicted ``lim delta_T / delta_AF`` for a pure degree-``k`` family, exactly.

    With ``cofactor="derivative"`` the value simplifies to ``(n+1)/(k+n-1)``.
    """
    if k < 2 or n < 2:
        raise InvalidInput("need k >= 2 and n >= 2")
    _nt_weight(cofactor, n)
    w = Fraction(1, n) if cofactor == "one-over-k" else Fraction(1)
    N, D = _ratio_parts(Fraction(k), Fraction(n), w)
    assert D != 0
    return N / D


def f_tilde(x, n: int):
    """Real extension of :func:`mode_ratio` to ``x >= 2``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 2):
        raise InvalidInput("f_tilde is defined for x >= 2")
    N, D = _ratio_parts(x, n)
    return N / D


def _f_tilde_slope_sign(x, n):
    # sign of f' = sign of N'D - ND'
    N, D = _ratio_parts(x, n)
    dN = -2 - (2 * x + n - 2) + (2 * x - 1) / n
    dD = -(2 * x + n - 2)
    return np.sign(dN * D - N * dD)


@dataclass(frozen=True)
class InfimumReport:
    n: int
    kmax: int
    f2: Fraction
    f2_expected: Fraction
    limit: Fraction
    all_above_limit: bool
    min_value: Fraction
    argmin: int
    monotone_decreasing: bool
    tail_constant: float
    critical_points: tuple
    critical_points_are_maxima: bool
    stated_threshold: Fraction
    stated_threshold_below_two: bool
    f2_above_limit: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: (float(v) if isinstance(v, Fraction) else v) for k, v in d.items()}


def infimum_analysis(n: int, kmax: int = 10_000, samples: int = 20_001) -> InfimumReport:
    """Exact scan of ``f(k)`` for ``2 <= k <= kmax`` and a sampled scan of ``f_tilde'``.

    ``tail_constant`` is ``max_k k (f(k) - (n-1)/n)``: the constant ``C`` in
    ``f(k) - (n-1)/n <= C / k`` over the scanned range.
    """
    if kmax < 2:
        raise InvalidInput("kmax must be >= 2")
    limit = Fraction(n - 1, n)
    vals = [mode_ratio(k, n) for k in range(2, kmax + 1)]
    mn = min(vals)
    argmin = 2 + vals.index(mn)
    monotone = all(b < a for a, b in zip(vals, vals[1:]))
    tail = max(float(k * (v - limit)) for k, v in zip(range(2, kmax + 1), vals))
    x = np.linspace(2.0, float(kmax), samples)
    s = _f_tilde_slope_sign(x, n)
    crit = []
    maxima = True
    for i in np.nonzero(np.diff(s) != 0)[0]:
        crit.append(float(0.5 * (x[i] + x[i + 1])))
        maxima &= bool(s[i] > 0 > s[i + 1])
    thr = Fraction(n - 1, 3 * n - 1)
    f2 = vals[0]
    return InfimumReport(n=n, kmax=kmax, f2=f2, f2_expected=Fraction(n * n + 3 * n - 2, n * (n + 1)),
                         limit=limit, all_above_limit=all(v > limit for v in vals), min_value=mn,
                         argmin=argmin, monotone_decreasing=monotone, tail_constant=tail,
                         critical_points=tuple(crit), critical_points_are_maxima=maxima,
                         stated_threshold=thr, stated_threshold_below_two=thr < 2,
                         f2_above_limit=f2 > limit)


# ---------------------------------------------------------------------------
# numerical oracles


@dataclass(frozen=True)
class DeficitReport:
    t: float
    deltaT_oracle: float
    deltaAF_oracle: float
    ratio_oracle: float | None
    deltaT_expansion: float
    deltaAF_expansion: float
    ratio_expansion: float | None
    method: str
    T_error: float = 0.0


CSV_COLUMNS = ("t", "deltaT_oracle", "deltaAF_oracle", "ratio_oracle", "deltaT_expansion",
               "deltaAF_expansion", "ratio_expansion", "method")


@dataclass
class RatioExperiment:
    n: int
    oracle: str
    reports: list
    coefficients: DeficitCoefficients
    limit: float | None
    limit_error: float | None
    summary: dict = field(default_factory=dict)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in self.reports:
                w.writerow([_csv_cell(getattr(r, c)) for c in CSV_COLUMNS])

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary, fh, indent=2)


def _csv_cell(v):
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def degree_two_matrix(V: ModeVector) -> np.ndarray:
    """Traceless symmetric ``Q`` with ``V(xi) = xi^T Q xi``; error if ``V`` is not pure degree 2."""
    n = V.n
    if n not in (2, 3):
        raise OracleUnavailable(f"no harmonic basis for n={n}")
    rng = np.random.default_rng(12345)
    pts = rng.standard_normal((64, n))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    vals = sphere.harmonic_basis(n, V.kmax)(pts) @ V.coeffs
    iu = np.triu_indices(n)
    feats = np.stack([pts[:, i] * pts[:, j] * (1 if i == j else 2) for i, j in zip(*iu)], axis=1)
    sol, *_ = np.linalg.lstsq(feats, vals, rcond=None)
    if np.max(np.abs(feats @ sol - vals)) > 1e-10 * max(1.0, np.max(np.abs(vals))):
        raise OracleUnavailable("the ellipsoid oracle needs a perturbation of pure degree 2")
    Q = np.zeros((n, n))
    Q[iu] = sol
    Q = Q + Q.T - np.diag(np.diag(Q))
    return Q


def _ellipsoid_point(e, t, n):
    axes = 1.0 + t * e
    prof = bodymod.ellipsoid_profile(axes)
    lam = unit_ball_volume(n) / prof.W[n - 1]
    axes = lam * axes
    prof = bodymod.ellipsoid_profile(axes)
    _, T = ellipsoid_torsion(axes)
    return torsion_deficit(T, prof), bodymod.af_deficit(prof), 0.0


def _ma2d_point(family, t, solver):
    b = family.body(t)
    sol = ma_solve_2d(b, **solver)
    prof = bodymod.quermass(b)
    return torsion_deficit(sol.T, prof), bodymod.af_deficit(prof), sol.T_error


def _extrapolate(ts, ratios):
    """Polynomial extrapolation to ``t = 0``; the error bar compares neighbouring degrees."""
    ts = np.asarray(ts, dtype=float)
    rs = np.asarray(ratios, dtype=float)
    if len(ts) == 1:
        return float(rs[0]), float("nan")
    deg = min(2, len(ts) - 1)
    best = np.polyfit(ts, rs, deg)[-1]
    other = np.polyfit(ts, rs, deg + 1 if len(ts) > deg + 1 else deg - 1)[-1]
    return float(best), float(abs(best - other))


def _agrees(limit, err, value, floor=1e-3):
    if limit is None or value is None:
        return None
    return bool(abs(limit - value) <= max(floor, 10 * (err if np.isfinite(err) else 0.0)))


def ratio_experiment(family: PerturbationFamily, oracle: str = "ellipsoid", solver: dict | None = None,
                     tol: float = 1e-6, workers: int = 1) -> RatioExperiment:
    """Measure ``delta_T``, ``delta_AF`` and their ratio along a family.

    ``oracle="ellipsoid"`` realises a pure degree-2 ``V = xi^T Q xi`` as the
    ellipsoids with semi-axes ``lambda (1 + t e_i)`` (``e`` the eigenvalues of
    ``Q``), rescaled to ``W_{n-1} = omega_n``.  ``oracle="ma2d"`` solves the
    planar Monge-Ampere problem on the family's bodies (spectral scheme with an
    error estimate unless ``solver`` says otherwise).
    """
    n = family.n
    coeffs = deficit_expansion(family.V, n)
    derived = deficit_expansion(family.V, n, cofactor="derivative")
    if oracle == "ellipsoid":
        e = np.linalg.eigvalsh(degree_two_matrix(family.V))

        def point(t):
            return _ellipsoid_point(e, t, n)

        method = "ellipsoid-oracle"
    elif oracle == "ma2d":
        if n != 2:
            raise OracleUnavailable("the Monge-Ampere oracle is planar only (n = 2)")
        opts = {"scheme": "spectral", "error_estimate": True}
        opts.update(solver or {})

        def point(t):
            return _ma2d_point(family, t, opts)

        method = "ma2d-oracle"
    else:
        raise OracleUnavailable(f"unknown oracle {oracle!r}")

    ts = sorted(family.t_values, reverse=True)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            values = list(ex.map(point, ts))
    else:
        values = [point(t) for t in ts]

    reports = []
    for t, (dT, dA, err) in zip(ts, values):
        ratio = dT / dA if dA > RATIO_FLOOR else None
        eT, eA = coeffs.cT * t * t, coeffs.cAF * t * t
        reports.append(DeficitReport(t, dT, dA, ratio, eT, eA, coeffs.ratio, method, err))

    good = [(r.t, r.ratio_oracle) for r in reports if r.ratio_oracle is not None]
    limit, limit_err = _extrapolate(*zip(*good)) if good else (None, None)
    c_n = (n - 1) / n
    solver_tol = max([tol] + [r.T_error for r in reports])
    ratios = [r for _, r in good]
    summary = {
        "n": n,
        "oracle": method,
        "modes": {f"{k},{m}": a for (k, m), a in family.V.as_dict().items()},
        "t_values": ts,
        "oracle_ratio_limit": limit,
        "oracle_ratio_limit_error": limit_err,
        "expansion_ratio": coeffs.ratio,
        "cT_expansion": coeffs.cT,
        "cAF_expansion": coeffs.cAF,
        "c_n": c_n,
        "tolerance": solver_tol,
        "ratios_at_least_c_n": bool(all(r >= c_n - solver_tol for r in ratios)),
        "ratios_at_most_one": bool(all(r <= 1 + solver_tol for r in ratios)),
        "deltaT_le_deltaAF": bool(all(r.deltaT_oracle <= r.deltaAF_oracle + 2 * solver_tol for r in reports)),
        "deltaT_nonnegative": bool(all(r.deltaT_oracle >= -solver_tol for r in reports)),
        "expansion_matches_oracle": _agrees(limit, limit_err, coeffs.ratio),
        "expansion_ratio_derivative_cofactor": derived.ratio,
        "cT_expansion_derivative_cofactor": derived.cT,
        "derivative_cofactor_matches_oracle": _agrees(limit, limit_err, derived.ratio),
        "flags": list(coeffs.flags),
    }
    return RatioExperiment(n, method, reports, coeffs, limit, limit_err, summary)
