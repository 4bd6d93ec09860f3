"""Star-shaped bodies given by a radial function, their curvatures and quermassintegrals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from . import sphere
from .sphere import InvalidInput, SphereGrid, UnsupportedDimension, unit_ball_volume
from .symmfunc import elem_sym_eigen, elem_sym_matrix, newton_tensor

__all__ = [
    "CurvatureField",
    "DegenerateMetric",
    "QuermassProfile",
    "StarBody",
    "af_deficit",
    "area_element",
    "curvatures",
    "ellipse_perimeter",
    "ellipse_minor_axis_for_perimeter",
    "ellipsoid_body",
    "ellipsoid_profile",
    "from_modes",
    "from_radial",
    "quermass",
    "sigma_via_lemma",
]

CONVEXITY_TOL = 1e-10


class DegenerateMetric(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StarBody:
    """Body ``{s r(xi) xi : 0 <= s <= 1}`` sampled on a sphere grid.

    ``derivs`` holds the angular derivatives of ``r`` (see
    :func:`sphere.coordinate_derivatives`).  ``convex`` is certified at grid
    nodes only.
    """

    grid: SphereGrid
    r: np.ndarray
    derivs: dict
    convex: bool

    @property
    def n(self) -> int:
        return self.grid.n

    def scaled(self, lam: float) -> "StarBody":
        return from_radial(self.grid, lam * self.r)

    def __repr__(self):
        return f"StarBody(n={self.n}, grid={self.grid.shape}, convex={self.convex})"


@dataclass(frozen=True, eq=False)
class CurvatureField:
    """Principal curvatures and normalized symmetric functions at grid nodes.

    ``sigma[j]`` is the j-th normalized elementary symmetric function of the
    principal curvatures, ``j = 0..n-1``.
    """

    kappa: np.ndarray
    sigma: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        """Non-normalized mean curvature ``H = (n-1) sigma_1``."""
        return self.kappa.sum(axis=-1)

    @property
    def gauss(self) -> np.ndarray:
        return self.sigma[-1]


@dataclass(frozen=True)
class QuermassProfile:
    """``W[j]`` for ``j = 0..n-1`` and mean radii ``zeta[j] = (W_j/omega_n)^(1/(n-j))``.

    ``zeta[0]`` is the volume radius; the Alexandrov-Fenchel inequalities say
    ``zeta`` is non-decreasing.
    """

    n: int
    W: tuple
    zeta: tuple

    @classmethod
    def from_W(cls, n, W) -> "QuermassProfile":
        W = tuple(float(w) for w in W)
        if len(W) != n:
            raise InvalidInput(f"expected {n} quermassintegrals, got {len(W)}")
        if min(W) <= 0:
            raise InvalidInput("quermassintegrals must be positive")
        om = unit_ball_volume(n)
        zeta = tuple((w / om) ** (1.0 / (n - j)) for j, w in enumerate(W))
        return cls(n, W, zeta)

    def af_chain_holds(self, rtol: float = 1e-12) -> bool:
        z = np.asarray(self.zeta)
        return bool(np.all(np.diff(z) >= -rtol * z[1:]))

    def to_dict(self) -> dict:
        return {"n": self.n, "W": list(self.W), "zeta": list(self.zeta)}


def from_radial(grid: SphereGrid, r) -> StarBody:
    r = np.asarray(r.values if isinstance(r, sphere.SurfaceField) else r, dtype=float)
    if r.shape != grid.shape:
        raise InvalidInput(f"radial function shape {r.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise InvalidInput("radial function must be positive and finite")
    derivs = sphere.coordinate_derivatives(grid, r)
    body = StarBody(grid, r, derivs, convex=False)
    kap = curvatures(body).kappa
    object.__setattr__(body, "convex", bool(np.all(kap >= -CONVEXITY_TOL)))
    return body


def from_modes(grid: SphereGrid, modes: sphere.ModeVector, radius: float = 1.0) -> StarBody:
    """``r = radius + sum a_{k,m} Y_{k,m}``."""
    return from_radial(grid, radius + sphere.synthesize(modes, grid))


def ellipsoid_body(grid: SphereGrid, axes) -> StarBody:
    axes = np.asarray(axes, dtype=float)
    if axes.shape != (grid.n,):
        raise InvalidInput(f"need {grid.n} semi-axes")
    r = np.sum(grid.nodes ** 2 / axes ** 2, axis=-1) ** -0.5
    return from_radial(grid, r)


def area_element(body: StarBody) -> np.ndarray:
    """Density of surface measure with respect to ``dxi``: ``r^(n-2) sqrt(r^2 + |grad r|^2)``."""
    g2 = sphere.surface_gradient_sq(body.grid, body.r, body.derivs)
    return body.r ** (body.n - 2) * np.sqrt(body.r ** 2 + g2)


def _normalized_sigma(kappa):
    m = kappa.shape[-1]
    return np.stack([elem_sym_eigen(kappa, j) / math.comb(m, j) for j in range(m + 1)])


def curvatures(body: StarBody) -> CurvatureField:
    """Principal curvatures from the first and second fundamental forms."""
    r, d = body.r, body.derivs
    if body.n == 2:
        r1, r2 = d["t"], d["tt"]
        denom = (r ** 2 + r1 ** 2) ** 1.5
        kappa = ((r ** 2 + 2 * r1 ** 2 - r * r2) / denom)[..., None]
        return CurvatureField(kappa, _normalized_sigma(kappa))
    if body.n != 3:
        raise UnsupportedDimension(f"curvatures implemented for n = 2, 3 (got {body.n})")
    th = body.grid.theta[:, None]
    ph = body.grid.phi[None, :]
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    zero = 0 * (th + ph)

    def vec(a, b, c):
        return np.stack(np.broadcast_arrays(a, b, c), axis=-1)

    xi = vec(st * cp, st * sp, ct + zero)
    xi_t = vec(ct * cp, ct * sp, -st + zero)
    xi_p = vec(-st * sp, st * cp, zero)
    xi_tp = vec(-ct * sp, ct * cp, zero)
    xi_pp = vec(-st * cp, -st * sp, zero)
    R = r[..., None]
    rt, rp = d["t"][..., None], d["p"][..., None]
    X_t = rt * xi + R * xi_t
    X_p = rp * xi + R * xi_p
    X_tt = d["tt"][..., None] * xi + 2 * rt * xi_t - R * xi
    X_tp = d["tp"][..., None] * xi + rt * xi_p + rp * xi_t + R * xi_tp
    X_pp = d["pp"][..., None] * xi + 2 * rp * xi_p + R * xi_pp
    N = np.cross(X_t, X_p)
    normN = np.linalg.norm(N, axis=-1)
    if np.any(normN < 1e-14):
        raise DegenerateMetric("first fundamental form is singular at some node")
    nu = N / normN[..., None]
    first = np.stack([np.stack([np.sum(X_t * X_t, -1), np.sum(X_t * X_p, -1)], -1),
                      np.stack([np.sum(X_t * X_p, -1), np.sum(X_p * X_p, -1)], -1)], -2)
    second = np.stack([np.stack([np.sum(X_tt * nu, -1), np.sum(X_tp * nu, -1)], -1),
                       np.stack([np.sum(X_tp * nu, -1), np.sum(X_pp * nu, -1)], -1)], -2)
    shape_op = -np.linalg.solve(first, second)
    kappa = np.sort(np.linalg.eigvals(shape_op).real, axis=-1)
    return CurvatureField(kappa, _normalized_sigma(kappa))


def sigma_via_lemma(body: StarBody, k: int) -> np.ndarray:
    """Normalized k-th mean curvature from the radial function alone.

    Evaluates the closed formula in terms of ``r``, its tangential gradient
    and the Newton tensors of its covariant Hessian ``D^2 r`` on the sphere.
    """
    n = body.n
    if n not in (2, 3):
        raise UnsupportedDimension(f"n={n}")
    if not 0 <= k <= n - 1:
        raise InvalidInput(f"k={k} outside [0, {n - 1}]")
    r = body.r
    grad = sphere.surface_gradient(body.grid, r, body.derivs)
    hess = sphere.covariant_hessian(body.grid, r, body.derivs)
    g2 = np.sum(grad ** 2, axis=-1)
    total = np.zeros_like(r)
    for m in range(k + 1):
        s_m = elem_sym_matrix(hess, m)
        term = r ** 2 * s_m
        if n - 1 - m > 0:
            Tm = sphere_newton(hess, m)
            rTr = np.einsum("...i,...ij,...j->...", grad, Tm, grad)
            term = term + (n - 1 + k - 2 * m) / (n - 1 - m) * rTr
        total += (-1) ** m * math.comb(n - 1 - m, k - m) * r ** (-m) * term
    return total * (r ** 2 + g2) ** (-(k + 2) / 2) / math.comb(n - 1, k)


def sphere_newton(hess, m):
    if m == 0:
        dim = hess.shape[-1]
        return np.broadcast_to(np.eye(dim), hess.shape)
    return newton_tensor([hess] * m)


def quermass(body: StarBody) -> QuermassProfile:
    """Volume by polar integration and ``W_j = (1/n) int sigma_{j-1} dH^{n-1}``."""
    n = body.n
    grid = body.grid
    W = [sphere.integrate(grid, body.r ** n / n)]
    curv = curvatures(body)
    dA = area_element(body)
    for j in range(1, n):
        W.append(sphere.integrate(grid, curv.sigma[j - 1] * dA) / n)
    return QuermassProfile.from_W(n, W)


def af_deficit(profile: QuermassProfile) -> float:
    """``1 - omega^((n-1)(n+2)) W_0^(n+2) / W_{n-1}^(n(n+2))``, evaluated in logs."""
    n = profile.n
    om = unit_ball_volume(n)
    W0, Wl = profile.W[0], profile.W[n - 1]
    log_ratio = (n - 1) * (n + 2) * math.log(om) + (n + 2) * math.log(W0) - n * (n + 2) * math.log(Wl)
    return -math.expm1(log_ratio)


# ---------------------------------------------------------------------------
# ellipses and ellipsoids, used as exact references


def ellipse_perimeter(a: float, b: float) -> float:
    a, b = max(a, b), min(a, b)
    return 4 * a * special.ellipe(1 - (b / a) ** 2)


def ellipse_minor_axis_for_perimeter(a: float, perimeter: float = 2 * math.pi) -> float:
    """Second semi-axis ``b`` of the ellipse with semi-axis ``a`` and the given perimeter."""
    # the perimeter grows with b and lies between 4 max(a, b) and 2 pi max(a, b)
    if 4 * a >= perimeter:
        raise InvalidInput("no ellipse with that semi-axis and perimeter")
    return optimize.brentq(lambda b: ellipse_perimeter(a, b) - perimeter, 0.0, perimeter / 4,
                           xtol=1e-15, rtol=1e-15)


def ellipsoid_profile(axes, grid: SphereGrid | None = None) -> QuermassProfile:
    """Quermassintegrals of an ellipsoid without any curvature computation.

    ``W_0`` is exact; ``W_{n-1}`` is the sphere average of the support
    function ``h(xi) = |diag(axes) xi|``; for ``n = 3``, ``W_1`` is the area
    of the parametrized surface divided by 3.
    """
    axes = np.asarray(axes, dtype=float)
    n = len(axes)
    if grid is None:
        grid = sphere.make_grid(n, 512 if n == 2 else (96, 192))
    om = unit_ball_volume(n)
    W = [om * float(np.prod(axes))]
    if n == 2:
        W.append(ellipse_perimeter(*axes) / 2)
        return QuermassProfile.from_W(2, W)
    if n != 3:
        raise UnsupportedDimension(f"n={n}")
    a, b, c = axes
    st = np.sin(grid.theta)[:, None]
    ct = np.cos(grid.theta)[:, None]
    cp, sp = np.cos(grid.phi)[None, :], np.sin(grid.phi)[None, :]
    # |X_theta x X_phi| / sin(theta) integrated against dxi
    dens = np.sqrt((b * c * st * cp) ** 2 + (a * c * st * sp) ** 2 + (a * b * ct) ** 2)
    W.append(sphere.integrate(grid, dens) / 3)
    h = np.sqrt(np.sum((grid.nodes * axes) ** 2, axis=-1))
    W.append(sphere.integrate(grid, h) / 3)
    return QuermassProfile.from_W(3, W)
