"""Monge-Ampere torsion: closed forms, a 2D numerical solver and harmonic extensions.

The torsion function of a convex domain solves ``det D^2 u = 1`` with ``u = 0``
on the boundary; its torsional rigidity is ``T = (int -u)^n``.  Balls and
ellipsoids have quadratic solutions.  For planar star-shaped bodies
:func:`ma_solve_2d` computes ``u`` numerically on a boundary-fitted polar grid.

Solver outline
--------------
The unit disk is mapped onto the body by ``x = R(rho, theta) e(theta)``.  Two
radial profiles are available:

``"blend"`` (default)
    ``R = rho (1 + h)`` with ``h`` the harmonic extension of ``r - 1``.  The map
    is smooth at the origin, so spectral collocation converges exponentially.
``"radial"``
    ``R = rho r(theta)``.  Simple, but only Lipschitz at the origin.

In the computational coordinates ``q = (rho, theta)`` the physical Hessian is
``J^{-T} M J^{-1}`` with ``M_ab = U_ab - (grad u) . Phi_ab``, so the equation
reads ``det M = (det J)^2``.  Newton's method is applied to
``det M / (det J)^2 - 1``; the linearization is elliptic while ``M`` stays
positive definite.  Derivatives come from Chebyshev-Fourier collocation on
the disk (``scheme="spectral"``, no node at the origin, the diameter trick
``U(-rho, theta) = U(rho, theta + pi)``) or from second-order centred
differences on a cell-centred polar grid (``scheme="fd"``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.polynomial import chebyshev as cheb_poly
from scipy.special import comb, roots_legendre

from . import sphere
from .body import QuermassProfile, StarBody
from .sphere import InvalidInput, ModeVector, UnsupportedDimension, unit_ball_volume
from .symmfunc import cofactor_sk

__all__ = [
    "HarmonicExtension",
    "NonConvergence",
    "NonConvexBody",
    "NTTerm",
    "TorsionSolution",
    "ball_torsion",
    "ellipsoid_symbolic_check",
    "ellipsoid_torsion",
    "harmonic_extension",
    "ma_solve_2d",
    "nt_term",
    "reilly_check",
    "torsion_deficit",
]

DEFAULT_GRID = {"fd": (128, 256), "spectral": (24, 64)}
DEFAULT_TOL = {"fd": 1e-7, "spectral": 1e-10}
# below this residual a Newton run that stops improving has hit roundoff and is accepted
STAGNATION_ACCEPT = 1e-8


class NonConvergence(RuntimeError):
    """Newton iteration failed; ``history`` holds the residual after each step."""

    def __init__(self, message: str, history):
        super().__init__(f"{message}; residual history: "
                         + ", ".join(f"{r:.3e}" for r in history))
        self.history = tuple(history)


class NonConvexBody(ValueError):
    pass


@dataclass(eq=False)
class TorsionSolution:
    """Torsion function of a domain and its rigidity ``T = (int -u)^n``.

    Numerical solutions carry nodal values ``u`` at polar nodes ``(rho,
    theta)`` of the computational disk (physical positions in ``x``).  Closed
    forms carry a callable instead and ``method == "closed-form"``.
    """

    domain: object
    n: int
    T: float
    integral: float
    method: str
    u: np.ndarray | None = None
    rho: np.ndarray | None = None
    theta: np.ndarray | None = None
    x: np.ndarray | None = None
    residual: float = 0.0
    iterations: int = 0
    residual_history: tuple = ()
    convex: bool = True
    T_error: float = 0.0
    closed_form: Callable | None = field(default=None, repr=False)

    def summary(self) -> dict:
        return {"T": self.T, "integral": self.integral, "residual": self.residual,
                "iterations": self.iterations, "convex": self.convex,
                "T_error": self.T_error, "method": self.method,
                "grid": None if self.u is None else list(self.u.shape)}

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2)

    def to_csv(self, path) -> None:
        """Nodal values as ``rho,theta,u`` rows."""
        if self.u is None:
            raise InvalidInput("closed-form solution has no nodal values")
        rho, th = np.meshgrid(self.rho, self.theta, indexing="ij")
        data = np.column_stack([rho.ravel(), th.ravel(), self.u.ravel()])
        np.savetxt(path, data, delimiter=",", header="rho,theta,u", comments="", fmt="%.17g")


# ---------------------------------------------------------------------------
# closed forms


def ball_torsion(n: int, R: float = 1.0) -> tuple[TorsionSolution, float]:
    """``u = (|x|^2 - R^2)/2`` and ``T = omega_n^n R^(n(n+2)) / (n+2)^n``."""
    if R <= 0:
        raise InvalidInput("radius must be positive")
    om = unit_ball_volume(n)
    integral = om * R ** (n + 2) / (n + 2)
    T = om ** n * R ** (n * (n + 2)) / (n + 2) ** n

    def u(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (np.sum(x * x, axis=-1) - R * R)

    sol = TorsionSolution(domain=(float(R),) * n, n=n, T=T, integral=integral,
                          method="closed-form", closed_form=u)
    return sol, T


def ellipsoid_torsion(axes) -> tuple[TorsionSolution, float]:
    """``u = (prod a)^(2/n)/2 (sum x_i^2/a_i^2 - 1)``; ``T = |E|^(n+2)/((n+2)^n omega^2)``."""
    a = np.asarray(axes, dtype=float)
    if a.ndim != 1 or np.any(a <= 0):
        raise InvalidInput("semi-axes must be positive")
    n = len(a)
    om = unit_ball_volume(n)
    vol = om * float(np.prod(a))
    scale = float(np.prod(a)) ** (2.0 / n)
    integral = scale * float(np.prod(a)) * om / (n + 2)
    T = vol ** (n + 2) / ((n + 2) ** n * om ** 2)

    def u(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * scale * (np.sum(x * x / a ** 2, axis=-1) - 1.0)

    sol = TorsionSolution(domain=tuple(a), n=n, T=T, integral=integral,
                          method="closed-form", closed_form=u)
    return sol, T


def ellipsoid_symbolic_check(n: int) -> dict:
    """Exact checks of the ellipsoid solution with symbolic semi-axes.

    Returns the simplified ``det D^2 u - 1``, the simplified difference between
    ``(int -u)^n`` (integrated symbolically) and ``|E|^(n+2)/((n+2)^n omega^2)``,
    and the boundary value of ``u`` at an axis endpoint.
    """
    import sympy as sy

    a = sy.symbols(f"a1:{n + 1}", positive=True)
    x = sy.symbols(f"x1:{n + 1}", real=True)
    P = sy.Mul(*a)
    u = P ** sy.Rational(2, n) / 2 * (sum(xi ** 2 / ai ** 2 for xi, ai in zip(x, a)) - 1)
    det = sy.Matrix(n, n, lambda i, j: sy.diff(u, x[i], x[j])).det()
    # int_E (1 - sum x^2/a^2) = prod(a) |S^{n-1}| int_0^1 (1 - s^2) s^(n-1) ds
    s = sy.symbols("s", positive=True)
    area = 2 * sy.pi ** sy.Rational(n, 2) / sy.gamma(sy.Rational(n, 2))
    omega = area / n
    integral = P ** sy.Rational(2, n) / 2 * P * area * sy.integrate((1 - s ** 2) * s ** (n - 1), (s, 0, 1))
    target = (omega * P) ** (n + 2) / ((n + 2) ** n * omega ** 2)
    boundary = u.subs({x[0]: a[0], **{xi: 0 for xi in x[1:]}})
    return {"det_minus_one": sy.simplify(det - 1),
            "T_difference": sy.simplify(integral ** n - target),
            "boundary_value": sy.simplify(boundary)}


def torsion_deficit(T_body: float, profile: QuermassProfile) -> float:
    """``1 - T / T(ball with the same W_{n-1})``, evaluated in logs."""
    n = profile.n
    om = unit_ball_volume(n)
    zeta = profile.zeta[n - 1]
    log_ref = n * math.log(om) + n * (n + 2) * math.log(zeta) - n * math.log(n + 2)
    return -math.expm1(math.log(T_body) - log_ref)


# ---------------------------------------------------------------------------
# discretizations of the computational disk


def _cheb(N):
    """Chebyshev points ``cos(pi j/N)`` and the differentiation matrix."""
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(N + 1)
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def _fourier(M):
    """Periodic spectral first and second derivative matrices on ``M`` (even) nodes."""
    h = 2 * np.pi / M
    j = np.arange(1, M)
    col1 = np.zeros(M)
    col1[1:] = 0.5 * (-1.0) ** j / np.tan(j * h / 2)
    D1 = scipy.linalg.toeplitz(col1, -col1)
    col2 = np.zeros(M)
    col2[0] = -np.pi ** 2 / (3 * h ** 2) - 1.0 / 6
    col2[1:] = -0.5 * (-1.0) ** j / np.sin(j * h / 2) ** 2
    D2 = scipy.linalg.toeplitz(col2)
    return D1, D2


def _half_turn(M):
    """Permutation taking values at ``theta`` to values at ``theta + pi``."""
    return sp.csr_matrix((np.ones(M), (np.arange(M), (np.arange(M) + M // 2) % M)), shape=(M, M))


@dataclass
class _Disk:
    rho: np.ndarray
    theta: np.ndarray
    Dr: object
    Drr: object
    Dt: object
    Dtt: object
    Drt: object
    sparse: bool
    quad: Callable


def _spectral_disk(nr, M):
    N = 2 * nr + 1
    x, D = _cheb(N)
    D2 = D @ D
    pos = np.arange(1, nr + 1)
    neg = N - pos
    P = _half_turn(M).toarray()
    I_M = np.eye(M)
    Dr = np.kron(D[np.ix_(pos, pos)], I_M) + np.kron(D[np.ix_(pos, neg)], P)
    Drr = np.kron(D2[np.ix_(pos, pos)], I_M) + np.kron(D2[np.ix_(pos, neg)], P)
    F1, F2 = _fourier(M)
    Dt = np.kron(np.eye(nr), F1)
    Dtt = np.kron(np.eye(nr), F2)
    theta = 2 * np.pi * np.arange(M) / M

    def quad(G):
        # G(rho) is odd in the diameter variable; integrate its interpolant over [0, 1]
        vals = np.zeros(N + 1)
        vals[pos] = G
        vals[neg] = -G
        coef = cheb_poly.chebfit(x, vals, N)
        anti = cheb_poly.chebint(coef)
        return float(cheb_poly.chebval(1.0, anti) - cheb_poly.chebval(0.0, anti))

    return _Disk(x[pos], theta, Dr, Drr, Dt, Dtt, Dr @ Dt, False, quad)


def _fd_disk(nr, M):
    d = 1.0 / nr
    rho = (np.arange(nr) + 0.5) * d
    h = 2 * np.pi / M
    P = _half_turn(M)
    I_M = sp.identity(M, format="csr")
    ones = np.ones(nr)
    # cell-centred Dirichlet: ghost value -U beyond rho = 1, reflection through the centre
    E1 = sp.diags([-ones[1:], ones[1:]], [-1, 1], format="lil") / (2 * d)
    E1[nr - 1, nr - 1] = -1.0 / (2 * d)
    E2 = sp.lil_matrix((nr, nr))
    E2[0, 0] = -1.0 / (2 * d)
    Dr = sp.kron(E1.tocsr(), I_M) + sp.kron(E2.tocsr(), P)
    L1 = sp.diags([ones[1:], -2 * ones, ones[1:]], [-1, 0, 1], format="lil") / d ** 2
    L1[nr - 1, nr - 1] = -3.0 / d ** 2
    L2 = sp.lil_matrix((nr, nr))
    L2[0, 0] = 1.0 / d ** 2
    Drr = sp.kron(L1.tocsr(), I_M) + sp.kron(L2.tocsr(), P)
    e = np.ones(M)
    T1 = sp.diags([-e[1:], e[1:], [-1.0], [1.0]], [-1, 1, M - 1, -(M - 1)], format="csr") / (2 * h)
    T2 = sp.diags([e[1:], -2 * e, e[1:], [1.0], [1.0]], [-1, 0, 1, M - 1, -(M - 1)], format="csr") / h ** 2
    I_r = sp.identity(nr, format="csr")
    Dt = sp.kron(I_r, T1, format="csr")
    Dtt = sp.kron(I_r, T2, format="csr")
    Dr = Dr.tocsr()
    theta = h * np.arange(M)

    def quad(G):
        return float(np.sum(G) * d)

    return _Disk(rho, theta, Dr, Drr.tocsr(), Dt, Dtt, (Dr @ Dt).tocsr(), True, quad)


class _BodyMap:
    """Profile ``R(rho, theta)`` of the polar map onto a planar star body."""

    def __init__(self, r_values, mapping):
        r = np.asarray(r_values, dtype=float)
        N = len(r)
        c = np.fft.rfft(r) / N
        self.m = np.arange(len(c))
        self.a = 2 * c.real
        self.b = -2 * c.imag
        self.a[0] = c[0].real
        if N % 2 == 0:
            self.a[-1] /= 2
        self.mapping = mapping

    def profile(self, rho, theta):
        """``R`` and its derivatives at the tensor grid ``rho x theta``."""
        m = self.m[:, None]
        cos = np.cos(m * theta[None, :])
        sin = np.sin(m * theta[None, :])
        ang = self.a[:, None] * cos + self.b[:, None] * sin           # r - mean part per mode
        ang_t = m * (self.b[:, None] * cos - self.a[:, None] * sin)
        ang_tt = -(m ** 2) * ang
        rho = rho[:, None]
        if self.mapping == "radial":
            r = ang.sum(axis=0)[None, :]
            r_t = ang_t.sum(axis=0)[None, :]
            r_tt = ang_tt.sum(axis=0)[None, :]
            z = np.zeros_like(rho * r)
            return dict(R=rho * r, Rr=r + z, Rrr=z, Rt=rho * r_t, Rrt=r_t + z, Rtt=rho * r_tt)
        if self.mapping != "blend":
            raise InvalidInput(f"unknown mapping {self.mapping!r}")
        ang = ang.copy()
        ang[0] -= 1.0                                   # h is the extension of r - 1
        mm = self.m.astype(float)
        pw = rho[..., None] ** mm                       # (nr, 1, modes)
        pw1 = np.where(mm > 0, mm * rho[..., None] ** np.maximum(mm - 1, 0), 0.0)
        pw2 = np.where(mm > 1, mm * (mm - 1) * rho[..., None] ** np.maximum(mm - 2, 0), 0.0)
        A, At, Att = ang.T[None], ang_t.T[None], ang_tt.T[None]  # (1, M, modes)
        h = np.sum(pw * A, axis=-1)
        h_r = np.sum(pw1 * A, axis=-1)
        h_rr = np.sum(pw2 * A, axis=-1)
        h_t = np.sum(pw * At, axis=-1)
        h_rt = np.sum(pw1 * At, axis=-1)
        h_tt = np.sum(pw * Att, axis=-1)
        return dict(R=rho * (1 + h), Rr=1 + h + rho * h_r, Rrr=2 * h_r + rho * h_rr,
                    Rt=rho * h_t, Rrt=h_t + rho * h_rt, Rtt=rho * h_tt)


def _as_op(A, v):
    return A @ v


def _ma_parts(U, disk, g):
    Ur, Ut = _as_op(disk.Dr, U), _as_op(disk.Dt, U)
    Urr, Utt, Urt = _as_op(disk.Drr, U), _as_op(disk.Dtt, U), _as_op(disk.Drt, U)
    p = Ur / g["Rr"]
    q = (Ut - g["Rt"] * p) / g["R"]
    M11 = Urr - g["Rrr"] * p
    M12 = Urt - g["Rrt"] * p - g["Rr"] * q
    M22 = Utt - (g["Rtt"] - g["R"]) * p - 2 * g["Rt"] * q
    return M11, M12, M22


def _jacobian(M11, M12, M22, disk, g, scale):
    cp = -M22 * g["Rrr"] - M11 * (g["Rtt"] - g["R"]) + 2 * M12 * g["Rrt"]
    cq = -2 * M11 * g["Rt"] + 2 * M12 * g["Rr"]
    c_r = cp / g["Rr"] - cq * g["Rt"] / (g["R"] * g["Rr"])
    c_t = cq / g["R"]
    coeffs = [(M22, disk.Drr), (M11, disk.Dtt), (-2 * M12, disk.Drt), (c_r, disk.Dr), (c_t, disk.Dt)]
    if disk.sparse:
        L = sum(sp.diags(c * scale) @ D for c, D in coeffs)
        return L.tocsc()
    return sum((c * scale)[:, None] * D for c, D in coeffs)


def _newton(disk, g, U, tol, maxiter):
    scale = 1.0 / (g["R"] * g["Rr"]) ** 2
    history = []

    def resid(V):
        M11, M12, M22 = _ma_parts(V, disk, g)
        return (M11 * M22 - M12 ** 2) * scale - 1.0, (M11, M12, M22)

    F, parts = resid(U)
    for it in range(maxiter + 1):
        res = float(np.max(np.abs(F)))
        history.append(res)
        stalled = it >= 3 and res <= STAGNATION_ACCEPT and res > 0.5 * min(history[-4:-1])
        if res <= tol or stalled:
            return U, parts, res, it, history
        if it == maxiter or not np.isfinite(res):
            break
        L = _jacobian(*parts, disk, g, scale)
        dU = spla.spsolve(L, -F) if disk.sparse else np.linalg.solve(L, -F)
        step = 1.0
        while True:
            F_new, parts_new = resid(U + step * dU)
            if np.max(np.abs(F_new)) < (1 - 1e-4 * step) * res or step < 1.0 / 64:
                break
            step /= 2
        U = U + step * dU
        F, parts = F_new, parts_new
    raise NonConvergence(f"Newton did not reach residual {tol:g} in {maxiter} steps", history)


def _solve_once(bmap, scheme, grid, tol, maxiter):
    nr, M = int(grid[0]), int(grid[1])
    if M % 2 or M < 8 or nr < 4:
        raise InvalidInput(f"grid {grid}: need >= 4 radial nodes and an even angular count >= 8")
    disk = _spectral_disk(nr, M) if scheme == "spectral" else _fd_disk(nr, M)
    prof = bmap.profile(disk.rho, disk.theta)
    g = {k: v.ravel() for k, v in prof.items()}
    detJ = g["R"] * g["Rr"]
    if np.any(detJ <= 0) or np.any(g["R"] <= 0):
        raise InvalidInput("polar map folds over; perturbation too large for this mapping")
    rr = np.repeat(disk.rho, M)
    U0 = 0.5 * (rr ** 2 - 1.0) * float(np.mean(g["R"][-M:] / rr[-M:])) ** 2
    U, (M11, M12, M22), res, its, hist = _newton(disk, g, U0, tol, maxiter)
    G = np.sum((-U * detJ).reshape(nr, M), axis=1) * (2 * np.pi / M)
    integral = disk.quad(G)
    convex = bool(np.all(M11 > 0) and np.all(M11 * M22 - M12 ** 2 > 0))
    th = disk.theta[None, :]
    R = prof["R"]
    x = np.stack([R * np.cos(th), R * np.sin(th)], axis=-1)
    return dict(U=U.reshape(nr, M), rho=disk.rho, theta=disk.theta, x=x, integral=integral,
                residual=res, iterations=its, history=tuple(hist), convex=convex)


def ma_solve_2d(body: StarBody, grid=None, scheme: str = "fd", mapping: str = "blend",
                tol: float | None = None, maxiter: int = 40, richardson: bool = False,
                error_estimate: bool = False) -> TorsionSolution:
    """Solve ``det D^2 u = 1``, ``u = 0`` on the boundary of a convex planar body.

    Parameters
    ----------
    body : StarBody
        Convex body with ``n = 2``.
    grid : (int, int), optional
        Radial and angular node counts; defaults to 128 x 256 for ``"fd"`` and
        24 x 64 for ``"spectral"``.
    scheme : {"fd", "spectral"}
    mapping : {"blend", "radial"}
        Radial profile of the polar map, see the module docstring.
    tol : float, optional
        Max-norm target for ``det D^2 u - 1`` at the nodes.
    richardson : bool
        ``"fd"`` only: also solve on the half grid and extrapolate ``int -u``
        assuming second-order convergence.
    error_estimate : bool
        ``"spectral"`` only: re-solve on a 3/4 grid and report the change in
        ``T`` as ``T_error``.

    Raises
    ------
    NonConvexBody
        The body fails the curvature-sign check.
    NonConvergence
        Newton stalled; the exception carries the residual history.
    """
    if body.n != 2:
        raise UnsupportedDimension("the numerical Monge-Ampere solver is planar only")
    if not body.convex:
        raise NonConvexBody("body is not convex; the torsion problem has no convex solution")
    if scheme not in DEFAULT_GRID:
        raise InvalidInput(f"unknown scheme {scheme!r}")
    grid = DEFAULT_GRID[scheme] if grid is None else tuple(grid)
    tol = DEFAULT_TOL[scheme] if tol is None else tol
    bmap = _BodyMap(body.r, mapping)
    out = _solve_once(bmap, scheme, grid, tol, maxiter)
    integral = out["integral"]
    method = scheme
    err = 0.0
    if richardson and scheme == "fd":
        coarse = _solve_once(bmap, scheme, (grid[0] // 2, 2 * (grid[1] // 4)), tol, maxiter)
        extrap = integral + (integral - coarse["integral"]) / 3
        err = abs(extrap - integral) * 2 / integral
        integral = extrap
        method = "fd+richardson"
    elif error_estimate and scheme == "spectral":
        coarse = _solve_once(bmap, scheme, (max(4, 3 * grid[0] // 4), 2 * (3 * grid[1] // 8)), tol, maxiter)
        err = 2 * abs(integral - coarse["integral"]) / integral
    return TorsionSolution(domain=body, n=2, T=integral ** 2, integral=integral, method=method,
                           u=out["U"], rho=out["rho"], theta=out["theta"], x=out["x"],
                           residual=out["residual"], iterations=out["iterations"],
                           residual_history=out["history"], convex=out["convex"], T_error=err)


# ---------------------------------------------------------------------------
# harmonic extension of a boundary perturbation


@dataclass(frozen=True, eq=False)
class HarmonicExtension:
    """``v(r xi) = -sum_k a_k r^k Y_k(xi)``: harmonic in the ball, trace ``-V``."""

    modes: ModeVector

    @property
    def n(self) -> int:
        return self.modes.n

    def _basis(self, xi):
        return sphere.harmonic_basis(self.n, self.modes.kmax)(xi)

    def radial_profiles(self, r) -> np.ndarray:
        """``R_k(r) = -a_k r^k`` for every basis entry; shape ``(..., nbasis)``."""
        r = np.asarray(r, dtype=float)[..., None]
        return -self.modes.coeffs * r ** self.modes.degrees

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        safe = np.where(r[..., None] > 0, x / np.where(r > 0, r, 1.0)[..., None], np.eye(self.n)[0])
        return np.sum(self.radial_profiles(r) * self._basis(safe), axis=-1)

    def boundary_trace(self, xi) -> np.ndarray:
        return self(xi)

    def radial_derivative(self, xi) -> np.ndarray:
        """``d v / d r`` at ``r = 1``: ``-sum k a_k Y_k``."""
        return -np.sum(self.modes.degrees * self.modes.coeffs * self._basis(xi), axis=-1)

    def on_polar_grid(self, nr: int = 32, ntheta: int = 64):
        """Values on ``rho x theta`` (planar only)."""
        if self.n != 2:
            raise UnsupportedDimension("polar grid evaluation is planar")
        rho = np.linspace(0.0, 1.0, nr + 1)[1:]
        th = 2 * np.pi * np.arange(ntheta) / ntheta
        pts = np.stack([np.outer(rho, np.cos(th)), np.outer(rho, np.sin(th))], axis=-1)
        return rho, th, self(pts)

    def hessian(self, x) -> np.ndarray:
        """Exact Hessian for ``n = 2`` from ``v = Re sum w_k z^k``."""
        if self.n != 2:
            raise UnsupportedDimension("closed-form Hessian is planar")
        x = np.asarray(x, dtype=float)
        z = x[..., 0] + 1j * x[..., 1]
        second = np.zeros(z.shape, dtype=complex)
        for k, m, a in zip(self.modes.degrees, self.modes.orders, self.modes.coeffs):
            if k < 2 or a == 0:
                continue
            # cos(k th)/sqrt(pi) = Re z^k / sqrt(pi) on the circle, sin uses -i
            w = -a / math.sqrt(math.pi) * (1.0 if m > 0 else -1j)
            second += w * k * (k - 1) * z ** (k - 2)
        H = np.empty(z.shape + (2, 2))
        H[..., 0, 0] = second.real
        H[..., 1, 1] = -second.real
        H[..., 0, 1] = H[..., 1, 0] = -second.imag
        return H

    def laplacian_residual(self, points, h: float = 2e-3) -> float:
        """Max of a fourth-order finite-difference Laplacian over ``points``."""
        pts = np.asarray(points, dtype=float)
        lap = -30 * self.n * self(pts)
        for d in range(self.n):
            e = np.zeros(self.n)
            e[d] = h
            lap = lap + 16 * (self(pts + e) + self(pts - e)) - (self(pts + 2 * e) + self(pts - 2 * e))
        return float(np.max(np.abs(lap / (12 * h * h))))


def harmonic_extension(modes: ModeVector) -> HarmonicExtension:
    if modes.n not in (2, 3):
        raise UnsupportedDimension(f"no harmonic basis for n={modes.n}")
    if np.any(modes.coeffs[modes.degrees == 0] != 0):
        raise InvalidInput("degree-0 coefficient must vanish")
    return HarmonicExtension(modes)


# ---------------------------------------------------------------------------
# Monge-Ampere nonlinearity term and the Reilly identities


@dataclass(frozen=True)
class NTTerm:
    closed_form: float
    quadrature: float | None
    note: str = ""


def nt_term(modes: ModeVector, n: int | None = None, quad=(48, 128)) -> NTTerm:
    """``int_B (S_n^{ij}(D^2 u))_t u_{t,ij} u`` for ``u = (|x|^2 - 1)/2``.

    The closed form is ``(1/n) sum a_k^2 (k^2 - k)``.  For ``n = 2`` the
    integral is also evaluated as ``(1/n) int [(Lap v)^2 - |D^2 v|^2] u`` with
    ``v`` the harmonic extension, by Gauss-Legendre in ``r`` times the
    trapezoidal rule in ``theta``.
    """
    n = modes.n if n is None else n
    if n != modes.n:
        raise InvalidInput("dimension mismatch")
    if np.any(modes.coeffs[modes.degrees == 0] != 0):
        raise InvalidInput("degree-0 coefficient must vanish")
    P = modes.degree_power()
    k = np.arange(len(P))
    closed = float(np.sum(P * (k * k - k)) / n)
    if n != 2:
        return NTTerm(closed, None, "quadrature available for n = 2 only")
    nr, nt = quad
    s, w = roots_legendre(nr)
    r = 0.5 * (s + 1)
    wr = 0.5 * w
    th = 2 * np.pi * np.arange(nt) / nt
    pts = np.stack([np.outer(r, np.cos(th)), np.outer(r, np.sin(th))], axis=-1)
    H = harmonic_extension(modes).hessian(pts)
    lap = H[..., 0, 0] + H[..., 1, 1]
    integrand = ((lap ** 2 - np.sum(H ** 2, axis=(-1, -2))) / n) * 0.5 * (r[:, None] ** 2 - 1)
    quadv = float(np.sum(integrand * (wr * r)[:, None]) * 2 * np.pi / nt)
    return NTTerm(closed, quadv)


def reilly_check(n: int, k: int, rho: float, npts: int = 16, seed: int = 0) -> tuple[float, float]:
    """Level-set identity ``S_k^{ij} u_i u_j / |grad u|^(k+1) = C(n-1, k-1) sigma_{k-1}``.

    Uses ``u = (|x|^2 - 1)/2``, whose level set ``|x| = rho`` is a sphere with
    ``sigma_{k-1} = rho^(1-k)``.  The left side is evaluated at ``npts``
    random points of the level set; the returned ``lhs`` is the value
    farthest from ``rhs``.
    """
    if not 1 <= k <= n:
        raise InvalidInput(f"k={k} outside [1, {n}]")
    if not 0 < rho <= 1:
        raise InvalidInput("rho must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((npts, n))
    x *= rho / np.linalg.norm(x, axis=1, keepdims=True)
    hess = np.broadcast_to(np.eye(n), (npts, n, n))
    grad = x
    C = cofactor_sk(hess, k)
    vals = np.einsum("pij,pi,pj->p", C, grad, grad) / np.linalg.norm(grad, axis=1) ** (k + 1)
    rhs = float(comb(n - 1, k - 1, exact=True)) * rho ** (1 - k)
    lhs = float(vals[np.argmax(np.abs(vals - rhs))])
    return lhs, rhs
