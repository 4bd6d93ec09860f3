"""Quadrature, real spherical harmonics and surface calculus on S^1 and S^2.

The circle (``n = 2``) uses a uniform angular grid with equal weights; every
derivative is taken spectrally with the FFT.  The sphere (``n = 3``) uses a
Gauss-Legendre rule in ``cos(theta)`` times a uniform longitude grid.  Nodes
never sit on the poles, which keeps the coordinate formulas for the gradient
and the covariant Hessian finite.

Harmonics are real and orthonormal in ``L^2(S^{n-1})``.  A basis function is
labelled by its degree ``k`` and an order ``m`` with ``|m| <= k``: ``m > 0``
multiplies ``cos(m phi)``, ``m < 0`` multiplies ``sin(|m| phi)``.  On the circle
only ``m = +-k`` occur.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "HarmonicBasis",
    "InvalidInput",
    "ModeVector",
    "SpectralTailWarning",
    "SphereGrid",
    "SurfaceField",
    "UnsupportedDimension",
    "analyze",
    "coordinate_derivatives",
    "covariant_hessian",
    "harmonic_basis",
    "integrate",
    "laplace_beltrami",
    "make_grid",
    "mode_index",
    "s2_identity_check",
    "sphere_area",
    "surface_gradient",
    "surface_gradient_sq",
    "synthesize",
    "trig_interpolate",
    "unit_ball_volume",
]

DEFAULT_KMAX = 16


class InvalidInput(ValueError):
    pass


class UnsupportedDimension(InvalidInput):
    pass


class SpectralTailWarning(UserWarning):
    """The field has significant energy near the grid's resolution limit."""


def unit_ball_volume(n: int) -> float:
    """omega_n, the volume of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """|S^{n-1}| = n omega_n."""
    return n * unit_ball_volume(n)


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature grid on S^{n-1}.

    ``values`` of a field live in arrays of shape ``grid.shape``: ``(N,)`` on the
    circle and ``(nlat, nlon)`` on the sphere.
    """

    n: int
    shape: tuple
    nodes: np.ndarray
    weights: np.ndarray
    theta: np.ndarray
    phi: np.ndarray | None = None
    lat_weights: np.ndarray | None = None

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def lmax(self) -> int:
        """Highest degree the analysis resolves exactly."""
        if self.n == 2:
            return self.shape[0] // 2 - 1
        nlat, nlon = self.shape
        return min(nlat - 1, (nlon - 1) // 2)

    @property
    def resolution(self):
        return self.shape[0] if self.n == 2 else self.shape

    def __repr__(self):
        return f"SphereGrid(n={self.n}, shape={self.shape})"


def make_grid(n: int, resolution=None) -> SphereGrid:
    """Build the default quadrature grid.

    ``resolution`` is the number of angles for ``n = 2`` (default 256) and
    ``(nlat, nlon)`` or a single ``nlat`` (``nlon = 2 nlat``) for ``n = 3``
    (default ``(32, 64)``).
    """
    if n == 2:
        N = 256 if resolution is None else int(resolution)
        if N < 8:
            raise InvalidInput(f"resolution {N} < 8")
        theta = 2 * np.pi * np.arange(N) / N
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        weights = np.full(N, 2 * np.pi / N)
        return SphereGrid(2, (N,), _frozen(nodes), _frozen(weights), _frozen(theta))
    if n == 3:
        if resolution is None:
            resolution = (32, 64)
        if np.ndim(resolution) == 0:
            resolution = (int(resolution), 2 * int(resolution))
        nlat, nlon = (int(r) for r in resolution)
        if nlat < 8 or nlon < 8:
            raise InvalidInput(f"resolution {resolution} below 8")
        x, w = np.polynomial.legendre.leggauss(nlat)
        x, w = x[::-1], w[::-1]
        theta = np.arccos(x)
        phi = 2 * np.pi * np.arange(nlon) / nlon
        st = np.sin(theta)[:, None]
        nodes = np.stack(np.broadcast_arrays(st * np.cos(phi), st * np.sin(phi),
                                             x[:, None] + 0 * phi), axis=-1)
        weights = w[:, None] * np.full(nlon, 2 * np.pi / nlon)
        return SphereGrid(3, (nlat, nlon), _frozen(nodes), _frozen(weights), _frozen(theta),
                          _frozen(phi), _frozen(w))
    raise UnsupportedDimension(f"grids exist for n = 2, 3 only (got n={n})")


@dataclass(frozen=True, eq=False)
class SurfaceField:
    """Nodal values of a function on a :class:`SphereGrid`."""

    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise InvalidInput(f"field shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("field has non-finite entries")
        object.__setattr__(self, "values", _frozen(v))


def _values(grid, f):
    if isinstance(f, SurfaceField):
        if f.grid is not grid:
            raise InvalidInput("field lives on a different grid")
        return f.values
    v = np.asarray(f, dtype=float)
    if v.shape != grid.shape:
        raise InvalidInput(f"field shape {v.shape} does not match grid {grid.shape}")
    return v


def integrate(grid: SphereGrid, f) -> float:
    """Quadrature ``sum_i w_i f(xi_i)``."""
    return float(np.sum(grid.weights * _values(grid, f)))


# ---------------------------------------------------------------------------
# harmonics


def mode_index(n: int, k: int, m: int) -> int:
    """Position of the basis function (k, m) in a flattened coefficient vector."""
    if abs(m) > k:
        raise InvalidInput(f"|m|={abs(m)} exceeds degree {k}")
    if n == 2:
        if k == 0:
            return 0
        if abs(m) != k:
            raise InvalidInput("on the circle the order must be +-k")
        return 2 * k - 1 if m > 0 else 2 * k
    if n == 3:
        return k * k + k + m
    raise UnsupportedDimension(f"no harmonic basis for n={n}")


def _labels(n, kmax):
    if n == 2:
        deg = [0] + [k for k in range(1, kmax + 1) for _ in range(2)]
        order = [0] + [s * k for k in range(1, kmax + 1) for s in (1, -1)]
    elif n == 3:
        deg = [k for k in range(kmax + 1) for _ in range(2 * k + 1)]
        order = [m for k in range(kmax + 1) for m in range(-k, k + 1)]
    else:
        raise UnsupportedDimension(f"no harmonic basis for n={n}")
    return np.array(deg), np.array(order)


@dataclass(frozen=True, eq=False)
class ModeVector:
    """Coefficients of a function in the orthonormal harmonic basis.

    For ``n`` in {2, 3} the entries follow :func:`mode_index`.  Other
    dimensions carry one coefficient per degree (``orders`` all zero), which is
    all the mode-space formulas need.
    """

    n: int
    degrees: np.ndarray
    orders: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if not np.all(np.isfinite(c)):
            raise InvalidInput("non-finite mode coefficients")
        if not (len(c) == len(self.degrees) == len(self.orders)):
            raise InvalidInput("coefficient and label lengths differ")
        object.__setattr__(self, "coeffs", _frozen(c))
        object.__setattr__(self, "degrees", np.asarray(self.degrees, dtype=int))
        object.__setattr__(self, "orders", np.asarray(self.orders, dtype=int))

    @property
    def kmax(self) -> int:
        return int(self.degrees.max()) if len(self.degrees) else 0

    @classmethod
    def zeros(cls, n: int, kmax: int = DEFAULT_KMAX) -> "ModeVector":
        deg, order = _labels(n, kmax)
        return cls(n, deg, order, np.zeros(len(deg)))

    @classmethod
    def from_modes(cls, n: int, modes, kmax: int | None = None) -> "ModeVector":
        """Build from ``{(k, m): a}``; for ``n >= 4`` use ``{k: a}`` or ``{(k, 0): a}``."""
        items = [((key, 0) if np.ndim(key) == 0 else tuple(key), a) for key, a in modes.items()]
        top = max([k for (k, _), _ in items] + [2])
        kmax = top if kmax is None else kmax
        if n in (2, 3):
            mv = cls.zeros(n, kmax)
            c = np.zeros(len(mv.degrees))
            for (k, m), a in items:
                c[mode_index(n, k, m)] += a
            return cls(n, mv.degrees, mv.orders, c)
        c = np.zeros(kmax + 1)
        for (k, m), a in items:
            if m != 0:
                raise InvalidInput("for n >= 4 give one coefficient per degree")
            c[k] += a
        return cls(n, np.arange(kmax + 1), np.zeros(kmax + 1, dtype=int), c)

    def degree_power(self) -> np.ndarray:
        """``P[k] = sum_m a_{k,m}^2`` for ``k = 0..kmax``."""
        return np.bincount(self.degrees, weights=self.coeffs ** 2, minlength=self.kmax + 1)

    def without_degrees(self, *ks) -> "ModeVector":
        c = np.where(np.isin(self.degrees, ks), 0.0, self.coeffs)
        return ModeVector(self.n, self.degrees, self.orders, c)

    def scaled(self, s: float) -> "ModeVector":
        return ModeVector(self.n, self.degrees, self.orders, s * self.coeffs)

    def __add__(self, other: "ModeVector") -> "ModeVector":
        if other.n != self.n:
            raise InvalidInput("dimension mismatch")
        a, b = (self, other) if self.kmax >= other.kmax else (other, self)
        c = a.coeffs.copy()
        c[: len(b.coeffs)] += b.coeffs
        return ModeVector(self.n, a.degrees, a.orders, c)

    def norm_sq(self) -> float:
        return float(np.sum(self.coeffs ** 2))

    def as_dict(self) -> dict:
        return {(int(k), int(m)): float(a) for k, m, a in zip(self.degrees, self.orders, self.coeffs)
                if a != 0.0}


def _legendre(L, x, s, derivs=True):
    """Normalized associated Legendre functions in theta with theta-derivatives.

    Returns arrays ``[m, l, i]`` with ``int_{-1}^{1} P[m, l]^2 dx = 1``
    (no Condon-Shortley phase) and, optionally, first and second
    derivatives with respect to the colatitude.
    """
    P = np.zeros((L + 1, L + 1, len(x)))
    P[0, 0] = np.sqrt(0.5)
    for m in range(1, L + 1):
        P[m, m] = np.sqrt((2 * m + 1) / (2 * m)) * s * P[m - 1, m - 1]
    for m in range(0, L):
        P[m, m + 1] = np.sqrt(2 * m + 3) * x * P[m, m]
    for m in range(0, L + 1):
        for l in range(m + 2, L + 1):
            a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = np.sqrt((4 * (l - 1) ** 2 - 1) / ((l - 1) ** 2 - m * m))
            P[m, l] = a * (x * P[m, l - 1] - P[m, l - 2] / b)
    if not derivs:
        return P
    dP = np.zeros_like(P)
    for m in range(L + 1):
        for l in range(m, L + 1):
            prev = P[m, l - 1] if l > m else 0.0
            c = np.sqrt((2 * l + 1) / (2 * l - 1) * (l * l - m * m)) if l > m else 0.0
            dP[m, l] = (l * x * P[m, l] - c * prev) / s
    mm = np.arange(L + 1)[:, None, None]
    ll = np.arange(L + 1)[None, :, None]
    d2P = -(x / s) * dP - (ll * (ll + 1) - mm ** 2 / s ** 2) * P
    d2P[np.broadcast_to(ll < mm, d2P.shape)] = 0.0
    return P, dP, d2P


class HarmonicBasis:
    """Orthonormal real harmonics up to degree ``kmax`` on S^{n-1}.

    Calling the basis on unit vectors of shape ``(..., n)`` returns values of
    shape ``(..., nbasis)`` ordered as in :func:`mode_index`.
    """

    def __init__(self, n: int, kmax: int = DEFAULT_KMAX):
        if n not in (2, 3):
            raise UnsupportedDimension(f"no harmonic basis for n={n}")
        self.n = n
        self.kmax = int(kmax)
        self.degrees, self.orders = _labels(n, self.kmax)
        self.eigenvalues = self.degrees * (self.degrees + n - 2)

    def __len__(self):
        return len(self.degrees)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.n == 2:
            th = np.arctan2(pts[..., 1], pts[..., 0])
            return self.on_angles(th)
        z = np.clip(pts[..., 2], -1.0, 1.0)
        th = np.arccos(z)
        ph = np.arctan2(pts[..., 1], pts[..., 0])
        return self.on_angles(th, ph)

    def on_angles(self, theta, phi=None) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.n == 2:
            out = np.empty(theta.shape + (len(self),))
            out[..., 0] = 1 / np.sqrt(2 * np.pi)
            for k in range(1, self.kmax + 1):
                out[..., 2 * k - 1] = np.cos(k * theta) / np.sqrt(np.pi)
                out[..., 2 * k] = np.sin(k * theta) / np.sqrt(np.pi)
            return out
        theta, phi = np.broadcast_arrays(theta, np.asarray(phi, dtype=float))
        flat_t = theta.ravel()
        P = _legendre(self.kmax, np.cos(flat_t), np.sin(flat_t), derivs=False)
        out = np.empty((flat_t.size, len(self)))
        flat_p = phi.ravel()
        for l in range(self.kmax + 1):
            out[:, l * l + l] = P[0, l] / np.sqrt(2 * np.pi)
            for m in range(1, l + 1):
                out[:, l * l + l + m] = P[m, l] * np.cos(m * flat_p) / np.sqrt(np.pi)
                out[:, l * l + l - m] = P[m, l] * np.sin(m * flat_p) / np.sqrt(np.pi)
        return out.reshape(theta.shape + (len(self),))

    def field(self, grid: SphereGrid, k: int, m: int) -> np.ndarray:
        """Nodal values of one basis function on ``grid``."""
        if grid.n != self.n:
            raise InvalidInput("grid dimension mismatch")
        idx = mode_index(self.n, k, m)
        if self.n == 2:
            return self.on_angles(grid.theta)[..., idx]
        return self.on_angles(grid.theta[:, None], grid.phi[None, :])[..., idx]


def harmonic_basis(n: int, kmax: int = DEFAULT_KMAX) -> HarmonicBasis:
    return HarmonicBasis(n, kmax)


class _SphereTransform:
    """Separable analysis/synthesis on a Gauss-Legendre x uniform grid."""

    def __init__(self, grid: SphereGrid, L: int):
        self.L = L
        x = np.cos(grid.theta)
        s = np.sin(grid.theta)
        self.P, self.dP, self.d2P = _legendre(L, x, s)
        m = np.arange(L + 1)
        self.m = m
        self.cos = np.cos(np.outer(m, grid.phi))
        self.sin = np.sin(np.outer(m, grid.phi))
        self.norm = np.where(m == 0, 1 / np.sqrt(2 * np.pi), 1 / np.sqrt(np.pi))
        self.wlat = grid.lat_weights
        self.dphi = 2 * np.pi / grid.shape[1]

    def analyze(self, f):
        Fc = f @ self.cos.T * self.dphi
        Fs = f @ self.sin.T * self.dphi
        ac = self.norm[:, None] * np.einsum("im,mli,i->ml", Fc, self.P, self.wlat)
        as_ = self.norm[:, None] * np.einsum("im,mli,i->ml", Fs, self.P, self.wlat)
        as_[0] = 0.0
        return ac, as_

    def synthesize(self, ac, as_, d_theta=0, d_phi=0):
        table = (self.P, self.dP, self.d2P)[d_theta]
        gc = np.einsum("ml,mli->mi", ac * self.norm[:, None], table)
        gs = np.einsum("ml,mli->mi", as_ * self.norm[:, None], table)
        m = self.m[:, None]
        if d_phi == 0:
            tc, ts = self.cos, self.sin
        elif d_phi == 1:
            tc, ts = -m * self.sin, m * self.cos
        else:
            tc, ts = -(m ** 2) * self.cos, -(m ** 2) * self.sin
        return gc.T @ tc + gs.T @ ts


@lru_cache(maxsize=32)
def _transform(grid: SphereGrid, L: int) -> _SphereTransform:
    return _SphereTransform(grid, L)


def _pack3(ac, as_, kmax):
    deg, order = _labels(3, kmax)
    c = np.where(order >= 0, ac[np.abs(order), deg], as_[np.abs(order), deg])
    return deg, order, c


def _unpack3(modes: ModeVector, L):
    ac = np.zeros((L + 1, L + 1))
    as_ = np.zeros((L + 1, L + 1))
    for k, m, a in zip(modes.degrees, modes.orders, modes.coeffs):
        if k > L:
            if a != 0.0:
                raise InvalidInput(f"degree {k} exceeds grid limit {L}")
            continue
        (ac if m >= 0 else as_)[abs(m), k] = a
    return ac, as_


def analyze(grid: SphereGrid, V, kmax: int = DEFAULT_KMAX) -> ModeVector:
    """Coefficients ``a_{k,m} = int V Y_{k,m}`` for degrees up to ``kmax``."""
    v = _values(grid, V)
    if kmax > grid.lmax:
        raise InvalidInput(f"kmax={kmax} exceeds the grid limit {grid.lmax}")
    if grid.n == 2:
        basis = HarmonicBasis(2, kmax)
        Y = basis.on_angles(grid.theta)
        c = (grid.weights * v) @ Y
        return ModeVector(2, basis.degrees, basis.orders, c)
    ac, as_ = _transform(grid, kmax).analyze(v)
    deg, order, c = _pack3(ac, as_, kmax)
    return ModeVector(3, deg, order, c)


def synthesize(modes: ModeVector, grid: SphereGrid) -> np.ndarray:
    """Nodal values of ``sum a_{k,m} Y_{k,m}`` on ``grid``."""
    if modes.n != grid.n:
        raise InvalidInput("mode vector and grid dimensions differ")
    if grid.n == 2:
        Y = HarmonicBasis(2, modes.kmax).on_angles(grid.theta)
        return Y @ modes.coeffs
    L = modes.kmax
    ac, as_ = _unpack3(modes, L)
    return _transform(grid, L).synthesize(ac, as_)


def trig_interpolate(values, theta) -> np.ndarray:
    """Evaluate the trigonometric interpolant of uniform samples on [0, 2pi)."""
    v = np.asarray(values, dtype=float)
    N = len(v)
    c = np.fft.rfft(v) / N
    k = np.arange(len(c))
    w = np.where((k == 0) | ((N % 2 == 0) & (k == N // 2)), 1.0, 2.0)
    th = np.asarray(theta, dtype=float)
    phase = np.exp(1j * np.multiply.outer(th, k))
    return np.real(phase @ (w * c))


# ---------------------------------------------------------------------------
# surface calculus


def _check_tail(grid, v):
    if grid.n == 2:
        p = np.abs(np.fft.rfft(v)) ** 2
        cut = int(0.8 * (len(p) - 1))
    else:
        L = grid.lmax
        ac, as_ = _transform(grid, L).analyze(v)
        p = np.sum(ac ** 2 + as_ ** 2, axis=0)
        cut = int(0.8 * L)
    total = p.sum()
    if total > 0 and p[cut:].sum() > 1e-16 * total:
        warnings.warn("field is not resolved by the grid; derivatives are unreliable",
                      SpectralTailWarning, stacklevel=3)


def coordinate_derivatives(grid: SphereGrid, f, check=True) -> dict:
    """Partial derivatives in angular coordinates.

    Circle: keys ``"t"``, ``"tt"``.  Sphere: ``"t"``, ``"p"``, ``"tt"``,
    ``"tp"``, ``"pp"`` (``t`` colatitude, ``p`` longitude), from a projection
    onto all degrees the grid resolves.
    """
    v = _values(grid, f)
    if check:
        _check_tail(grid, v)
    if grid.n == 2:
        N = grid.shape[0]
        c = np.fft.rfft(v)
        k = np.arange(len(c))
        ik = 1j * k
        if N % 2 == 0:
            ik[-1] = 0.0
        return {"t": np.fft.irfft(ik * c, n=N), "tt": np.fft.irfft(-(k ** 2) * c, n=N)}
    T = _transform(grid, grid.lmax)
    ac, as_ = T.analyze(v)
    return {
        "t": T.synthesize(ac, as_, 1, 0),
        "p": T.synthesize(ac, as_, 0, 1),
        "tt": T.synthesize(ac, as_, 2, 0),
        "tp": T.synthesize(ac, as_, 1, 1),
        "pp": T.synthesize(ac, as_, 0, 2),
    }


def surface_gradient(grid: SphereGrid, f, derivs=None) -> np.ndarray:
    """Tangential gradient in the orthonormal frame; shape ``grid.shape + (n-1,)``."""
    d = coordinate_derivatives(grid, f) if derivs is None else derivs
    if grid.n == 2:
        return d["t"][..., None]
    s = np.sin(grid.theta)[:, None]
    return np.stack([d["t"], d["p"] / s], axis=-1)


def surface_gradient_sq(grid: SphereGrid, f, derivs=None) -> np.ndarray:
    return np.sum(surface_gradient(grid, f, derivs) ** 2, axis=-1)


def covariant_hessian(grid: SphereGrid, f, derivs=None) -> np.ndarray:
    """Hessian of ``f`` for the round metric, in the orthonormal frame.

    Shape ``grid.shape + (n-1, n-1)``.  On S^2 the frame is
    ``(e_theta, e_phi / sin(theta))`` and the Christoffel symbols of
    ``dtheta^2 + sin^2(theta) dphi^2`` enter the mixed and azimuthal entries.
    """
    d = coordinate_derivatives(grid, f) if derivs is None else derivs
    if grid.n == 2:
        return d["tt"][..., None, None]
    s = np.sin(grid.theta)[:, None]
    c = np.cos(grid.theta)[:, None]
    h11 = d["tt"]
    h12 = (d["tp"] - c / s * d["p"]) / s
    h22 = d["pp"] / s ** 2 + c / s * d["t"]
    return np.stack([np.stack([h11, h12], -1), np.stack([h12, h22], -1)], -2)


def laplace_beltrami(grid: SphereGrid, f, derivs=None) -> np.ndarray:
    """Trace of the covariant Hessian."""
    H = covariant_hessian(grid, f, derivs)
    return np.trace(H, axis1=-2, axis2=-1)


def s2_identity_check(grid: SphereGrid, V) -> tuple[float, float]:
    """Return ``(int S_2(D^2 V), (n-2)/2 int |grad V|^2)`` on S^2."""
    if grid.n != 3:
        raise UnsupportedDimension("S_2 of a 1x1 Hessian vanishes; the check needs n = 3")
    d = coordinate_derivatives(grid, V)
    H = covariant_hessian(grid, V, d)
    s2 = H[..., 0, 0] * H[..., 1, 1] - H[..., 0, 1] ** 2
    lhs = integrate(grid, s2)
    rhs = 0.5 * integrate(grid, surface_gradient_sq(grid, V, d))
    return lhs, rhs
