"""Acceptance suite: one group of tests per criterion, at the stated tolerances.

A per-criterion PASS/FAIL line is printed in the terminal summary (see
``conftest.py``).  Tests use library calls directly and, where practical, an
oracle computed here rather than the library's own self-checks.
"""

import contextlib
import io
import itertools
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from numpy.testing import assert_allclose, assert_array_equal

from matorsion import body, expansion, sphere, symmfunc, torsion
from matorsion.cli import main
from matorsion.sphere import ModeVector, unit_ball_volume


def criterion(cid, text):
    return pytest.mark.criterion(cid, text)


def mode(n, k, a=1.0):
    return ModeVector.from_modes(n, {(k, k if n == 2 else 0): a})


def sym(rng, shape):
    X = rng.standard_normal(shape)
    return 0.5 * (X + np.swapaxes(X, -1, -2))


# --- 1 -----------------------------------------------------------------------

C1 = criterion("1", "delta contraction identity, exhaustive n <= 5, under 10 s")


@C1
def test_c1_contraction_exhaustive():
    t0 = time.perf_counter()
    for n in range(1, 6):
        for k in range(1, n + 1):
            for p in range(1, k):
                lhs, rhs = symmfunc.contraction_table(n, k, p)
                assert lhs.dtype.kind == "i"
                assert_array_equal(lhs, rhs)
    assert time.perf_counter() - t0 < 10


@C1
def test_c1_contraction_against_brute_force_sum():
    # delta_p contracted against delta_k, summed directly with permutation signs
    def delta(up, lo):
        if sorted(up) != sorted(lo) or len(set(up)) < len(up):
            return 0
        perm = [lo.index(u) for u in up]
        return symmfunc.permutation_sign(tuple(perm))

    for n in (2, 3, 4):
        for k in range(2, n + 1):
            for p in range(1, k):
                c = math.factorial(p) * math.factorial(n - k + p) // math.factorial(n - k)
                for up in itertools.product(range(1, n + 1), repeat=k - p):
                    for lo in itertools.product(range(1, n + 1), repeat=k - p):
                        idx = list(itertools.product(range(1, n + 1), repeat=p))
                        s = sum(delta(i, j) * delta(j + up, i + lo) for i in idx for j in idx)
                        assert s == c * delta(up, lo)
                        assert symmfunc.contract_delta(up, lo, p, n) == s


# --- 2 -----------------------------------------------------------------------


@criterion("2", "S_k by delta sum vs eigenvalues, 100 matrices per n, 1e-12")
def test_c2_sk_dual_definitions():
    rng = np.random.default_rng(2)
    for n in range(2, 6):
        A = sym(rng, (100, n, n))
        lam = np.linalg.eigvalsh(A)
        for k in range(n + 1):
            # e_k of the eigenvalues from the characteristic polynomial coefficients
            ek = np.array([(-1) ** k * np.poly(l)[k] for l in lam])
            assert np.max(np.abs(symmfunc.elem_sym_matrix(A, k) - ek)) <= 1e-12
            assert np.max(np.abs(symmfunc.elem_sym_eigen(lam, k) - ek)) <= 1e-12


# --- 3 -----------------------------------------------------------------------

C3 = criterion("3", "cofactor as (1/k)[T_{k-1}], Euler identity, divergence-free rows")


def _symbolic_gradient(n, k):
    M = sp.Matrix(n, n, sp.symbols(f"a0:{n * n}"))
    x = sp.Symbol("x")
    # S_k from the characteristic polynomial det(I + x M)
    Sk = sp.expand((sp.eye(n) + x * M).det()).coeff(x, k)
    return M, sp.Matrix(n, n, lambda i, j: sp.diff(Sk, M[i, j]))


@C3
@pytest.mark.parametrize("n,k", [(2, 2), (3, 2), (3, 3)])
def test_c3_cofactor_equals_one_over_k_newton_tensor(n, k):
    M, grad = _symbolic_gradient(n, k)
    A = sym(np.random.default_rng(n + k), (n, n))
    S_ij = np.array(grad.subs(dict(zip(M, A.ravel()))).tolist(), dtype=float)
    stated = symmfunc.newton_tensor([A] * (k - 1)) / k
    # S_k^{ij} is the derivative of S_k with respect to A_ij
    assert_allclose(stated, S_ij, rtol=0, atol=1e-12)


@C3
@pytest.mark.parametrize("n,k", [(2, 2), (3, 2), (3, 3)])
def test_c3_cofactor_equals_newton_tensor(n, k):
    # the form that does hold: no 1/k
    M, grad = _symbolic_gradient(n, k)
    A = sym(np.random.default_rng(n + k), (n, n))
    S_ij = np.array(grad.subs(dict(zip(M, A.ravel()))).tolist(), dtype=float)
    assert_allclose(symmfunc.newton_tensor([A] * (k - 1)), S_ij, rtol=0, atol=1e-12)
    assert_allclose(symmfunc.cofactor_sk(A, k), S_ij, rtol=0, atol=1e-12)


@C3
def test_c3_euler_identity():
    rng = np.random.default_rng(3)
    for n in range(2, 6):
        A = sym(rng, (100, n, n))
        lam = np.linalg.eigvalsh(A)
        for k in range(1, n + 1):
            lhs = np.einsum("pij,pij->p", symmfunc.cofactor_sk(A, k), A)
            assert_allclose(lhs, k * symmfunc.elem_sym_eigen(lam, k), rtol=0, atol=1e-12)


@C3
@pytest.mark.parametrize("n", [2, 3])
def test_c3_divergence_free_on_cubics(n):
    xs = sp.symbols(f"x0:{n}")
    rng = np.random.default_rng(30 + n)
    monos = [sp.Mul(*[x ** e for x, e in zip(xs, ex)]) for ex in itertools.product(range(4), repeat=n)
             if sum(ex) <= 3]
    u = sum(int(c) * m for c, m in zip(rng.integers(-5, 6, len(monos)), monos))
    H = np.array(sp.hessian(u, xs).tolist(), dtype=object)
    for k in range(1, n + 1):
        C = symmfunc.cofactor_sk(H, k)
        for j in range(n):
            assert sp.expand(sum(sp.diff(C[i, j], xs[i]) for i in range(n))) == 0


# --- 4 -----------------------------------------------------------------------

C4 = criterion("4", "level-set identity on radial u, k = 1..n, n = 2, 3, 1e-10")


@C4
@pytest.mark.parametrize("n", [2, 3])
def test_c4_reilly(n):
    for k in range(1, n + 1):
        for rho in (0.25, 0.5, 1.0):
            lhs, rhs = torsion.reilly_check(n, k, rho)
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))
            # sphere of radius rho: sigma_{k-1} = rho^(1-k)
            assert_allclose(rhs, math.comb(n - 1, k - 1) * rho ** (1 - k), rtol=1e-14)


@C4
@pytest.mark.parametrize("n", [2, 3])
def test_c4_reilly_by_direct_evaluation(n):
    # u = (|x|^2 - 1)/2: D^2 u = I and grad u = x
    rng = np.random.default_rng(n)
    for k in range(1, n + 1):
        C = symmfunc.cofactor_sk(np.eye(n), k)
        for rho in (0.5, 1.0):
            x = rng.standard_normal((10, n))
            x *= rho / np.linalg.norm(x, axis=1, keepdims=True)
            lhs = np.einsum("pi,ij,pj->p", x, C, x) / rho ** (k + 1)
            assert_allclose(lhs, math.comb(n - 1, k - 1) * rho ** (1 - k), rtol=1e-10)


# --- 5 -----------------------------------------------------------------------

C5 = criterion("5", "W_j of balls within 1e-8; AF chain on 20 random convex bodies")


@C5
@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_c5_ball_quermassintegrals(n, R):
    g = sphere.make_grid(n, 128 if n == 2 else (32, 64))
    W = body.quermass(body.from_radial(g, np.full(g.shape, R))).W
    om = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    for j in range(n):
        assert abs(W[j] - om * R ** (n - j)) <= 1e-8


@C5
@pytest.mark.parametrize("n", [2, 3])
def test_c5_af_chain_on_random_convex_bodies(n):
    rng = np.random.default_rng(50 + n)
    g = sphere.make_grid(n, 256 if n == 2 else (40, 80))
    b = sphere.harmonic_basis(n, 5)
    made = 0
    while made < 20:
        c = np.where(b.degrees >= 2, rng.standard_normal(len(b)) * 0.03 / (1.0 + b.degrees), 0.0)
        bd = body.from_radial(g, rng.uniform(0.5, 2.0) * (1 + sphere.synthesize(ModeVector(n, b.degrees, b.orders, c), g)))
        if not bd.convex:
            continue
        made += 1
        z = body.quermass(bd).zeta
        assert np.all(np.diff(z) >= -1e-12)


# --- 6 -----------------------------------------------------------------------

C6 = criterion("6", "disk torsion pi^2/16 within 1e-3 at 128x256; ellipsoid closed form symbolic")


@C6
def test_c6_disk_torsion():
    g = sphere.make_grid(2, 256)
    sol = torsion.ma_solve_2d(body.from_radial(g, np.ones(256)), grid=(128, 256))
    assert abs(sol.T - math.pi ** 2 / 16) <= 1e-3 * math.pi ** 2 / 16


@C6
@pytest.mark.parametrize("n", [2, 3])
def test_c6_ellipsoid_closed_form_symbolic(n):
    res = torsion.ellipsoid_symbolic_check(n)
    assert all(sp.simplify(v) == 0 for v in res.values())


@C6
def test_c6_ellipsoid_closed_form_against_direct_integration():
    # int -u over the ellipse by sympy in elliptic polar coordinates
    a, b, r, th = sp.symbols("a b r theta", positive=True)
    u = sp.sqrt(a * b) ** 2 / 2 * (r ** 2 - 1)
    I2 = sp.integrate(sp.integrate(-u * a * b * r, (r, 0, 1)), (th, 0, 2 * sp.pi))
    T2 = sp.lambdify((a, b), I2 ** 2)
    a3 = sp.symbols("a1:4", positive=True)
    ph = sp.Symbol("phi", positive=True)
    u3 = (a3[0] * a3[1] * a3[2]) ** sp.Rational(2, 3) / 2 * (r ** 2 - 1)
    jac = a3[0] * a3[1] * a3[2] * r ** 2 * sp.sin(ph)
    I3 = sp.integrate(-u3 * jac, (r, 0, 1), (ph, 0, sp.pi), (th, 0, 2 * sp.pi))
    T3 = sp.lambdify(a3, I3 ** 3)
    for axes in [(1.0, 1.0), (2.0, 0.5), (1.3, 0.7)]:
        assert_allclose(torsion.ellipsoid_torsion(axes)[1], T2(*axes), rtol=1e-12)
    for axes in [(1.0, 1.0, 1.0), (1.2, 0.9, 0.7)]:
        assert_allclose(torsion.ellipsoid_torsion(axes)[1], T3(*axes), rtol=1e-12)
    # equality case: delta_T = delta_AF for ellipsoids
    for axes in [(1.3, 0.7), (1.2, 0.9, 0.7)]:
        prof = body.ellipsoid_profile(axes)
        dT = torsion.torsion_deficit(torsion.ellipsoid_torsion(axes)[1], prof)
        assert abs(dT - body.af_deficit(prof)) <= 1e-12


# --- 7 -----------------------------------------------------------------------


@criterion("7", "|W_{n-1}(t) - omega_n| log-log slope >= 2.7, modes 2, 3, n = 2, 3")
def test_c7_constrained_family_keeps_W_last():
    t0 = time.perf_counter()
    ts = np.array([0.04, 0.02, 0.01])
    for n in (2, 3):
        for k in (2, 3):
            fam = expansion.build_family(mode(n, k), t_values=tuple(ts))
            err = [abs(body.quermass(fam.body(t)).W[n - 1] - unit_ball_volume(n)) for t in ts]
            slope = np.polyfit(np.log(ts), np.log(err), 1)[0]
            assert slope >= 2.7, (n, k, slope)
    assert time.perf_counter() - t0 < 60


# --- 8 -----------------------------------------------------------------------

C8 = criterion("8", "delta_AF / t^2 -> cAF within 1% at t = 0.01; ellipse cAF = 6")


@C8
@pytest.mark.parametrize("n,k", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_c8_af_deficit_expansion(n, k):
    t = 0.01
    V = mode(n, k)
    fam = expansion.build_family(V, t_values=(t,))
    dAF = body.af_deficit(body.quermass(fam.body(t)))
    cAF = expansion.deficit_expansion(V).cAF
    assert abs(dAF / t ** 2 - cAF) <= 0.01 * cAF


@C8
def test_c8_ellipse_family():
    V = ModeVector.from_modes(2, {(2, 2): math.sqrt(math.pi)})  # cos 2 theta
    assert_allclose(expansion.deficit_expansion(V).cAF, 6.0, rtol=1e-14)
    # exact: ellipse with semi-axes 1 + s and b(s) at perimeter 2 pi; the
    # boundary is r = 1 + s cos 2 theta + O(s^2)
    vals = []
    for s in (2e-3, 1e-3):
        b = body.ellipse_minor_axis_for_perimeter(1 + s)
        vals.append((1 - ((1 + s) * b) ** 4) / s ** 2)
    assert_allclose(2 * vals[1] - vals[0], 6.0, rtol=1e-4)


# --- 9 -----------------------------------------------------------------------


@criterion("9", "nonlinearity-term quadrature vs (1/n) sum a_k^2 (k^2 - k), 1e-6")
@pytest.mark.parametrize("k", [2, 3, 4])
def test_c9_nt_term(k):
    a = math.sqrt(math.pi)  # V = cos k theta
    r = torsion.nt_term(mode(2, k, a))
    expected = 0.5 * a ** 2 * (k * k - k)
    assert abs(r.quadrature - expected) <= 1e-6
    if k == 2:
        assert abs(r.quadrature - math.pi) <= 1e-6


# --- 10 ----------------------------------------------------------------------

C10 = criterion("10", "f(2), lim f = (n-1)/n, f(k) > (n-1)/n for k <= 1e4, threshold (n-1)/(3n-1) < 2")


def _f_symbolic(n):
    # ratio of the second-order torsion and AF coefficients for a degree-x mode
    x = sp.Symbol("x", positive=True)
    N = n + 1 - 2 * x - x * (x + n - 2) + sp.Rational(1, n) * (x * x - x)
    D = n - 1 - x * (x + n - 2)
    return x, N / D


@C10
@pytest.mark.parametrize("n", range(2, 11))
def test_c10_f2_and_limit(n):
    x, f = _f_symbolic(n)
    assert sp.nsimplify(f.subs(x, 2)) == sp.Rational(n * n + 3 * n - 2, n * (n + 1))
    assert expansion.mode_ratio(2, n) == Fraction(n * n + 3 * n - 2, n * (n + 1))
    assert sp.limit(f, x, sp.oo) == sp.Rational(n - 1, n)


@C10
@pytest.mark.parametrize("n", range(2, 11))
def test_c10_f_above_limit(n):
    x, f = _f_symbolic(n)
    fn = sp.lambdify(x, sp.together(f))
    cn = Fraction(n - 1, n)
    for k in range(2, 10_001):
        fk = expansion.mode_ratio(k, n)
        assert fk > cn
        if k < 50:
            assert_allclose(float(fk), fn(k), rtol=1e-14)


@C10
def test_c10_critical_point_threshold():
    for n in range(2, 11):
        rep = expansion.infimum_analysis(n, kmax=100, samples=201)
        assert rep.stated_threshold == Fraction(n - 1, 3 * n - 1)
        assert rep.stated_threshold < 2


# --- 11 and 12 ---------------------------------------------------------------


@pytest.fixture(scope="module")
def oracle_runs():
    ts = (0.2, 0.1, 0.05, 0.02, 0.01)
    ell = {f"n={n}": expansion.ratio_experiment(expansion.build_family(mode(n, 2), t_values=ts, check_convex=False),
                                                "ellipsoid") for n in (2, 3)}
    ma = {f"k={k}": expansion.ratio_experiment(expansion.build_family(mode(2, k), t_values=(0.05, 0.02, 0.01)),
                                               "ma2d", workers=3) for k in (2, 3, 4)}
    return ell, ma


@criterion("11", "delta_T <= delta_AF + 2 tol on every oracle body")
def test_c11_upper_bound(oracle_runs):
    ell, ma = oracle_runs
    count = 0
    for ex in (*ell.values(), *ma.values()):
        tol = ex.summary["tolerance"]
        for r in ex.reports:
            assert r.deltaT_oracle <= r.deltaAF_oracle + 2 * tol
            count += 1
    assert count == 19


C12 = criterion("12", "ellipsoid ratio 1 within 1e-10; f(2) discrepancy flagged WARN; ratios >= c_n")


@C12
def test_c12_ellipsoid_ratio_is_one(oracle_runs):
    ell, _ = oracle_runs
    for ex in ell.values():
        for r in ex.reports:
            assert abs(r.ratio_oracle - 1) <= 1e-10


@C12
def test_c12_ratios_bounded_below_by_c_n(oracle_runs):
    ell, ma = oracle_runs
    for ex in (*ell.values(), *ma.values()):
        cn = (ex.n - 1) / ex.n
        assert all(r.ratio_oracle >= cn for r in ex.reports)


@C12
def test_c12_report_flags_mode_two_discrepancy():
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        main(["verify-paper", "--quick", "--json"])
    results = json.loads(buf.getvalue())["results"]
    warns = [r for r in results if r["status"] == "WARN"]
    assert len(warns) == 1
    detail = warns[0]["detail"]
    assert "4/3" in detail and "1.000" in detail
    assert_allclose(warns[0]["values"]["expansion_f2"], 4 / 3)
    assert_allclose(warns[0]["values"]["oracle_ratio"], 1.0, atol=1e-10)
