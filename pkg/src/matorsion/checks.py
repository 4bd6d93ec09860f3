"""Named numerical checks behind ``matorsion identities`` and ``matorsion verify-paper``.

Each check returns a :class:`CheckResult` with one of four statuses:

``PASS``/``FAIL``
    the identity holds / does not hold at the stated tolerance;
``WARN``
    a known disagreement between a predicted value and an exact oracle, reported
    with both numbers (promoted to ``FAIL`` by ``--strict``);
``INFO``
    a measured value reported for context, never a failure.

All sampling is seeded; the seed is part of every result.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import body as bodymod
from . import expansion, sphere, symmfunc, torsion
from .sphere import ModeVector, unit_ball_volume

__all__ = ["CheckResult", "acceptance_checks", "identity_checks", "summarize"]

PASS, FAIL, WARN, INFO = "PASS", "FAIL", "WARN", "INFO"


@dataclass
class CheckResult:
    name: str
    identity: str
    status: str
    detail: str = ""
    values: dict = field(default_factory=dict)
    criterion: str | None = None
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _run(name, identity, fn, criterion=None):
    """Time ``fn() -> (ok | status, detail, values)``; an exception is a failure."""
    t0 = time.perf_counter()
    try:
        status, detail, values = fn()
    except Exception as exc:  # a crashing check is a failing check
        status, detail, values = FAIL, f"{type(exc).__name__}: {exc}", {}
    if isinstance(status, (bool, np.bool_)):
        status = PASS if status else FAIL
    return CheckResult(name, identity, status, detail, _plain(values), criterion,
                       round(time.perf_counter() - t0, 3))


def _plain(obj):
    # JSON-friendly copy
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _sym(rng, shape):
    X = rng.standard_normal(shape)
    return 0.5 * (X + np.swapaxes(X, -1, -2))


def _mode(n, k, a=1.0):
    return ModeVector.from_modes(n, {(k, k if n == 2 else 0): a})


# ---------------------------------------------------------------------------
# tensor algebra


def _delta_reference(upper, lower):
    # k x k determinant of single deltas, in floating point, independent of symmfunc
    M = np.array([[1.0 if u == l else 0.0 for l in lower] for u in upper])
    return int(round(np.linalg.det(M)))


def check_delta_sign_vs_det(nmax=4, seed=0):
    rng = np.random.default_rng(seed)
    bad = []
    count = 0
    for n in range(1, nmax + 1):
        for k in range(1, n + 1):
            tuples = list(itertools.product(range(1, n + 1), repeat=k))
            if len(tuples) ** 2 > 20000:
                pairs = [(tuples[i], tuples[j]) for i, j in rng.integers(len(tuples), size=(20000, 2))]
            else:
                pairs = list(itertools.product(tuples, tuples))
            for up, lo in pairs:
                ref = _delta_reference(up, lo)
                a = symmfunc.gen_delta(up, lo, n, method="sign")
                b = symmfunc.gen_delta(up, lo, n, method="det")
                count += 1
                if not a == b == ref:
                    bad.append((n, up, lo, a, b, ref))
    # antisymmetry under a swap of two upper indices
    for _ in range(200):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(2, n + 1))
        up = tuple(int(v) for v in rng.permutation(n)[:k] + 1)
        lo = tuple(int(v) for v in rng.permutation(n)[:k] + 1)
        sw = (up[1], up[0]) + up[2:]
        count += 1
        if symmfunc.gen_delta(sw, lo, n) != -symmfunc.gen_delta(up, lo, n):
            bad.append((n, up, lo, "antisymmetry"))
    detail = f"{count} index pairs, {len(bad)} mismatches"
    if bad:
        detail += f"; first: {bad[0]}"
    return not bad, detail, {"pairs": count, "mismatches": len(bad)}


def check_delta_contraction(nmax=5):
    cases = mismatches = 0
    for n in range(2, nmax + 1):
        for k in range(2, n + 1):
            for p in range(1, k):
                brute, rhs = symmfunc.contraction_table(n, k, p)
                cases += brute.size
                mismatches += int(np.count_nonzero(brute != rhs))
    # scalar route through gen_delta: remaining identity pair and a repeated index
    spot = [
        (symmfunc.contract_delta((2,), (2,), 1, 3), 2),
        (symmfunc.contract_delta((1,), (1,), 2, 4), 12),
        (symmfunc.contract_delta((1, 1), (1, 2), 1, 4), 0),
        (symmfunc.contract_delta((1, 2), (2, 1), 1, 4), -2),
    ]
    spot_bad = sum(int(a != b) for a, b in spot)
    ok = mismatches == 0 and spot_bad == 0
    return ok, f"{cases} entries over n<=5, {mismatches} mismatches; scalar spot checks {len(spot) - spot_bad}/{len(spot)}", \
        {"entries": cases, "mismatches": mismatches, "spot_failures": spot_bad}


def check_sk_equivalence(seed=0, samples=100, tol=1e-12):
    rng = np.random.default_rng(seed)
    worst = {}
    for n in range(2, 6):
        A = _sym(rng, (samples, n, n))
        lam = np.linalg.eigvalsh(A)
        err = 0.0
        for k in range(n + 1):
            err = max(err, float(np.max(np.abs(symmfunc.elem_sym_matrix(A, k) - symmfunc.elem_sym_eigen(lam, k)))))
        err_det = float(np.max(np.abs(symmfunc.elem_sym_matrix(A, n) - np.linalg.det(A))))
        err_tr = float(np.max(np.abs(symmfunc.elem_sym_matrix(A, 1) - np.trace(A, axis1=1, axis2=2))))
        worst[n] = max(err, err_det, err_tr)
    top = max(worst.values())
    return top <= tol, f"max |delta-sum - eigenvalue route| = {top:.2e} (tol {tol:g}), {samples} matrices per n in 2..5", \
        {"max_abs_error": worst, "tol": tol}


def _symbolic_matrix(n, name="a"):
    import sympy as sp

    syms = sp.symbols(f"{name}0:{n * n}")
    return sp.Matrix(n, n, syms), syms


def check_cofactor_derivative(nmax=3):
    """cofactor_sk equals the symbolic gradient of S_k, including the adjugate at k = n."""
    import sympy as sp

    bad = []
    for n in range(2, nmax + 1):
        M, _ = _symbolic_matrix(n)
        A = np.array(M.tolist(), dtype=object)
        for k in range(1, n + 1):
            Sk = sp.expand(symmfunc.elem_sym_matrix(A, k))
            C = symmfunc.cofactor_sk(A, k)
            for i in range(n):
                for j in range(n):
                    if sp.expand(C[i, j] - sp.diff(Sk, M[i, j])) != 0:
                        bad.append((n, k, i, j))
        if sp.expand(sp.Matrix(symmfunc.cofactor_sk(A, n).tolist()) - M.adjugate().T) != sp.zeros(n, n):
            bad.append((n, "adjugate"))
    return not bad, f"exact for n=2..{nmax}, k=1..n" if not bad else f"mismatch at {bad[:3]}", {"mismatches": len(bad)}


def check_cofactor_one_over_k(nmax=3):
    """The normalization ``(1/k)[T_{k-1}]`` against the gradient of ``S_k``.

    Returns the ratio gradient / ((1/k)[T_{k-1}]) on a generic matrix; the
    literal identity holds only if that ratio is 1.
    """
    rng = np.random.default_rng(7)
    ratios = {}
    for n in range(2, nmax + 1):
        A = _sym(rng, (n, n))
        for k in range(2, n + 1):
            grad = symmfunc.cofactor_sk(A, k)
            lit = symmfunc.newton_tensor([A] * (k - 1)) / k
            ratios[f"n={n},k={k}"] = float(np.sum(grad * lit) / np.sum(lit * lit))
    ok = all(abs(r - 1) <= 1e-12 for r in ratios.values())
    detail = ("holds" if ok else
              "does not hold: the gradient of S_k equals [T_{k-1}], i.e. k times (1/k)[T_{k-1}]; "
              + ", ".join(f"{key}: ratio {v:.12g}" for key, v in ratios.items()))
    return ok, detail, {"gradient_over_literal": ratios}


def check_euler(seed=0, samples=100, tol=1e-12):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in range(2, 6):
        A = _sym(rng, (samples, n, n))
        for k in range(1, n + 1):
            lhs = np.einsum("pij,pij->p", symmfunc.cofactor_sk(A, k), A)
            rhs = k * symmfunc.elem_sym_eigen(np.linalg.eigvalsh(A), k)
            worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs)))))
    return worst <= tol, f"max |sum S_k^ij A_ij - k S_k| / max(1,|k S_k|) = {worst:.2e}", {"max_error": worst, "tol": tol}


def check_divergence_free(seed=0, npts=100):
    """Rows of S_k^{ij}(D^2 u) are divergence free for cubic ``u``, exactly."""
    import sympy as sp

    rng = np.random.default_rng(seed)
    bad = []
    evaluated = 0
    for n in (2, 3):
        xs = sp.symbols(f"x0:{n}")
        monos = [sp.Mul(*[x ** e for x, e in zip(xs, ex)])
                 for ex in itertools.product(range(4), repeat=n) if sum(ex) <= 3]
        u = sum(int(c) * m for c, m in zip(rng.integers(-5, 6, len(monos)), monos))
        H = np.array(sp.hessian(u, xs).tolist(), dtype=object)
        pts = rng.uniform(-1, 1, (npts, n))
        for k in range(1, n + 1):
            C = symmfunc.cofactor_sk(H, k)
            for j in range(n):
                div = sp.expand(sum(sp.diff(C[i, j], xs[i]) for i in range(n)))
                f = sp.lambdify(xs, div, "numpy")
                vals = np.broadcast_to(f(*pts.T), (npts,))
                evaluated += npts
                if div != 0 or np.any(vals != 0):
                    bad.append((n, k, j, str(div)))
    return not bad, f"identically zero for random cubics, n=2,3, k=1..n ({evaluated} point evaluations)" \
        if not bad else f"nonzero divergence {bad[:2]}", {"failures": len(bad)}


def check_newton_symmetry(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in range(3, 6):
        A, B = _sym(rng, (n, n)), rng.standard_normal((n, n))
        worst = max(worst, float(np.max(np.abs(symmfunc.newton_tensor([A, B]) - symmfunc.newton_tensor([B, A])))))
    return worst <= 1e-13, f"max |T_2(A,B) - T_2(B,A)| = {worst:.1e}", {"max_error": worst}


def check_reilly(tol=1e-10, seed=0):
    rows = {}
    worst = 0.0
    for n in (2, 3):
        for k in range(1, n + 1):
            for rho in (0.5, 1.0):
                lhs, rhs = torsion.reilly_check(n, k, rho, seed=seed)
                rows[f"n={n},k={k},rho={rho}"] = (lhs, rhs)
                worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return worst <= tol, f"level-set identity on radial u, max rel. error {worst:.1e}", {"cases": rows, "tol": tol}


# ---------------------------------------------------------------------------
# calculus on the sphere


def _random_field(n, kmax, rng):
    b = sphere.harmonic_basis(n, kmax)
    c = rng.standard_normal(len(b)) / (1.0 + b.degrees) ** 2
    return ModeVector(n, b.degrees, b.orders, c)


def _grid(n):
    return sphere.make_grid(n, 64 if n == 2 else (32, 64))


def check_green_beltrami(n, seed=0):
    rng = np.random.default_rng(seed)
    g = _grid(n)
    worst = 0.0
    for _ in range(5):
        f = sphere.synthesize(_random_field(n, 10, rng), g)
        norm = math.sqrt(sphere.integrate(g, f * f))
        worst = max(worst, abs(sphere.integrate(g, sphere.laplace_beltrami(g, f))) / norm)
    return worst <= 1e-8, f"|int Lap f| / ||f|| = {worst:.1e} on S^{n - 1}", {"max": worst}


def check_parseval(n, seed=0):
    rng = np.random.default_rng(seed)
    g = _grid(n)
    worst_p = worst_r = 0.0
    for _ in range(5):
        V = _random_field(n, 10, rng)
        f = sphere.synthesize(V, g)
        a = sphere.analyze(g, f, kmax=10)
        worst_p = max(worst_p, abs(sphere.integrate(g, f * f) - a.norm_sq()))
        worst_r = max(worst_r, float(np.max(np.abs(sphere.synthesize(a, g) - f))))
    ok = worst_p <= 1e-8 and worst_r <= 1e-10
    return ok, f"Parseval error {worst_p:.1e}, round-trip error {worst_r:.1e} on S^{n - 1}", \
        {"parseval": worst_p, "round_trip": worst_r}


def check_eigen_relation(n):
    g = _grid(n)
    worst = 0.0
    basis = sphere.harmonic_basis(n, 8)
    for k in range(1, 9):
        for m in sorted({o for d, o in zip(basis.degrees, basis.orders) if d == k}):
            Y = basis.field(g, k, m)
            worst = max(worst, float(np.max(np.abs(sphere.laplace_beltrami(g, Y) + k * (k + n - 2) * Y))))
    return worst <= 1e-6, f"max |Lap Y + k(k+n-2) Y| = {worst:.1e} for degrees 1..8 on S^{n - 1}", {"max": worst}


def check_gradient_energy(n, seed=0):
    rng = np.random.default_rng(seed)
    g = _grid(n)
    V = _random_field(n, 8, rng)
    lhs = sphere.integrate(g, sphere.surface_gradient_sq(g, sphere.synthesize(V, g)))
    rhs = float(np.sum(V.coeffs ** 2 * V.degrees * (V.degrees + n - 2)))
    err = abs(lhs - rhs)
    return err <= 1e-8, f"int |grad V|^2 = {lhs:.12g}, sum a^2 k(k+n-2) = {rhs:.12g}", {"lhs": lhs, "rhs": rhs}


def check_s2_reduction(seed=0):
    rng = np.random.default_rng(seed)
    g = sphere.make_grid(3, (48, 96))
    basis = sphere.harmonic_basis(3, 3)
    out = {}
    Y20 = basis.field(g, 2, 0)
    out["Y_2,0"] = sphere.s2_identity_check(g, Y20)
    mix = ModeVector(3, basis.degrees, basis.orders,
                     np.where(basis.degrees >= 2, rng.standard_normal(len(basis)), 0.0))
    out["degrees 2+3"] = sphere.s2_identity_check(g, sphere.synthesize(mix, g))
    rel = max(abs(l - r) / max(1.0, abs(r)) for l, r in out.values())
    ok = rel <= 1e-4 and abs(out["Y_2,0"][1] - 3.0) <= 1e-8
    return ok, "int S_2(D^2 V) = (1/2) int |grad V|^2 on S^2: " + ", ".join(
        f"{k}: {l:.10g} vs {r:.10g}" for k, (l, r) in out.items()), {"cases": out, "max_rel": rel}


def check_covariant_hessian_n3(seed=0):
    """Curvatures of a perturbed sphere from D^2 r agree with the fundamental forms."""
    rng = np.random.default_rng(seed)
    g = sphere.make_grid(3, (48, 96))
    V = _random_field(3, 4, rng).without_degrees(0, 1).scaled(0.05)
    b = bodymod.from_modes(g, V)
    sig = bodymod.curvatures(b).sigma
    worst = 0.0
    for k in range(3):
        worst = max(worst, float(np.max(np.abs(bodymod.sigma_via_lemma(b, k) - sig[k]))))
    # trace of the covariant Hessian is the Laplace-Beltrami operator
    f = sphere.synthesize(V, g)
    tr = np.trace(sphere.covariant_hessian(g, f), axis1=-2, axis2=-1)
    lap = sphere.synthesize(ModeVector(3, V.degrees, V.orders, -V.coeffs * V.degrees * (V.degrees + 1)), g)
    trace_err = float(np.max(np.abs(tr - lap)))
    ok = worst <= 1e-4 and trace_err <= 1e-8
    return ok, f"sigma_k via D^2 r vs fundamental forms: {worst:.1e}; tr D^2 f vs spectral Laplacian: {trace_err:.1e}", \
        {"sigma_error": worst, "trace_error": trace_err}


def identity_checks(dimension: int = 2, seed: int = 0) -> list[CheckResult]:
    """The identity suite.  ``dimension=3`` adds the S^2 covariant-Hessian checks."""
    if dimension not in (2, 3):
        raise sphere.InvalidInput("dimension must be 2 or 3")
    out = [
        _run("delta-sign-vs-det", "permutation-sign delta equals determinant of single deltas",
             lambda: check_delta_sign_vs_det(seed=seed)),
        _run("delta-contraction", "contracting p index pairs multiplies by p!(n-k+p)!/(n-k)!",
             check_delta_contraction),
        _run("sk-equivalence", "S_k by delta sum equals S_k of eigenvalues; S_1 = trace, S_n = det",
             lambda: check_sk_equivalence(seed=seed)),
        _run("newton-symmetry", "Newton tensor symmetric in its matrix arguments",
             lambda: check_newton_symmetry(seed=seed)),
        _run("cofactor-derivative", "S_k^{ij} = dS_k/dA_ij = [T_{k-1}]^j_i, adjugate at k = n",
             check_cofactor_derivative),
        _run("euler", "sum_ij S_k^{ij} A_ij = k S_k", lambda: check_euler(seed=seed)),
        _run("divergence-free", "sum_i d_i S_k^{ij}(D^2 u) = 0", lambda: check_divergence_free(seed=seed)),
        _run("reilly", "S_k^{ij} u_i u_j / |Du|^{k+1} = C(n-1,k-1) sigma_{k-1} on level sets",
             lambda: check_reilly(seed=seed)),
    ]
    for n in range(2, dimension + 1):
        out += [
            _run(f"green-beltrami-n{n}", "integral of the Laplace-Beltrami operator vanishes",
                 lambda n=n: check_green_beltrami(n, seed)),
            _run(f"parseval-n{n}", "L2 norm equals coefficient norm; analysis/synthesis round trip",
                 lambda n=n: check_parseval(n, seed)),
            _run(f"eigen-relation-n{n}", "-Lap Y_k = k(k+n-2) Y_k", lambda n=n: check_eigen_relation(n)),
            _run(f"gradient-energy-n{n}", "int |grad V|^2 = sum a^2 k(k+n-2)",
                 lambda n=n: check_gradient_energy(n, seed)),
        ]
    out.append(_run("s2-reduction", "int S_2(D^2 V) = (n-2)/2 int |grad V|^2 on S^2",
                    lambda: check_s2_reduction(seed)))
    if dimension == 3:
        out.append(_run("covariant-hessian-n3", "curvatures from D^2 r match fundamental forms on S^2",
                        lambda: check_covariant_hessian_n3(seed)))
    # context only: the (1/k) normalization of the cofactor matrix
    r = _run("cofactor-one-over-k", "S_k^{ij} = (1/k)[T_{k-1}]^j_i (literal normalization)",
             check_cofactor_one_over_k)
    if r.status == FAIL:
        r.status = INFO
    out.append(r)
    return out


# ---------------------------------------------------------------------------
# acceptance suite


def _c1():
    t0 = time.perf_counter()
    ok, detail, values = check_delta_contraction()
    dt = time.perf_counter() - t0
    return ok and dt < 10, f"{detail}; {dt:.2f} s (limit 10 s)", {**values, "seconds": dt}


def _c5(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (2, 3):
        g = _grid(n)
        om = unit_ball_volume(n)
        for R in (0.5, 1.0, 2.0):
            prof = bodymod.quermass(bodymod.from_radial(g, np.full(g.shape, R)))
            for j in range(n):
                worst = max(worst, abs(prof.W[j] - om * R ** (n - j)))
    chains = fails = 0
    for n in (2, 3):
        g = sphere.make_grid(n, 128 if n == 2 else (40, 80))
        made = 0
        while made < 20:
            V = _random_field(n, 4, rng).without_degrees(0, 1).scaled(0.1)
            b = bodymod.from_modes(g, V, radius=float(rng.uniform(0.5, 2.0)))
            if not b.convex:
                continue
            made += 1
            chains += 1
            fails += int(not bodymod.quermass(b).af_chain_holds())
    ok = worst <= 1e-8 and fails == 0
    return ok, f"max |W_j(B_R) - omega R^(n-j)| = {worst:.1e}; AF chain violated on {fails}/{chains} convex bodies", \
        {"ball_error": worst, "chains": chains, "violations": fails}


def _c6():
    sol = torsion.ma_solve_2d(bodymod.from_radial(sphere.make_grid(2, 256), np.ones(256)), grid=(128, 256))
    exact = math.pi ** 2 / 16
    rel = abs(sol.T - exact) / exact
    sym = {n: torsion.ellipsoid_symbolic_check(n) for n in (2, 3)}
    sym_ok = all(v == 0 for d in sym.values() for v in d.values())
    # numerical value of the closed form against ball_torsion for equal axes
    _, Te = torsion.ellipsoid_torsion((1.0, 1.0))
    _, Tb = torsion.ball_torsion(2)
    ok = rel <= 1e-3 and sym_ok and abs(Te - Tb) <= 1e-12
    return ok, f"unit disk at 128x256: T = {sol.T:.10g} vs pi^2/16 = {exact:.10g} (rel {rel:.1e}); " \
               f"ellipsoid closed form exact symbolically for n=2,3: {sym_ok}", \
        {"T": sol.T, "rel_error": rel, "residual": sol.residual, "symbolic": {n: {k: str(v) for k, v in d.items()}
                                                                            for n, d in sym.items()}}


def _w_last(b):
    return bodymod.quermass(b).W[b.n - 1]


def _c7():
    ts = (0.04, 0.02, 0.01)
    slopes = {}
    for n in (2, 3):
        for k in (2, 3):
            fam = expansion.build_family(_mode(n, k), n, t_values=ts)
            err = [abs(_w_last(fam.body(t)) - unit_ball_volume(n)) for t in ts]
            slopes[f"n={n},k={k}"] = float(np.polyfit(np.log(ts), np.log(err), 1)[0])
    ok = min(slopes.values()) >= 2.7
    return ok, "log-log slopes of |W_{n-1}(t) - omega_n|: " + ", ".join(f"{k}: {v:.2f}" for k, v in slopes.items()), \
        {"slopes": slopes}


def _c8():
    t = 0.01
    rel = {}
    for n in (2, 3):
        for k in (2, 3):
            V = _mode(n, k)
            fam = expansion.build_family(V, n, t_values=(t,))
            dAF = bodymod.af_deficit(bodymod.quermass(fam.body(t)))
            cAF = expansion.deficit_expansion(V, n).cAF
            rel[f"n={n},k={k}"] = abs(dAF / t ** 2 - cAF) / abs(cAF)
    # ellipse (1+s, b) at perimeter 2*pi: V = cos 2theta has cAF = 6
    cAF_ell = expansion.deficit_expansion(_mode(2, 2, math.sqrt(math.pi)), 2).cAF
    s = 1e-3
    a = 1 + s
    b = bodymod.ellipse_minor_axis_for_perimeter(a)
    exact = 1 - (a * b) ** 4
    numeric = bodymod.af_deficit(bodymod.ellipsoid_profile((a, b)))
    ell_rel = abs(exact / s ** 2 - 6) / 6
    ok = max(rel.values()) <= 0.01 and abs(cAF_ell - 6) <= 1e-12 and ell_rel <= 1e-2 \
        and abs(numeric - exact) <= 1e-8
    return ok, f"max rel. error of delta_AF/t^2 vs cAF at t=0.01: {max(rel.values()):.2%}; ellipse: cAF = {cAF_ell:.12g}, " \
               f"(1-(ab)^4)/s^2 = {exact / s ** 2:.6f} at s=1e-3", \
        {"rel_error": rel, "cAF_ellipse": cAF_ell, "ellipse_exact_over_s2": exact / s ** 2,
         "ellipse_body_vs_exact": abs(numeric - exact)}


def _c9():
    out = {}
    worst = 0.0
    for k in (2, 3, 4):
        r = torsion.nt_term(_mode(2, k, math.sqrt(math.pi)))
        out[k] = (r.closed_form, r.quadrature)
        worst = max(worst, abs(r.closed_form - r.quadrature))
    ok = worst <= 1e-6 and abs(out[2][1] - math.pi) <= 1e-6
    return ok, "V = cos k theta: " + ", ".join(f"k={k}: {c:.10g} vs {q:.10g}" for k, (c, q) in out.items()), \
        {"values": out, "max_error": worst}


def _c10():
    import sympy as sp

    rows = {}
    ok = True
    x = sp.symbols("x", positive=True)
    for n in range(2, 11):
        rep = expansion.infimum_analysis(n, kmax=10_000, samples=2001)
        N = n + 1 - 2 * x - x * (x + n - 2) + sp.Rational(1, n) * (x * x - x)
        D = n - 1 - x * (x + n - 2)
        lim = sp.limit(N / D, x, sp.oo)
        good = (rep.f2 == rep.f2_expected and lim == sp.Rational(n - 1, n) and rep.all_above_limit
                and rep.stated_threshold_below_two)
        ok &= bool(good)
        rows[n] = {"f2": str(rep.f2), "limit": str(lim), "all_above_limit": rep.all_above_limit,
                   "threshold": str(rep.stated_threshold)}
    return ok, "f(2) = (n^2+3n-2)/(n(n+1)), lim f = (n-1)/n, f(k) > (n-1)/n for k <= 10^4, " \
               "threshold (n-1)/(3n-1) < 2: all n in 2..10" if ok else f"mismatch {rows}", {"n": rows}


def _ellipsoid_experiments():
    fams = {
        "n=2 cos2": expansion.build_family(_mode(2, 2), 2, t_values=(0.2, 0.1, 0.05, 0.02, 0.01), check_convex=False),
        "n=3 Y20": expansion.build_family(_mode(3, 2), 3, t_values=(0.2, 0.1, 0.05, 0.02, 0.01), check_convex=False),
    }
    basis3 = sphere.harmonic_basis(3, 2)
    rng = np.random.default_rng(3)
    c = np.where(basis3.degrees == 2, rng.standard_normal(len(basis3)), 0.0)
    c /= np.linalg.norm(c)
    fams["n=3 mixed degree 2"] = expansion.build_family(ModeVector(3, basis3.degrees, basis3.orders, c), 3,
                                                        t_values=(0.2, 0.1, 0.05, 0.02, 0.01), check_convex=False)
    return {k: expansion.ratio_experiment(f, "ellipsoid") for k, f in fams.items()}


def _ma_experiments(ks=(2, 3, 4), ts=(0.04, 0.02, 0.01)):
    out = {}
    for k in ks:
        fam = expansion.build_family(_mode(2, k), 2, t_values=ts)
        out[f"n=2 k={k}"] = expansion.ratio_experiment(fam, "ma2d", workers=len(ts))
    return out


def _c11(ell, ma):
    rows = {}
    ok = True
    for name, ex in {**ell, **ma}.items():
        s = ex.summary
        ok &= s["deltaT_le_deltaAF"] and s["deltaT_nonnegative"]
        rows[name] = {"max deltaT - deltaAF": max(r.deltaT_oracle - r.deltaAF_oracle for r in ex.reports),
                      "tolerance": s["tolerance"], "ratios": [r.ratio_oracle for r in ex.reports]}
    return ok, f"delta_T <= delta_AF + 2 tol on {sum(len(e.reports) for e in {**ell, **ma}.values())} oracle bodies", rows


def _c12(ell, ma):
    worst = max(abs(r.ratio_oracle - 1) for ex in ell.values() for r in ex.reports)
    c_ok = all(ex.summary["ratios_at_least_c_n"] for ex in {**ell, **ma}.values())
    lo = min(r.ratio_oracle for ex in {**ell, **ma}.values() for r in ex.reports)
    return worst <= 1e-10 and c_ok, f"ellipsoid ratio |delta_T/delta_AF - 1| <= {worst:.1e}; " \
                                    f"smallest computed ratio {lo:.6f} is >= c_n", {"max_dev": worst, "min_ratio": lo}


def _warn_mode_two(ell):
    ex = ell["n=2 cos2"]
    predicted = expansion.mode_ratio(2, 2)
    V = _mode(2, 2, math.sqrt(math.pi))
    cT = expansion.deficit_expansion(V, 2).cT
    cT_oracle = ex.limit * expansion.deficit_expansion(V, 2).cAF
    text = (f"mode-2 ratio: expansion f(2) = {predicted} = {float(predicted):.4f}, ellipsoid oracle = {ex.limit:.3f}; "
            f"V = cos 2theta: expansion cT = {cT:.4g}, oracle cT = {cT_oracle:.4g}")
    return WARN, text, {"expansion_f2": float(predicted), "oracle_ratio": ex.limit, "cT_expansion": cT,
                        "cT_oracle": cT_oracle}


def _info_normalization(ell, ma):
    rows = {}
    for name, ex in {**ell, **ma}.items():
        rows[name] = {"oracle": ex.limit, "oracle_error": ex.limit_error,
                      "expansion": ex.summary["expansion_ratio"],
                      "derivative_cofactor": ex.summary["expansion_ratio_derivative_cofactor"]}
    text = ("with the cofactor taken as the derivative of S_k the predicted ratio is (n+1)/(k+n-1): "
            + ", ".join(f"{k}: oracle {v['oracle']:.4f} vs {v['derivative_cofactor']:.4f}" for k, v in rows.items()))
    return INFO, text, rows


def _info_high_mode():
    # k = 6 needs small t to stay convex; resolution is raised for the sharper shape
    fam = expansion.build_family(_mode(2, 6), 2, t_values=(0.02, 0.01, 0.005))
    ex = expansion.ratio_experiment(fam, "ma2d", solver={"grid": (32, 96)}, workers=3)
    c2 = 0.5
    return INFO, (f"n=2, k=6 (outside the acceptance range k <= 4): oracle ratio -> {ex.limit:.4f} "
                  f"+- {ex.limit_error:.1e}, below c_2 = {c2}; expansion f(6) = {float(expansion.mode_ratio(6, 2)):.4f}, "
                  f"derivative cofactor 3/7 = {3 / 7:.4f}"), {"limit": ex.limit, "error": ex.limit_error,
                                                              "ratios": [r.ratio_oracle for r in ex.reports]}


def acceptance_checks(seed: int = 0, extended: bool = True) -> list[CheckResult]:
    """The acceptance suite; ``extended`` adds the informational high-mode run."""
    out = [
        _run("C1 delta-contraction", "contraction identity, exhaustive n <= 5", _c1, "1"),
        _run("C2 sk-equivalence", "S_k dual definitions, 100 matrices per n", lambda: check_sk_equivalence(seed), "2"),
        _run("C3a cofactor-one-over-k", "S_k^{ij} = (1/k)[T_{k-1}]^j_i as stated", check_cofactor_one_over_k, "3"),
        _run("C3b euler", "Euler identity for S_k", lambda: check_euler(seed), "3"),
        _run("C3c divergence-free", "divergence-free cofactor rows on cubics",
             lambda: check_divergence_free(seed), "3"),
        _run("C4 reilly", "level-set identity on radial u, k = 1..n", lambda: check_reilly(seed=seed), "4"),
        _run("C5 quermass", "W_j of balls and Alexandrov-Fenchel chain", lambda: _c5(seed), "5"),
        _run("C6 ball-torsion", "planar solver on the disk and ellipsoid closed form", _c6, "6"),
        _run("C7 w-expansion", "W_{n-1} fixed to second order along constrained families", _c7, "7"),
        _run("C8 af-expansion", "delta_AF / t^2 -> cAF", _c8, "8"),
        _run("C9 nt-term", "nonlinearity term: quadrature vs closed form", _c9, "9"),
        _run("C10 ratio-analysis", "f(2), lim f, f > c_n, critical-point threshold", _c10, "10"),
    ]
    t0 = time.perf_counter()
    try:
        ell, ma = _ellipsoid_experiments(), _ma_experiments()
    except Exception as exc:
        msg = f"{type(exc).__name__}: {exc}"
        out += [CheckResult("C11 upper-bound", "delta_T <= delta_AF on oracle bodies", FAIL, msg, {}, "11"),
                CheckResult("C12 ellipsoid-ratio", "ratio 1 on ellipsoids; c_n as a lower bound", FAIL, msg, {}, "12")]
        return out
    shared = time.perf_counter() - t0
    out += [
        _run("C11 upper-bound", "delta_T <= delta_AF on oracle bodies", lambda: _c11(ell, ma), "11"),
        _run("C12 ellipsoid-ratio", "ratio 1 on ellipsoids; c_n as a lower bound", lambda: _c12(ell, ma), "12"),
        _run("C12 mode-two-discrepancy", "expansion ratio f(2) vs exact ellipsoid oracle",
             lambda: _warn_mode_two(ell), "12"),
        _run("normalization-note", "oracle ratios vs the derivative-cofactor prediction",
             lambda: _info_normalization(ell, ma)),
    ]
    out[-4].seconds += round(shared, 3)
    if extended:
        out.append(_run("high-mode-note", "MA oracle ratio for k = 6 against c_2", _info_high_mode))
    return out


def summarize(results, strict: bool = False) -> tuple[int, dict]:
    """Exit code (0 or 1) and status counts; ``strict`` treats WARN as FAIL."""
    counts = {s: 0 for s in (PASS, FAIL, WARN, INFO)}
    for r in results:
        counts[r.status] += 1
    failed = counts[FAIL] + (counts[WARN] if strict else 0)
    return (1 if failed else 0), counts
