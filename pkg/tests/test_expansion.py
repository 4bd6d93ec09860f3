import csv
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from matorsion import body, expansion, sphere
from matorsion.sphere import InvalidInput, ModeVector, unit_ball_volume

COS2 = ModeVector.from_modes(2, {(2, 2): math.sqrt(math.pi)})  # V = cos 2 theta


def mode(n, k, a=1.0):
    return ModeVector.from_modes(n, {(k, k if n == 2 else 0): a})


# --- acceleration and the constrained family ---------------------------------


def test_acceleration_integral_values():
    assert_allclose(expansion.acceleration_integral(COS2), -4 * math.pi, rtol=1e-14)
    assert expansion.acceleration_integral(ModeVector.zeros(2, 4)) == 0
    assert_allclose(expansion.acceleration_integral(mode(3, 3)), -12.0)  # l (l + 1)


def test_acceleration_integral_is_minus_gradient_energy_n2():
    g = sphere.make_grid(2, 256)
    V = ModeVector.from_modes(2, {(2, 2): 0.4, (3, -3): -0.7, (5, 5): 0.2})
    grad = sphere.integrate(g, sphere.surface_gradient_sq(g, sphere.synthesize(V, g)))
    assert_allclose(expansion.acceleration_integral(V), -grad, atol=1e-8)


def test_nonzero_mean_rejected():
    with pytest.raises(InvalidInput):
        expansion.acceleration_integral(ModeVector.from_modes(2, {(0, 0): 1.0, (2, 2): 1.0}))


def test_family_keeps_perimeter_to_second_order():
    fam = expansion.build_family(COS2, t_values=(0.02,))
    W1 = body.quermass(fam.body(0.02)).W[1]
    assert abs(W1 - math.pi) < 10 * 0.02 ** 3


def test_zero_perturbation_gives_balls():
    fam = expansion.build_family(ModeVector.zeros(3, 2), t_values=(0.1,))
    assert_allclose(fam.radial(0.1), 1.0, atol=1e-14)


def test_family_convexity_error_names_t():
    with pytest.raises(expansion.FamilyNotConvex) as exc:
        expansion.build_family(mode(2, 3), t_values=(0.01, 0.5))
    assert exc.value.t == 0.5


@pytest.mark.parametrize("n,k", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_constrained_W_last_error_is_third_order(n, k):
    ts = (0.04, 0.02, 0.01)
    fam = expansion.build_family(mode(n, k), t_values=ts)
    err = [abs(body.quermass(fam.body(t)).W[n - 1] - unit_ball_volume(n)) for t in ts]
    assert np.polyfit(np.log(ts), np.log(err), 1)[0] >= 2.7


# --- closed-form expansions ----------------------------------------------------


def test_w_expansion_cases():
    z = expansion.w_expansion(ModeVector.zeros(2, 3))
    assert z.W0 == pytest.approx((math.pi, 0, 0)) and z.W_last == pytest.approx((math.pi, 0, 0))
    assert_allclose(expansion.w_expansion(COS2).W_last[2], 0.0, atol=1e-13)
    assert_allclose(expansion.w_expansion(mode(3, 2)).W_last[2], 0.0, atol=1e-13)


@pytest.mark.parametrize("n,k", [(2, 3), (3, 2)])
def test_w_expansion_volume_matches_bodies(n, k):
    V = mode(n, k)
    fam = expansion.build_family(V, t_values=(0.01, 0.005))
    c2 = expansion.w_expansion(V).W0[2]
    vols = [(body.quermass(fam.body(t)).W[0] - unit_ball_volume(n)) / t ** 2 for t in (0.01, 0.005)]
    # second-order coefficient, with the O(t) term removed by extrapolation
    assert_allclose(2 * vols[1] - vols[0], c2, rtol=1e-3)


def test_deficit_coefficients_cos2theta():
    c = expansion.deficit_expansion(COS2)
    assert_allclose(c.cAF, 6.0, rtol=1e-14)
    assert_allclose(c.cT, 8.0, rtol=1e-14)
    d = expansion.deficit_expansion(COS2, cofactor="derivative")
    assert_allclose(d.cT, 6.0, rtol=1e-14)


def test_degree_one_content_flagged_and_removed():
    V = ModeVector.from_modes(2, {(1, 1): 0.5, (3, 3): 1.0})
    c = expansion.deficit_expansion(V)
    assert any("degree-1" in f for f in c.flags)
    assert_allclose(c.cT, expansion.deficit_expansion(mode(2, 3)).cT)
    only = expansion.deficit_expansion(ModeVector.from_modes(2, {(1, 1): 0.5}))
    assert only.ratio is None and any("undefined" in f for f in only.flags)


def test_zero_perturbation_ratio_undefined():
    assert expansion.deficit_expansion(ModeVector.zeros(3, 3)).ratio is None


@pytest.mark.parametrize("n,k", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_af_deficit_over_t2_converges(n, k):
    V = mode(n, k)
    cAF = expansion.deficit_expansion(V).cAF
    ts = (0.02, 0.01)
    fam = expansion.build_family(V, t_values=ts)
    errs = [abs(body.af_deficit(body.quermass(fam.body(t))) / t ** 2 - cAF) for t in ts]
    assert errs[1] / cAF <= 0.01
    assert errs[1] <= 0.6 * errs[0]


# --- mode ratio and the infimum ------------------------------------------------


def test_mode_ratio_values():
    assert expansion.mode_ratio(2, 2) == Fraction(4, 3)
    assert expansion.mode_ratio(2, 3) == Fraction(4, 3)
    for n in range(2, 8):
        assert expansion.mode_ratio(2, n) == Fraction(n * n + 3 * n - 2, n * (n + 1))


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 2000), st.integers(2, 12))
def test_mode_ratio_above_limit_and_closed_form(k, n):
    f = expansion.mode_ratio(k, n)
    assert f > Fraction(n - 1, n)
    assert f == Fraction(n - 1, n) + Fraction(3 * n - 1, n * (k + n - 1))
    assert expansion.mode_ratio(k, n, cofactor="derivative") == Fraction(n + 1, k + n - 1)


def test_f_tilde_agrees_with_mode_ratio():
    ks = np.arange(2, 40)
    assert_allclose(expansion.f_tilde(ks, 3), [float(expansion.mode_ratio(int(k), 3)) for k in ks], rtol=1e-14)
    with pytest.raises(InvalidInput):
        expansion.f_tilde(1.5, 2)


def test_infimum_analysis_n2():
    rep = expansion.infimum_analysis(2, kmax=10_000)
    assert rep.f2 == Fraction(4, 3) and rep.limit == Fraction(1, 2)
    assert rep.all_above_limit and rep.monotone_decreasing and rep.argmin == 10_000
    assert rep.critical_points == ()
    assert rep.stated_threshold == Fraction(1, 5)
    # exact tail: f(k) - 1/2 = 5 / (2 (k + 1))
    assert rep.min_value - rep.limit == Fraction(5, 2 * 10_001)


def test_infimum_analysis_n3():
    rep = expansion.infimum_analysis(3, kmax=500)
    assert rep.limit == Fraction(2, 3) and rep.all_above_limit and rep.f2_above_limit
    assert rep.tail_constant <= 8 / 3 + 1e-12


# --- oracle experiments --------------------------------------------------------


@pytest.mark.parametrize("V", [COS2, mode(3, 2), ModeVector.from_modes(3, {(2, 1): 0.6, (2, -2): -0.8})])
def test_ellipsoid_oracle_ratio_is_one(V):
    fam = expansion.build_family(V, t_values=(0.1, 0.05, 0.02, 0.01), check_convex=False)
    ex = expansion.ratio_experiment(fam, "ellipsoid")
    for r in ex.reports:
        assert_allclose(r.ratio_oracle, 1.0, atol=1e-10)
        assert_allclose(r.ratio_expansion, 4 / 3, rtol=1e-14)
    assert ex.summary["expansion_matches_oracle"] is False
    assert ex.summary["derivative_cofactor_matches_oracle"] is True


def test_ellipsoid_oracle_deficits_match_af_expansion():
    fam = expansion.build_family(COS2, t_values=(0.005,), check_convex=False)
    r = expansion.ratio_experiment(fam, "ellipsoid").reports[0]
    assert_allclose(r.deltaAF_oracle / 0.005 ** 2, 6.0, rtol=1e-2)
    assert_allclose(r.deltaT_oracle / 0.005 ** 2, 6.0, rtol=1e-2)


def test_ellipsoid_oracle_needs_degree_two():
    fam = expansion.build_family(mode(2, 3), t_values=(0.01,))
    with pytest.raises(expansion.OracleUnavailable):
        expansion.ratio_experiment(fam, "ellipsoid")


def test_ma_oracle_is_planar():
    fam = expansion.build_family(mode(3, 2), t_values=(0.01,))
    with pytest.raises(expansion.OracleUnavailable):
        expansion.ratio_experiment(fam, "ma2d")


def test_ma_oracle_mode_three(tmp_path):
    fam = expansion.build_family(mode(2, 3), t_values=(0.04, 0.02, 0.01))
    ex = expansion.ratio_experiment(fam, "ma2d", workers=3)
    assert 0.5 <= ex.limit <= 1.0
    assert_allclose(ex.limit, 0.75, atol=5 * ex.limit_error + 1e-4)
    s = ex.summary
    assert s["deltaT_le_deltaAF"] and s["deltaT_nonnegative"] and s["ratios_at_least_c_n"]
    ex.write_csv(tmp_path / "r.csv")
    ex.write_json(tmp_path / "r.json")
    rows = list(csv.reader(open(tmp_path / "r.csv", encoding="utf-8")))
    assert tuple(rows[0]) == expansion.CSV_COLUMNS and len(rows) == 4
    assert json.loads((tmp_path / "r.json").read_text())["oracle"] == "ma2d-oracle"


@pytest.mark.slow
def test_ma_oracle_high_mode_follows_derivative_cofactor():
    fam = expansion.build_family(mode(2, 6), t_values=(0.02, 0.01, 0.005))
    ex = expansion.ratio_experiment(fam, "ma2d", solver={"grid": (32, 96)}, workers=3)
    assert_allclose(ex.limit, 3 / 7, atol=max(5 * ex.limit_error, 2e-3))
    assert ex.limit < 0.5
