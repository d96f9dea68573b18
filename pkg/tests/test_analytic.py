from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.special
from hypothesis import given
from hypothesis import strategies as st

from dlczsim import analytic as an
from dlczsim.analytic import Detector, PerturbativeInputs, PerturbativeWarning


def dilog_quad(x):
    val, _ = scipy.integrate.quad(lambda t: -math.log1p(-t) / t if t != 0 else 1.0, 0.0, x, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def test_fg_first_step():
    f, g = an.f_g_recurrence(0.5, 0.0)
    assert (f, g) == pytest.approx((1 / 3, 1 / 6), abs=1e-15)
    assert an.f_g_solution(1) == pytest.approx((1 / 3, 1 / 6), abs=1e-15)


def test_fg_closed_form_matches_iteration():
    f, g = 0.5, 0.0
    for n in range(11):
        fs, gs = an.f_g_solution(n)
        assert fs == pytest.approx(1 / (2**n + 1), abs=1e-15)
        assert f == pytest.approx(fs, abs=1e-14)
        assert g == pytest.approx(gs, rel=1e-12, abs=1e-14)
        f, g = an.f_g_recurrence(f, g)


def test_fg_rejects_bad_input():
    with pytest.raises(ValueError):
        an.f_g_recurrence(0.0, 0.0)
    with pytest.raises(ValueError):
        an.f_g_solution(-1)


def test_exact_c1_parameter():
    assert an.s_exact_c1(1 / 3, 1 / 6, 0.0) == pytest.approx(an.SQRT8, abs=1e-15)
    S = an.s_exact_c1(1 / 3, 1 / 6, 1e-3)
    assert 1 - S / an.SQRT8 == pytest.approx(1e-6, rel=1e-3)


@given(st.integers(1, 6), st.floats(1e-5, 1e-3))
def test_exact_c1_expands_to_leading_order(n, c1):
    f, g = an.f_g_solution(n)
    deficit = 1 - an.s_exact_c1(f, g, c1) / an.SQRT8
    leading = (2**n - 1) ** 2 * c1**2
    # next order is relatively O(L^2 c1^2); cancellation in 1 - S/2sqrt2 adds ~1e-16/leading
    assert deficit == pytest.approx(leading, rel=4 * 4**n * c1**2 + 1e-15 / leading + 1e-9)


def test_error_free_inputs_give_tsirelson_bound():
    for det in Detector:
        x = PerturbativeInputs(8.0, 0.3, 0.2, detector=det)
        for f in (an.s_memory_darkcount, an.s_finite_squeezing, an.s_generation_darkcount):
            assert f(x).S == an.SQRT8


def test_counting_c1_vanishes_without_connection_loss():
    x = PerturbativeInputs(16.0, 0.9, 0.0, c1=0.01, detector=Detector.COUNTING)
    assert an.s_memory_darkcount(x).S == an.SQRT8


def test_finite_squeezing_substitution():
    x = PerturbativeInputs(4.0, 0.9, 0.1, r=1e-2)
    res = an.s_finite_squeezing(x)
    assert res.deficit == pytest.approx(6.688e-3, rel=1e-12)
    assert res.valid and res.warnings == ()


def test_threshold_anchors():
    assert an.max_distance("gen_darkcount", n_dc=1e-6, p_gen=0.9).value == pytest.approx(62.079450, rel=1e-6)
    assert an.max_distance("two_pass_xi", xi=1e-3, p_con=0.0).value == pytest.approx(9.019935, rel=1e-6)
    s = an.max_distance("one_pass_s", L=16, p_con=0.0).value
    assert s == pytest.approx(0.5 * (2 - math.sqrt(2)) / 256, rel=1e-12)
    assert an.to_decibel(s) == pytest.approx(-29.415, abs=1e-3)
    assert an.max_distance("squeezing", r=1e-2).value == pytest.approx(math.sqrt((2 - math.sqrt(2)) / 4) * 100, rel=1e-12)


def test_two_pass_threshold_inverts_distance():
    L = an.max_distance_two_pass(1e-3, 0.1).value
    assert an.two_pass_xi_threshold(L, 0.1) == pytest.approx(1e-3, rel=1e-12)


def test_memory_formula_at_two_pass_threshold():
    L = an.max_distance_two_pass(1e-3).value
    x = PerturbativeInputs(L, c3=math.sqrt(0.9e-3))
    assert an.s_memory_darkcount(x).S == pytest.approx(2.0, abs=1e-12)


def test_degenerate_thresholds_flagged():
    inf = an.max_distance_gen_darkcount(math.inf, 0.9)
    assert inf.degenerate and inf.value == 0.0
    none = an.max_distance_squeezing(0.0)
    assert none.degenerate and math.isinf(none.value)
    short = an.max_distance_squeezing(0.5)
    assert short.degenerate and short.value < 1


def test_squeezing_for_deficit_inverts_formula():
    r = an.squeezing_for_deficit(0.05, 8.0, 0.9, 0.1, Detector.COUNTING)
    x = PerturbativeInputs(8.0, 0.9, 0.1, r=r, detector=Detector.COUNTING)
    assert an.finite_squeezing_deficit(x) == pytest.approx(0.05, rel=1e-12)
    with pytest.raises(ValueError):
        an.squeezing_for_deficit(0.05, 8.0, 0.0, 0.1, Detector.COUNTING)


def test_outside_regime_warns_but_returns():
    x = PerturbativeInputs(64.0, 0.9, 0.1, r=0.2)
    with pytest.warns(PerturbativeWarning, match="not small"):
        res = an.s_finite_squeezing(x)
    assert not res.valid and res.S < 0
    with pytest.warns(PerturbativeWarning, match="transmission"):
        an.s_generation_darkcount(PerturbativeInputs(1.0, 0.0, 0.95, n_dc=0.1))


def test_input_validation():
    with pytest.raises(ValueError):
        PerturbativeInputs(L=0.5)
    with pytest.raises(ValueError):
        PerturbativeInputs(p_con=1.0)
    with pytest.raises(ValueError):
        PerturbativeInputs(r=-1.0)


def test_cross_term_dominance():
    assert an.cross_term_dominance(1e-5, 1e-2) == an.Dominance("negligible", pytest.approx(0.1))
    assert an.cross_term_dominance(1e-5, 1e-3).flag == "dominant"
    assert an.cross_term_dominance(1e-5, 1e-3).ratio == pytest.approx(10.0)
    assert an.cross_term_dominance(0.0, 1e-3).flag == "negligible"
    with pytest.raises(ValueError):
        an.cross_term_dominance(1e-5, 0.0)


def test_summed_deficit_adds_sources():
    x = PerturbativeInputs(8.0, 0.9, 0.1, c3=0.01, r=1e-2, detector=Detector.COUNTING)
    parts = (
        an.memory_darkcount_deficit(PerturbativeInputs(8.0, 0.9, 0.1, c3=0.01, n_dc=1e-5, detector=Detector.COUNTING))
        + an.finite_squeezing_deficit(x)
        + an.generation_darkcount_deficit(PerturbativeInputs(8.0, 0.9, 0.1, n_dc=2e-5, detector=Detector.COUNTING))
    )
    assert an.summed_deficit(x, 1e-5, 2e-5) == pytest.approx(parts, rel=1e-14)


# dilogarithm


def test_dilog_special_values():
    assert an.dilog(0.0) == 0.0
    assert an.dilog(1.0) == pytest.approx(math.pi**2 / 6, abs=1e-15)
    assert an.dilog(-1.0) == pytest.approx(-math.pi**2 / 12, abs=1e-14)
    assert an.dilog(0.5) == pytest.approx(math.pi**2 / 12 - math.log(2) ** 2 / 2, abs=1e-14)
    with pytest.raises(ValueError):
        an.dilog(1.5)


@given(st.floats(-50.0, 1.0))
def test_dilog_matches_quadrature(x):
    assert an.dilog(x) == pytest.approx(dilog_quad(x), abs=1e-10)


@given(st.floats(-1e8, 1.0))
def test_dilog_matches_scipy_spence(x):
    # scipy's spence(z) is Li2(1 - z)
    assert an.dilog(x) == pytest.approx(float(scipy.special.spence(1.0 - x)), abs=1e-10, rel=1e-13)


@given(st.floats(1e-6, 1 - 1e-6))
def test_dilog_reflection(x):
    lhs = an.dilog(x) + an.dilog(1 - x)
    assert lhs == pytest.approx(math.pi**2 / 6 - math.log(x) * math.log1p(-x), abs=1e-9)


def test_dilog_large_negative_asymptote():
    x = -1e6
    asym = -math.pi**2 / 6 - math.log(-x) ** 2 / 2
    # the asymptote drops Li2(1/x) ~ 1/x
    assert an.dilog(x) - asym == pytest.approx(-an.dilog(1 / x), abs=1e-12)
    assert an.dilog(x) == pytest.approx(asym, abs=2e-6)
    assert an.dilog(x) == pytest.approx(dilog_quad(-1e3) + (dilog_quad(x) - dilog_quad(-1e3)), abs=1e-8)


# loss-only chains


def test_eta_examples():
    assert all(an.eta_solution(n, 0.0) == 1.0 for n in range(10))
    assert an.eta_solution(1, 0.3) == pytest.approx(1 / 1.3, abs=1e-15)
    assert an.connection_success(1.0, 0.0) == 0.5
    assert an.connection_success(1.0, 0.0, Detector.NON_COUNTING) == 0.75


@given(st.floats(0.0, 0.99), st.sampled_from(list(Detector)))
def test_eta_closed_form_matches_recurrence(p, det):
    eta = 1.0
    for n in range(1, 30):
        eta = an.eta_recurrence(eta, p, det)
        # the map doubles perturbations near eta = 1, so rounding grows like 2^n
        assert eta == pytest.approx(an.eta_solution(n, p, det), rel=1e-15 * 2**n + 1e-15)


def test_estimated_eta_product_within_three_percent():
    worst = 0.0
    for p in np.linspace(0.0, 0.99, 100):
        for n in range(1, 46):
            log_ratio = an.log_eta_product_estimate(n, p) - an.log_eta_product(n, p)
            worst = max(worst, abs(math.expm1(log_ratio)))
    assert worst < 0.03


def test_eta_product_survives_underflow():
    assert an.eta_product(45, 0.9) == pytest.approx(math.exp(an.log_eta_product(45, 0.9)))
    assert an.log_eta_product(45, 0.9) < -700


def test_closed_form_rate_without_connection_loss():
    got = an.rate_closed_form(0.01, 0.9, 0.0, 8.0)
    assert got == pytest.approx(2 / 3 * 1e-4 * 0.1 * 8 ** -math.log2(3), rel=1e-14)
    with pytest.raises(ValueError):
        an.rate_closed_form(0.01, 0.9, 1.0, 8.0)


@pytest.mark.parametrize("det", list(Detector))
@pytest.mark.parametrize("p", [0.0, 0.1, 0.5, 0.9])
def test_closed_form_rate_tracks_product_rate(det, p):
    for n in range(0, 21):
        closed = an.rate_closed_form(0.01, 0.9, p, 2.0**n, det)
        exact = an.rate_loss_only(0.01, 0.9, p, n, det)
        assert closed == pytest.approx(exact, rel=0.03)


def test_loss_only_q_list():
    q, q_ps = an.loss_only_q_list(0.01, 0.9, 0.0, 3)
    assert q == pytest.approx([2e-5, 0.5, 0.5, 0.5])
    assert q_ps == 0.5
    q, q_ps = an.loss_only_q_list(0.01, 0.9, 0.0, 2, Detector.NON_COUNTING)
    assert q[1] == 0.75 and q_ps == pytest.approx(0.5 * (2 / 5) ** 2)
