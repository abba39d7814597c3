import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from powmod.arith import factor
from powmod.bounds import (
    DYADIC_C,
    EnvelopeConfig,
    beta,
    beta_branch,
    beta_closed,
    dyadic_envelope_f,
    envelope_branches,
    envelope_E,
    envelope_jump,
    iwaniec_admissible,
    log_dyadic_envelope_f,
    log_envelope_E,
    mv_bound_b,
    perron_T_select,
    perron_wired_check,
    region_params,
    remark_theta3,
    thresholds_Q,
)
from powmod.errors import DomainError

CFG = EnvelopeConfig()


def test_config_defaults_and_validation():
    assert CFG.c0 == 1001 * 1000**2 * 1e-4
    assert CFG.gamma0 == 10 and CFG.c_perron == 0.25
    assert CFG.replace(xi0=1e-6).c0 == pytest.approx(1001 * 1000**2 * 1e-6)
    with pytest.raises(DomainError):
        EnvelopeConfig(c=0)
    with pytest.raises(DomainError):
        EnvelopeConfig(c_perron=0.5)
    with pytest.raises(DomainError):
        EnvelopeConfig(B1=2, B2=1)


def test_thresholds_examples():
    th = thresholds_Q(math.exp(math.e))
    assert th.log_Q1 == pytest.approx(math.e ** (7 / 3), rel=1e-14)
    assert th.log_Q2 == pytest.approx(math.e**7, rel=1e-14)
    assert th.Q2 == math.inf
    for q in np.geomspace(16, 1e9, 300):
        th = thresholds_Q(q)
        assert th.log_Q2 > th.log_Q1
    with pytest.raises(DomainError):
        thresholds_Q(2.999)


def test_envelope_branch_selection():
    q = 1e4
    th = thresholds_Q(q)
    assert log_envelope_E(1, th.log_Q1, q, CFG)[1] == 1
    assert log_envelope_E(1, th.log_Q1 + 1e-9, q, CFG)[1] == 2
    assert log_envelope_E(1, th.log_Q2, q, CFG)[1] == 2
    assert log_envelope_E(1, th.log_Q2 + 1e-6, q, CFG)[1] == 3
    with pytest.raises(DomainError):
        envelope_E(1, 2.0, q, CFG)
    with pytest.raises(DomainError):
        envelope_E(3, 100.0, q, CFG)


def test_envelope_ratio_and_c_monotonicity():
    q = 1e4
    th = thresholds_Q(q)
    for lx in (5.0, th.log_Q1 * 0.5, th.log_Q1 * 2, th.log_Q2 * 3):
        l1, case = log_envelope_E(1, lx, q, CFG)
        l2, _ = log_envelope_E(2, lx, q, CFG)
        assert l2 - l1 == pytest.approx(math.log(lx) if case == 1 else 0.0, abs=1e-12)
        bigger_c = log_envelope_E(1, lx, q, CFG.replace(c=2.0))[0]
        assert bigger_c < l1


def test_envelope_decreasing_within_branches():
    q = 1e4
    th = thresholds_Q(q)
    for lo, hi in ((3.0, th.log_Q1), (th.log_Q1 * 1.001, th.log_Q2), (th.log_Q2 * 1.001, th.log_Q2 * 50)):
        grid = np.linspace(max(lo, 50.0) if lo < th.log_Q1 else lo, hi, 400)
        vals = [log_envelope_E(1, lx, q, CFG)[0] for lx in grid]
        assert all(b < a for a, b in zip(vals, vals[1:]))


def test_envelope_jump_probe():
    q = 1e4
    probe = envelope_jump(1, 1, q, CFG)
    b = envelope_branches(1, probe.log_x_left, q, CFG)
    assert probe.log_left == b[0]
    assert probe.log_right == envelope_branches(1, probe.log_x_right, q, CFG)[1]
    assert probe.ratio > 0


def test_beta_examples():
    assert beta(Fraction(1, 7)) == Fraction(4, 7) == beta_branch(Fraction(1, 7), 2)
    assert beta(Fraction(3, 7)) == Fraction(5, 7) == beta_branch(Fraction(3, 7), 3)
    assert beta(0.75) == pytest.approx(0.5, abs=1e-15)
    assert beta(9 / 14) == pytest.approx(4 / 7, abs=1e-15)
    assert beta(0.6) == pytest.approx(0.6, abs=1e-15)
    assert beta(Fraction(3, 4)) == Fraction(1, 2)
    assert beta(Fraction(9, 14)) == Fraction(4, 7)
    assert beta(Fraction(3, 5)) == Fraction(3, 5)
    with pytest.raises(DomainError):
        beta(0)


def test_beta_grid_properties():
    # N is a multiple of 14 so 1/7 and 3/7 are grid points
    N = 100002
    grid = np.arange(1, N + 1) * 2.0 / N
    vals = np.array([beta(float(a)) for a in grid])
    closed = np.array([beta_closed(float(a)) for a in grid])
    assert np.max(np.abs(vals - closed)) <= 1e-15
    assert vals.max() == pytest.approx(5 / 7, abs=1e-15)
    assert abs(grid[np.argmax(vals)] - 3 / 7) < 1e-4
    assert vals[grid <= 0.6].min() == pytest.approx(4 / 7, abs=1e-15)


@given(st.fractions(min_value=Fraction(1, 1000), max_value=2))
def test_beta_exact_closed_form(alpha):
    assert beta(alpha) == beta_closed(alpha)


def test_dyadic_envelope():
    m = factor(2**12)
    q = m.q
    lq = math.log(q)
    lo, case = log_dyadic_envelope_f(DYADIC_C * lq, m, CFG)
    hi, case_hi = log_dyadic_envelope_f(DYADIC_C * lq * (1 + 1e-12), m, CFG)
    assert (case, case_hi) == (1, 2)
    assert math.isfinite(lo - hi)
    for lu in (DYADIC_C * lq * 2, DYADIC_C * lq * 7):
        val, case = log_dyadic_envelope_f(lu, m, CFG)
        assert case == 2 and val - lu == pytest.approx(-CFG.c0 * lq)
    with pytest.raises(DomainError):
        dyadic_envelope_f(10.0, m, CFG)
    assert dyadic_envelope_f(2.0**200, m, CFG) > 0


def test_dyadic_envelope_monotone_when_xi0_small():
    # increasing needs xi0 < 1/(3 C^2); the default 1e-4 is above that
    cfg = CFG.replace(xi0=1e-7)
    assert cfg.xi0 < 1 / (3 * DYADIC_C**2)
    m = factor(2**12)
    lo = cfg.gamma0 * math.log(m.core)
    grid = np.geomspace(lo, 3 * DYADIC_C * math.log(m.q), 1000)
    vals = [log_dyadic_envelope_f(lu, m, cfg)[0] for lu in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_region_params_formulas():
    m = factor(2**12 * 3**10)
    q = m.q
    t = 25.0
    r = region_params(m, t, CFG)
    lq, llq = math.log(q), math.log(math.log(q))
    ell = math.log(q * (abs(t) + 3))
    assert r.tau == 28.0 and r.ell == pytest.approx(ell)
    assert r.eta1 == pytest.approx(lq ** (-2 / 3) * llq ** (-1 / 3))
    assert r.eta2 == pytest.approx(lq / ell)
    assert r.eta3 == pytest.approx(ell**-0.5 * math.log(ell) ** -0.75)
    assert r.theta3 / r.eta3 == pytest.approx(0.5 * ell**-0.25)
    assert r.log_Q0 == pytest.approx(math.log(6) * max(10, 4 * ell / lq))
    assert r.log_Y == pytest.approx(60 * (ell * math.log(2 * ell)) ** 0.75)
    assert r.case_eta == 1 and r.eta == r.eta1 and r.vartheta == r.theta1
    with pytest.raises(DomainError):
        region_params(2, 1.0, CFG)


def test_region_branch_conventions():
    m = factor(10**6)
    base = region_params(m, 0.0, CFG)
    at_T1 = region_params(m, None, CFG, log_abs_t=base.log_T1)
    assert at_T1.case_eta == 1 and at_T1.eta == at_T1.eta1
    past = region_params(m, None, CFG, log_abs_t=base.log_T1 * (1 + 1e-12))
    assert past.case_eta == 2
    far = region_params(m, None, CFG, log_abs_t=base.log_T2 * 2)
    assert far.case_eta == 3 and far.log_K == pytest.approx(100 * far.ell**0.25)
    assert far.case_Theta == 3


def test_T3_below_T2_only_past_e_to_e():
    for q in np.geomspace(16, 1e9, 200):
        r = region_params(int(q), 0.0, CFG)
        assert r.log_T3 < r.log_T2
    # log log q < 1 for q < e^e, so the ordering flips there
    r = region_params(10, 0.0, CFG)
    assert r.log_T3 > r.log_T2


def test_vartheta_at_most_half_eta_and_theta_profile():
    m = factor(2**10 * 5**8)
    base = region_params(m, 0.0, CFG)
    jumps = []
    prev = None
    for lt in np.linspace(0, base.log_T2 * 1.5, 3000):
        r = region_params(m, None, CFG, log_abs_t=float(lt))
        assert r.vartheta <= r.eta / 2 + 1e-18
        if prev is not None and r.Theta < prev.Theta:
            jumps.append((float(lt), prev.case_Theta, r.case_Theta))
        prev = r
    # Theta only drops where the branch changes, never inside a branch
    assert all(a != b for _, a, b in jumps)


def test_theta3_ratio_tends_to_zero():
    m = factor(2**10)
    ratios = [
        (r.theta3 / r.eta3)
        for r in (region_params(m, None, CFG, log_abs_t=lt) for lt in (1.0, 10.0, 100.0, 1000.0))
    ]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_remark_theta3_reports_both_sides():
    rep = remark_theta3(factor(2**10), 100.0, CFG)
    assert rep.lhs > 0 and rep.rhs > 0
    assert rep.holds == (rep.lhs <= rep.rhs)
    tiny = remark_theta3(factor(2**10), 100.0, CFG.replace(A=1e-9))
    assert tiny.holds


def test_iwaniec_examples():
    chk = iwaniec_admissible(0.1, math.e, 1.0, 8)
    assert chk.vartheta == pytest.approx(2.5e-4, rel=1e-15)
    exact = iwaniec_admissible(Fraction(1, 10), log_K=Fraction(3))
    assert exact.vartheta == Fraction(1, 12000)
    with pytest.raises(DomainError):
        iwaniec_admissible(0.4, 10.0)
    with pytest.raises(DomainError):
        iwaniec_admissible(0.1, 2.0)


def test_iwaniec_sweep_in_eta():
    rows = [iwaniec_admissible(eta, 10.0, 1.0, 8) for eta in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)]
    # rhs ~ 1/eta but lhs ~ (24/eta) log(1/eta), so at K = 10 the
    # inequality fails throughout and the margin shrinks with eta
    margins = [r.rhs / r.lhs for r in rows]
    assert all(b < a for a, b in zip(margins, margins[1:]))
    assert not any(r.holds for r in rows)
    assert iwaniec_admissible(0.01, None, 1.0, 8, log_K=1e4).holds


def test_mv_bound_examples():
    assert mv_bound_b(1, 0.25, 0.5) == pytest.approx(16 + 4 / math.log(2), rel=1e-15)
    assert mv_bound_b(1, 0.25, 0.5) == pytest.approx(21.7708, abs=1e-4)
    with pytest.raises(DomainError):
        mv_bound_b(1, 0.5, 0.5)
    with pytest.raises(DomainError):
        mv_bound_b(0.5, 0.1, 0.6)
    assert mv_bound_b(10, 1 - 1e-9, 1) > 1e17


@given(
    st.floats(0.01, 10), st.floats(0.01, 10), st.floats(1.01, 100), st.floats(0.01, 100)
)
def test_mv_bound_homogeneity(r, gap, ratio, lam):
    R = r + gap
    D = R * ratio
    base = mv_bound_b(D, r, R)
    assert mv_bound_b(lam * D, lam * r, lam * R) * lam == pytest.approx(base, rel=1e-12)


def test_perron_T_select():
    q = 1e4
    th = thresholds_Q(q)
    assert perron_T_select(None, q, CFG, log_x=th.log_Q1).case == 1
    assert perron_T_select(None, q, CFG, log_x=th.log_Q1 * 1.01).case == 2
    assert perron_T_select(None, q, CFG, log_x=th.log_Q2 * 1.01).case == 3
    grid = np.geomspace(3, th.log_Q2 * 10, 500)
    cases = [perron_T_select(None, q, CFG, log_x=float(lx)).case for lx in grid]
    assert cases == sorted(cases)
    two = [perron_T_select(None, q, CFG, log_x=float(lx)).log_T for lx in np.linspace(th.log_Q1 * 1.01, th.log_Q2, 50)]
    assert all(b > a for a, b in zip(two, two[1:]))
    with pytest.raises(DomainError):
        perron_T_select(10.0, q, CFG)


def test_perron_wired_check_pin():
    chk = perron_wired_check(8, 1e3, CFG)
    # pinned on first run
    assert chk.passed is True
    assert chk.threshold == pytest.approx(0.07898556146085059, rel=1e-12)
    assert chk.min_vartheta == pytest.approx(0.1156505592668836, rel=1e-12)
    assert perron_wired_check(8, 1e3, CFG.replace(c_perron=1e-12)).passed


def test_perron_wired_refinement_never_flips_to_fail():
    for q, T in ((8, 1e3), (27, 1e5), (10**4, 1e8)):
        coarse = perron_wired_check(q, T, CFG, grid=1000)
        fine = perron_wired_check(q, T, CFG, grid=10000)
        if coarse.passed:
            assert fine.passed, fine.offending_log_t[:5]
