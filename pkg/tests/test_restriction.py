import math

import mock
import mpmath
import numpy as np
import pytest

from annulus_restriction import restriction
from annulus_restriction.confmap import compute_L, endpoints
from annulus_restriction.elliptic import AnnulusParams
from annulus_restriction.errors import DomainError, ExpansionDomain
from annulus_restriction.logspace import LogReal, signed_logsumexp
from annulus_restriction.oracle import cross_overlap_points, cross_term_oracle
from annulus_restriction.restriction import (
    F_bounds,
    RestrictionExponent,
    avoid_ray,
    avoid_segment,
    change_prefactor,
    cross_term,
    decomposition_upper,
    hit_both_slits,
    hit_slit_pair,
)


def setup(a, x):
    data = compute_L(AnnulusParams(a))
    return data, endpoints(data.params, x, data)


def u_for_s1(data, s1):
    log_r = 2.0 * (data.one_minus_L.log - math.log1p(data.L))
    return LogReal(0.5 * (math.log(s1) - log_r), -1)


def relative_to_oracle(value, reference):
    return abs(math.exp(value.log - float(mpmath.log(reference))) - 1.0)


def test_avoid_segment_examples():
    assert avoid_segment(1.0, 0.0, 1.0).log == 0.0
    assert avoid_segment(1.0, 1.0, 5 / 8).value == pytest.approx(2**-1.25, rel=1e-12)
    assert avoid_segment(1000.0, 1.0, 1.0).value == pytest.approx(1 - 2e-6, abs=1e-11)
    assert avoid_segment(LogReal(-800.0, -1), LogReal(-800.0), 1.0).value == pytest.approx(0.25)


@pytest.mark.parametrize("c, d, b", [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0)])
def test_avoid_segment_rejects(c, d, b):
    with pytest.raises(DomainError):
        avoid_segment(c, d, b)


def test_avoid_segment_monotone():
    values = [avoid_segment(1.0, d, 5 / 8).log for d in (0.1, 0.5, 1.0, 3.0)]
    assert values == sorted(values, reverse=True)
    values = [avoid_segment(1.0, 0.7, b).log for b in (5 / 8, 1.0, 2.0)]
    assert values == sorted(values, reverse=True)


def test_avoid_ray():
    assert avoid_ray(1.0, math.inf, 1.0).log == 0.0
    assert avoid_ray(1.0, 1.0, 5 / 8).value == pytest.approx(2**-1.25, rel=1e-12)
    assert avoid_ray(2.0, 3.0, 0.7).log == pytest.approx(avoid_segment(0.5, 1 / 3, 0.7).log, rel=1e-14)
    c, s = LogReal(30.0, -1), LogReal(-12.0)
    assert avoid_ray(c, s, 1.3) == avoid_segment(c.reciprocal(), s.reciprocal(), 1.3)


def test_restriction_exponent():
    assert RestrictionExponent(5 / 8).b == 0.625
    with pytest.raises(DomainError):
        RestrictionExponent(0.6)
    with pytest.raises(DomainError):
        F_bounds(-1.0, 0.6, 1.0)


@pytest.mark.parametrize("b", [5 / 8, 1.0, 2.0])
def test_cross_term_leading_order(b):
    data, ep = setup(-0.05, np.pi / 2)
    cross = hit_both_slits(ep, data, b)
    assert cross.sign == 1
    assert cross.log - 4 * data.one_minus_L.log == pytest.approx(math.log(b * (2 * b - 1) / 8), abs=0.01)


def test_cross_term_needs_b_above_half():
    data, ep = setup(-0.5, 1.0)
    with pytest.raises(DomainError):
        cross_term(data.one_minus_L, ep.u, 0.5)


@pytest.mark.parametrize("one_minus_L, u, b", cross_overlap_points())
def test_cross_term_series_against_high_precision(one_minus_L, u, b):
    assert relative_to_oracle(cross_term(one_minus_L, u, b), cross_term_oracle(one_minus_L, u, b)) < 1e-8


@pytest.mark.parametrize("b", [5 / 8, 1.0])
def test_cross_term_closed_form_against_high_precision(b):
    data, ep = setup(-0.8, np.pi / 2)
    value = hit_both_slits(ep, data, b)
    assert relative_to_oracle(value, cross_term_oracle(data.one_minus_L, ep.u, b)) < 1e-8


def test_cross_term_band_agreement():
    data = compute_L(AnnulusParams(-0.3))
    u = u_for_s1(data, 0.1)
    value = cross_term(data.one_minus_L, u, 5 / 8)
    assert relative_to_oracle(value, cross_term_oracle(data.one_minus_L, u, 5 / 8)) < 1e-8


def test_cross_term_band_disagreement_raises():
    data = compute_L(AnnulusParams(-0.3))
    u = u_for_s1(data, 0.1)
    with mock.patch.object(restriction, "_cross_series", return_value=123.0):
        with pytest.raises(ExpansionDomain):
            cross_term(data.one_minus_L, u, 5 / 8)


def test_cross_term_unsettled_series_falls_back(caplog):
    data = compute_L(AnnulusParams(-0.3))
    u = u_for_s1(data, 1e-3)
    expected = cross_term(data.one_minus_L, u, 5 / 8)
    with mock.patch.object(restriction, "_cross_series", return_value=None):
        value = cross_term(data.one_minus_L, u, 5 / 8)
    assert value.log == pytest.approx(expected.log, abs=1e-10)
    assert "did not settle" in caplog.text


@pytest.mark.parametrize("a, x", [(-1.0, 2.0), (-0.5, 1.0), (-2.0, 0.5)])
def test_hit_slit_pair_closed_form(a, x):
    data, ep = setup(a, x)
    b = 0.8
    sin_sq = math.sin(np.angle(ep.w1)) ** 2
    big_q = (data.p**2 - 1 + sin_sq) / (data.p * sin_sq)
    value = hit_slit_pair(ep, data, b)
    assert 0 < value.value < 1
    assert value.value == pytest.approx(1 - big_q ** (-2 * b), rel=1e-9)


def test_hit_slit_pair_dominates_cross_term():
    data, ep = setup(-0.5, 2.0)
    assert hit_both_slits(ep, data, 1.0).log < hit_slit_pair(ep, data, 1.0).log


@pytest.mark.parametrize("a", np.linspace(-2.0, -0.05, 10))
@pytest.mark.parametrize("b", [5 / 8, 0.8, 1.0, 1.2])
@pytest.mark.parametrize("x", [0.3, 1.0, 2.0, 2.8, np.pi])
def test_lower_below_upper(a, b, x):
    pair = F_bounds(float(a), b, x)
    assert pair.log_lower <= pair.log_upper + 1e-12
    assert pair.log_upper <= 0.0
    assert pair.terms["cross"].sign == 1


def test_bound_breakdown():
    pair = F_bounds(-0.3, 0.9, 2.0)
    terms = pair.terms
    assert set(terms) == {"T1", "T2", "T2'", "cross", "prefactor", "upper_raw"}
    assert terms["T2'"] == terms["T2"]
    assert terms["upper_raw"].log == pytest.approx(
        signed_logsumexp([terms["T1"], terms["T2'"], terms["cross"]]).log + terms["prefactor"].log
    )
    assert pair.log_lower == pytest.approx(signed_logsumexp([terms["T1"], terms["T2"]]).log + terms["prefactor"].log)
    assert pair.gap == pytest.approx(pair.log_upper - pair.log_lower)


def test_lower_bound_constant():
    a, b = -0.2, 5 / 8
    pair = F_bounds(a, b, np.pi)
    assert abs(pair.log_lower - b * np.pi**2 / a) < 6


def test_symmetric_endpoints_give_equal_terms():
    pair = F_bounds(-0.4, 1.0, np.pi)
    assert pair.terms["T1"].log == pytest.approx(pair.terms["T2"].log)


@pytest.mark.parametrize("x", [1.0, np.pi / 2, 2.0])
def test_second_term_negligible(x):
    pair = F_bounds(-0.1, 5 / 8, x)
    assert pair.terms["T2"].log - pair.terms["T1"].log < -15


def test_angle_folding():
    assert F_bounds(-0.5, 1.0, 2 * np.pi - 1.0).log_lower == pytest.approx(F_bounds(-0.5, 1.0, 1.0).log_lower)
    with pytest.raises(DomainError):
        F_bounds(-0.5, 1.0, 0.0)


def test_bounds_merge_near_zero():
    assert F_bounds(-0.05, 5 / 8, np.pi / 2).gap < 0.2


@pytest.mark.parametrize("a", [-2.0, -1.0, -0.5, -0.2, -0.1, -0.05])
def test_prefactor_stays_moderate(a):
    data, ep = setup(a, np.pi / 2)
    assert abs(change_prefactor(ep, ep.z1, data, 5 / 8).log) < 5


@pytest.mark.parametrize("b, parts", [(5 / 4, 2), (2.0, 2), (2.5, 3)])
def test_decomposition_upper(b, parts):
    expected = parts * F_bounds(-0.3, b / parts, 1.5).log_upper
    assert decomposition_upper(-0.3, b, 1.5).log == pytest.approx(expected)


def test_decomposition_needs_large_b():
    with pytest.raises(DomainError):
        decomposition_upper(-0.3, 1.2, 1.5)


@pytest.mark.parametrize(
    "a, b, x", [(-0.05, 5 / 8, 0.3), (-0.02, 5 / 8, np.pi / 2), (-0.035, 1.0, np.pi / 2), (-0.05, 1.0, 1.0)]
)
def test_bounds_close_to_zero(a, b, x):
    pair = F_bounds(a, b, x)
    assert np.isfinite(pair.log_lower)
    assert pair.log_lower <= pair.log_upper + 1e-12
    assert pair.log_upper <= 0.0


def test_decomposition_bounds_lower_bound():
    rng = np.random.default_rng(58)
    for a, b, x in zip(rng.uniform(-2.0, -0.05, 50), rng.uniform(5 / 4, 3.0, 50), rng.uniform(0.1, np.pi, 50)):
        assert decomposition_upper(a, b, x).log >= F_bounds(a, b, x).log_lower - 1e-9, (a, b, x)
