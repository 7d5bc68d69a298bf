import math

import numpy as np
import pytest

from annulus_restriction.elliptic import (
    AnnulusParams,
    Branch,
    RatioKind,
    ThetaKind,
    agm_elliptic_K,
    complete_elliptic_K,
    complete_elliptic_K_prime,
    theta_ratio_transformed,
    theta_series,
)
from annulus_restriction.errors import DomainError, NonConvergent
from annulus_restriction.oracle import elliptic_K_oracle, theta_oracle

SELF_DUAL = -np.pi / 4


@pytest.mark.parametrize("a", [0.0, 0.5, float("nan"), float("-inf"), -1e-310, -5e-324])
def test_params_reject_bad_a(a):
    with pytest.raises(DomainError):
        AnnulusParams(a)


@pytest.mark.parametrize("a", [-3.0, -1.0, SELF_DUAL, -0.2, -0.01])
def test_params_nome_relation(a):
    params = AnnulusParams(a)
    assert 0 < params.q < 1
    assert params.log_h < 0 and params.log_hp < 0
    assert params.log_h * params.log_hp == pytest.approx(np.pi**2, rel=4 * np.finfo(float).eps)
    assert params.im_tau == pytest.approx(-params.log_h / np.pi)


def test_params_crossover():
    params = AnnulusParams(SELF_DUAL)
    assert params.log_h == pytest.approx(params.log_hp, rel=1e-15)
    assert params.preferred_branch == Branch.DIRECT
    assert AnnulusParams(-0.7).preferred_branch == Branch.TRANSFORMED


def test_branch_validity():
    with pytest.raises(DomainError):
        AnnulusParams(-0.01).check_branch(Branch.DIRECT)
    with pytest.raises(DomainError):
        AnnulusParams(-30.0).check_branch(Branch.TRANSFORMED)
    AnnulusParams(-0.3).check_branch(Branch.DIRECT)


@pytest.mark.parametrize("log_nome", [-np.pi, -0.5, -20.0])
def test_theta1_vanishes_at_zero(log_nome):
    assert theta_series(ThetaKind.THETA1, 0.0, log_nome) == 0


def test_theta3_against_high_precision():
    value = theta_series(ThetaKind.THETA3, 0.0, -np.pi)
    assert value.real == pytest.approx(theta_oracle(ThetaKind.THETA3, 0.0, -np.pi).real, rel=1e-14)
    assert value.real == pytest.approx(1 + 2 * math.exp(-np.pi) + 2 * math.exp(-4 * np.pi), rel=1e-10)


@pytest.mark.parametrize("kind", list(ThetaKind))
@pytest.mark.parametrize("v", [0.3 + 0.1j, -0.7 + 0.05j, 0.25])
def test_theta_against_high_precision(kind, v):
    value = theta_series(kind, v, -2.0)
    reference = theta_oracle(kind, v, -2.0)
    assert abs(value - reference) <= 1e-13 * abs(reference)


@pytest.mark.parametrize("log_nome", np.linspace(-8 * np.pi, -np.pi, 8))
def test_jacobi_identity(log_nome):
    theta2 = theta_series(ThetaKind.THETA2, 0.0, log_nome).real
    theta0 = theta_series(ThetaKind.THETA0, 0.0, log_nome).real
    theta3 = theta_series(ThetaKind.THETA3, 0.0, log_nome).real
    assert theta2**4 + theta0**4 == pytest.approx(theta3**4, rel=1e-12)


def test_theta_parity():
    rng = np.random.default_rng(1234)
    points = rng.uniform(-1, 1, 20) + 1j * rng.uniform(-0.3, 0.3, 20)
    for v in points:
        for kind in ThetaKind:
            plus = theta_series(kind, v, -1.5)
            minus = theta_series(kind, -v, -1.5)
            expected = -plus if kind == ThetaKind.THETA1 else plus
            assert abs(minus - expected) <= 1e-13 * max(1.0, abs(plus))


def test_theta_series_errors():
    with pytest.raises(DomainError):
        theta_series(ThetaKind.THETA3, 0.0, 0.0)
    with pytest.raises(NonConvergent):
        theta_series(ThetaKind.THETA3, 0.0, -0.1, max_terms=1)


def test_transformed_L_ratio_at_self_dual_point():
    ratio = theta_ratio_transformed(AnnulusParams(SELF_DUAL), RatioKind.L_RATIO)
    assert ratio.value.real == pytest.approx(2**-0.25, rel=1e-12)


@pytest.mark.parametrize("a", [-0.1, -0.5])
def test_transformed_f_ratio_fixes_i(a):
    v = -1j * a / np.pi  # z1 = i, x = pi
    assert abs(theta_ratio_transformed(AnnulusParams(a), RatioKind.F_RATIO, v).value - 1j) < 1e-12


def test_transformed_f_ratio_first_order_term():
    a, x = -0.1, np.pi / 2
    v = 0.5 - x / (2 * np.pi) - 1j * a / np.pi
    params = AnnulusParams(a)
    value = theta_ratio_transformed(params, RatioKind.F_RATIO, v).value
    assert abs(1 - value) == pytest.approx(2 * math.exp(np.pi / (4 * a) * (np.pi - x)), rel=1e-4)

    direct = theta_series(ThetaKind.THETA1, v, params.log_h) / theta_series(ThetaKind.THETA0, v, params.log_h)
    assert abs(direct - value) < 1e-12


@pytest.mark.parametrize("a", [-0.5, -0.1, -0.03])
def test_transformed_f_complement(a):
    params = AnnulusParams(a)
    v = 0.5 - 1.0 / (2 * np.pi) - 1j * a / np.pi  # z1 = e^{i/2}
    complement = theta_ratio_transformed(params, RatioKind.F_COMPLEMENT, v)
    value = theta_ratio_transformed(params, RatioKind.F_RATIO, v).value
    if a < -0.3:
        assert complement.value == pytest.approx(1 - value, rel=1e-9)
    else:
        assert complement.log_abs == pytest.approx(np.log(2) + np.pi / (4 * a) * (np.pi - 1.0), abs=1e-3)

    shifted = theta_ratio_transformed(params, RatioKind.F_COMPLEMENT, v + 1)
    assert shifted.value == pytest.approx(1 + value, rel=1e-12)


def test_transformed_ratio_outside_validity():
    with pytest.raises(DomainError):
        theta_ratio_transformed(AnnulusParams(-30.0), RatioKind.L_RATIO)


def test_K_self_dual():
    params = AnnulusParams(SELF_DUAL)
    K, K_prime = agm_elliptic_K(2**-0.5)
    assert K_prime / K == pytest.approx(1.0, rel=1e-10)
    assert complete_elliptic_K(params).value == pytest.approx(K, rel=1e-12)
    assert complete_elliptic_K(params, Branch.TRANSFORMED).value == pytest.approx(K, rel=1e-12)
    assert complete_elliptic_K_prime(params).value == pytest.approx(K_prime, rel=1e-12)


def test_K_degenerate_modulus():
    assert complete_elliptic_K(AnnulusParams(-20.0)).value == pytest.approx(np.pi / 2, rel=1e-15)


@pytest.mark.parametrize("a", [-3.0, -1.0, -0.5, -np.pi / 8])
def test_K_against_agm_and_mpmath(a):
    from annulus_restriction.confmap import compute_L

    data = compute_L(AnnulusParams(a))
    k_prime = math.sqrt(data.one_minus_L.value * (1 + data.L) * (1 + data.L**2))
    K_agm, K_prime_agm = agm_elliptic_K(data.modulus, k_prime)
    assert data.K.value == pytest.approx(K_agm, rel=1e-12)
    assert data.K_prime.value == pytest.approx(K_prime_agm, rel=1e-10)
    assert data.K.value == pytest.approx(elliptic_K_oracle(data.modulus), rel=1e-12)


def test_K_small_a_growth():
    a = -0.01
    assert complete_elliptic_K(AnnulusParams(a)).value == pytest.approx(np.pi**2 / (8 * abs(a)), rel=1e-12)


def test_agm_rejects_bad_modulus():
    with pytest.raises(DomainError):
        agm_elliptic_K(1.0)


def test_tiny_a_keeps_a_finite_transformed_nome():
    params = AnnulusParams(-1e-300)
    assert np.isfinite(params.log_hp)
