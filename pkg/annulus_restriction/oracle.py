"""
High-precision reference values (mpmath) and the consistency suites behind ``--precision-check``.

Nothing in the main evaluation path imports this module; it exists to check the double-precision
code against independent evaluations.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Tuple

import mpmath
import numpy as np

from annulus_restriction.confmap import compute_L
from annulus_restriction.elliptic import (
    AnnulusParams,
    Branch,
    ThetaKind,
    agm_elliptic_K,
    theta_series,
)
from annulus_restriction.logspace import LogReal
from annulus_restriction.restriction import cross_term

logger = logging.getLogger(__name__)

DEFAULT_DPS = 60

_JTHETA_INDEX = {ThetaKind.THETA1: 1, ThetaKind.THETA2: 2, ThetaKind.THETA3: 3, ThetaKind.THETA0: 4}


def theta_oracle(kind: ThetaKind, v: complex, log_nome: float, dps: int = DEFAULT_DPS) -> complex:
    """theta(pi v) at nome exp(log_nome), in the series convention of elliptic.theta_series"""
    with mpmath.workdps(dps):
        nome = mpmath.exp(mpmath.mpf(log_nome))
        value = mpmath.jtheta(_JTHETA_INDEX[kind], mpmath.pi * mpmath.mpc(v), nome)
        return complex(value)


def one_minus_L_oracle(a: float, dps: int = DEFAULT_DPS) -> mpmath.mpf:
    """1 - L from the transformed nome, with enough guard digits for the subtraction theta3 - theta0."""
    log_hp = math.pi**2 / (4.0 * a)
    guard = int(abs(log_hp) / math.log(10)) + 10
    with mpmath.workdps(dps + guard):
        hp = mpmath.exp(mpmath.mpf(log_hp))
        theta3 = mpmath.jtheta(3, 0, hp)
        theta0 = mpmath.jtheta(4, 0, hp)
        result = (theta3 - theta0) / theta3
    return +result


def elliptic_K_oracle(k: float, dps: int = DEFAULT_DPS) -> float:
    """K(k); mpmath takes the parameter m = k^2."""
    with mpmath.workdps(dps):
        return float(mpmath.ellipk(mpmath.mpf(k) ** 2))


def cross_term_oracle(one_minus_L: LogReal, u: LogReal, b: float, dps: int = DEFAULT_DPS) -> mpmath.mpf:
    """
    The two-slit hitting probability summed term by term as written, i.e. with all the cancellation
    left in, at enough digits that the cancellation does not matter.
    """
    log_r2 = 4.0 * (one_minus_L.log - math.log1p(1.0 - one_minus_L.value))
    guard = int(abs(log_r2) / math.log(10)) + 10
    with mpmath.workdps(dps + guard):
        one_minus = mpmath.exp(mpmath.mpf(one_minus_L.log))
        L = 1 - one_minus
        u_sq = mpmath.exp(2 * mpmath.mpf(abs(u).log))
        r = (one_minus / (1 + L)) ** 2
        s1, s2 = r * u_sq, r / u_sq
        kappa = one_minus**4 / (8 * (L + L**3))
        q = 1 + s1 + s2 + kappa * (2 + s1 + s2)
        beta = 2 * mpmath.mpf(b)
        result = 1 - (1 + s2) ** (-beta) + 1 - (1 + s1) ** (-beta) - 1 + q ** (-beta)
    return +result


@dataclass(frozen=True)
class CheckResult:
    suite: str
    passed: bool
    worst: float
    tolerance: float
    points: int


def _relative(value: complex, reference: complex) -> float:
    return abs(value - reference) / abs(reference)


def _run(suite: str, tolerance: float, cases: Iterable[Tuple[complex, complex]]) -> CheckResult:
    errors = [_relative(value, reference) for value, reference in cases]
    worst = max(errors)
    result = CheckResult(suite=suite, passed=worst <= tolerance, worst=worst, tolerance=tolerance, points=len(errors))
    log = logger.info if result.passed else logger.warning
    log(f"{suite}: worst relative error {worst:.3g} over {len(errors)} points (tolerance {tolerance:g})")
    return result


def _jacobi_cases() -> Iterable[Tuple[complex, complex]]:
    for log_nome in np.linspace(-8.0 * np.pi, -np.pi, 8):
        theta2 = theta_series(ThetaKind.THETA2, 0.0, log_nome).real
        theta0 = theta_series(ThetaKind.THETA0, 0.0, log_nome).real
        theta3 = theta_series(ThetaKind.THETA3, 0.0, log_nome).real
        yield theta2**4 + theta0**4, theta3**4


def _branch_cases() -> Iterable[Tuple[complex, complex]]:
    for a in np.arange(-0.8, -0.25, 0.1):
        params = AnnulusParams(float(a))
        yield compute_L(params, Branch.DIRECT).L, compute_L(params, Branch.TRANSFORMED).L


def _agm_cases() -> Iterable[Tuple[complex, complex]]:
    for a in np.linspace(-3.0, -np.pi / 8, 9):
        data = compute_L(AnnulusParams(float(a)))
        k_prime = math.sqrt(data.one_minus_L.value * (1.0 + data.L) * (1.0 + data.L**2))
        yield data.K.value, agm_elliptic_K(data.modulus, k_prime)[0]


def _theta_oracle_cases(dps: int) -> Iterable[Tuple[complex, complex]]:
    for kind in ThetaKind:
        for v in (0.3 + 0.1j, 0.5 + 0.25j):
            for log_nome in (-np.pi, -4.0):
                value = theta_series(kind, v, log_nome)
                yield value, theta_oracle(kind, v, log_nome, dps)


def cross_overlap_points(count: int = 10, b: float = 5.0 / 8.0) -> List[Tuple[LogReal, LogReal, float]]:
    """(1 - L, u, b) triples with s1 = r u^2 log-spaced over [1e-6, 1e-2]"""
    data = compute_L(AnnulusParams(-0.3))
    L = data.L
    log_r = 2.0 * (data.one_minus_L.log - math.log1p(L))
    points = []
    for log_s1 in np.linspace(math.log(1e-6), math.log(1e-2), count):
        log_u = max(0.0, 0.5 * (log_s1 - log_r))
        points.append((data.one_minus_L, LogReal(log_u, -1), b))
    return points


def _cross_cases(dps: int) -> Iterable[Tuple[complex, complex]]:
    for one_minus_L, u, b in cross_overlap_points():
        value = cross_term(one_minus_L, u, b)
        reference = cross_term_oracle(one_minus_L, u, b, dps)
        # compare logs shifted to the reference scale so tiny probabilities stay representable
        yield math.exp(value.log - float(mpmath.log(reference))), 1.0


def precision_check(dps: int = DEFAULT_DPS) -> List[CheckResult]:
    suites: List[Tuple[str, float, Callable[[], Iterable[Tuple[complex, complex]]]]] = [
        ("jacobi_identity", 1e-12, _jacobi_cases),
        ("branch_consistency", 1e-10, _branch_cases),
        ("K_vs_agm", 1e-12, _agm_cases),
        ("theta_vs_mpmath", 1e-13, lambda: _theta_oracle_cases(dps)),
        ("cross_term_overlap", 1e-8, lambda: _cross_cases(dps)),
    ]
    return [_run(name, tolerance, cases()) for name, tolerance, cases in suites]

