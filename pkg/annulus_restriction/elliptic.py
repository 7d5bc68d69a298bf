import enum
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from annulus_restriction.errors import DomainError, NonConvergent
from annulus_restriction.logspace import LogComplex, LogReal, expm1_complex, log1p_complex

logger = logging.getLogger(__name__)

SERIES_REL_TOL = 2.0**-60
MAX_SERIES_TERMS = 200
MAX_LOG_NOME = float(np.log(0.9))  # a nome above 0.9 is not worth summing
CROSSOVER_A = -np.pi / 4  # h == h' here
AGM_MAX_ITER = 64
# below this |a| the transformed nome exponent pi^2 / (4a) overflows a double
MIN_ABS_A = float(np.pi**2 / 4.0 / np.finfo(float).max)


class ThetaKind(enum.Enum):
    THETA1 = 1
    THETA2 = 2
    THETA3 = 3
    THETA0 = 0


class Branch(enum.Enum):
    DIRECT = "direct"
    TRANSFORMED = "transformed"


class RatioKind(enum.Enum):
    L_RATIO = "L-ratio"
    F_RATIO = "f-ratio"
    F_COMPLEMENT = "1-f-ratio"


@dataclass(frozen=True)
class AnnulusParams:
    """The annulus {q < |z| < 1} with q = e^a, and its two nomes.

    h = q^4 = exp(i pi tau) is the nome of the direct theta series, h' = exp(-i pi / tau) the nome
    after the modular substitution tau -> -1/tau.  tau = i * im_tau is purely imaginary.
    """

    a: float

    def __post_init__(self):
        if not np.isfinite(self.a) or not self.a < 0:
            raise DomainError(f"annulus log-radius must be a finite negative number, got a={self.a}")
        if -self.a <= MIN_ABS_A:
            raise DomainError(f"a={self.a} is too close to 0: the transformed nome exponent is not a finite double")

    @property
    def q(self) -> float:
        return float(np.exp(self.a))

    @property
    def log_h(self) -> float:
        return 4.0 * self.a

    @property
    def log_hp(self) -> float:
        return np.pi**2 / (4.0 * self.a)

    @property
    def im_tau(self) -> float:
        return 4.0 * abs(self.a) / np.pi

    @property
    def preferred_branch(self) -> Branch:
        return Branch.DIRECT if self.a <= CROSSOVER_A else Branch.TRANSFORMED

    def log_nome(self, branch: Branch) -> float:
        return self.log_h if branch == Branch.DIRECT else self.log_hp

    def check_branch(self, branch: Branch) -> None:
        log_nome = self.log_nome(branch)
        if log_nome >= MAX_LOG_NOME:
            raise DomainError(
                f"{branch.value} nome exp({log_nome:.6g}) is too close to 1 for a={self.a}; "
                f"use the {'transformed' if branch == Branch.DIRECT else 'direct'} branch"
            )


def theta_series(
    kind: ThetaKind,
    v: complex,
    log_nome: float,
    rel_tol: float = SERIES_REL_TOL,
    max_terms: int = MAX_SERIES_TERMS,
) -> complex:
    """
    Jacobi theta function in the sin/cos series form with argument pi*v:

        theta1(v) = 2 sum (-1)^n h^((n+1/2)^2) sin((2n+1) pi v)
        theta2(v) = 2 sum h^((n+1/2)^2) cos((2n+1) pi v)
        theta3(v) = 1 + 2 sum_{n>=1} h^(n^2) cos(2n pi v)
        theta0(v) = 1 + 2 sum_{n>=1} (-1)^n h^(n^2) cos(2n pi v)

    with h = exp(log_nome).  Summation stops once the bound on the current term falls below
    rel_tol of the partial sum while the bounds are decreasing.
    """
    if not log_nome < 0:
        raise DomainError(f"theta nome must lie in (0, 1), got log_nome={log_nome}")
    v = complex(v)
    growth = np.pi * abs(v.imag)
    half_integer = kind in (ThetaKind.THETA1, ThetaKind.THETA2)
    alternating = kind in (ThetaKind.THETA1, ThetaKind.THETA0)

    total = 0j if half_integer else 1.0 + 0j
    leading = None
    previous = np.inf
    start = 0 if half_integer else 1
    for count, n in enumerate(range(start, start + max_terms), start=1):
        power = (n + 0.5) ** 2 if half_integer else float(n * n)
        freq = 2 * n + 1 if half_integer else 2 * n
        phase = 1j * np.pi * freq * v
        up = np.exp(power * log_nome + phase)
        down = np.exp(power * log_nome - phase)
        if kind == ThetaKind.THETA1:
            term = (up - down) / 1j  # 2 sin
        else:
            term = up + down  # 2 cos
        if alternating and n % 2:
            term = -term
        total += term

        envelope = 2.0 * np.exp(power * log_nome + freq * growth)
        if leading is None:
            leading = envelope
        if envelope < previous and envelope <= rel_tol * max(abs(total), rel_tol * leading):
            return complex(total)
        previous = envelope

    raise NonConvergent(f"{kind.name} series did not converge in {max_terms} terms (log_nome={log_nome}, v={v})")


def transformed_argument(params: AnnulusParams, v: complex) -> complex:
    """log X with X = exp(2 i pi v / tau), the variable of the transformed product."""
    return 2.0 * np.pi * complex(v) / params.im_tau


def nome_product_log(
    log_x: complex, log_nome: float, rel_tol: float = SERIES_REL_TOL, max_terms: int = MAX_SERIES_TERMS
) -> complex:
    """
    log of prod_n (1 - Q^2n X)(1 - Q^2n / X) / ((1 + Q^2n X)(1 + Q^2n / X)), Q = exp(log_nome).

    This is the infinite-product part of i theta1 / theta2; every factor is formed with log1p so the
    product stays exact when it is 1 + O(Q).
    """
    total = 0j
    for n in range(1, max_terms + 1):
        shift = 2.0 * n * log_nome
        up = complex(np.exp(shift + log_x))
        down = complex(np.exp(shift - log_x))
        total += log1p_complex(-up) + log1p_complex(-down) - log1p_complex(up) - log1p_complex(down)
        if abs(up) + abs(down) < rel_tol:
            return total
    raise NonConvergent(f"nome product did not converge in {max_terms} factors (log_x={log_x})")


def mobius_unit(log_x: complex) -> complex:
    """(X - 1) / (X + 1) from log X, without forming a huge or tiny X."""
    if log_x.real > 0:
        inv = complex(np.exp(-log_x))
        return (1.0 - inv) / (1.0 + inv)
    x = complex(np.exp(log_x))
    return (x - 1.0) / (x + 1.0)


def _reduce_period(v: complex) -> Tuple[complex, int]:
    # theta1 / theta0 changes sign under v -> v + 1
    shift = int(round(v.real))
    return v - shift, -1 if shift % 2 else 1


def theta_ratio_transformed(params: AnnulusParams, which: RatioKind, v: complex = 0j) -> LogComplex:
    """
    Theta quotients through the modular substitution tau -> -1/tau.

    L-ratio: theta2(0|tau) / theta3(0|tau) = theta0(0|-1/tau) / theta3(0|-1/tau).
    f-ratio: theta1(v|tau) / theta0(v|tau) = i theta1(v/tau|-1/tau) / theta2(v/tau|-1/tau)
             = (X - 1)/(X + 1) * prod(...), X = exp(2 i pi v / tau).
    1-f-ratio: 1 - theta1(v|tau) / theta0(v|tau) = (X (1 - P) + (1 + P)) / (X + 1) with P = prod(...), so the
             value stays accurate where the f-ratio is 1 to within rounding.
    """
    params.check_branch(Branch.TRANSFORMED)
    if which == RatioKind.L_RATIO:
        num = theta_series(ThetaKind.THETA0, 0.0, params.log_hp)
        den = theta_series(ThetaKind.THETA3, 0.0, params.log_hp)
        return LogComplex.of(num.real / den.real)

    reduced, sign = _reduce_period(complex(v))
    log_x = transformed_argument(params, reduced)
    log_prod = nome_product_log(log_x, params.log_hp)
    ratio = LogComplex.of(mobius_unit(log_x)) * LogComplex.from_log(log_prod)
    if which == RatioKind.F_RATIO:
        return ratio if sign > 0 else -ratio

    if sign < 0:
        return ratio + 1.0
    big_x = LogComplex.from_log(log_x)
    one_minus_prod = LogComplex.of(-expm1_complex(log_prod))
    one_plus_prod = LogComplex.of(1.0 + complex(np.exp(log_prod)))
    return (big_x * one_minus_prod + one_plus_prod) / (big_x + 1.0)


def _theta3_zero_log(params: AnnulusParams, branch: Branch) -> float:
    return float(np.log(theta_series(ThetaKind.THETA3, 0.0, params.log_nome(branch)).real))


def complete_elliptic_K(params: AnnulusParams, branch: Optional[Branch] = None) -> LogReal:
    """
    K = (pi/2) theta3(0|tau)^2.  On the transformed branch theta3(0|tau) = theta3(0|-1/tau) / sqrt(im_tau),
    which is what keeps K accurate as a -> 0- where it grows like pi^2 / (8|a|).
    """
    branch = branch or params.preferred_branch
    params.check_branch(branch)
    log_k = np.log(np.pi / 2) + 2.0 * _theta3_zero_log(params, branch)
    if branch == Branch.TRANSFORMED:
        log_k -= np.log(params.im_tau)
    return LogReal(float(log_k))


def complete_elliptic_K_prime(params: AnnulusParams, branch: Optional[Branch] = None) -> LogReal:
    """K' from h = exp(-pi K'/K), i.e. K' = im_tau * K."""
    return complete_elliptic_K(params, branch) * params.im_tau


def agm(x: float, y: float) -> float:
    for _ in range(AGM_MAX_ITER):
        if abs(x - y) <= 4 * np.finfo(float).eps * x:
            return float(x)
        x, y = 0.5 * (x + y), float(np.sqrt(x * y))
    raise NonConvergent(f"AGM did not settle after {AGM_MAX_ITER} iterations")


def agm_elliptic_K(k: float, k_prime: Optional[float] = None) -> Tuple[float, float]:
    """
    (K(k), K'(k)) by the arithmetic-geometric mean, K = pi / (2 agm(1, k')).  Pass k_prime when
    k is close to 1 and the complementary modulus is known more accurately than sqrt(1 - k^2).
    """
    if not 0 < k < 1:
        raise DomainError(f"elliptic modulus must lie in (0, 1), got {k}")
    if k_prime is None:
        k_prime = float(np.sqrt((1.0 - k) * (1.0 + k)))
    return np.pi / (2.0 * agm(1.0, k_prime)), np.pi / (2.0 * agm(1.0, k))
