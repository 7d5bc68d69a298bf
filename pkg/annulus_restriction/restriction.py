"""
Restriction-measure probabilities for the annulus problem and the lower/upper bounds on

    F(a, b, x) = P^b(hull from e^{ix} to 1 stays in {e^a < |z| < 1}).

Every probability here is returned as a LogReal because at small |a| they are far below the
smallest double.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import numpy as np
from scipy.special import binom

from annulus_restriction.confmap import (
    Endpoints,
    SlitMapData,
    compute_L,
    endpoints,
    fold_angle,
    map_f_prime_abs,
)
from annulus_restriction.elliptic import AnnulusParams, Branch
from annulus_restriction.errors import DomainError, ExpansionDomain
from annulus_restriction.logspace import LogReal, signed_logsumexp

logger = logging.getLogger(__name__)

MIN_EXPONENT = 5.0 / 8.0
MIN_DECOMPOSITION_EXPONENT = 5.0 / 4.0
EXPANSION_THRESHOLD = 1e-2
BAND_REL_TOL = 1e-6
SERIES_REL_TOL = 2.0**-60
MAX_SERIES_TERMS = 200
SMALL_T = 1e-8

Length = Union[float, LogReal]


@dataclass(frozen=True)
class RestrictionExponent:
    b: float

    def __post_init__(self):
        if not np.isfinite(self.b) or self.b < MIN_EXPONENT:
            raise DomainError(f"restriction measures exist for b >= 5/8, got b={self.b}")


@dataclass(frozen=True)
class BoundPair:
    """Lower and upper bounds on F(a, b, x), with the terms they were assembled from."""

    lower: LogReal
    upper: LogReal
    terms: Dict[str, LogReal] = field(default_factory=dict)

    @property
    def log_lower(self) -> float:
        return self.lower.log

    @property
    def log_upper(self) -> float:
        return self.upper.log

    @property
    def gap(self) -> float:
        return self.log_upper - self.log_lower


def _log_abs(value: Length) -> float:
    return LogReal.of(value).log


def _invert(value: Length) -> Length:
    if isinstance(value, LogReal):
        return value.reciprocal()
    return 1.0 / value


def avoid_segment(c: Length, d: Length, b: float) -> LogReal:
    """P^b_{H, c, -c}(hull misses i(0, d]) = [c^2 / (c^2 + d^2)]^{2b}"""
    c_log = _log_abs(c)
    if c_log == float("-inf"):
        raise DomainError("endpoint c must be non-zero")
    if LogReal.of(d).sign < 0 and not LogReal.of(d).is_zero:
        raise DomainError(f"segment height must be non-negative, got {d}")
    if not b > 0:
        raise DomainError(f"exponent must be positive, got b={b}")
    two_c, two_d = 2.0 * c_log, 2.0 * _log_abs(d)
    return LogReal(2.0 * b * (two_c - float(np.logaddexp(two_c, two_d))))


def avoid_ray(c: Length, s: Length, b: float) -> LogReal:
    """P^b_{H, c, -c}(hull misses i[s, oo)), by inversion z -> -1/z of avoid_segment."""
    return avoid_segment(_invert(c), _invert(s), b)


@dataclass(frozen=True)
class _CrossInputs:
    beta: float
    log_r2: float
    log_s1: float
    log_s2: float
    kappa: float
    kappa_tilde: float

    @property
    def s1(self) -> float:
        return float(np.exp(self.log_s1))

    @property
    def s2(self) -> float:
        return float(np.exp(self.log_s2))

    @property
    def sigma(self) -> float:
        return self.s1 + self.s2


def _cross_inputs(one_minus_L: LogReal, u: LogReal, b: float) -> _CrossInputs:
    L = 1.0 - one_minus_L.value
    log_r = 2.0 * (one_minus_L.log - math.log1p(L))
    log_u = abs(u).log
    # kappa = (1 - L)^4 / (8 (L + L^3)) and kappa / r^2 = 1 + kappa
    kappa = float(np.exp(4.0 * one_minus_L.log - np.log(8.0 * L * (1.0 + L * L))))
    return _CrossInputs(
        beta=2.0 * b,
        log_r2=2.0 * log_r,
        log_s1=log_r + 2.0 * log_u,
        log_s2=log_r - 2.0 * log_u,
        kappa=kappa,
        kappa_tilde=1.0 + kappa,
    )


def _rho(t: float, beta: float) -> float:
    # (1 - (1 + t)^{-beta}) / t
    if t < SMALL_T:
        return beta * (1.0 - 0.5 * (beta + 1.0) * t)
    return float(-np.expm1(-beta * np.log1p(t)) / t)


def _cross_closed_form(inp: _CrossInputs) -> float:
    """
    1 - (1+s1)^-B - (1+s2)^-B + Q^-B, divided by r^2, with Q = (1+s1)(1+s2)(1+eta):

        rho(s1) rho(s2) - (1+s1)^-B (1+s2)^-B eta~ rho(eta),   eta = r^2 eta~.
    """
    s1, s2 = inp.s1, inp.s2
    log_both = np.log1p(s1) + np.log1p(s2)
    eta_tilde = float((1.0 + 2.0 * inp.kappa + inp.kappa_tilde * inp.sigma) * np.exp(-log_both))
    eta = float(np.exp(inp.log_r2) * eta_tilde)
    return _rho(s1, inp.beta) * _rho(s2, inp.beta) - float(np.exp(-inp.beta * log_both)) * eta_tilde * _rho(
        eta, inp.beta
    )


def _cross_series(inp: _CrossInputs) -> Optional[float]:
    """
    Binomial series of the same bracket in T = Q - 1, with the s1^k + s2^k parts cancelled
    symbolically.  Returns None when the series does not settle.
    """
    log_sigma = float(np.log(inp.sigma))
    log_rho = float(np.log(inp.kappa_tilde * (2.0 + inp.sigma)))
    coef = inp.beta  # -(binomial coefficient of t^k in (1 + t)^{-beta})
    total = 0.0
    for k in range(1, MAX_SERIES_TERMS + 1):
        logs = [
            math.log(binom(k, j)) + (2 * j - k) * inp.log_s1 + (k - j - 1) * inp.log_r2 for j in range(1, k)
        ]
        logs += [
            math.log(binom(k, j)) + (k - j) * log_sigma + j * log_rho + (j - 1) * inp.log_r2
            for j in range(1, k + 1)
        ]
        term = -coef * float(np.exp(np.logaddexp.reduce(logs)))
        total += term
        if k > 1 and abs(term) <= SERIES_REL_TOL * abs(total):
            return total
        coef = -coef * (inp.beta + k) / (k + 1)
    return None


def cross_term(
    one_minus_L: LogReal,
    u: LogReal,
    b: float,
    threshold: float = EXPANSION_THRESHOLD,
    band_rel_tol: float = BAND_REL_TOL,
) -> LogReal:
    """
    P^b_{H,u,-u}(hull meets both i(0, (1-L)/(1+L)) and i((1+L)/(1-L), oo)).  The four probabilities
    it is built from cancel down to ~ b(2b-1)(1-L)^4/8, so the result is formed as r^2 times a bracket
    of order one, r = ((1-L)/(1+L))^2.
    """
    if not b > 0.5:
        raise DomainError(f"the two-slit event needs b > 1/2, got b={b}")
    inp = _cross_inputs(one_minus_L, u, b)
    s1 = inp.s1

    if s1 <= threshold:
        bracket = _cross_series(inp)
        if bracket is None:
            logger.warning(f"cross-term series did not settle at s1={s1:.3g}, using the closed form")
            bracket = _cross_closed_form(inp)
    else:
        bracket = _cross_closed_form(inp)
        if s1 < 1.0:
            series = _cross_series(inp)
            if series is None:
                logger.warning(f"cross-term series did not settle at s1={s1:.3g}, band check skipped")
            elif abs(series - bracket) > band_rel_tol * abs(bracket):
                raise ExpansionDomain(
                    f"cross-term evaluators disagree at s1={s1:.6g}: series {series!r} vs closed form {bracket!r}"
                )
        logger.debug(f"cross term closed form at s1={s1:.3g}")

    result = LogReal.of(bracket)
    return LogReal(inp.log_r2 + result.log, result.sign)


def hit_both_slits(ep: Endpoints, data: SlitMapData, b: float) -> LogReal:
    return cross_term(data.one_minus_L, ep.u, b)


def hit_slit_pair(ep: Endpoints, data: SlitMapData, b: float) -> LogReal:
    """
    P^b_{U, w1, w2}(hull meets (-1, -L] or [L, 1)) = 1 - Q^{-2b} with

        Q = (p^2 - 1 + sin^2 phi) / (p sin^2 phi) = 1 + s1 + s2 + kappa (2 + s1 + s2).
    """
    inp = _cross_inputs(data.one_minus_L, ep.u, b)
    log_q = np.log1p(inp.sigma + inp.kappa * (2.0 + inp.sigma))
    return LogReal.of(-np.expm1(-inp.beta * log_q))


def change_prefactor(ep: Endpoints, z1: complex, data: SlitMapData, b: float) -> LogReal:
    """|f'(z1)(z1 - z2) / (w1 - w2)|^{2b}"""
    log_fprime = map_f_prime_abs(z1, data).log
    return LogReal(2.0 * b * (log_fprime + ep.log_chord - ep.log_image_chord))


def F_bounds(a: float, b: float, x: float, branch: Optional[Branch] = None) -> BoundPair:
    exponent = RestrictionExponent(b)
    params = AnnulusParams(a)
    x = fold_angle(x)
    data = compute_L(params, branch)
    ep = endpoints(params, x, data)
    slit = data.slit_ratio
    b = exponent.b

    t1 = avoid_segment(ep.u, slit, b)
    t2 = avoid_segment(ep.u.reciprocal(), slit, b)
    # hull from u to -u missing the ray i[(1-L)/(1+L), oo); equal to t2 by inversion
    t2_ray = avoid_ray(ep.u, slit.reciprocal(), b)
    cross = hit_both_slits(ep, data, b)
    prefactor = change_prefactor(ep, ep.z1, data, b)

    lower = signed_logsumexp([t1, t2]) * prefactor
    upper_raw = signed_logsumexp([t1, t2_ray, cross]) * prefactor
    upper = upper_raw if upper_raw.log <= 0.0 else LogReal.one()
    if lower.log > 0.0:
        logger.warning(f"lower bound exceeds 1 at a={a}, b={b}, x={x}: log_lower={lower.log!r}")

    terms = {
        "T1": t1,
        "T2": t2,
        "T2'": t2_ray,
        "cross": cross,
        "prefactor": prefactor,
        "upper_raw": upper_raw,
    }
    return BoundPair(lower=lower, upper=upper, terms=terms)


def decomposition_upper(a: float, b: float, x: float, branch: Optional[Branch] = None) -> LogReal:
    """Upper bound from splitting b into n = ceil(b) equal exponents in [5/8, 1]."""
    if not b >= MIN_DECOMPOSITION_EXPONENT:
        raise DomainError(f"decomposition bound needs b >= 5/4, got b={b}")
    n = math.ceil(b)
    part = F_bounds(a, b / n, x, branch)
    return LogReal(n * part.log_upper)
