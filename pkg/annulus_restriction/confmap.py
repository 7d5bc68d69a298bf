import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from annulus_restriction.elliptic import (
    MAX_SERIES_TERMS,
    AnnulusParams,
    Branch,
    RatioKind,
    ThetaKind,
    complete_elliptic_K,
    theta_ratio_transformed,
    theta_series,
)
from annulus_restriction.errors import DomainError, NonConvergent, SlitTipSingularity
from annulus_restriction.logspace import LogComplex, LogReal, wrap_angle

logger = logging.getLogger(__name__)

SLIT_TIP_TOL = 1e-12
RADIUS_TOL = 1e-12
REAL_U_TOL = 1e-9
TANGENT_STEP = 1e-7


@dataclass(frozen=True)
class SlitMapData:
    """
    Everything the annulus -> slit disk map needs: the slit half-length L, the complete integral K and
    the nome branch used to compute them.  one_minus_L is authoritative whenever 1 - L < 1e-15.
    """

    params: AnnulusParams
    branch: Branch
    L: float
    one_minus_L: LogReal
    K: LogReal

    @property
    def p(self) -> float:
        return 0.5 * (self.L + 1.0 / self.L)

    @property
    def p_minus_1(self) -> LogReal:
        return self.one_minus_L**2 / (2.0 * self.L)

    @property
    def slit_ratio(self) -> LogReal:
        """(1 + L) / (1 - L), the outer end of the slit images on the imaginary axis."""
        return LogReal.of(1.0 + self.L) / self.one_minus_L

    @property
    def modulus(self) -> float:
        return self.L**2

    @property
    def K_prime(self) -> LogReal:
        return self.K * self.params.im_tau


@dataclass(frozen=True)
class Endpoints:
    """Images of the symmetric boundary pair z1 = e^{ix/2}, z2 = conj(z1)."""

    x: float
    v: complex
    one_minus_w1: LogComplex
    u: LogReal

    @property
    def z1(self) -> complex:
        return complex(np.exp(0.5j * self.x))

    @property
    def z2(self) -> complex:
        return self.z1.conjugate()

    @property
    def w1(self) -> complex:
        return 1.0 - self.one_minus_w1.value

    @property
    def log_chord(self) -> float:
        """log |z1 - z2|"""
        return float(np.log(2.0 * np.sin(0.5 * self.x)))

    @property
    def log_image_chord(self) -> float:
        """log |w1 - w2| = log 2|Im(1 - w1)|"""
        return float(np.log(2.0)) + self.one_minus_w1.imag.log


def _odd_nome_sum_log(log_nome: float, rel_tol: float = 2.0**-60) -> float:
    # log sum_{n odd} Q^{n^2}
    logs = []
    for k in range(MAX_SERIES_TERMS):
        n = 2 * k + 1
        logs.append(n * n * log_nome)
        if logs[-1] - logs[0] < np.log(rel_tol):
            return float(np.logaddexp.reduce(logs))
    raise NonConvergent(f"odd nome sum did not settle in {MAX_SERIES_TERMS} terms for log nome {log_nome}")


def compute_L(params: AnnulusParams, branch: Optional[Branch] = None) -> SlitMapData:
    """
    L = theta2(0|tau) / theta3(0|tau).  On the transformed branch L = theta0 / theta3 at h' and
    1 - L = 4 sum_{n odd} h'^{n^2} / theta3 is summed directly instead of subtracting.
    """
    branch = branch or params.preferred_branch
    params.check_branch(branch)
    if branch == Branch.DIRECT:
        theta2 = theta_series(ThetaKind.THETA2, 0.0, params.log_h).real
        theta3 = theta_series(ThetaKind.THETA3, 0.0, params.log_h).real
        L = theta2 / theta3
        one_minus_L = LogReal.of((theta3 - theta2) / theta3)
    else:
        theta0 = theta_series(ThetaKind.THETA0, 0.0, params.log_hp).real
        theta3 = theta_series(ThetaKind.THETA3, 0.0, params.log_hp).real
        L = theta0 / theta3
        one_minus_L = LogReal(float(np.log(4.0)) + _odd_nome_sum_log(params.log_hp) - float(np.log(theta3)))

    K = complete_elliptic_K(params, branch)
    logger.debug(f"a={params.a} branch={branch.value} L={L!r} log(1-L)={one_minus_L.log!r}")
    return SlitMapData(params=params, branch=branch, L=L, one_minus_L=one_minus_L, K=K)


def _check_radius(z: complex, params: AnnulusParams) -> None:
    radius = abs(z)
    if not (params.q * (1.0 - RADIUS_TOL) <= radius <= 1.0 + RADIUS_TOL):
        raise DomainError(f"|z|={radius} is outside the annulus [{params.q}, 1]")


def _direct_v(z: complex, params: AnnulusParams) -> complex:
    # v = (i/pi) log(z/q) + 1/2
    log_ratio = complex(np.log(abs(z)) - params.a, np.angle(z))
    return 1j * log_ratio / np.pi + 0.5


def _evaluate(z: complex, data: SlitMapData) -> Tuple[complex, LogComplex]:
    """(f(z), 1 - f(z)) with 1 - f kept in log space."""
    z = complex(z)
    _check_radius(z, data.params)

    if data.branch == Branch.DIRECT:
        v = _direct_v(z, data.params)
        theta1 = theta_series(ThetaKind.THETA1, v, data.params.log_h)
        theta0 = theta_series(ThetaKind.THETA0, v, data.params.log_h)
        return theta1 / theta0, LogComplex.of((theta0 - theta1) / theta0)

    # the product form is evaluated in the closed upper half plane and reflected
    reflected = z.imag < 0
    if reflected:
        z = z.conjugate()
    v = _direct_v(z, data.params)
    f = theta_ratio_transformed(data.params, RatioKind.F_RATIO, v).value
    one_minus_f = theta_ratio_transformed(data.params, RatioKind.F_COMPLEMENT, v)

    if reflected:
        return f.conjugate(), one_minus_f.conj()
    return f, one_minus_f


def map_f(z: complex, data: SlitMapData) -> complex:
    """The conformal map of the annulus onto the unit disk minus [-L, L], normalised by f(1) = 1."""
    return _evaluate(z, data)[0]


def map_one_minus_f(z: complex, data: SlitMapData) -> LogComplex:
    return _evaluate(z, data)[1]


def _fprime_candidate(z: complex, f: complex, one_minus_f: LogComplex, data: SlitMapData) -> LogComplex:
    one_minus_L = LogComplex.of(data.one_minus_L)
    L_minus_f = one_minus_f - one_minus_L
    L_plus_f = LogComplex.of(data.L + f)
    # relative to 1 - L: points of the outer circle sit at least that far from either tip
    log_tol = float(np.log(SLIT_TIP_TOL)) + data.one_minus_L.log
    if L_minus_f.log_abs < log_tol or L_plus_f.log_abs < log_tol:
        raise SlitTipSingularity(
            f"f(z)={f} is within {SLIT_TIP_TOL} * (1 - L) of a slit tip +-{data.L}, "
            f"log(1 - L)={data.one_minus_L.log:.6g}"
        )
    one_minus_Lf = one_minus_L + one_minus_f * data.L
    one_plus_Lf = LogComplex.of(1.0 + data.L * f)
    root = (L_minus_f * L_plus_f * one_minus_Lf * one_plus_Lf).sqrt()

    # 2iK / (pi z)
    prefactor = LogComplex(
        data.K.log + float(np.log(2.0 / np.pi)) - float(np.log(abs(z))),
        wrap_angle(0.5 * np.pi - float(np.angle(z))),
    )
    return prefactor * root


def map_f_prime_abs(z: complex, data: SlitMapData) -> LogReal:
    """|f'(z)|; no square-root branch is needed for the modulus."""
    f, one_minus_f = _evaluate(z, data)
    return _fprime_candidate(complex(z), f, one_minus_f, data).abs()


def map_f_prime(z: complex, data: SlitMapData, previous: Optional[LogComplex] = None) -> LogComplex:
    """
    f'(z) = (2iK / (pi z)) [(L^2 - f^2)(1 - L^2 f^2)]^{1/2}.

    The square-root sign is taken from `previous` (the value at the preceding point of a contour sweep)
    when given, otherwise from a tangential difference quotient of 1 - f.  Both choices give f'(1) > 0.
    """
    z = complex(z)
    f, one_minus_f = _evaluate(z, data)
    candidate = _fprime_candidate(z, f, one_minus_f, data)

    if previous is not None:
        reference_arg = previous.arg
    else:
        shifted = z * complex(np.exp(1j * TANGENT_STEP))
        # f(z e^{ih}) - f(z) = (1 - f(z)) - (1 - f(z e^{ih}))
        step = one_minus_f - map_one_minus_f(shifted, data)
        if step.is_zero:
            raise NonConvergent(f"difference quotient vanished at z={z}")
        reference_arg = (step / LogComplex.of(1j * z * TANGENT_STEP)).arg

    if np.cos(candidate.arg - reference_arg) < 0:
        candidate = -candidate
    return candidate


def fold_angle(x: float) -> float:
    """Fold a boundary angle from (0, 2pi) onto (0, pi] using the reflection symmetry of the annulus."""
    if not 0.0 < x < 2.0 * np.pi:
        raise DomainError(f"endpoint angle must lie in (0, 2pi), got x={x}")
    return 2.0 * np.pi - x if x > np.pi else float(x)


def endpoints(params: AnnulusParams, x: float, data: SlitMapData) -> Endpoints:
    """
    1 - w1 and u = i(1 + w1)/(1 - w1) for the boundary pair e^{+-ix/2}.  u is real and <= -1;
    it grows like exp(-(pi/4a)(pi - x)) as a -> 0-.
    """
    x = fold_angle(x)
    z1 = complex(np.exp(0.5j * x))
    v = _direct_v(z1, params)

    if x == np.pi:
        # symmetry point, w1 = i
        return Endpoints(x=x, v=v, one_minus_w1=LogComplex.of(1.0 - 1.0j), u=LogReal(0.0, -1))

    one_minus_w1 = map_one_minus_f(z1, data)
    u = LogComplex(0.0, 0.5 * np.pi) * (LogComplex.of(2.0) - one_minus_w1) / one_minus_w1
    if abs(np.sin(u.arg)) > REAL_U_TOL or np.cos(u.arg) > 0:
        raise NonConvergent(f"u = i(1+w1)/(1-w1) is not a negative real (arg {u.arg}) at a={params.a}, x={x}")
    return Endpoints(x=x, v=v, one_minus_w1=one_minus_w1, u=LogReal(u.log_abs, -1))


def g_slit_halfplane(c: float, d: float, z: complex) -> complex:
    """
    g(z) = |c| / sqrt(c^2 + d^2) * sqrt(z^2 + d^2), mapping the upper half plane minus i(0, d]
    onto the upper half plane with g(+-c) = +-c.
    """
    if c == 0:
        raise DomainError("slit map needs c != 0")
    if d < 0:
        raise DomainError(f"slit height must be non-negative, got {d}")
    z = complex(z)
    if z.imag < 0:
        raise DomainError(f"z={z} is below the real axis")
    if z.real == 0 and 0 < z.imag <= d:
        raise DomainError(f"z={z} lies on the slit i(0, {d}]")
    root = complex(np.sqrt(z * z + d * d))
    if root.imag < 0 or (root.imag == 0 and root.real * z.real < 0):
        root = -root
    return abs(c) / float(np.hypot(c, d)) * root


def g_slit_halfplane_derivative_product(c: float, d: float) -> float:
    """|g'(c) g'(-c)| = c^4 / (c^2 + d^2)^2"""
    ratio = c * c / (c * c + d * d)
    return ratio * ratio


def g_double_slit(w: complex, data: SlitMapData) -> complex:
    """
    g_L(w) = (1 + w^2 - sqrt((1 + w^2)^2 - 4p^2 w^2)) / (2pw), 2p = L + 1/L, mapping the disk minus
    the slits (-1, -L] and [L, 1) onto the disk with g_L(i) = i.
    """
    w = complex(w)
    if abs(w) > 1.0 + RADIUS_TOL:
        raise DomainError(f"w={w} is outside the unit disk")
    if w.imag == 0 and data.L <= abs(w.real) < 1.0:
        raise DomainError(f"w={w} lies on a slit")
    if w == 0:
        return 0j

    p = data.p
    one_plus_sq = 1.0 + w * w
    root = complex(np.sqrt(one_plus_sq * one_plus_sq - 4.0 * p * p * w * w))
    plus, minus = one_plus_sq + root, one_plus_sq - root
    # the two roots are reciprocal; take the one inside the disk without cancelling
    g = 2.0 * p * w / (plus if abs(plus) >= abs(minus) else minus)
    if abs(abs(g) - 1.0) < 1e-12 and g.imag * w.imag < 0:
        g = g.conjugate()
    return g


def g_double_slit_boundary(phi: float, data: SlitMapData) -> complex:
    """g_L(e^{i phi}) = cos(phi)/p + i sign(sin phi) sqrt(1 - cos^2(phi)/p^2)"""
    if np.sin(phi) == 0:
        raise DomainError(f"e^(i {phi}) is the outer end of a slit")
    cos_p = np.cos(phi) / data.p
    return complex(cos_p, np.sign(np.sin(phi)) * np.sqrt(1.0 - cos_p * cos_p))


def g_double_slit_derivative_product(phi: float, data: SlitMapData) -> float:
    """g_L'(w) g_L'(conj w) = -sin^2 phi / (p^2 - 1 + sin^2 phi) for w = e^{i phi}"""
    sin_sq = np.sin(phi) ** 2
    p_sq_minus_1 = float(data.p_minus_1 * (data.p + 1.0))
    return float(-sin_sq / (p_sq_minus_1 + sin_sq))
