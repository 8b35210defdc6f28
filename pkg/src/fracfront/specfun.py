"""Real-argument special functions.

Gamma and its reciprocal, the two-parameter Mittag-Leffler function
:math:`E_{\\rho,\\beta}(z) = \\sum_k z^k / \\Gamma(\\rho k + \\beta)`, the Wright
function :math:`W(z; \\rho, \\beta) = \\sum_k z^k / (k! \\Gamma(\\rho k + \\beta))`
for :math:`\\rho > -1`, and the fractional error function
:math:`1 - W(-x; -\\alpha/2, 1)`.

All series are accumulated with :func:`math.fsum`, so the only rounding left is
the one committed when forming each term.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Any

import mpmath

from fracfront.errors import ConvergenceError, DomainError, PoleError, RangeError

EPS = sys.float_info.epsilon

MAX_TERMS = 10_000

#: smallest attainable relative target: results carry a few ulps of rounding
FLOOR = 16.0 * EPS

_LOG_MAX = math.log(1.0e300)


@dataclass(frozen=True)
class SeriesEvalReport:
    """Outcome of a truncated series evaluation.

    ``truncation_bound`` bounds the discarded tail; ``rounding_bound`` bounds
    the accumulated rounding of the retained terms. ``converged`` means the
    tail is below ``tol * max(1, |value|)``.
    """

    value: float
    terms_used: int
    truncation_bound: float
    converged: bool
    rounding_bound: float = 0.0
    method: str = "series"

    @property
    def error_bound(self) -> float:
        return self.truncation_bound + self.rounding_bound

    def __float__(self) -> float:
        return self.value


def _alpha_value(alpha: Any) -> float:
    """Accept a bare float or anything carrying an ``alpha`` attribute."""
    return float(getattr(alpha, "alpha", alpha))


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def gamma(x: float) -> float:
    """Gamma function for real ``x``.

    Raises :class:`PoleError` at nonpositive integers and :class:`RangeError`
    when the result does not fit in a double.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("gamma of NaN")
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma has a pole at {x:g}")
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise RangeError(f"gamma({x:g}) overflows binary64") from exc


def _log_abs_rgamma(x: float) -> tuple[float, float]:
    """Return ``(log|1/Gamma(x)|, sign(1/Gamma(x)))``; ``(-inf, 0)`` at poles."""
    if _is_nonpositive_integer(x):
        return -math.inf, 0.0
    sign = 1.0
    if x < 0.0 and int(math.floor(x)) % 2 != 0:
        sign = -1.0
    return -math.lgamma(x), sign


def reciprocal_gamma(x: float) -> float:
    """1/Gamma(x), exactly zero at the poles of Gamma."""
    x = float(x)
    if _is_nonpositive_integer(x):
        return 0.0
    if -170.0 < x < 171.0:
        return 1.0 / math.gamma(x)
    log_mag, sign = _log_abs_rgamma(x)
    if log_mag > 709.0:
        raise RangeError(f"1/gamma({x:g}) overflows binary64")
    return sign * math.exp(log_mag)


def _term_envelope(log_prefactor: float, arg: float) -> float:
    """Magnitude bound of ``exp(log_prefactor) / Gamma(arg)`` ignoring the sine
    factor that makes 1/Gamma vanish at poles on the negative axis."""
    if arg > 0.0:
        log_mag = log_prefactor - math.lgamma(arg)
    else:
        # 1/Gamma(x) = Gamma(1 - x) sin(pi x) / pi, with |sin| <= 1
        log_mag = log_prefactor + math.lgamma(1.0 - arg) - math.log(math.pi)
    if log_mag > 709.0:
        return math.inf
    return math.exp(log_mag)


def _term_condition(k: int, arg: float) -> float:
    """Relative error multiplier of one term: ``z**k`` plus the rounded Gamma argument."""
    a = abs(arg)
    return 4.0 + k + a * (abs(math.log(a)) + 4.0 if a > 0.0 else 0.0)


def _sum_series(
    term, envelope, tol: float, *, arg=None, max_terms: int = MAX_TERMS, min_streak: int = 3
) -> SeriesEvalReport:
    """Shared driver for power series with superexponentially decaying terms.

    ``term(k)`` returns the k-th term; ``envelope(k)`` an upper bound on its
    magnitude that is smooth in ``k`` (no zeros at Gamma poles); ``arg(k)``
    the Gamma argument of term ``k``, used for the rounding bound.
    """
    terms: list[float] = []
    abs_sum = 0.0  # sum of |t_k| weighted by the per-term condition, times EPS below
    streak = 0
    prev_env = math.inf
    tail = math.inf
    for k in range(max_terms):
        t = term(k)
        if not math.isfinite(t):
            raise RangeError(f"series term {k} is not finite")
        terms.append(t)
        abs_sum += abs(t) * (_term_condition(k, arg(k)) if arg is not None else 4.0)
        env = envelope(k)
        if env < prev_env:
            streak += 1
        else:
            streak = 0
        if streak >= min_streak and env > 0.0:
            ratio = env / prev_env
            if ratio < 1.0:
                tail = env * ratio / (1.0 - ratio)
            value = math.fsum(terms)
            if tail <= tol * max(1.0, abs(value)):
                return SeriesEvalReport(
                    value=value,
                    terms_used=k + 1,
                    truncation_bound=tail,
                    converged=True,
                    rounding_bound=EPS * abs_sum,
                )
        elif env == 0.0 and k > 0 and streak >= min_streak:
            value = math.fsum(terms)
            return SeriesEvalReport(value, k + 1, 0.0, True, EPS * abs_sum)
        prev_env = env
    value = math.fsum(terms)
    return SeriesEvalReport(value, max_terms, tail, False, EPS * abs_sum)


def _ml_series(rho: float, beta: float, z: float, tol: float) -> SeriesEvalReport:
    if z == 0.0:
        return SeriesEvalReport(reciprocal_gamma(beta), 1, 0.0, True)
    log_abs_z = math.log(abs(z))
    neg = z < 0.0

    def term(k: int) -> float:
        arg = rho * k + beta
        if k <= 150 and abs(k * log_abs_z) < _LOG_MAX and -150.0 < arg < 170.0:
            if arg > 0.0:
                return z**k / math.gamma(arg)
            return z**k * reciprocal_gamma(arg)
        log_mag, sign = _log_abs_rgamma(arg)
        if sign == 0.0:
            return 0.0
        log_mag += k * log_abs_z
        if log_mag > 709.0:
            return math.inf
        if neg and k % 2:
            sign = -sign
        return sign * math.exp(log_mag)

    def envelope(k: int) -> float:
        return _term_envelope(k * log_abs_z, rho * k + beta)

    rep = _sum_series(term, envelope, tol, arg=lambda k: rho * k + beta)
    return _ml_series_checked(rep, rho, beta, z)


def _ml_series_checked(rep: SeriesEvalReport, rho, beta, z) -> SeriesEvalReport:
    if not rep.converged:
        raise ConvergenceError(
            f"Mittag-Leffler series E_{{{rho:g},{beta:g}}}({z:g}) did not converge "
            f"in {rep.terms_used} terms"
        )
    return rep


def _ml_asymptotic(rho: float, beta: float, z: float) -> SeriesEvalReport:
    """Algebraic expansion for large negative ``z`` and ``0 < rho < 1``.

    Truncated just before the smallest term; the error estimate is that term
    plus the size of the subdominant exponential contribution that becomes
    visible as ``rho`` approaches 1.
    """
    log_abs_z = math.log(abs(z))
    envs: list[float] = []
    for j in range(1, 400):
        env = _term_envelope(-j * log_abs_z, beta - rho * j)
        envs.append(env)
        best = min(envs)
        if env > 1e10 * best or env < 1e-3 * EPS * envs[0]:
            break
    # optimal truncation: keep the terms before the smallest envelope
    jstar = min(range(len(envs)), key=envs.__getitem__)
    omitted = envs[jstar]
    terms = [-(z ** (-j)) * reciprocal_gamma(beta - rho * j) for j in range(1, jstar + 1)]
    value = math.fsum(terms)
    expo = 0.0
    if rho > 2.0 / 3.0:
        r = abs(z) ** (1.0 / rho)
        expo = abs(z) ** ((1.0 - beta) / rho) * math.exp(r * math.cos(math.pi / rho)) / rho
    return SeriesEvalReport(
        value=value,
        terms_used=len(terms),
        truncation_bound=omitted + expo,
        converged=True,
        rounding_bound=EPS * sum(abs(t) * _term_condition(j, beta - rho * (j + 1)) for j, t in enumerate(terms)),
        method="asymptotic",
    )


def _ml_multiprecision(rho: float, beta: float, z: float, tol: float) -> SeriesEvalReport:
    """Taylor series in extended precision, sized so the cancellation is absorbed."""
    log_abs_z = math.log(abs(z))
    peak = 0.0
    k = 0
    while k < MAX_TERMS:
        arg = rho * k + beta
        lm = k * log_abs_z - (math.lgamma(arg) if arg > 0.0 else 0.0)
        peak = max(peak, lm)
        if arg > 1.0 and lm < peak - 60.0:
            break
        k += 1
    dps = int(peak / math.log(10.0)) + 40
    with mpmath.workdps(dps):
        zm = mpmath.mpf(z)
        total = mpmath.mpf(0)
        streak = 0
        prev = mpmath.inf
        for k in range(MAX_TERMS):
            t = zm**k * mpmath.rgamma(mpmath.mpf(rho) * k + beta)
            total += t
            mag = abs(t)
            streak = streak + 1 if mag < prev else 0
            prev = mag
            if streak >= 3 and rho * k + beta > 1.0 and mag <= 1e-3 * tol * max(1, abs(total)):
                break
        else:
            raise ConvergenceError(
                f"extended-precision series E_{{{rho:g},{beta:g}}}({z:g}) did not converge"
            )
        value = float(total)
        trunc = float(mag)
    return SeriesEvalReport(
        value=value,
        terms_used=k + 1,
        truncation_bound=trunc,
        converged=True,
        rounding_bound=EPS * abs(value),
        method="multiprecision",
    )


def mittag_leffler(
    rho: float, beta: float, z: float, tol: float = 1e-15
) -> SeriesEvalReport:
    """Two-parameter Mittag-Leffler function :math:`E_{\\rho,\\beta}(z)`.

    ``tol`` is the truncation target. For ``z >= 0`` all terms share a sign and
    the Taylor series is used while it fits in binary64 (else
    :class:`RangeError`). For ``z < 0`` the double-precision series is kept
    when its full error bound (truncation plus rounding) meets ``tol``, then
    the algebraic asymptotic expansion (``0 < rho < 1``), and otherwise the
    series is summed in extended precision with :mod:`mpmath`. Targets below
    ``FLOOR`` are raised to it; :class:`ConvergenceError` when no path meets
    the target relative to ``max(1, |value|)``.
    """
    rho, beta, z = float(rho), float(beta), float(z)
    if not rho > 0.0:
        raise DomainError(f"Mittag-Leffler needs rho > 0, got {rho}")
    if not tol > 0.0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    if z >= 0.0:
        if z > 0.0 and z ** (1.0 / rho) > 690.0:
            raise RangeError(f"E_{{{rho:g},{beta:g}}}({z:g}) overflows binary64")
        return _ml_series(rho, beta, z, tol)

    target = max(tol, FLOOR)

    def good(rep: SeriesEvalReport) -> bool:
        return rep.error_bound <= target * max(1.0, abs(rep.value))

    candidates = []
    paths = [_ml_series] + ([_ml_asymptotic_tol] if rho < 1.0 else []) + [_ml_multiprecision]
    for path in paths:
        try:
            rep = path(rho, beta, z, tol)
        except (ConvergenceError, RangeError):
            continue
        if good(rep):
            return rep
        candidates.append(rep)
    best = min(candidates, key=lambda c: c.error_bound, default=None)
    detail = "no path produced a value" if best is None else f"best error estimate {best.error_bound:.3g}"
    raise ConvergenceError(f"E_{{{rho:g},{beta:g}}}({z:g}): {detail} misses tol {target:g}")


def _ml_asymptotic_tol(rho: float, beta: float, z: float, tol: float) -> SeriesEvalReport:
    return _ml_asymptotic(rho, beta, z)


def ml(rho: float, beta: float, z: float, tol: float = 1e-15) -> float:
    """Value-only shortcut for :func:`mittag_leffler`."""
    return mittag_leffler(rho, beta, z, tol).value


def mittag_leffler_time_derivative(alpha: Any, c: float, t: float) -> float:
    """d/dt E_alpha(c t^alpha) = c t^(alpha-1) E_{alpha,alpha}(c t^alpha)."""
    a = _alpha_value(alpha)
    t = float(t)
    if not t > 0.0:
        raise DomainError(f"time derivative of E_alpha(c t^alpha) needs t > 0, got {t}")
    if c == 0.0:
        return 0.0
    return c * t ** (a - 1.0) * ml(a, a, c * t**a)


def wright(z: float, rho: float, beta: float, tol: float = 1e-15) -> SeriesEvalReport:
    """Wright function :math:`W(z; \\rho, \\beta)` for ``rho > -1``.

    Raises :class:`ConvergenceError` if the tail does not fall below
    ``tol * max(1, |value|)`` within ``MAX_TERMS`` terms.
    """
    z, rho, beta = float(z), float(rho), float(beta)
    if not rho > -1.0:
        raise DomainError(f"Wright function needs rho > -1, got {rho}")
    if not tol > 0.0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    if z == 0.0:
        return SeriesEvalReport(reciprocal_gamma(beta), 1, 0.0, True)
    log_abs_z = math.log(abs(z))
    neg = z < 0.0

    def term(k: int) -> float:
        arg = rho * k + beta
        if k <= 170 and abs(k * log_abs_z) < _LOG_MAX and -150.0 < arg < 170.0:
            return z**k / math.factorial(k) * reciprocal_gamma(arg)
        log_mag, sign = _log_abs_rgamma(arg)
        if sign == 0.0:
            return 0.0
        log_mag += k * log_abs_z - math.lgamma(k + 1.0)
        if neg and k % 2:
            sign = -sign
        return sign * math.exp(log_mag)

    def envelope(k: int) -> float:
        return _term_envelope(k * log_abs_z - math.lgamma(k + 1.0), rho * k + beta)

    rep = _sum_series(term, envelope, tol, arg=lambda k: rho * k + beta)
    if not rep.converged:
        raise ConvergenceError(
            f"Wright series W({z:g}; {rho:g}, {beta:g}) did not converge in {rep.terms_used} terms"
        )
    return rep


def frac_erf(x: float, alpha: Any) -> float:
    """Fractional error function ``1 - W(-x; -alpha/2, 1)``; tends to erf(x/2) as alpha -> 1."""
    x = float(x)
    if x < 0.0:
        raise DomainError(f"frac_erf needs x >= 0, got {x}")
    a = _alpha_value(alpha)
    return 1.0 - wright(-x, -a / 2.0, 1.0).value
