"""The power series behind the distribution's unit normalization.

Central object: the shifted-exponential series

    S(theta, lambda) = sum_{n>=0} (theta + lambda*n)**n / n! * exp(-theta - lambda*n)

which sums to the theta-independent value 1/(1 - lambda) on an interval
of lambda values. The interval's lower endpoint is -x0, where
x0 = 0.2784645428... is the unique positive root of x * exp(x) = 1/e
(the Lambert W value W(1/e)); beyond that the series stops converging
absolutely, and past lambda = 1 it diverges outright. The distribution's
normalization follows by telescoping: the mass total equals
S(theta, lambda) - lambda * S(theta + lambda, lambda) = 1.

Three independent evaluation routes live here, deliberately kept apart
so they can cross-check each other:

* direct compensated summation (:func:`s_series`),
* the closed form 1/(1 - lambda) (:func:`s_closed_form`),
* a column-wise rearrangement of the underlying double series whose
  inner alternating sums are evaluated numerically in double-double
  precision (:func:`s_by_rearrangement`), collapsing to a geometric
  series only through actual cancellation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .differences import difference_dd
from .distribution import (
    GpdParams,
    TruncationPolicy,
    _require_finite_float,
    _signed_log_weight,
    truncated_moment,
)
from .errors import CancellationError, DomainError, RootFindingError, TruncationError
from .numerics import (
    MACHINE_EPSILON,
    RootBracket,
    _log_factorial_dd,
    dd_add,
    dd_div,
    dd_from_int,
    find_root,
)
from .types import SeriesResult, VerificationReport

# Callers may not push lambda closer than this to either endpoint of the
# convergence interval; summation time blows up like 1/distance there.
LAMBDA_INTERVAL_MARGIN = 1e-6

# Predicted cancellation magnitude (largest inner sum scaled by 1/k!)
# beyond which the rearrangement refuses to run.
REARRANGEMENT_CANCELLATION_CAP = 1e12

_INV_E = math.exp(-1.0)
_MAX_SERIES_TERMS = 10_000_000
_LOG_MANTISSA_ROUNDING = math.log(2.0) * 2.0 ** -54


@dataclass(frozen=True)
class Lambda0:
    """The convergence constant and the residual of its defining equation."""

    value: float
    residual: float


class ConvergenceClass(enum.Enum):
    """How the shifted-exponential series behaves at a given lambda."""

    ABSOLUTELY_CONVERGENT = "absolutely_convergent"
    CONVERGENT = "convergent"
    DIVERGENT = "divergent"
    BOUNDARY = "boundary"


def _characteristic(x: float) -> float:
    # increasing on [0.2, 0.3]; its root there is the convergence constant
    return x * math.exp(x) - _INV_E


def lambda0(tolerance: float = 1e-15) -> Lambda0:
    """The positive root of x * exp(x) = 1/e, residual-certified.

    The root is bracketed on [0.2, 0.3], where the characteristic is
    strictly increasing and changes sign, refined by the hybrid
    bisection/secant search, then polished to the neighbouring double
    with the smallest residual. Raises DomainError for tolerance below
    1e-15 (unreachable in doubles) and RootFindingError if the residual
    certificate fails.
    """
    if not (isinstance(tolerance, (int, float)) and math.isfinite(tolerance)):
        raise DomainError(f"tolerance must be finite, got {tolerance!r}")
    if tolerance < 1e-15:
        raise DomainError(f"tolerance must satisfy tolerance >= 1e-15, got {tolerance!r}")
    bracket = RootBracket.from_function(_characteristic, 0.2, 0.3)
    x = find_root(_characteristic, bracket, tolerance)
    best, best_residual = x, _characteristic(x)
    for neighbour in (math.nextafter(x, 0.0), math.nextafter(x, 1.0)):
        residual = _characteristic(neighbour)
        if abs(residual) < abs(best_residual):
            best, best_residual = neighbour, residual
    if abs(best_residual) > tolerance:
        raise RootFindingError(
            f"residual {best_residual!r} exceeds tolerance {tolerance!r}"
        )
    return Lambda0(best, best_residual)


_lambda0_cache: float | None = None


def _lambda0_value() -> float:
    global _lambda0_cache
    if _lambda0_cache is None:
        _lambda0_cache = lambda0().value
    return _lambda0_cache


def root_test_value(lambda_: float) -> float:
    """|lambda| * exp(1 + |lambda|), the limsup of the n-th root of the
    absolutely-summed double series; below 1 means absolute convergence."""
    lam = _require_finite_float(lambda_, "lambda_")
    return abs(lam) * math.exp(1.0 + abs(lam))


def classify_convergence(lambda_: float) -> ConvergenceClass:
    """Classify the series at ``lambda_``, strongest property first.

    ABSOLUTELY_CONVERGENT for |lambda| below the convergence constant,
    CONVERGENT when |lambda * exp(-lambda)| < 1/e still holds with
    lambda < 1, DIVERGENT otherwise. Within 4 ulp of the three boundary
    points (either sign of the constant, and 1) the verdict is BOUNDARY:
    at that resolution the two formulations can legitimately disagree,
    so no claim is made either way.
    """
    lam = _require_finite_float(lambda_, "lambda_")
    lam0 = _lambda0_value()
    band = 4.0 * math.ulp(lam0)
    if abs(abs(lam) - lam0) <= band:
        return ConvergenceClass.BOUNDARY
    if abs(lam - 1.0) <= 4.0 * math.ulp(1.0):
        return ConvergenceClass.BOUNDARY
    if abs(lam) < lam0:
        return ConvergenceClass.ABSOLUTELY_CONVERGENT
    if lam < 1.0 and abs(lam * math.exp(-lam)) < _INV_E:
        return ConvergenceClass.CONVERGENT
    return ConvergenceClass.DIVERGENT


def s_closed_form(lambda_: float) -> float:
    """The geometric value 1/(1 - lambda); demands lambda < 1."""
    lam = _require_finite_float(lambda_, "lambda_")
    if lam >= 1.0:
        raise DomainError(f"lambda_ must satisfy lambda_ < 1, got {lam!r}")
    return 1.0 / (1.0 - lam)


def s_series(theta: float, lambda_: float, tolerance: float = 1e-12) -> SeriesResult:
    """Directly sum the shifted-exponential series to a certified bound.

    Terms are evaluated in log space (double-double assembly, signed for
    negative lambda where the base theta + lambda*n eventually goes
    negative) and accumulated with Neumaier compensation. Summation
    stops once a geometric majorant of the absolute term ratio certifies
    that truncation plus accumulated roundoff fit inside ``tolerance``.

    Raises DomainError when lambda sits outside the open convergence
    interval or within LAMBDA_INTERVAL_MARGIN of an endpoint, and
    TruncationError when the tolerance is unreachable, either below the
    roundoff floor or beyond the term cap.
    """
    theta = _require_finite_float(theta, "theta")
    if theta <= 0.0:
        raise DomainError(f"theta must satisfy theta > 0, got {theta!r}")
    lam = _require_finite_float(lambda_, "lambda_")
    if not (isinstance(tolerance, (int, float)) and math.isfinite(tolerance) and tolerance > 0.0):
        raise DomainError(f"tolerance must be positive and finite, got {tolerance!r}")
    lam0 = _lambda0_value()
    lower = -lam0 + LAMBDA_INTERVAL_MARGIN
    upper = 1.0 - LAMBDA_INTERVAL_MARGIN
    if not lower < lam < upper:
        raise DomainError(
            f"lambda_ must lie in ({lower!r}, {upper!r}), the convergence "
            f"interval shrunk by margin {LAMBDA_INTERVAL_MARGIN!r}; got {lam!r}"
        )
    abs_lam = abs(lam)
    s = 0.0
    c = 0.0
    abs_sum = 0.0
    weighted = 0.0
    for n in range(_MAX_SERIES_TERMS):
        if n == 0:
            term = math.exp(-theta)
        else:
            sign, hi, lo = _signed_log_weight(theta, lam, n, n)
            if sign == 0:
                term = 0.0
            else:
                value = math.exp(hi)
                term = sign * (value * (1.0 + lo)) if value > 0.0 else 0.0
        t = s + term
        if abs(s) >= abs(term):
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
        magnitude = abs(term)
        abs_sum += magnitude
        weighted += n * magnitude
        roundoff = _LOG_MANTISSA_ROUNDING * weighted + 8.0 * MACHINE_EPSILON * abs_sum
        if roundoff >= tolerance:
            partial = SeriesResult(s + c, n + 1, math.inf, False)
            raise TruncationError(
                f"tolerance {tolerance!r} sits below the roundoff floor "
                f"{roundoff!r} for theta={theta!r}, lambda_={lam!r}",
                partial=partial,
            )
        if n < 1 or magnitude == 0.0:
            continue
        # geometric majorant of |t_{m+1}/t_m| for every m >= n
        if lam >= 0.0:
            ratio_cap = math.exp(1.0 - lam) * (lam + (theta + lam) / (n + 1.0))
        else:
            past = n * abs_lam - theta
            if past <= 0.0:
                continue  # base has not crossed zero yet, no uniform cap
            ratio_cap = abs_lam * math.exp(1.0 + abs_lam) * math.exp(theta / past)
        if ratio_cap < 1.0:
            tail = magnitude * ratio_cap / (1.0 - ratio_cap)
            bound = tail + roundoff
            if bound <= tolerance:
                return SeriesResult(s + c, n + 1, bound, True)
    partial = SeriesResult(s + c, _MAX_SERIES_TERMS, math.inf, False)
    raise TruncationError(
        f"no convergence within {_MAX_SERIES_TERMS} terms for theta={theta!r}, "
        f"lambda_={lam!r}, tolerance={tolerance!r}",
        partial=partial,
    )


def s_by_rearrangement(
    theta: float, lambda_: float, k_max: int, tolerance: float = 1e-8
) -> SeriesResult:
    """Sum the double series column-wise and let the cancellation happen.

    The direct series expands into a double sum; grouping it by columns
    gives

        sum_{k>=0} (1/k!) * sum_{n=0}^{k} (-1)**(k-n) C(k,n) (theta + lambda*n)**k

    and each inner alternating sum is evaluated numerically in
    double-double precision (never via the known polynomial collapse).
    The surviving values form the geometric series for 1/(1 - lambda),
    theta cancelling out entirely, which is exactly the interchange this
    routine exists to exhibit.

    Only |lambda| strictly below the absolute-convergence constant is
    accepted; rearrangement is not justified outside. If the predicted
    inner magnitude max_k 2**k * (theta + |lambda|*k)**k / k! exceeds
    REARRANGEMENT_CANCELLATION_CAP times the expected result, the run is
    refused with CancellationError before digits are lost silently.

    ``tolerance`` only grades the returned ``converged`` flag; the
    ``tail_bound`` always reports the outer geometric remainder plus a
    cancellation noise allowance.
    """
    theta = _require_finite_float(theta, "theta")
    if theta <= 0.0:
        raise DomainError(f"theta must satisfy theta > 0, got {theta!r}")
    lam = _require_finite_float(lambda_, "lambda_")
    lam0 = _lambda0_value()
    if not abs(lam) < lam0:
        raise DomainError(
            f"lambda_ must satisfy |lambda_| < {lam0!r} "
            f"(the absolute-convergence bound), got {lam!r}"
        )
    if not isinstance(k_max, int) or isinstance(k_max, bool) or k_max < 0:
        raise DomainError(f"k_max must be a non-negative integer, got {k_max!r}")
    if k_max > 64:
        raise DomainError(f"k_max must not exceed 64, got {k_max!r}")
    expected_scale = max(1.0, 1.0 / (1.0 - lam))
    cap = math.log(REARRANGEMENT_CANCELLATION_CAP * expected_scale)
    largest_log_magnitude = 0.0
    for k in range(1, k_max + 1):
        lf_hi, lf_lo = _log_factorial_dd(k)
        log_magnitude = k * (math.log(2.0) + math.log(theta + abs(lam) * k)) - (lf_hi + lf_lo)
        largest_log_magnitude = max(largest_log_magnitude, log_magnitude)
        if log_magnitude > cap:
            raise CancellationError(
                f"inner sums at k={k} reach about exp({log_magnitude:.1f}) "
                f"after the 1/k! scaling, more than "
                f"{REARRANGEMENT_CANCELLATION_CAP:.0e} times the expected "
                f"result; refusing k_max={k_max} for theta={theta!r}, "
                f"lambda_={lam!r}"
            )
    total = (0.0, 0.0)
    for k in range(k_max + 1):
        inner = difference_dd(theta, lam, k, k)
        column = dd_div(inner, dd_from_int(math.factorial(k)))
        total = dd_add(total, column)
    value = total[0] + total[1]
    outer_tail = abs_lam_tail = abs(lam) ** (k_max + 1) / (1.0 - abs(lam))
    # double-double carries ~106 bits; surviving noise scales with the
    # largest cancelled magnitude
    noise = (k_max + 1) * math.exp(largest_log_magnitude) * 2.0 ** -100
    tail_bound = outer_tail + noise
    return SeriesResult(value, k_max + 1, tail_bound, tail_bound <= tolerance)


def telescoping_check(params: GpdParams, tolerance: float = 1e-10) -> VerificationReport:
    """Certify unit normalization three ways and report the worst spread.

    Route one sums the mass directly. Route two evaluates
    S(theta, lambda) - lambda * S(theta + lambda, lambda), the telescoped
    form of the same sum. Route three is the constant 1. The report
    carries all three pairwise residuals; the check passes when the
    largest is within ``tolerance``.
    """
    if not (isinstance(tolerance, (int, float)) and math.isfinite(tolerance) and tolerance > 0.0):
        raise DomainError(f"tolerance must be positive and finite, got {tolerance!r}")
    inner = min(max(tolerance / 20.0, 1e-13), 1e-6)
    mass = truncated_moment(
        params, 0, TruncationPolicy(absolute_tolerance=inner)
    ).value
    lam = params.lambda_
    first = s_series(params.theta, lam, inner)
    shifted = s_series(params.theta + lam, lam, inner)
    telescoped = first.value - lam * shifted.value
    residuals = {
        "mass_total_vs_one": abs(mass - 1.0),
        "series_difference_vs_one": abs(telescoped - 1.0),
        "mass_total_vs_series_difference": abs(mass - telescoped),
    }
    worst = max(residuals.values())
    return VerificationReport(
        identity="telescoping-normalization",
        residual=worst,
        tolerance=tolerance,
        passed=worst <= tolerance,
        details=residuals,
    )
