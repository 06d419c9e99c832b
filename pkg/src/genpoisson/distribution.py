"""Generalized Poisson distribution on the non-negative integers.

The probability mass function is

    P(N = n) = theta * (theta + n*lambda)**(n-1) / n! * exp(-theta - n*lambda)

for theta > 0 and 0 <= lambda < 1. At lambda = 0 this is the ordinary
Poisson distribution with mean theta; positive lambda stretches the
tail. That the mass sums to exactly one is not obvious from the formula;
the :mod:`genpoisson.series` module certifies it numerically through the
telescoping identity satisfied by the underlying power series.

All mass evaluation happens in log space. Each log term is assembled in
double-double arithmetic (the n=0 term is handled analytically as
exp(-theta), never touching the (n-1)-th power), which keeps cumulative
sums honest at the 1e-13 level even when the mass sits at n in the
hundreds. Probabilities are exponentiated with a first-order correction
from the low half of the log, so they are accurate to a couple of ulp
rather than to ulp-of-the-log, which a plain exp(log_pmf) could not
deliver.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterator

from .errors import DomainError, TruncationError
from .numerics import (
    MACHINE_EPSILON,
    _log_factorial_dd,
    dd_add,
    dd_log,
    quick_two_sum,
    two_prod,
    two_sum,
)
from .types import SeriesResult

MAX_TERMS_DEFAULT = 10_000_000

# Absolute rounding of log(mantissa) inside dd_log; scaling a log by n
# amplifies at most this much per unit of n. Used in roundoff bounds.
_LOG_MANTISSA_ROUNDING = math.log(2.0) * 2.0 ** -54


def _require_finite_float(value, name: str) -> float:
    try:
        result = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(result):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return result


def _require_index(value, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise DomainError(f"{name} must be a non-negative integer, got {value!r}")
    return value


@dataclass(frozen=True)
class GpdParams:
    """Validated parameter pair; construction rejects anything off-domain."""

    theta: float
    lambda_: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", _require_finite_float(self.theta, "theta"))
        object.__setattr__(self, "lambda_", _require_finite_float(self.lambda_, "lambda_"))
        if self.theta <= 0.0:
            raise DomainError(f"theta must satisfy theta > 0, got {self.theta!r}")
        if self.lambda_ < 0.0:
            raise DomainError(f"lambda_ must satisfy lambda_ >= 0, got {self.lambda_!r}")
        if self.lambda_ >= 1.0:
            raise DomainError(f"lambda_ must satisfy lambda_ < 1, got {self.lambda_!r}")


def validate_params(theta, lambda_) -> GpdParams:
    """Check a (theta, lambda) pair and return it as validated params.

    Raises DomainError naming the offending parameter and the violated
    bound for theta <= 0, lambda outside [0, 1) or non-finite input.
    """
    return GpdParams(theta, lambda_)


@dataclass(frozen=True)
class PmfTerm:
    """One mass point: index, probability and its natural log."""

    n: int
    probability: float
    log_probability: float


@dataclass(frozen=True)
class TruncationPolicy:
    """How far adaptive summations may run and how sharp they must be."""

    absolute_tolerance: float = 1e-12
    max_terms: int = MAX_TERMS_DEFAULT

    def __post_init__(self) -> None:
        tol = self.absolute_tolerance
        if not (isinstance(tol, (int, float)) and math.isfinite(tol) and tol > 0.0):
            raise DomainError(
                f"absolute_tolerance must be positive and finite, got {tol!r}"
            )
        if (
            not isinstance(self.max_terms, int)
            or isinstance(self.max_terms, bool)
            or self.max_terms < 1
        ):
            raise DomainError(f"max_terms must be a positive integer, got {self.max_terms!r}")


# ---------------------------------------------------------------------------
# log-space term assembly


def _signed_log_weight(
    theta: float, lam: float, n: int, power: int
) -> tuple[int, float, float]:
    """Sign and log magnitude of (theta + lam*n)**power / n! * exp(-theta - lam*n).

    Returns (sign, hi, lo) with the log magnitude as a hi/lo pair. The
    sign is 0 when the base vanishes exactly (possible only for negative
    lam, which the series module feeds through here). The base and the
    product lam*n are formed with error-free transforms, so nothing is
    lost before the log.
    """
    ln_hi, ln_lo = two_prod(lam, float(n))
    b_hi, err = two_sum(theta, ln_hi)
    b_hi, b_lo = quick_two_sum(b_hi, err + ln_lo)
    sign = 1
    if power > 0:
        if b_hi == 0.0:
            return 0, 0.0, 0.0
        if b_hi < 0.0:
            b_hi, b_lo = -b_hi, -b_lo
            if power % 2:
                sign = -1
        lb = dd_log((b_hi, b_lo))
        p = float(power)
        t_hi, t_lo = two_prod(p, lb[0])
        acc = (t_hi, t_lo + p * lb[1])
    else:
        acc = (0.0, 0.0)
    lf_hi, lf_lo = _log_factorial_dd(n)
    acc = dd_add(acc, (-lf_hi, -lf_lo))
    acc = dd_add(acc, (-theta, 0.0))
    acc = dd_add(acc, (-ln_hi, -ln_lo))
    return sign, acc[0], acc[1]


def _exp_dd(hi: float, lo: float) -> float:
    # exp of a hi/lo log with first-order correction; exact zero on underflow
    value = math.exp(hi)
    return value * (1.0 + lo) if value > 0.0 else 0.0


def _probability_iter(params: GpdParams) -> Iterator[float]:
    """P(0), P(1), ... computed with one fixed operation order.

    Every consumer (cdf, quantile, sampling, moments) walks this exact
    sequence, so their partial sums agree bit for bit.
    """
    theta, lam = params.theta, params.lambda_
    yield math.exp(-theta)
    log_theta = dd_log((theta, 0.0))
    n = 1
    while True:
        _, w_hi, w_lo = _signed_log_weight(theta, lam, n, n - 1)
        hi, lo = dd_add(log_theta, (w_hi, w_lo))
        yield _exp_dd(hi, lo)
        n += 1


def log_pmf(params: GpdParams, n: int) -> float:
    """Natural log of the mass at n; finite for every n >= 0."""
    _require_index(n, "n")
    if n == 0:
        return -params.theta
    _, w_hi, w_lo = _signed_log_weight(params.theta, params.lambda_, n, n - 1)
    hi, lo = dd_add(dd_log((params.theta, 0.0)), (w_hi, w_lo))
    return hi + lo


def pmf(params: GpdParams, n: int) -> PmfTerm:
    """The mass at n together with its log.

    The probability carries the low half of the double-double log through
    the exponential, so it is accurate to a couple of ulp; the stored
    log_probability is that same log collapsed to one double. At n = 0
    the value is exp(-theta) analytically, so the (n-1)-th power of the
    base never enters.
    """
    _require_index(n, "n")
    if n == 0:
        return PmfTerm(0, math.exp(-params.theta), -params.theta)
    _, w_hi, w_lo = _signed_log_weight(params.theta, params.lambda_, n, n - 1)
    hi, lo = dd_add(dd_log((params.theta, 0.0)), (w_hi, w_lo))
    return PmfTerm(n, _exp_dd(hi, lo), hi + lo)


def cdf(params: GpdParams, n: int) -> float:
    """P(N <= n) by compensated summation of the mass, clamped to [0, 1]."""
    _require_index(n, "n")
    s = 0.0
    c = 0.0
    terms = _probability_iter(params)
    for _ in range(n + 1):
        term = next(terms)
        t = s + term
        if s >= term:
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
    value = s + c
    if value < 0.0:
        return 0.0
    return min(value, 1.0)


def quantile(params: GpdParams, u: float, max_terms: int = MAX_TERMS_DEFAULT) -> int:
    """Smallest n with cdf(n) >= u, by sequential search from n = 0.

    Runs in time linear in the returned index. u must lie in [0, 1);
    u = 0 maps to 0 because the mass at zero is always positive.

    Raises TruncationError if the cumulative mass fails to reach u
    within ``max_terms`` terms (conceivable only for u within a few ulp
    of 1 or lambda close to its upper limit).
    """
    if not (isinstance(u, (int, float)) and math.isfinite(u) and 0.0 <= u < 1.0):
        raise DomainError(f"u must lie in [0, 1), got {u!r}")
    s = 0.0
    c = 0.0
    terms = _probability_iter(params)
    for n in range(max_terms):
        term = next(terms)
        t = s + term
        if s >= term:
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
        if s + c >= u:
            return n
        if term == 0.0 and n > 10:
            # mass has underflowed; u sits beyond representable cdf
            raise TruncationError(
                f"cumulative mass saturated at {s + c!r} below u={u!r}"
            )
    raise TruncationError(f"quantile search exhausted {max_terms} terms below u={u!r}")


def sample(params: GpdParams, seed: int, count: int) -> list[int]:
    """Draw ``count`` values by inversion sampling.

    Uniform variates come from Python's Mersenne Twister
    (``random.Random(seed)``), whose ``random()`` stream for a given seed
    is guaranteed identical across platforms and CPython versions; seeds
    are treated as 64-bit unsigned integers at the command line. Each
    draw equals ``quantile(params, u)`` for the successive uniforms u:
    the cumulative table used here is built by the same compensated
    recurrence the sequential search walks, so the two routes agree
    exactly.
    """
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise DomainError(f"seed must be a non-negative integer, got {seed!r}")
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise DomainError(f"count must be a positive integer, got {count!r}")
    rng = random.Random(seed)
    uniforms = [rng.random() for _ in range(count)]
    u_max = max(uniforms)
    table: list[float] = []
    s = 0.0
    c = 0.0
    terms = _probability_iter(params)
    for n in range(MAX_TERMS_DEFAULT):
        term = next(terms)
        t = s + term
        if s >= term:
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
        table.append(s + c)
        if s + c >= u_max:
            break
        if term == 0.0 and n > 10:
            raise TruncationError(
                f"cumulative mass saturated at {s + c!r} below u={u_max!r}"
            )
    else:
        raise TruncationError(f"cdf table exceeded {MAX_TERMS_DEFAULT} entries")
    return [bisect_left(table, u) for u in uniforms]


def truncated_moment(
    params: GpdParams, order: int, policy: TruncationPolicy | None = None
) -> SeriesResult:
    """sum of n**order * P(n) to within a certified tail bound.

    Supports order 0 (total mass, equal to 1 within the bound), 1 and 2.
    Summation stops once a geometric majorant certifies the remaining
    tail: past the mass peak the term ratio is bounded by

        r(n) = ((n+1)/n)**order * exp(1-lambda) * (lambda + theta/(n+1)),

    which decreases in n, so once r(n) < 1 the tail after term n is at
    most term * r/(1-r). The reported tail_bound adds the accumulated
    roundoff allowance on top of that truncation bound.

    Raises TruncationError when ``policy.max_terms`` terms cannot meet
    ``policy.absolute_tolerance`` (lambda near 1 gets there quickly) or
    when the tolerance sits below the roundoff floor of the summation.
    """
    if not isinstance(order, int) or isinstance(order, bool) or order not in (0, 1, 2):
        raise DomainError(f"order must be 0, 1 or 2, got {order!r}")
    if policy is None:
        policy = TruncationPolicy()
    theta, lam = params.theta, params.lambda_
    tolerance = policy.absolute_tolerance
    growth = math.exp(1.0 - lam)
    s = 0.0
    c = 0.0
    weighted = 0.0  # sum of n * term, drives the log-rounding allowance
    terms = _probability_iter(params)
    for n in range(policy.max_terms):
        prob = next(terms)
        term = prob if order == 0 else float(n**order) * prob
        t = s + term
        if s >= term:
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
        weighted += n * term
        roundoff = _LOG_MANTISSA_ROUNDING * weighted + 8.0 * MACHINE_EPSILON * (s + c)
        if roundoff >= tolerance:
            partial = SeriesResult(s + c, n + 1, math.inf, False)
            raise TruncationError(
                f"tolerance {tolerance!r} sits below the roundoff floor "
                f"{roundoff!r} for theta={theta!r}, lambda_={lam!r}",
                partial=partial,
            )
        if n >= 1:
            ratio_cap = ((n + 1.0) / n) ** order * growth * (lam + theta / (n + 1.0))
            if ratio_cap < 1.0:
                tail = term * ratio_cap / (1.0 - ratio_cap)
                bound = tail + roundoff
                if bound <= tolerance:
                    return SeriesResult(s + c, n + 1, bound, True)
    partial = SeriesResult(s + c, policy.max_terms, math.inf, False)
    raise TruncationError(
        f"no convergence within {policy.max_terms} terms for "
        f"theta={theta!r}, lambda_={lam!r}, tolerance={tolerance!r}",
        partial=partial,
    )
