"""Floating-point machinery shared by the rest of the package.

Compensated (Neumaier) summation, error-free double-double transforms,
a log-factorial with an exact cumulative table, Stirling's approximation
and a bracketed hybrid root finder. Everything here is plain IEEE-754
double arithmetic; the double-double helpers represent one value as an
unevaluated (hi, lo) pair carrying roughly 106 bits of precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import DomainError, RootFindingError

MACHINE_EPSILON = 2.0 ** -52

# ln(2) as a hi/lo pair, accurate to about 107 bits.
_LN2_HI = 0.6931471805599453
_LN2_LO = 2.3190468138462996e-17

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker's constant for two_prod


# ---------------------------------------------------------------------------
# compensated summation


class CompensatedAccumulator:
    """Running sum with Neumaier's correction term.

    The accumulated ``value`` differs from the exact sum of everything
    passed to :meth:`add` by at most ``2 * MACHINE_EPSILON`` times the sum
    of absolute terms, which in particular survives catastrophic
    cancellation such as ``[1e16, 1.0, -1e16]``.
    """

    __slots__ = ("sum", "compensation")

    def __init__(self) -> None:
        self.sum = 0.0
        self.compensation = 0.0

    def add(self, term: float) -> None:
        t = self.sum + term
        if abs(self.sum) >= abs(term):
            self.compensation += (self.sum - t) + term
        else:
            self.compensation += (term - t) + self.sum
        self.sum = t

    @property
    def value(self) -> float:
        return self.sum + self.compensation


def compensated_sum(terms: Iterable[float]) -> float:
    """Sum ``terms`` with Neumaier compensation.

    An empty iterable sums to 0.0. Error is bounded by
    ``2 * MACHINE_EPSILON * sum(|t|)``, far tighter than naive
    left-to-right addition on ill-conditioned inputs.
    """
    acc = CompensatedAccumulator()
    for term in terms:
        acc.add(term)
    return acc.value


# ---------------------------------------------------------------------------
# double-double primitives
#
# Classic error-free transforms: each returns (result, error) such that
# result + error reproduces the exact real value of the operation.


def two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a: float, b: float) -> tuple[float, float]:
    # requires |a| >= |b|
    s = a + b
    return s, b - (s - a)


def two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    aa = _SPLITTER * a
    a_hi = aa - (aa - a)
    a_lo = a - a_hi
    bb = _SPLITTER * b
    b_hi = bb - (bb - b)
    b_lo = b - b_hi
    return p, ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo


def dd_add(x: tuple[float, float], y: tuple[float, float]) -> tuple[float, float]:
    s, e = two_sum(x[0], y[0])
    return quick_two_sum(s, e + x[1] + y[1])


def dd_mul(x: tuple[float, float], y: tuple[float, float]) -> tuple[float, float]:
    p, e = two_prod(x[0], y[0])
    return quick_two_sum(p, e + x[0] * y[1] + x[1] * y[0])


def dd_div(x: tuple[float, float], y: tuple[float, float]) -> tuple[float, float]:
    q1 = x[0] / y[0]
    p = dd_mul((q1, 0.0), y)
    r = dd_add(x, (-p[0], -p[1]))
    return quick_two_sum(q1, (r[0] + r[1]) / y[0])


def dd_pow_int(x: tuple[float, float], exponent: int) -> tuple[float, float]:
    # binary exponentiation, exponent >= 0
    result = (1.0, 0.0)
    base = x
    e = exponent
    while e:
        if e & 1:
            result = dd_mul(result, base)
        base = dd_mul(base, base)
        e >>= 1
    return result


def dd_from_int(value: int) -> tuple[float, float]:
    # exact for |value| < 2**106; used for binomials and factorials
    hi = float(value)
    return hi, float(value - int(hi))


def dd_log(x: tuple[float, float]) -> tuple[float, float]:
    """Natural log of a positive hi/lo pair, good to ~2**-54 * |log m|.

    The argument is split as m * 2**e with m in [0.5, 1), so the only
    irreducible rounding sits in log(m), whose magnitude never exceeds
    ln 2. Callers that scale the result by a large factor (a power n,
    say) therefore amplify an absolute error of at most n * 2**-54 * ln 2
    rather than n * ulp(log x), which matters for tail probabilities.
    """
    m, e = math.frexp(x[0])
    lm = math.log(m)
    hi, lo = two_prod(float(e), _LN2_HI)
    lo += float(e) * _LN2_LO
    # first-order correction for the low half of the argument
    return dd_add((hi, lo), (lm, x[1] / x[0]))


# ---------------------------------------------------------------------------
# log-factorial

_LOG_FACTORIAL_TABLE_SIZE = 1025  # exact cumulative sums cover n <= 1024
_log_factorial_table: tuple[tuple[float, float], ...] | None = None


def _build_log_factorial_table() -> tuple[tuple[float, float], ...]:
    entries = [(0.0, 0.0), (0.0, 0.0)]
    s = 0.0
    c = 0.0
    for k in range(2, _LOG_FACTORIAL_TABLE_SIZE):
        x = math.log(k)
        t = s + x
        if s >= x:
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
        entries.append(two_sum(s, c))
    return tuple(entries)


def _log_factorial_dd(n: int) -> tuple[float, float]:
    """log(n!) as a hi/lo pair; table lookup below 1025, Stirling beyond."""
    global _log_factorial_table
    if n < _LOG_FACTORIAL_TABLE_SIZE:
        table = _log_factorial_table
        if table is None:
            # Built at most once per process; a concurrent second build
            # produces an identical tuple, and the assignment is atomic.
            table = _build_log_factorial_table()
            _log_factorial_table = table
        return table[n]
    x = float(n)
    r = 1.0 / x
    r2 = r * r
    # Stirling series with four correction terms; the first omitted term
    # is below 1/(1188 * 1024**9), invisible at double precision here.
    correction = r * (
        1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0)))
    )
    value = x * math.log(x) - x + 0.5 * math.log(2.0 * math.pi * x) + correction
    return value, 0.0


def log_factorial(n: int) -> float:
    """log(n!) accurate to a few ulp (relative error well under 1e-14).

    Exact zero for n in {0, 1}. Values up to n = 1024 come from a lazily
    built table of compensated cumulative sums of log k; larger n uses a
    four-term Stirling series, which at that size is sharper than the
    table construction itself.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    hi, lo = _log_factorial_dd(n)
    return hi + lo


def stirling_approx(n: int) -> float:
    """Stirling's approximation n**n * exp(-n) * sqrt(2 pi n).

    Evaluated in log space. For n <= 170 the exponentiated value is
    returned (it still fits in a double there); for larger n the natural
    log of the approximation is returned instead, since the linear value
    would overflow.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n!r}")
    x = float(n)
    log_value = x * math.log(x) - x + 0.5 * math.log(2.0 * math.pi * x)
    if n <= 170:
        return math.exp(log_value)
    return log_value


# ---------------------------------------------------------------------------
# bracketed root finding


@dataclass(frozen=True)
class RootBracket:
    """An interval [lo, hi] certified to straddle a sign change of f.

    Construction fails unless lo < hi, all fields are finite and
    f_lo * f_hi < 0 strictly, so a root of a continuous f is guaranteed
    inside before any iteration starts.
    """

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self) -> None:
        for name in ("lo", "hi", "f_lo", "f_hi"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite, got {getattr(self, name)!r}")
        if not self.lo < self.hi:
            raise DomainError(
                f"bracket must satisfy lo < hi, got [{self.lo!r}, {self.hi!r}]"
            )
        if self.f_lo == 0.0 or self.f_hi == 0.0 or (self.f_lo < 0.0) == (self.f_hi < 0.0):
            raise DomainError(
                "bracket must satisfy f_lo * f_hi < 0, got "
                f"f(lo)={self.f_lo!r} and f(hi)={self.f_hi!r}"
            )

    @classmethod
    def from_function(cls, f: Callable[[float], float], lo: float, hi: float) -> "RootBracket":
        return cls(lo, hi, f(lo), f(hi))


_ROOT_ITERATION_CAP = 200


def find_root(
    f: Callable[[float], float],
    bracket: RootBracket,
    tolerance: float,
    max_iterations: int = _ROOT_ITERATION_CAP,
) -> float:
    """Hybrid secant/bisection search inside a certified bracket.

    Returns x with |f(x)| <= tolerance or with the bracket narrowed to
    width <= tolerance, whichever comes first. The secant (regula falsi)
    point is used whenever it falls strictly inside the current bracket
    and the interval keeps shrinking; otherwise the step falls back to
    bisection, so the bracket width halves at least every other
    iteration. Raises RootFindingError after ``max_iterations``.
    """
    if not (math.isfinite(tolerance) and tolerance > 0.0):
        raise DomainError(f"tolerance must be positive and finite, got {tolerance!r}")
    lo, hi = bracket.lo, bracket.hi
    f_lo, f_hi = bracket.f_lo, bracket.f_hi
    if abs(f_lo) <= abs(f_hi):
        best_x, best_f = lo, f_lo
    else:
        best_x, best_f = hi, f_hi
    if abs(best_f) <= tolerance:
        return best_x
    force_bisection = False
    for _ in range(max_iterations):
        width = hi - lo
        if width <= tolerance:
            return best_x
        x = None
        if not force_bisection and f_hi != f_lo:
            candidate = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
            if lo < candidate < hi:
                x = candidate
        if x is None:
            x = lo + 0.5 * width
            if not lo < x < hi:
                # interval no longer splittable in floating point
                return best_x
        fx = f(x)
        if not math.isfinite(fx):
            raise RootFindingError(f"f({x!r}) is not finite")
        if abs(fx) < abs(best_f):
            best_x, best_f = x, fx
        if abs(fx) <= tolerance:
            return x
        if (fx < 0.0) == (f_lo < 0.0):
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx
        # a secant step that failed to halve the interval forfeits the next turn
        force_bisection = (hi - lo) > 0.5 * width
    raise RootFindingError(
        f"no convergence within {max_iterations} iterations; "
        f"bracket [{lo!r}, {hi!r}], best residual {best_f!r}"
    )
