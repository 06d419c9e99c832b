"""Alternating binomial sums (k-th forward differences) of (a + b*n)**p.

The quantity computed here is

    sum_{n=0}^{k} (-1)**(k-n) * C(k, n) * (a + b*n)**p,

the k-th forward difference of the sequence n -> (a + b*n)**p evaluated
at 0. For a polynomial argument this collapses exactly: the sum is 0
whenever 0 <= p < k, and b**k * k! when p = k. That dichotomy is what
lets a rearranged double series telescope down to a geometric series,
so it gets an exact rational implementation here and the floating-point
evaluations are checked against it.

Binomial coefficients come from the multiplicative recurrence
C(k, n+1) = C(k, n) * (k - n) / (n + 1) in arbitrary-precision integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

from .errors import DomainError
from .numerics import dd_add, dd_from_int, dd_mul, dd_pow_int, two_prod, two_sum
from .types import VerificationReport

RationalInput = Union[int, float, Fraction, Rational]

MAX_ORDER = 64  # cap on both p and k; far beyond anything the series needs


def _as_fraction(value: RationalInput, name: str) -> Fraction:
    if isinstance(value, bool):
        raise DomainError(f"{name} must be rational, got {value!r}")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")
        return Fraction(value)  # exact binary value of the double
    if isinstance(value, (int, Fraction, Rational)):
        return Fraction(value)
    raise DomainError(f"{name} must be rational, got {value!r}")


def _check_order(value: int, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise DomainError(f"{name} must be a non-negative integer, got {value!r}")
    if value > MAX_ORDER:
        raise DomainError(f"{name} must not exceed {MAX_ORDER}, got {value!r}")
    return value


@dataclass(frozen=True)
class DifferenceQuery:
    """Inputs for one difference evaluation, validated on construction.

    ``a`` and ``b`` are stored as exact fractions (floats convert to
    their exact binary value), ``p`` is the power and ``k`` the
    difference order, both capped at MAX_ORDER.
    """

    a: Fraction
    b: Fraction
    p: int
    k: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _as_fraction(self.a, "a"))
        object.__setattr__(self, "b", _as_fraction(self.b, "b"))
        _check_order(self.p, "p")
        _check_order(self.k, "k")


@dataclass(frozen=True)
class ExactValue:
    """A rational result in lowest terms with a positive denominator."""

    numerator: int
    denominator: int

    def __post_init__(self) -> None:
        if self.denominator < 1:
            raise DomainError(f"denominator must be >= 1, got {self.denominator!r}")
        if math.gcd(self.numerator, self.denominator) != 1:
            raise DomainError(
                f"{self.numerator}/{self.denominator} is not in lowest terms"
            )

    @classmethod
    def from_fraction(cls, value: Fraction) -> "ExactValue":
        return cls(value.numerator, value.denominator)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return self.numerator / self.denominator


def binomial_row(k: int) -> list[int]:
    """C(k, 0) .. C(k, k) as exact integers via the multiplicative recurrence."""
    _check_order(k, "k")
    row = [1]
    for n in range(k):
        row.append(row[-1] * (k - n) // (n + 1))
    return row


def difference_exact(query: DifferenceQuery) -> ExactValue:
    """The alternating sum in exact rational arithmetic.

    No rounding anywhere: powers, binomials and the accumulation all stay
    rational, so the polynomial dichotomy (zero below order k, b**k * k!
    at order k) holds as a literal equality of the returned value.
    """
    row = binomial_row(query.k)
    total = Fraction(0)
    for n in range(query.k + 1):
        term = row[n] * (query.a + query.b * n) ** query.p
        if (query.k - n) % 2:
            total -= term
        else:
            total += term
    return ExactValue.from_fraction(total)


def difference_float(a: float, b: float, p: int, k: int) -> float:
    """The same alternating sum in doubles with compensated accumulation.

    Cancellation-prone by construction: the summands grow like
    (a + b*k)**p while the result collapses to at most b**k * k!, so for
    large p and k most leading digits cancel and the compensation only
    protects the additions, not the lost digits of the inputs. Use
    difference_exact when the answer itself is the point.
    """
    _check_order(p, "p")
    _check_order(k, "k")
    row = binomial_row(k)
    s = 0.0
    c = 0.0
    for n in range(k + 1):
        term = float(row[n]) * (a + b * n) ** p
        if (k - n) % 2:
            term = -term
        t = s + term
        if abs(s) >= abs(term):
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
    return s + c


def difference_dd(a: float, b: float, p: int, k: int) -> tuple[float, float]:
    """The alternating sum carried in double-double precision.

    The extended-precision path used when a rearranged series needs the
    inner sums evaluated numerically without surrendering ~16 digits to
    cancellation. Returns an unevaluated (hi, lo) pair.
    """
    _check_order(p, "p")
    _check_order(k, "k")
    row = binomial_row(k)
    total = (0.0, 0.0)
    for n in range(k + 1):
        prod_hi, prod_lo = two_prod(b, float(n))
        base_hi, err = two_sum(a, prod_hi)
        base = dd_add((base_hi, err), (0.0, prod_lo))
        term = dd_mul(dd_from_int(row[n]), dd_pow_int(base, p))
        if (k - n) % 2:
            term = (-term[0], -term[1])
        total = dd_add(total, term)
    return total


def verify_gould(
    a_values: Iterable[RationalInput],
    b_values: Iterable[RationalInput],
    max_order: int,
) -> VerificationReport:
    """Sweep the exact dichotomy over a grid of offsets and slopes.

    For every a in ``a_values``, b in ``b_values`` and 0 <= p <= k <=
    ``max_order`` the exact difference is compared with its predicted
    value: 0 for p < k and b**k * k! for p = k. Equality is exact, no
    tolerance. A failed case is reported in the result, not raised; the
    report's message describes the first counterexample found.
    """
    if not isinstance(max_order, int) or isinstance(max_order, bool) or max_order < 0:
        raise DomainError(f"max_order must be a non-negative integer, got {max_order!r}")
    if max_order > 20:
        raise DomainError(f"max_order must not exceed 20, got {max_order!r}")
    a_list = [_as_fraction(a, "a_values entry") for a in a_values]
    b_list = [_as_fraction(b, "b_values entry") for b in b_values]
    cases = 0
    worst = Fraction(0)
    first_failure = ""
    for a in a_list:
        for b in b_list:
            for k in range(max_order + 1):
                k_factorial = math.factorial(k)
                for p in range(k + 1):
                    expected = b**k * k_factorial if p == k else Fraction(0)
                    got = difference_exact(DifferenceQuery(a, b, p, k)).as_fraction()
                    cases += 1
                    deviation = abs(got - expected)
                    if deviation:
                        if not first_failure:
                            first_failure = (
                                f"a={a}, b={b}, p={p}, k={k}: "
                                f"got {got}, expected {expected}"
                            )
                        if deviation > worst:
                            worst = deviation
    return VerificationReport(
        identity="difference-dichotomy",
        residual=float(worst),
        tolerance=0.0,
        passed=not first_failure,
        details={"cases_checked": cases},
        message=first_failure,
    )
