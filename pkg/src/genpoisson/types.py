"""Result containers shared across modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import DomainError


@dataclass(frozen=True)
class SeriesResult:
    """Outcome of an adaptive series summation.

    ``value`` is the computed sum, ``tail_bound`` a rigorous bound on
    everything left out (truncated terms plus accumulated roundoff) and
    ``converged`` records whether that bound met the tolerance the caller
    asked for. A converged result therefore satisfies
    ``|value - true sum| <= tail_bound <= requested tolerance``.
    """

    value: float
    terms_used: int
    tail_bound: float
    converged: bool

    def __post_init__(self) -> None:
        if not isinstance(self.terms_used, int) or self.terms_used < 1:
            raise DomainError(f"terms_used must be a positive integer, got {self.terms_used!r}")
        if math.isnan(self.tail_bound) or self.tail_bound < 0.0:
            raise DomainError(f"tail_bound must be non-negative, got {self.tail_bound!r}")


@dataclass(frozen=True)
class VerificationReport:
    """One named identity checked numerically.

    ``residual`` is the worst absolute deviation observed, compared
    against ``tolerance``. ``details`` carries auxiliary measurements
    (worst grid point, case counts and the like) and ``message`` holds a
    human-readable account of the first counterexample when a check
    fails; it is empty on success.
    """

    identity: str
    residual: float
    tolerance: float
    passed: bool
    details: Mapping[str, float] = field(default_factory=dict)
    message: str = ""
