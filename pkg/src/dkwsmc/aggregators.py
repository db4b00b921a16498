"""Aggregation functions on step CDFs and the confidence intervals they induce.

Every aggregator here is monotone with respect to stochastic dominance, so
evaluating it on the two envelopes of a DKW band brackets its true value
whenever the band contains the true CDF. All intervals computed from one
band are therefore correct *simultaneously* with probability at least
``1 - band.confidence``; there is no need to split the confidence budget
across aggregators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Sequence, Union

import numpy as np

from .distribution import PROB_TOL, Bounded, DkwBand, StepCdf, mean_of_step_cdf
from .errors import ParameterError


def moment(cdf: StepCdf, n: int) -> float:
    """``E[X**n]``; infinite as soon as any mass sits at infinity."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError(f"moment order must be an integer >= 1, got {n!r}")
    if n == 1:
        return mean_of_step_cdf(cdf)
    if cdf.infinity_mass > 0:
        return math.inf
    return math.fsum(cdf.values ** int(n) * cdf.masses)


def _quantile_index(cdf: StepCdf, t: float) -> int:
    # Index of the first jump whose cumulative probability reaches t, or
    # len(cdf) if none does (the quantile is then infinite).
    return int(np.searchsorted(cdf.cumulative, t - PROB_TOL, side="left"))


def quantile(cdf: StepCdf, t: float) -> float:
    """Smallest ``v`` with ``P(X <= v) >= t`` (value-at-risk)."""
    if not 0.0 < t < 1.0:
        raise ParameterError(f"quantile level must lie in (0, 1), got {t!r}")
    i = _quantile_index(cdf, t)
    return float(cdf.values[i]) if i < len(cdf) else math.inf


def cvar(cdf: StepCdf, t: float) -> float:
    """Conditional value-at-risk: mean of the lowest ``t``-fraction of outcomes.

    The atom at the ``t``-quantile ``v`` enters only with the fraction
    ``t - P(X < v)`` needed to fill up probability ``t``.
    """
    if not 0.0 < t <= 1.0:
        raise ParameterError(f"CVaR level must lie in (0, 1], got {t!r}")
    i = _quantile_index(cdf, t)
    if i >= len(cdf):
        return math.inf
    v = float(cdf.values[i])
    below = float(cdf.cumulative[i - 1]) if i > 0 else 0.0
    head = math.fsum(cdf.values[:i] * cdf.masses[:i])
    return (head + (t - below) * v) / t


def entropic_risk(cdf: StepCdf, gamma: float) -> float:
    """``-(1/gamma) * log E[exp(-gamma * X)]``.

    Mass at infinity contributes nothing to the expectation. Evaluated
    relative to the smallest support point so that large ``gamma * x`` does
    not underflow and tiny ``gamma`` keeps its precision.
    """
    if not (gamma > 0 and math.isfinite(gamma)):
        raise ParameterError(f"risk aversion must be a positive finite number, got {gamma!r}")
    if len(cdf) == 0:
        return math.inf
    x0 = float(cdf.values[0])
    m = cdf.masses
    z = -gamma * (cdf.values - x0)
    # log E[exp(-gamma (X - x0))]: log1p keeps small gamma precise, plain log
    # avoids cancellation once the sum is far below 1.
    total = math.fsum(m * np.exp(z))
    if total > 0.5:
        return x0 - math.log1p(math.fsum(m * np.expm1(z)) - cdf.infinity_mass) / gamma
    return x0 - math.log(total) / gamma


@dataclass(frozen=True)
class Mean:
    name: ClassVar[str] = "mean"

    def evaluate(self, cdf: StepCdf) -> float:
        return mean_of_step_cdf(cdf)

    @property
    def params(self) -> dict:
        return {}

    def __str__(self) -> str:
        return "mean"


@dataclass(frozen=True)
class Moment:
    n: int
    name: ClassVar[str] = "moment"

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"moment order must be an integer >= 2, got {self.n!r}")

    def evaluate(self, cdf: StepCdf) -> float:
        return moment(cdf, self.n)

    @property
    def params(self) -> dict:
        return {"n": self.n}

    def __str__(self) -> str:
        return f"moment({self.n})"


@dataclass(frozen=True)
class Quantile:
    t: float
    name: ClassVar[str] = "quantile"

    def __post_init__(self):
        if not 0.0 < self.t < 1.0:
            raise ParameterError(f"quantile level must lie in (0, 1), got {self.t!r}")

    def evaluate(self, cdf: StepCdf) -> float:
        return quantile(cdf, self.t)

    @property
    def params(self) -> dict:
        return {"t": self.t}

    def __str__(self) -> str:
        return f"quantile({self.t:g})"


@dataclass(frozen=True)
class CVaR:
    t: float
    name: ClassVar[str] = "cvar"

    def __post_init__(self):
        if not 0.0 < self.t <= 1.0:
            raise ParameterError(f"CVaR level must lie in (0, 1], got {self.t!r}")

    def evaluate(self, cdf: StepCdf) -> float:
        return cvar(cdf, self.t)

    @property
    def params(self) -> dict:
        return {"t": self.t}

    def __str__(self) -> str:
        return f"cvar({self.t:g})"


@dataclass(frozen=True)
class EntropicRisk:
    gamma: float
    name: ClassVar[str] = "erisk"

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ParameterError(f"risk aversion must be a positive finite number, got {self.gamma!r}")

    def evaluate(self, cdf: StepCdf) -> float:
        return entropic_risk(cdf, self.gamma)

    @property
    def params(self) -> dict:
        return {"gamma": self.gamma}

    def __str__(self) -> str:
        return f"erisk({self.gamma:g})"


Aggregator = Union[Mean, Moment, Quantile, CVaR, EntropicRisk]


@dataclass(frozen=True)
class ConfidenceInterval:
    """``[lo, hi]`` for ``aggregator``; ``hi`` may be infinite (one-sided interval)."""

    lo: float
    hi: float
    confidence: float | None
    aggregator: Aggregator
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ParameterError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def one_sided(self) -> bool:
        return math.isinf(self.hi)

    def __contains__(self, value: float) -> bool:
        return self.lo <= value <= self.hi


def confidence_interval(band: DkwBand, agg: Aggregator) -> ConfidenceInterval:
    """Interval from evaluating ``agg`` on the lower and upper envelope of ``band``.

    Quantile levels outside ``(delta, 1 - delta]`` only admit the trivial
    bound on one side (0 below, infinity above in the general case); these
    are reported as such, with a warning attached.
    """
    lo = agg.evaluate(band.lower_env)
    hi = agg.evaluate(band.upper_env)
    if lo > hi and lo - hi <= 1e-12 * max(1.0, abs(hi)):
        lo = hi  # rounding noise of nearly identical envelopes
    warnings = []
    if isinstance(agg, (Quantile, CVaR)):
        t = agg.t
        if isinstance(agg, Quantile) and t <= band.delta:
            warnings.append(f"level {t:g} <= band half-width {band.delta:.4g}: lower bound is trivial (0)")
        if not isinstance(band.bound, Bounded) and t > 1.0 - band.delta:
            warnings.append(f"level {t:g} > 1 - band half-width {band.delta:.4g}: upper bound is infinite")
    return ConfidenceInterval(lo, hi, band.confidence, agg, tuple(warnings))


def confidence_intervals(band: DkwBand, aggs: Sequence[Aggregator]) -> list[ConfidenceInterval]:
    """All intervals share the band's confidence; they hold jointly."""
    return [confidence_interval(band, a) for a in aggs]


def point_estimate(band: DkwBand, agg: Aggregator) -> float:
    return agg.evaluate(band.ecdf)
