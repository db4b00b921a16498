"""Sequential (anytime-valid) DKW estimation.

Stage ``i = 1, 2, ...`` looks at the first ``n_i = n * i**2`` samples and
builds a band of half-width ``eps_i = sqrt(ln(2 / delta_i) / (2 n_i))`` with
``delta_i = delta / 2**i``. Since ``sum_i delta_i = delta``, a union bound
makes the intervals of *all* stages correct simultaneously with probability
at least ``1 - delta``, so the caller may stop at any stage, chosen by
looking at the data, without losing the guarantee.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, NamedTuple, Union

import numpy as np

from .aggregators import Aggregator, ConfidenceInterval, confidence_interval
from .distribution import GENERAL, BoundKind, DkwBand, SampleSet, dkw_delta
from .errors import ParameterError, StreamExhausted


@dataclass(frozen=True)
class StageSchedule:
    base_n: int
    confidence: float
    stage: int
    n: int
    delta: float
    epsilon: float


def stage_schedule(base_n: int, delta_conf: float, i: int) -> StageSchedule:
    if isinstance(i, bool) or int(i) != i or i < 1:
        raise ParameterError(f"stage index must be an integer >= 1, got {i!r}")
    if isinstance(base_n, bool) or int(base_n) != base_n or base_n < 1:
        raise ParameterError(f"base sample count must be a positive integer, got {base_n!r}")
    if not 0.0 < delta_conf < 1.0:
        raise ParameterError(f"confidence parameter must lie in (0, 1), got {delta_conf!r}")
    n = int(base_n) * int(i) ** 2
    delta_i = math.ldexp(delta_conf, -int(i))
    return StageSchedule(int(base_n), delta_conf, int(i), n, delta_i, dkw_delta(n, delta_i))


@dataclass(frozen=True)
class TargetWidth:
    """Stop once the interval is at most ``2 * epsilon`` wide."""

    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError(f"target precision must be positive, got {self.epsilon!r}")

    def fires(self, stage: int, interval: ConfidenceInterval) -> bool:
        return interval.width <= 2 * self.epsilon


@dataclass(frozen=True)
class MaxStages:
    limit: int

    def __post_init__(self):
        if isinstance(self.limit, bool) or int(self.limit) != self.limit or self.limit < 1:
            raise ParameterError(f"stage limit must be a positive integer, got {self.limit!r}")

    def fires(self, stage: int, interval: ConfidenceInterval) -> bool:
        return stage >= self.limit


StoppingRule = Union[TargetWidth, MaxStages]


@dataclass(frozen=True)
class SequentialConfig:
    """Parameters of a sequential run.

    ``stopping`` is one rule or a tuple of rules; the run ends as soon as any
    of them fires.
    """

    base_n: int
    confidence: float
    aggregator: Aggregator
    stopping: StoppingRule | tuple[StoppingRule, ...]
    bound: BoundKind = GENERAL

    def __post_init__(self):
        stage_schedule(self.base_n, self.confidence, 1)
        rules = self.stopping if isinstance(self.stopping, tuple) else (self.stopping,)
        if not rules:
            raise ParameterError("at least one stopping rule is required")
        object.__setattr__(self, "stopping", rules)

    def should_stop(self, stage: int, interval: ConfidenceInterval) -> bool:
        return any(rule.fires(stage, interval) for rule in self.stopping)


class StageResult(NamedTuple):
    stage: int
    interval: ConfidenceInterval
    n: int
    epsilon: float


def sequential_bands(stream: Iterable[float], base_n: int, delta_conf: float,
                     bound: BoundKind = GENERAL) -> Iterator[tuple[StageSchedule, DkwBand]]:
    """Yield the band of every stage; stage ``i`` extends the samples of stage ``i - 1``.

    The sorted prefix is kept between stages and new samples are merged in,
    so no sample is ever discarded or re-sorted from scratch.
    """
    it = iter(stream)
    prefix = np.empty(0)
    for i in itertools.count(1):
        sched = stage_schedule(base_n, delta_conf, i)
        need = sched.n - prefix.size
        chunk = np.fromiter(itertools.islice(it, need), dtype=float)
        if chunk.size < need:
            raise StreamExhausted(f"sample source exhausted during stage {i} "
                                  f"({prefix.size + chunk.size} of {sched.n} samples)")
        chunk.sort()
        prefix = np.insert(prefix, np.searchsorted(prefix, chunk, side="right"), chunk)
        band = DkwBand.with_half_width(SampleSet(prefix), sched.epsilon, bound, sched.delta)
        yield sched, band


def iter_sequential(stream: Iterable[float], config: SequentialConfig) -> Iterator[StageResult]:
    """Lazily emit one interval per stage until a stopping rule fires.

    Intervals carry the overall confidence parameter: they hold jointly.
    """
    last = None
    try:
        for sched, band in sequential_bands(stream, config.base_n, config.confidence, config.bound):
            ci = replace(confidence_interval(band, config.aggregator), confidence=config.confidence)
            last = StageResult(sched.stage, ci, sched.n, sched.epsilon)
            yield last
            if config.should_stop(sched.stage, ci):
                return
    except StreamExhausted as exc:
        raise StreamExhausted(str(exc), last=last) from None


def sequential_estimate(stream: Iterable[float], config: SequentialConfig) -> list[StageResult]:
    return list(iter_sequential(stream, config))
