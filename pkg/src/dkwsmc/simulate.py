"""Monte Carlo sampling of path rewards.

Two engines share the compiled model and the counter-based streams of
:mod:`dkwsmc.rng`:

* :func:`sample_path_dtmc` / :func:`sample_path_ctmc` walk one path with an
  explicit stream object. They are the readable reference.
* :func:`simulate` advances a whole block of traces in lockstep with numpy.
  Trace ``i`` consumes exactly the draws ``(seed, i, 1), (seed, i, 2), ...``
  the reference sampler would, so both produce identical values.

Stopping rules: a path ends in a goal state (reachability reward, goal
reward excluded) or in an absorbing zero-reward state (total reward).
Absorbing states from which the reward would diverge or the goal can no
longer be reached, and paths longer than ``max_steps`` transitions, raise
:class:`NonTermination`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Protocol

import numpy as np

from .distribution import SampleSet
from .errors import NonTermination, ParameterError
from .model import Model, PathVariable
from .rng import TraceStream, check_seed, trace_keys, uniforms

BLOCK_SIZE = 4096
DEFAULT_MAX_STEPS = 10**7


class UniformSource(Protocol):
    def uniform(self) -> float: ...


@dataclass(frozen=True)
class SimConfig:
    k: int
    seed: int = 0
    max_steps: int = DEFAULT_MAX_STEPS
    delta_conf: float = 0.05

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k!r}")
        if isinstance(self.max_steps, bool) or int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ParameterError(f"max_steps must be a positive integer, got {self.max_steps!r}")
        if not 0 < self.delta_conf < 1:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta_conf!r}")
        try:
            check_seed(self.seed)
        except ValueError as exc:
            raise ParameterError(str(exc)) from None


def _dead_end(model: Model, state: int, reachability: bool) -> str:
    sid = model.states[state].id
    if reachability:
        return f"absorbing state {sid!r} entered before reaching the goal"
    return f"absorbing state {sid!r} has positive reward; total reward diverges"


def _sample_path(model: Model, rv: PathVariable, stream: UniformSource, max_steps: int, trace=None) -> float:
    cm = model.compiled
    goal = cm.goal_mask(model, rv)
    continuous = cm.kind == "ctmc"
    s = cm.initial
    total = np.float64(0.0)
    steps = 0
    while True:
        if goal is not None and goal[s]:
            return float(total)
        if cm.absorbing[s]:
            if goal is not None or cm.rewards[s] > 0:
                raise NonTermination(_dead_end(model, s, goal is not None), trace, steps)
            return float(total)
        if steps >= max_steps:
            raise NonTermination(f"no stopping condition within {max_steps} steps", trace, steps)
        if continuous:
            u = np.float64(stream.uniform())
            total = total + cm.rewards[s] * (-np.log1p(-u) / cm.exit_rates[s])
        else:
            total = total + cm.rewards[s]
        u = stream.uniform()
        j = int(np.count_nonzero(u >= cm.thresholds[s]))
        s = int(cm.targets[s, j])
        steps += 1


def sample_path_dtmc(model: Model, rv: PathVariable, stream: UniformSource,
                     max_steps: int = DEFAULT_MAX_STEPS) -> float:
    """Sample one path reward of a DTMC; rewards are collected per visit."""
    if model.kind != "dtmc":
        raise ParameterError("sample_path_dtmc needs a DTMC")
    return _sample_path(model, rv, stream, max_steps)


def sample_path_ctmc(model: Model, rv: PathVariable, stream: UniformSource,
                     max_steps: int = DEFAULT_MAX_STEPS) -> float:
    """Sample one path reward of a CTMC.

    Each step draws an exponential sojourn time with the state's exit rate
    (first uniform), accrues reward rate times sojourn, then picks the
    successor proportionally to the rates (second uniform).
    """
    if model.kind != "ctmc":
        raise ParameterError("sample_path_ctmc needs a CTMC")
    return _sample_path(model, rv, stream, max_steps)


def simulate(model: Model, rv: PathVariable, seed: int, start: int, stop: int,
             max_steps: int = DEFAULT_MAX_STEPS) -> np.ndarray:
    """Path rewards of traces ``start, ..., stop - 1`` in trace order."""
    cm = model.compiled
    goal = cm.goal_mask(model, rv)
    reach = goal is not None
    continuous = cm.kind == "ctmc"
    out = np.empty(stop - start)
    idx = np.arange(stop - start)
    keys = trace_keys(seed, np.arange(start, stop, dtype=np.uint64))
    s = np.full(idx.size, cm.initial, dtype=np.int64)
    acc = np.zeros(idx.size)
    counter = 0
    steps = 0
    while idx.size:
        done = cm.absorbing[s]
        if reach:
            hit = goal[s]
            bad = done & ~hit
            done = done | hit
        else:
            bad = done & (cm.rewards[s] > 0)
        if bad.any():
            first = int(np.argmax(bad))
            raise NonTermination(_dead_end(model, int(s[first]), reach), start + int(idx[first]), steps)
        if done.any():
            out[idx[done]] = acc[done]
            keep = ~done
            idx, s, acc, keys = idx[keep], s[keep], acc[keep], keys[keep]
            if not idx.size:
                break
        if steps >= max_steps:
            raise NonTermination(f"no stopping condition within {max_steps} steps", start + int(idx[0]), steps)
        if continuous:
            counter += 1
            u = uniforms(keys, counter)
            acc = acc + cm.rewards[s] * (-np.log1p(-u) / cm.exit_rates[s])
        else:
            acc = acc + cm.rewards[s]
        counter += 1
        u = uniforms(keys, counter)
        j = np.count_nonzero(u[:, None] >= cm.thresholds[s], axis=1)
        s = cm.targets[s, j]
        steps += 1
    return out


def _blocks(start: int, stop: int, block_size: int) -> list[tuple[int, int]]:
    return [(a, min(a + block_size, stop)) for a in range(start, stop, block_size)]


def run_simulations(model: Model, rv: PathVariable, config: SimConfig, workers: int = 1,
                    block_size: int = BLOCK_SIZE) -> SampleSet:
    """Draw ``config.k`` i.i.d. path rewards.

    Traces are cut into fixed blocks independent of ``workers``, so the
    result is bit-identical for any degree of parallelism. On failure the
    :class:`NonTermination` of the lowest failing block is raised.
    """
    if workers < 1:
        raise ParameterError("workers must be >= 1")
    model.compiled.goal_mask(model, rv)  # resolve the goal before spawning work
    blocks = _blocks(0, config.k, block_size)

    def run(block):
        return simulate(model, rv, config.seed, block[0], block[1], config.max_steps)

    if workers == 1 or len(blocks) == 1:
        parts = [run(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run, b) for b in blocks]
            parts = [f.result() for f in futures]
    return SampleSet(np.concatenate(parts))


def sample_stream(model: Model, rv: PathVariable, seed: int, max_steps: int = DEFAULT_MAX_STEPS,
                  start: int = 0, block_size: int = BLOCK_SIZE) -> Iterator[float]:
    """Endless stream of path rewards in trace order (for sequential estimation)."""
    pos = start
    while True:
        yield from simulate(model, rv, seed, pos, pos + block_size, max_steps).tolist()
        pos += block_size


def trace_stream(seed: int, trace: int) -> TraceStream:
    return TraceStream(seed, trace)

