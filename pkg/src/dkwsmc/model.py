"""Discrete- and continuous-time Markov chains with state rewards."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Union

import numpy as np

from .errors import ModelError

PROB_SUM_TOL = 1e-9

Kind = Literal["dtmc", "ctmc"]


@dataclass(frozen=True)
class Transition:
    target: str
    weight: float  # probability (DTMC) or rate (CTMC)


@dataclass(frozen=True)
class State:
    id: str
    reward: float  # per visit (DTMC) or per time unit (CTMC)
    transitions: tuple[Transition, ...] = ()


@dataclass(frozen=True)
class TotalReward:
    """Sum of state rewards along the whole path."""

    def __str__(self) -> str:
        return "total reward"


@dataclass(frozen=True)
class ReachabilityReward:
    """Reward accumulated until the first visit of a goal state (goal reward excluded).

    ``label`` is resolved against the model: ``"goal"`` means the model's goal
    set, any other label names a single state. ``states`` overrides the label.
    """

    label: str = "goal"
    states: frozenset[str] | None = None

    def __str__(self) -> str:
        return f"reachability reward until {self.label}"


PathVariable = Union[TotalReward, ReachabilityReward]


@dataclass(frozen=True)
class Model:
    kind: Kind
    states: tuple[State, ...]
    initial: str
    goal: frozenset[str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if self.goal is not None:
            object.__setattr__(self, "goal", frozenset(self.goal))
        if self.kind not in ("dtmc", "ctmc"):
            raise ModelError(f"unknown model kind {self.kind!r}", "kind")
        if not self.states:
            raise ModelError("model has no states", "states")
        ids: dict[str, int] = {}
        for i, s in enumerate(self.states):
            where = f"states[{i}]"
            if s.id in ids:
                raise ModelError(f"duplicate state id {s.id!r}", f"{where}.id")
            ids[s.id] = i
            if not (math.isfinite(s.reward) and s.reward >= 0):
                raise ModelError(f"state {s.id!r}: reward must be finite and nonnegative, got {s.reward!r}",
                                 f"{where}.reward")
        for i, s in enumerate(self.states):
            where = f"states[{i}]"
            for j, tr in enumerate(s.transitions):
                if tr.target not in ids:
                    raise ModelError(f"state {s.id!r}: unknown transition target {tr.target!r}",
                                     f"{where}.transitions[{j}].target")
                if self.kind == "dtmc" and not 0 < tr.weight <= 1:
                    raise ModelError(f"state {s.id!r}: probability {tr.weight!r} outside (0, 1]",
                                     f"{where}.transitions[{j}].prob")
                if self.kind == "ctmc" and not (tr.weight > 0 and math.isfinite(tr.weight)):
                    raise ModelError(f"state {s.id!r}: rate must be positive and finite, got {tr.weight!r}",
                                     f"{where}.transitions[{j}].rate")
            if self.kind == "dtmc":
                total = math.fsum(tr.weight for tr in s.transitions)
                if abs(total - 1.0) > PROB_SUM_TOL:
                    raise ModelError(f"state {s.id!r}: outgoing probabilities sum to {total!r}, not 1",
                                     f"{where}.transitions")
        if self.initial not in ids:
            raise ModelError(f"initial state {self.initial!r} does not exist", "initial")
        if self.goal is not None:
            for g in sorted(self.goal):
                if g not in ids:
                    raise ModelError(f"goal state {g!r} does not exist", "goal")

    @cached_property
    def index(self) -> dict[str, int]:
        return {s.id: i for i, s in enumerate(self.states)}

    def goal_states(self, rv: ReachabilityReward) -> frozenset[str]:
        if rv.states is not None:
            goal = frozenset(rv.states)
        elif rv.label == "goal" and self.goal is not None:
            goal = self.goal
        elif rv.label in self.index:
            goal = frozenset({rv.label})
        else:
            raise ModelError(f"cannot resolve goal label {rv.label!r}", "goal")
        if not goal:
            raise ModelError("reachability reward needs a nonempty goal set", "goal")
        unknown = sorted(goal - self.index.keys())
        if unknown:
            raise ModelError(f"goal state {unknown[0]!r} does not exist", "goal")
        return goal

    @cached_property
    def compiled(self) -> "CompiledModel":
        return CompiledModel.build(self)


@dataclass(frozen=True, eq=False)
class CompiledModel:
    """Array form of a model used by the samplers.

    ``thresholds[s, j]`` is the cumulative jump probability of the first
    ``j + 1`` successors of ``s``; entries from the last successor onwards are
    ``inf`` so that the successor index for a uniform ``u`` is simply
    ``count(u >= thresholds[s])``. The last successor thus also absorbs any
    rounding shortfall of the cumulative sum.
    """

    kind: Kind
    initial: int
    rewards: np.ndarray
    targets: np.ndarray
    thresholds: np.ndarray
    degree: np.ndarray
    exit_rates: np.ndarray
    absorbing: np.ndarray

    @classmethod
    def build(cls, model: Model) -> "CompiledModel":
        n = len(model.states)
        index = model.index
        width = max(1, max(len(s.transitions) for s in model.states))
        targets = np.zeros((n, width), dtype=np.int64)
        thresholds = np.full((n, width), np.inf)
        degree = np.zeros(n, dtype=np.int64)
        exit_rates = np.zeros(n)
        absorbing = np.zeros(n, dtype=bool)
        for i, s in enumerate(model.states):
            d = len(s.transitions)
            degree[i] = d
            if d == 0:
                targets[i, 0] = i
                absorbing[i] = True
                continue
            tgt = [index[tr.target] for tr in s.transitions]
            w = np.array([tr.weight for tr in s.transitions])
            total = math.fsum(w)
            exit_rates[i] = total
            targets[i, :d] = tgt
            thresholds[i, : d - 1] = np.cumsum(w / total)[: d - 1]
            absorbing[i] = all(t == i for t in tgt)
        rewards = np.array([s.reward for s in model.states], dtype=float)
        arrays = (rewards, targets, thresholds, degree, exit_rates, absorbing)
        for a in arrays:
            a.setflags(write=False)
        return cls(model.kind, index[model.initial], *arrays)

    def goal_mask(self, model: Model, rv: PathVariable) -> np.ndarray | None:
        if isinstance(rv, TotalReward):
            return None
        mask = np.zeros(self.rewards.size, dtype=bool)
        for g in model.goal_states(rv):
            mask[model.index[g]] = True
        return mask
