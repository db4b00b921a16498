"""Model files and query strings.

Model files are JSON documents::

    {"kind": "dtmc" | "ctmc",
     "states": [{"id": str, "reward": number,
                 "transitions": [{"target": str, "prob": number}, ...]}, ...],
     "initial": str,
     "goal": [str, ...]}            # optional

CTMC transitions carry ``"rate"`` instead of ``"prob"``.

Queries follow::

    query := agg (";" agg)* ["until" ident] ["bounded" number]
    agg   := "mean" | "moment(" int ")" | "quantile(" real ")"
           | "cvar(" real ")" | "erisk(" real ")"

Without ``until`` the path variable is the total reward; without
``bounded`` the general (unbounded) case applies.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Any

from .aggregators import CVaR, Aggregator, EntropicRisk, Mean, Moment, Quantile
from .distribution import GENERAL, BoundKind, Bounded
from .errors import ModelError, ParameterError, QueryError
from .model import Model, PathVariable, ReachabilityReward, State, TotalReward, Transition

_WEIGHT_KEY = {"dtmc": "prob", "ctmc": "rate"}


def _reject_constant(name: str):
    raise ModelError(f"non-finite number {name} is not allowed")


def _no_duplicate_keys(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise ModelError(f"duplicate key {key!r}")
        out[key] = value
    return out


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelError(f"expected a number, got {type(value).__name__}", where)
    try:
        x = float(value)
    except OverflowError:
        raise ModelError("number out of range", where) from None
    if not math.isfinite(x):
        raise ModelError("number out of range", where)
    return x


def _string(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise ModelError(f"expected a string, got {type(value).__name__}", where)
    return value


def _object(value: Any, where: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(value, dict):
        raise ModelError(f"expected an object, got {type(value).__name__}", where)
    missing = sorted(required - value.keys())
    if missing:
        raise ModelError(f"missing field {missing[0]!r}", where)
    unknown = sorted(value.keys() - required - optional)
    if unknown:
        raise ModelError(f"unknown field {unknown[0]!r}", where)
    return value


def _list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise ModelError(f"expected a list, got {type(value).__name__}", where)
    return value


def parse_model(text: str | bytes) -> Model:
    """Parse and validate a model file; every error names its location."""
    try:
        if isinstance(text, (bytes, bytearray)):
            text = text.decode("utf-8")
        doc = json.loads(text, parse_constant=_reject_constant, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ModelError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    except UnicodeDecodeError as exc:
        raise ModelError(f"invalid UTF-8: {exc.reason}", f"byte {exc.start}") from None
    except ModelError as exc:
        raise ModelError(exc.message, exc.location or "document") from None
    except RecursionError:
        raise ModelError("document nested too deeply") from None
    except ValueError as exc:
        raise ModelError(str(exc), "document") from None

    _object(doc, "document", {"kind", "states", "initial"}, {"goal"})
    kind = _string(doc["kind"], "kind")
    if kind not in _WEIGHT_KEY:
        raise ModelError(f"kind must be 'dtmc' or 'ctmc', got {kind!r}", "kind")
    weight_key = _WEIGHT_KEY[kind]
    states = []
    for i, raw in enumerate(_list(doc["states"], "states")):
        where = f"states[{i}]"
        _object(raw, where, {"id", "reward", "transitions"})
        transitions = []
        for j, tr in enumerate(_list(raw["transitions"], f"{where}.transitions")):
            twhere = f"{where}.transitions[{j}]"
            _object(tr, twhere, {"target", weight_key})
            transitions.append(Transition(_string(tr["target"], f"{twhere}.target"),
                                          _number(tr[weight_key], f"{twhere}.{weight_key}")))
        states.append(State(_string(raw["id"], f"{where}.id"), _number(raw["reward"], f"{where}.reward"),
                            tuple(transitions)))
    initial = _string(doc["initial"], "initial")
    goal = None
    if "goal" in doc:
        goal = frozenset(_string(g, f"goal[{i}]") for i, g in enumerate(_list(doc["goal"], "goal")))
    return Model(kind, tuple(states), initial, goal)


def model_to_dict(model: Model) -> dict:
    key = _WEIGHT_KEY[model.kind]
    doc: dict[str, Any] = {
        "kind": model.kind,
        "states": [
            {"id": s.id, "reward": s.reward,
             "transitions": [{"target": t.target, key: t.weight} for t in s.transitions]}
            for s in model.states
        ],
        "initial": model.initial,
    }
    if model.goal is not None:
        doc["goal"] = sorted(model.goal)
    return doc


def serialize_model(model: Model) -> str:
    return json.dumps(model_to_dict(model), indent=2)


def load_model(path) -> Model:
    with open(path, "rb") as fh:
        return parse_model(fh.read())


@dataclass(frozen=True)
class Query:
    aggregators: tuple[Aggregator, ...]
    rv: PathVariable = TotalReward()
    bound: BoundKind = GENERAL

    def __post_init__(self):
        if not self.aggregators:
            raise QueryError("query needs at least one aggregator")


_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<number>[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_.\-]*)"
    r"|(?P<punct>[();])"
)
_INT = re.compile(r"[-+]?\d+")
_KEYWORDS = {"until", "bounded"}
_AGGREGATORS = {"moment": Moment, "quantile": Quantile, "cvar": CVaR, "erisk": EntropicRisk}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QueryError(f"unexpected character {text[pos]!r}", pos + 1)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _QueryParser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind: str, text: str | None = None, what: str | None = None):
        tok = self.peek()
        if tok[0] != kind or (text is not None and tok[1] != text):
            found = "end of query" if tok[0] == "end" else repr(tok[1])
            raise QueryError(f"expected {what or (repr(text) if text else kind)}, found {found}", tok[2])
        self.pos += 1
        return tok

    def aggregator(self) -> Aggregator:
        _, name, col = self.take("ident", what="aggregator name")
        if name == "mean":
            return Mean()
        if name not in _AGGREGATORS:
            raise QueryError(f"unknown aggregator {name!r}", col)
        self.take("punct", "(")
        _, arg, acol = self.take("number", what="numeric parameter")
        self.take("punct", ")")
        if name == "moment":
            if not _INT.fullmatch(arg):
                raise QueryError(f"moment order must be an integer, got {arg}", acol)
            value: float = int(arg)
        else:
            value = float(arg)
        try:
            return _AGGREGATORS[name](value)
        except ParameterError as exc:
            raise QueryError(str(exc), acol) from None

    def query(self) -> Query:
        aggs = [self.aggregator()]
        while self.peek()[:2] == ("punct", ";"):
            self.pos += 1
            aggs.append(self.aggregator())
        rv: PathVariable = TotalReward()
        bound: BoundKind = GENERAL
        seen: set[str] = set()
        while self.peek()[0] == "ident" and self.peek()[1] in _KEYWORDS:
            _, kw, col = self.take("ident")
            if kw in seen:
                raise QueryError(f"duplicate {kw!r} clause", col)
            seen.add(kw)
            if kw == "until":
                _, label, lcol = self.take("ident", what="goal label")
                if label in _KEYWORDS:
                    raise QueryError(f"expected goal label, found keyword {label!r}", lcol)
                rv = ReachabilityReward(label)
            else:
                _, num, ncol = self.take("number", what="upper bound")
                u = float(num)
                if not (math.isfinite(u) and u > 0):
                    raise QueryError(f"upper bound must be positive and finite, got {num}", ncol)
                bound = Bounded(u)
        tok = self.peek()
        if tok[0] != "end":
            raise QueryError(f"unexpected {tok[1]!r}", tok[2])
        return Query(tuple(aggs), rv, bound)


def parse_query(text: str) -> Query:
    if not isinstance(text, str):
        raise QueryError("query must be a string")
    return _QueryParser(text).query()
