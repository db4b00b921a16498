"""Command line front end.

Example::

    dkwsmc --model models/fig1.json --query "mean; quantile(0.3); cvar(0.3)" \\
        -k 1000 --delta 0.1 --cdf fig1.csv

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 invalid model or
query, 5 non-terminating path, 6 data inconsistent with the query (e.g. a
sample above the declared bound).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .aggregators import Aggregator, ConfidenceInterval, confidence_interval, point_estimate
from .distribution import Bounded, DkwBand
from .errors import BandError, ModelError, NonTermination, ParameterError, QueryError
from .parser import Query, load_model, parse_query
from .sequential import sequential_bands
from .simulate import DEFAULT_MAX_STEPS, SimConfig, run_simulations, sample_stream

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INVALID = 4
EXIT_NONTERMINATION = 5
EXIT_DATA = 6

CSV_HEADER = ("value", "ecdf", "lower", "upper")


def format_number(x: float) -> str:
    """Shortest decimal (never scientific) string that round-trips to ``x``."""
    return np.format_float_positional(float(x), unique=True, trim="-")


def export_cdf_csv(band: DkwBand, path) -> None:
    """Write the empirical CDF with its band edges, one row per jump.

    ``lower``/``upper`` are the band edges in CDF space,
    ``max(F - delta, 0)`` and ``min(F + delta, 1)``. Note that the upper edge
    is the CDF of the *smallest* variable in the band and vice versa.
    """
    e = band.ecdf
    lower = np.maximum(e.cumulative - band.delta, 0.0)
    upper = np.minimum(e.cumulative + band.delta, 1.0)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in zip(e.values, e.cumulative, lower, upper):
            w.writerow([format_number(x) for x in row])


def _fmt(x: float) -> str:
    return "∞" if math.isinf(x) else f"{x:.6g}"


def format_interval(ci: ConfidenceInterval) -> str:
    if ci.one_sided:
        return f"[{_fmt(ci.lo)}, ∞)"
    return f"[{_fmt(ci.lo)}, {_fmt(ci.hi)}]"


@dataclass
class _Row:
    agg: Aggregator
    estimate: float
    ci: ConfidenceInterval
    k: int
    delta: float
    stage: int | None = None
    epsilon: float | None = None


def _json_number(x: float):
    return None if math.isinf(x) else float(x)


def _record(row: _Row) -> str:
    rec = {
        "name": row.agg.name,
        "params": row.agg.params,
        "estimate": _json_number(row.estimate),
        "lo": _json_number(row.ci.lo),
        "hi": _json_number(row.ci.hi),
        "k": row.k,
        "delta": row.delta,
        "warnings": list(row.ci.warnings),
    }
    if row.stage is not None:
        rec["stage"] = row.stage
        rec["epsilon"] = row.epsilon
    return json.dumps(rec, ensure_ascii=False)


def _table(rows: list[_Row]) -> list[str]:
    name_w = max(len("aggregator"), *(len(str(r.agg)) for r in rows))
    est_w = max(len("estimate"), *(len(_fmt(r.estimate)) for r in rows))
    lines = [f"{'aggregator':<{name_w}}  {'estimate':>{est_w}}  confidence interval"]
    for r in rows:
        lines.append(f"{str(r.agg):<{name_w}}  {_fmt(r.estimate):>{est_w}}  {format_interval(r.ci)}")
    for r in rows:
        for w in r.ci.warnings:
            lines.append(f"warning: {r.agg}: {w}")
    return lines


def _evaluate(band: DkwBand, query: Query, delta: float, stage=None, epsilon=None) -> list[_Row]:
    return [
        _Row(a, point_estimate(band, a), confidence_interval(band, a), band.k, delta, stage, epsilon)
        for a in query.aggregators
    ]


def _header(args, query: Query) -> list[str]:
    return [
        f"# model: {args.model}",
        f"# path variable: {query.rv}; case: {query.bound}; seed: {args.seed}; max steps: {args.max_steps}",
    ]


def _fixed_report(args, model, query) -> tuple[list[str], DkwBand]:
    config = SimConfig(k=args.k, seed=args.seed, max_steps=args.max_steps, delta_conf=args.delta)
    samples = run_simulations(model, query.rv, config, workers=args.workers)
    band = DkwBand.from_samples(samples, args.delta, query.bound)
    rows = _evaluate(band, query, args.delta)
    if args.format == "json-lines":
        return [_record(r) for r in rows], band
    lines = _header(args, query)
    lines.append(f"# k = {band.k}, delta = {args.delta:g}, DKW half-width = {band.delta:.6g}; "
                 f"all intervals hold jointly with probability >= {1 - args.delta:g}")
    lines += _table(rows)
    if not isinstance(query.bound, Bounded) and any(r.ci.one_sided for r in rows):
        lines.append("note: general case (no upper bound given); mean and moment intervals are lower bounds only")
    return lines, band


def _sequential_report(args, model, query) -> tuple[list[str], DkwBand]:
    stream = sample_stream(model, query.rv, args.seed, args.max_steps)
    json_mode = args.format == "json-lines"
    lines = [] if json_mode else _header(args, query) + [
        f"# sequential DKW: base n = {args.base_n}, delta = {args.delta:g}; "
        f"the intervals of all stages hold jointly with probability >= {1 - args.delta:g}"
    ]
    band = None
    for sched, band in sequential_bands(stream, args.base_n, args.delta, query.bound):
        rows = _evaluate(band, query, args.delta, sched.stage, sched.epsilon)
        if json_mode:
            lines += [_record(r) for r in rows]
        else:
            lines.append(f"stage {sched.stage}: n = {sched.n}, epsilon = {sched.epsilon:.6g}")
            lines += ["  " + ln for ln in _table(rows)]
        if args.epsilon is not None and all(r.ci.width <= 2 * args.epsilon for r in rows):
            break
        if sched.stage >= args.max_stages:
            break
    return lines, band


def run_analysis(args: argparse.Namespace) -> tuple[int, str]:
    """Run one analysis; returns ``(exit status, text)``.

    On success the text is the report, otherwise an error message. Nothing
    is written (report or CSV) unless the whole analysis succeeded.
    """
    try:
        model = load_model(args.model)
    except OSError as exc:
        return EXIT_IO, f"error: cannot read model file: {exc}"
    except ModelError as exc:
        return EXIT_INVALID, f"error: {args.model}: {exc}"
    try:
        query = parse_query(args.query)
        model.compiled.goal_mask(model, query.rv)
    except QueryError as exc:
        return EXIT_INVALID, f"error: query: {exc}"
    except ModelError as exc:
        return EXIT_INVALID, f"error: query does not match model: {exc}"
    try:
        if args.sequential:
            lines, band = _sequential_report(args, model, query)
        else:
            lines, band = _fixed_report(args, model, query)
    except NonTermination as exc:
        return EXIT_NONTERMINATION, f"error: non-terminating path: {exc}"
    except BandError as exc:
        return EXIT_DATA, f"error: {exc}"
    except ParameterError as exc:
        return EXIT_USAGE, f"error: {exc}"
    if args.cdf:
        try:
            export_cdf_csv(band, args.cdf)
        except OSError as exc:
            return EXIT_IO, f"error: cannot write CSV: {exc}"
    return EXIT_OK, "\n".join(lines) + "\n"


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _probability(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"expected a number in (0, 1), got {text}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dkwsmc",
        description="Statistical model checking with DKW confidence bands: means, moments, "
                    "quantiles, CVaR and entropic risk from one confidence budget.",
    )
    p.add_argument("--model", required=True, metavar="FILE", help="model file (JSON)")
    p.add_argument("--query", required=True, metavar="STRING",
                   help='e.g. "mean; quantile(0.3); cvar(0.3) until goal bounded 100"')
    p.add_argument("-k", type=_positive_int, default=1000, help="number of simulations (default 1000)")
    p.add_argument("--delta", type=_probability, default=0.05,
                   help="error probability; intervals hold with probability 1 - delta (default 0.05)")
    p.add_argument("--seed", type=_seed, default=0, help="random seed (default 0)")
    p.add_argument("--max-steps", type=_positive_int, default=DEFAULT_MAX_STEPS,
                   help="maximum transitions per path (default 10^7)")
    p.add_argument("--cdf", metavar="FILE", help="export empirical CDF and DKW band as CSV")
    p.add_argument("--format", choices=("table", "json-lines"), default="table")
    p.add_argument("--workers", type=_positive_int, default=1, help="simulation threads (default 1)")
    seq = p.add_argument_group("sequential mode")
    seq.add_argument("--sequential", action="store_true", help="run sequential DKW instead of a fixed k")
    seq.add_argument("--base-n", type=_positive_int, default=100, help="stage i uses base_n * i^2 samples")
    seq.add_argument("--epsilon", type=float, default=None,
                     help="stop once every interval is at most 2 * epsilon wide")
    seq.add_argument("--max-stages", type=_positive_int, default=20, help="stage limit (default 20)")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.epsilon is not None and not args.epsilon > 0:
        parser.error("--epsilon must be positive")
    status, text = run_analysis(args)
    (sys.stdout if status == EXIT_OK else sys.stderr).write(text if status == EXIT_OK else text + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
