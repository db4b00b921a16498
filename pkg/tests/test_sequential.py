import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dkwsmc import (
    Bounded,
    CVaR,
    MaxStages,
    Mean,
    ParameterError,
    Quantile,
    SequentialConfig,
    StreamExhausted,
    TargetWidth,
    dkw_delta,
    ecdf_from_samples,
    sequential_bands,
    sequential_estimate,
    stage_schedule,
)
from dkwsmc.sequential import iter_sequential


def test_schedule_examples():
    s1 = stage_schedule(100, 0.1, 1)
    assert (s1.n, s1.delta) == (100, 0.05)
    assert s1.epsilon == pytest.approx(0.13581015157406195, abs=1e-15)
    s2 = stage_schedule(100, 0.1, 2)
    assert (s2.n, s2.delta) == (400, 0.025)
    assert s2.epsilon == pytest.approx(0.07401035936503991, abs=1e-15)
    s5 = stage_schedule(7, 0.2, 5)
    assert s5.n == 175 and s5.delta == 0.2 / 32
    assert s5.epsilon == dkw_delta(175, 0.2 / 32)


@pytest.mark.parametrize("args", [(100, 0.1, 0), (0, 0.1, 1), (100, 1.0, 1), (100, 0.1, 1.5), (100, 0.0, 1)])
def test_schedule_rejects_bad_arguments(args):
    with pytest.raises(ParameterError):
        stage_schedule(*args)


@given(st.integers(1, 10_000), st.floats(1e-6, 0.99), st.integers(1, 60))
def test_epsilon_decreases(base_n, d, i):
    assert stage_schedule(base_n, d, i + 1).epsilon < stage_schedule(base_n, d, i).epsilon


@given(st.floats(1e-6, 0.99))
def test_budget_sums_to_delta(d):
    total = math.fsum(stage_schedule(1, d, i).delta for i in range(1, 200))
    assert total == pytest.approx(d, rel=1e-12)


def test_constant_stream():
    config = SequentialConfig(10, 0.1, Quantile(0.5), MaxStages(3))
    results = sequential_estimate(iter([2.0] * 1000), config)
    assert [r.stage for r in results] == [1, 2, 3]
    assert [r.n for r in results] == [10, 40, 90]
    for r in results:
        assert (r.interval.lo, r.interval.hi) == (2.0, 2.0)
        assert r.interval.confidence == 0.1


def test_bernoulli_stream_stops_at_target():
    rng = np.random.default_rng(42)
    stream = iter(rng.binomial(1, 0.4, size=200_000).astype(float))
    config = SequentialConfig(100, 0.1, Mean(), TargetWidth(0.05), Bounded(1.0))
    results = sequential_estimate(stream, config)
    expected = next(i for i in range(1, 100) if stage_schedule(100, 0.1, i).epsilon <= 0.05)
    last = results[-1]
    assert last.stage == expected
    assert last.interval.width <= 0.1
    assert all(r.interval.width > 0.1 for r in results[:-1])
    assert 0.4 in last.interval


def test_stopping_rules_combine():
    config = SequentialConfig(10, 0.1, Mean(), (TargetWidth(1e-9), MaxStages(2)), Bounded(5))
    assert [r.stage for r in sequential_estimate(iter(np.arange(10_000) % 5.0), config)] == [1, 2]
    with pytest.raises(ParameterError):
        SequentialConfig(10, 0.1, Mean(), ())
    with pytest.raises(ParameterError):
        MaxStages(0)
    with pytest.raises(ParameterError):
        TargetWidth(0)


def test_prefix_property():
    xs = np.random.default_rng(1).exponential(3.0, size=10_000)
    for sched, band in sequential_bands(iter(xs), 15, 0.2):
        assert band.k == sched.n
        expected = ecdf_from_samples(xs[: sched.n])
        assert np.array_equal(band.ecdf.values, expected.values)
        assert np.allclose(band.ecdf.cumulative, expected.cumulative, rtol=0, atol=1e-15)
        assert band.delta == sched.epsilon and band.confidence == sched.delta
        if sched.stage == 6:
            break


def test_stream_exhaustion_reports_last_stage():
    config = SequentialConfig(10, 0.1, Mean(), MaxStages(10))
    with pytest.raises(StreamExhausted) as info:
        sequential_estimate(iter([1.0] * 50), config)
    assert info.value.last.stage == 2 and info.value.last.n == 40
    with pytest.raises(StreamExhausted) as info:
        sequential_estimate(iter([1.0] * 5), config)
    assert info.value.last is None


def test_bounded_upper_envelope_clamps_at_bound():
    stream = iter(np.random.default_rng(3).uniform(0, 4, size=5000))
    for sched, band in sequential_bands(stream, 20, 0.1, Bounded(4.0)):
        up = band.upper_env
        assert up.infinity_mass == 0
        assert up.values[-1] == 4.0
        assert up.masses[-1] >= sched.epsilon - 1e-12
        if sched.stage == 3:
            break


def test_mean_is_lower_bound_only_in_general_case():
    stream = iter(np.random.default_rng(4).exponential(1.0, size=5000))
    results = sequential_estimate(stream, SequentialConfig(50, 0.1, Mean(), MaxStages(4)))
    assert all(r.interval.one_sided and r.interval.hi == math.inf for r in results)
    los = [r.interval.lo for r in results]
    assert all(0 < lo < 1 for lo in los)


def test_lazy_iteration_stops_early():
    pulled = 0

    def source():
        nonlocal pulled
        while True:
            pulled += 1
            yield 1.0

    it = iter_sequential(source(), SequentialConfig(10, 0.1, Mean(), MaxStages(100)))
    next(it)
    assert pulled <= 11


def test_joint_coverage_over_all_stages():
    # Every stage of a run must cover the true CVaR; runs where some stage
    # misses must be rarer than delta (with 3 sigma slack).
    support = np.array([0.0, 1.0, 3.0, 6.0])
    probs = np.array([0.2, 0.4, 0.3, 0.1])
    t = 0.5
    true_cvar = (0.2 * 0.0 + 0.3 * 1.0) / t
    d, reps, stages = 0.1, 500, 5
    rng = np.random.default_rng(777)
    ok = 0
    config = SequentialConfig(20, d, CVaR(t), MaxStages(stages), Bounded(6.0))
    for _ in range(reps):
        draws = rng.choice(support, size=20 * stages**2, p=probs)
        results = sequential_estimate(iter(draws), config)
        ok += all(true_cvar in r.interval for r in results)
    assert ok / reps >= 1 - d - 3 * math.sqrt(d * (1 - d) / reps)
