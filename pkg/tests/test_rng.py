import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dkwsmc.rng import GOLDEN, MASK64, TraceStream, check_seed, mix64, trace_key, trace_keys, uniforms


def test_splitmix64_reference_vector():
    # SplitMix64 seeded with 1234567: first two outputs
    assert mix64(1234567 + GOLDEN) == 6457827717110365317
    assert mix64(1234567 + 2 * GOLDEN) == 3203168211198807973


def test_stream_is_splitmix_sequence():
    s = TraceStream(5, 3)
    key = trace_key(5, 3)
    assert [s.next_u64() for _ in range(3)] == [mix64(key + j * GOLDEN) for j in (1, 2, 3)]


@given(st.integers(0, MASK64), st.lists(st.integers(0, 10**9), min_size=1, max_size=20), st.integers(1, 50))
def test_scalar_and_vector_agree(seed, traces, counter):
    keys = trace_keys(seed, np.array(traces, dtype=np.uint64))
    assert keys.tolist() == [trace_key(seed, t) for t in traces]
    vec = uniforms(keys, counter)
    for t, u in zip(traces, vec):
        s = TraceStream(seed, t)
        for _ in range(counter - 1):
            s.next_u64()
        assert s.uniform() == u


def test_uniforms_in_unit_interval():
    u = uniforms(trace_keys(0, np.arange(100_000, dtype=np.uint64)), 1)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.005


@pytest.mark.parametrize("bad", [-1, 2**64, 1.5, True])
def test_seed_validation(bad):
    with pytest.raises(ValueError):
        check_seed(bad)
