import numpy as np
import pytest

from echo_lab.parallel import chunk_bounds, map_chunks, thread_count
from echo_lab.rng import stream


def test_chunk_bounds_cover_range():
    for n in (1, 7, 100, 1001):
        for k in (1, 3, 64):
            b = chunk_bounds(n, k)
            assert b[0][0] == 0 and b[-1][1] == n
            assert all(x[1] == y[0] for x, y in zip(b, b[1:]))


def test_map_chunks_order_and_thread_independence():
    def work(a, b):
        return np.sum(np.sin(np.arange(a, b)))
    one = map_chunks(work, 10_000, threads=1, min_chunk=100)
    many = map_chunks(work, 10_000, threads=8, min_chunk=100)
    assert one == many


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("ECHO_LAB_THREADS", "3")
    assert thread_count() == 3
    assert thread_count(5) == 5
    monkeypatch.setenv("ECHO_LAB_THREADS", "many")
    with pytest.raises(ValueError):
        thread_count()
    monkeypatch.delenv("ECHO_LAB_THREADS")
    assert thread_count() >= 1


def test_streams_are_keyed_by_seed_and_purpose():
    a = stream(1, "mixture").random(4)
    assert np.array_equal(a, stream(1, "mixture").random(4))
    assert not np.array_equal(a, stream(2, "mixture").random(4))
    assert not np.array_equal(a, stream(1, "ensemble").random(4))
