# -*- coding: utf-8 -*-

import numpy as np
import pytest

from bigjump.process import WorkerPool


class Draws(object):

    def sample(self, n, rng):
        return rng.random(n)


def test_chunk_sizes():
    assert WorkerPool(3).chunk_sizes(10) == [4, 3, 3]
    assert WorkerPool(4).chunk_sizes(2) == [1, 1, 0, 0]
    assert WorkerPool().chunk_sizes(7) == [7]


def test_needs_a_worker():
    with pytest.raises(ValueError):
        WorkerPool(0)


def test_sample_is_reproducible():
    first = WorkerPool(1).sample(Draws(), 100, seed=5)
    second = WorkerPool(1).sample(Draws(), 100, seed=5)
    assert first.size == 100
    assert np.array_equal(first, second)
    assert not np.array_equal(first, WorkerPool(1).sample(Draws(), 100, seed=6))


def test_sample_across_processes():
    pool = WorkerPool(2)
    sizes = pool.chunk_sizes(7)
    assert sizes == [4, 3]
    inline = pool.map(Draws().sample, sizes, seed=1)
    assert [len(part) for part in inline] == sizes
    pooled = pool.sample(Draws(), 7, seed=1)
    # Chunks keep their own streams whichever process runs them.
    assert np.array_equal(pooled, np.concatenate(inline))
