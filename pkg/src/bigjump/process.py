# -*- coding: utf-8 -*-

"""
Worker processes for path simulation.

Each task owns an independent random stream spawned from the master
seed, and results are collected in task order, so a run is reproducible
for a fixed ``(seed, workers)`` pair.
"""

from concurrent.futures import ProcessPoolExecutor
import logging

import numpy as np

logger = logging.getLogger(__name__)


def _seeded_call(func, arg, seed_seq):
    return func(arg, np.random.default_rng(seed_seq))


class WorkerPool(object):
    """
    Runs ``func(arg, rng)`` tasks inline or across worker processes.

    :param workers: Number of worker processes; 1 runs everything in the
        calling process.
    :type workers: int
    """
    workers = 1

    def __init__(self, workers=None):
        if workers is not None:
            self.workers = int(workers)
        if self.workers < 1:
            raise ValueError('workers must be at least 1')

    def chunk_sizes(self, n):
        base, extra = divmod(int(n), self.workers)
        return [base + (1 if i < extra else 0) for i in range(self.workers)]

    def map(self, func, args, seed):
        """
        Apply ``func`` to every argument with its own spawned stream.

        :returns: list of results in argument order.
        """
        args = list(args)
        streams = np.random.SeedSequence(seed).spawn(len(args))
        if self.workers == 1 or len(args) <= 1:
            return [_seeded_call(func, arg, s) for arg, s in zip(args, streams)]
        with ProcessPoolExecutor(max_workers=min(self.workers, len(args))) as pool:
            futures = [pool.submit(_seeded_call, func, arg, s)
                    for arg, s in zip(args, streams)]
            return [f.result() for f in futures]

    def sample(self, sampler, n, seed):
        """
        Draw ``n`` samples from ``sampler.sample(size, rng)`` split into one
        chunk per worker.
        """
        sizes = self.chunk_sizes(n)
        logger.debug('sampling %d paths in chunks %s', n, sizes)
        parts = self.map(sampler.sample, sizes, seed)
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])
