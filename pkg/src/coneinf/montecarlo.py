"""Seeded replication harness.

Replication ``i`` of stream ``key`` always draws from
``SeedSequence(seed, spawn_key=(*key, i))``, so results do not depend on
how replications are sharded across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

WORKERS_ENV = "CONEINF_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def replication_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def replicate(fn: Callable[[np.random.Generator], object], replications: int, seed: int,
              stream: tuple = (), workers: int | None = None) -> np.ndarray:
    """Evaluate ``fn(rng)`` once per replication, in replication order."""
    if replications < 1:
        raise ValueError("replications must be >= 1")
    workers = workers or default_workers()

    def shard(lo, hi):
        return [fn(replication_rng(seed, *stream, i)) for i in range(lo, hi)]

    if workers == 1 or replications < 2 * workers:
        return np.asarray(shard(0, replications))
    bounds = np.linspace(0, replications, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(shard, bounds[:-1], bounds[1:]))
    return np.asarray([r for part in parts for r in part])


def binomial_se(p: float, replications: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / replications)
