"""Mergeable moment accumulators and deterministic chunked sampling."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
import os

import numpy as np

WORKERS_ENV = "GAUSSMICRO_WORKERS"
DEFAULT_CHUNK = 4096


@dataclass(frozen=True)
class SampleStats:
    """Count, mean, sum of squared deviations, min and max of a sample.

    Two accumulators combine with :meth:`merge` (Chan et al. pairwise
    update), so partial results from independent chunks can be reduced in
    any grouping.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    min: float = math.inf
    max: float = -math.inf

    @classmethod
    def from_values(cls, values):
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            return cls()
        mean = float(v.mean())
        return cls(v.size, mean, float(np.sum((v - mean) ** 2)), float(v.min()), float(v.max()))

    def merge(self, other):
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return SampleStats(n, mean, m2, min(self.min, other.min), max(self.max, other.max))

    def __add__(self, other):
        return self.merge(other)

    @property
    def variance(self):
        """Unbiased sample variance (0 for fewer than two values)."""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std(self):
        return math.sqrt(self.variance)

    @property
    def stderr(self):
        return math.sqrt(self.variance / self.count) if self.count else math.inf

    def as_dict(self):
        return {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "stderr": self.stderr,
            "min": self.min,
            "max": self.max,
        }


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def chunk_sizes(samples, chunk_size=DEFAULT_CHUNK):
    full, rest = divmod(int(samples), int(chunk_size))
    return [chunk_size] * full + ([rest] if rest else [])


def map_chunks(fn, samples, stream, chunk_size=DEFAULT_CHUNK, workers=None):
    """Evaluate ``fn(generator, count)`` over fixed-size chunks of ``samples``.

    Chunk ``k`` always draws from ``stream.generator(k)``, and results are
    returned in chunk order, so the output does not depend on ``workers``.
    """
    sizes = chunk_sizes(samples, chunk_size)
    workers = default_workers() if workers is None else max(1, int(workers))

    def job(k):
        return fn(stream.generator(k), sizes[k])

    if workers == 1 or len(sizes) == 1:
        return [job(k) for k in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, range(len(sizes))))


def reduce_stats(parts):
    """Left fold of :class:`SampleStats` in the given order."""
    out = SampleStats()
    for p in parts:
        out = out.merge(p if isinstance(p, SampleStats) else SampleStats.from_values(p))
    return out
