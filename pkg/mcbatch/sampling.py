"""Integration domains and keyed uniform sample streams.

Every stream comes from numpy's Philox generator, a counter-based
construction: the 128-bit key holds the global seed and the
(integrand, trial) pair, and the 256-bit counter starts at
``(0, 0, cell, chunk)``. Draws only advance the low counter words, so any
worker can produce any chunk of any stream without coordination.
"""

import math
from dataclasses import dataclass, replace
from itertools import product

import numpy as np

from mcbatch.error import DomainError

CHUNK_SIZE = 65536
_MASK_32 = 0xFFFFFFFF
_MASK_64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class HyperRect:
    low: tuple
    high: tuple

    def __post_init__(self):
        low = tuple(float(v) for v in self.low)
        high = tuple(float(v) for v in self.high)
        if not low or len(low) != len(high):
            raise DomainError('low and high must be non-empty and of equal length')
        for axis, (a, b) in enumerate(zip(low, high)):
            if not (math.isfinite(a) and math.isfinite(b)):
                raise DomainError('axis {} has a non-finite bound'.format(axis))
            if not a < b:
                raise DomainError('axis {} has low {!r} >= high {!r}'.format(axis, a, b))
        object.__setattr__(self, 'low', low)
        object.__setattr__(self, 'high', high)

    @classmethod
    def unit(cls, dim):
        return cls((0.0,) * dim, (1.0,) * dim)

    @property
    def dim(self):
        return len(self.low)

    @property
    def edges(self):
        return tuple(b - a for a, b in zip(self.low, self.high))

    def longest_axis(self):
        edges = self.edges
        return edges.index(max(edges))

    def bisect(self, axis):
        mid = 0.5 * (self.low[axis] + self.high[axis])
        lower_high = self.high[:axis] + (mid,) + self.high[axis + 1:]
        upper_low = self.low[:axis] + (mid,) + self.low[axis + 1:]
        return HyperRect(self.low, lower_high), HyperRect(upper_low, self.high)

    def subcell(self, index, k):
        """The cell at multi-index ``index`` of a ``k``-per-axis grid."""
        low = list()
        high = list()
        for i, a, b in zip(index, self.low, self.high):
            width = b - a
            low.append(a + width * i / k)
            high.append(b if i + 1 == k else a + width * (i + 1) / k)
        return HyperRect(tuple(low), tuple(high))

    def grid(self, k):
        """All ``k**dim`` cells in lexicographic order (last axis fastest)."""
        for index in product(range(k), repeat=self.dim):
            yield self.subcell(index, k)


@dataclass(frozen=True)
class StreamKey:
    global_seed: int
    integrand_index: int = 0
    trial_index: int = 0
    chunk_index: int = 0
    cell_index: int = 0

    def replace(self, **fields):
        return replace(self, **fields)

    def generator(self):
        key = np.array([self.global_seed & _MASK_64,
                        ((self.integrand_index & _MASK_32) << 32) | (self.trial_index & _MASK_32)],
                       dtype=np.uint64)
        counter = np.array([0, 0, self.cell_index & _MASK_64, self.chunk_index & _MASK_64],
                           dtype=np.uint64)
        return np.random.Generator(np.random.Philox(counter=counter, key=key))


def volume(rect):
    return math.prod(rect.edges)


def sample_uniform(rect, key, count):
    """Return ``count`` uniform points in ``rect`` as a ``(count, dim)`` array."""
    if count < 1:
        raise ValueError('count must be positive')
    units = key.generator().random((rect.dim, count))
    low = np.array(rect.low)[:, None]
    high = np.array(rect.high)[:, None]
    points = low + (high - low) * units
    # rounding may land on the open upper bound
    np.minimum(points, np.nextafter(high, low), out=points)
    return points.T


def chunk_counts(n_samples):
    """Split ``n_samples`` into per-chunk counts in chunk-index order."""
    full, rest = divmod(n_samples, CHUNK_SIZE)
    counts = [CHUNK_SIZE] * full
    if rest:
        counts.append(rest)
    return counts
