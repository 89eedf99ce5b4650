"""Non-learned scoring baselines: uniform-random and Zipf placement."""

from __future__ import annotations

import numpy as np

from .data import RatingsDataset

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)


def _mix64(x):
    """splitmix64 finalizer (vectorized over uint64)."""
    x = (x ^ (x >> _U64(30))) * _MIX1
    x = (x ^ (x >> _U64(27))) * _MIX2
    return x ^ (x >> _U64(31))


def _hash_uniform(seed: int, users, items):
    """Deterministic uniform [0, 1) draw keyed on (seed, user, item).

    Counter-based: the value depends only on the key, never on how many
    draws happened before, so evaluation order cannot change results.
    """
    with np.errstate(over="ignore"):
        h = _mix64(_U64(seed) ^ _GOLDEN)
        h = _mix64(h ^ np.asarray(users, dtype=np.uint64))
        h = _mix64(h ^ np.asarray(items, dtype=np.uint64))
    return (h >> _U64(11)) * 2.0**-53


def popularity_ranks(counts: np.ndarray) -> np.ndarray:
    """Rank items 1..m by descending count, ties broken by ascending index."""
    counts = np.asarray(counts)
    order = np.lexsort((np.arange(counts.shape[0]), -counts))
    ranks = np.empty(counts.shape[0], dtype=np.int64)
    ranks[order] = np.arange(1, counts.shape[0] + 1)
    return ranks


class RandomScorer:
    """Scores every (user, item) pair with an i.i.d.-style uniform value."""

    kind = "random"

    def __init__(self, seed: int, n_items: int, r_max: float):
        if seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {seed}")
        self.seed = int(seed)
        self.n_items = int(n_items)
        self.r_max = float(r_max)

    def score(self, i: int, j: int) -> float:
        return float(_hash_uniform(self.seed, i, j))

    def scores_for_user(self, i: int) -> np.ndarray:
        return _hash_uniform(self.seed, i, np.arange(self.n_items))

    def predicted_ratings(self, users, items) -> np.ndarray:
        return _hash_uniform(self.seed, users, items) * self.r_max

    def normalized_scores(self, users, items) -> np.ndarray:
        return _hash_uniform(self.seed, users, items)


class ZipfScorer:
    """Scores item j as 1 / popularity_rank(j), independent of the user.

    Rank 1 is the most-rated training item, so the score sequence over the
    ranked items is 1, 1/2, 1/3, ... — the Zipf click profile.
    """

    kind = "zipf"

    def __init__(self, popularity_rank: np.ndarray, r_max: float):
        ranks = np.asarray(popularity_rank, dtype=np.int64)
        m = ranks.shape[0]
        if not np.array_equal(np.sort(ranks), np.arange(1, m + 1)):
            raise ValueError("popularity_rank must be a bijection onto 1..m")
        self.popularity_rank = ranks
        self.r_max = float(r_max)
        self._inv_rank = 1.0 / ranks
        self._inv_rank.setflags(write=False)

    @classmethod
    def from_dataset(cls, dataset: RatingsDataset) -> "ZipfScorer":
        """Build ranks from rating counts in a (training) dataset."""
        counts = np.bincount(dataset.items, minlength=dataset.m)
        return cls(popularity_ranks(counts), dataset.r_max)

    def score(self, i: int, j: int) -> float:
        return float(self._inv_rank[j])

    def scores_for_user(self, i: int) -> np.ndarray:
        return self._inv_rank

    def predicted_ratings(self, users, items) -> np.ndarray:
        return self.r_max * self._inv_rank[np.asarray(items)]

    def normalized_scores(self, users, items) -> np.ndarray:
        return self._inv_rank[np.asarray(items)]
