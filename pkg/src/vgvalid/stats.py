"""Noise distributions, seeded random streams and the few tests the pipeline needs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Mapping, Optional, Union

import numpy as np
from scipy.special import gammaln

NoiseKind = Literal["normal", "t"]

# Below this many observations per side the rank-sum p-value is exact.
EXACT_RANK_SUM_LIMIT = 20


@dataclass(frozen=True)
class NoiseFamily:
    """Zero-mean, unit-variance innovation law.

    ``kind='t'`` is a Student-t with ``dof`` degrees of freedom rescaled by
    ``sqrt((dof - 2) / dof)``, so ``dof`` must exceed 2.
    """

    kind: NoiseKind = "normal"
    dof: Optional[float] = None

    def __post_init__(self):
        if self.kind == "normal":
            if self.dof is not None:
                object.__setattr__(self, "dof", None)
        elif self.kind == "t":
            if self.dof is None or not self.dof > 2 or not math.isfinite(self.dof):
                raise ValueError(f"standardized t needs finite dof > 2, got {self.dof}")
            object.__setattr__(self, "dof", float(self.dof))
        else:
            raise ValueError(f"unknown noise kind {self.kind!r}")

    @classmethod
    def normal(cls) -> "NoiseFamily":
        return cls("normal")

    @classmethod
    def student_t(cls, dof: float) -> "NoiseFamily":
        return cls("t", dof)

    def log_norm_const(self) -> float:
        """Log of the density at zero."""
        if self.kind == "normal":
            return -0.5 * math.log(2.0 * math.pi)
        nu = self.dof
        return float(
            gammaln(0.5 * (nu + 1.0)) - gammaln(0.5 * nu) - 0.5 * math.log(math.pi * (nu - 2.0))
        )


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``.

    The derivation is ``PCG64(SeedSequence(seed, spawn_key=key))``, which is
    what ``SeedSequence(seed).spawn`` hands to child ``key``. Replicate ``k``
    of an ensemble always draws from ``stream(seed, k)`` regardless of how
    replicates are scheduled across workers.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def sample_noise(family: NoiseFamily, rng: np.random.Generator, size=None):
    if family.kind == "normal":
        return rng.standard_normal(size)
    nu = family.dof
    return rng.standard_t(nu, size) * math.sqrt((nu - 2.0) / nu)


def noise_log_density(family: NoiseFamily, x):
    """Log density of the unit-variance law at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if family.kind == "normal":
        out = -0.5 * math.log(2.0 * math.pi) - 0.5 * x * x
    else:
        nu = family.dof
        out = family.log_norm_const() - 0.5 * (nu + 1.0) * np.log1p(x * x / (nu - 2.0))
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# Wilcoxon / Mann-Whitney rank-sum test


@dataclass(frozen=True)
class RankSumResult:
    statistic: float  # rank sum of the first sample
    p_value: float
    method: Literal["normal-approximation", "exact-permutation"]


def midranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks, ties sharing the mean of the ranks they span."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    _, first, counts = np.unique(x[order], return_index=True, return_counts=True)
    per_value = first + (counts + 1) / 2.0
    ranks = np.empty(x.size)
    ranks[order] = np.repeat(per_value, counts)
    return ranks


def _exact_rank_sum_p(ranks: np.ndarray, n1: int, w: float) -> float:
    """Two-sided permutation p-value of the rank sum ``w`` of ``n1`` of ``ranks``.

    Doubled ranks are integers even with midranks, so the null distribution
    over all C(N, n1) subsets is counted exactly by a subset-sum recursion.
    """
    twice = np.rint(2 * ranks).astype(np.int64)
    if 2 * n1 > twice.size:
        # same two-sided p from the complementary sample, with a smaller table
        n1, w = twice.size - n1, float(ranks.sum()) - w
    # no subset of n1 ranks can exceed the n1 largest
    cap = int(np.sort(twice)[twice.size - n1:].sum())
    # ways[k, s]: subsets of size k with doubled rank sum s
    ways = np.zeros((n1 + 1, cap + 1))
    ways[0, 0] = 1.0
    for r in twice:
        ways[1:, r:] += ways[:-1, : cap + 1 - r].copy()
    dist = ways[n1]
    dist = dist / dist.sum()
    target = int(round(2 * w))
    lower = dist[: target + 1].sum()
    upper = dist[target:].sum()
    return float(min(1.0, 2.0 * min(lower, upper)))


def _normal_rank_sum_p(ranks: np.ndarray, n1: int, n2: int, w: float) -> float:
    n = n1 + n2
    _, counts = np.unique(ranks, return_counts=True)
    tie = float(np.sum(counts.astype(float) ** 3 - counts))
    var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0:
        return 1.0
    dev = max(abs(w - n1 * (n + 1) / 2.0) - 0.5, 0.0)
    return float(min(1.0, math.erfc(dev / math.sqrt(2.0 * var))))


def rank_sum_test(a, b, method: Literal["auto", "exact", "normal"] = "auto") -> RankSumResult:
    """Two-sided Wilcoxon rank-sum test.

    ``method='auto'`` enumerates the exact permutation distribution when
    either sample has fewer than 20 observations and otherwise uses the
    tie-corrected normal approximation with continuity correction.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("rank_sum_test needs two non-empty samples")
    ranks = midranks(np.concatenate([a, b]))
    w = float(ranks[: a.size].sum())
    if method == "auto":
        method = "exact" if min(a.size, b.size) < EXACT_RANK_SUM_LIMIT else "normal"
    if method == "exact":
        return RankSumResult(w, _exact_rank_sum_p(ranks, a.size, w), "exact-permutation")
    if method == "normal":
        return RankSumResult(w, _normal_rank_sum_p(ranks, a.size, b.size, w), "normal-approximation")
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# Distance between distributions

Histogram = Union[Mapping[int, float], np.ndarray, list]


def _align(p: Histogram, q: Histogram):
    if isinstance(p, Mapping) or isinstance(q, Mapping):
        p = dict(p) if isinstance(p, Mapping) else dict(enumerate(p))
        q = dict(q) if isinstance(q, Mapping) else dict(enumerate(q))
        keys = sorted(set(p) | set(q))
        return (np.array([p.get(k, 0.0) for k in keys], float),
                np.array([q.get(k, 0.0) for k in keys], float))
    p, q = np.asarray(p, float), np.asarray(q, float)
    n = max(p.size, q.size)
    return np.pad(p, (0, n - p.size)), np.pad(q, (0, n - q.size))


def distribution_distance(p: Histogram, q: Histogram) -> float:
    """Jensen-Shannon divergence in bits between two histograms.

    Histograms are either count arrays indexed by value or ``{value: count}``
    mappings; both are normalised before comparison. The result lies in
    ``[0, 1]`` and is exactly zero for identical normalised inputs.
    """
    p, q = _align(p, q)
    if p.sum() <= 0 or q.sum() <= 0:
        raise ValueError("distribution_distance needs non-empty histograms")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("histogram counts must be nonnegative")
    p, q = p / p.sum(), q / q.sum()
    if np.array_equal(p, q):
        return 0.0
    m = 0.5 * (p + q)

    def kl(x):
        nz = x > 0
        return float(np.sum(x[nz] * np.log2(x[nz] / m[nz])))

    return min(1.0, max(0.0, 0.5 * kl(p) + 0.5 * kl(q)))
