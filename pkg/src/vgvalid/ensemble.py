"""Null-model ensembles: link occurrence frequencies and diagnostics.

Every replicate simulates a GJR-GARCH volatility path and maps it to its VG
and IVG. Only per-pair counts (or pooled degree counts) are kept. Replicate
``k`` draws its innovations from ``stream(seed, *stream_key, k)``, so the
result does not depend on how replicates are split among workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from .garch import GjrGarchParams, GarchError, _require_stationary, _simulate_path
from .stats import RankSumResult, distribution_distance, rank_sum_test, sample_noise, stream
from .visibility import IVG_MODES, DegreeHistogram

DEFAULT_ENSEMBLE_SIZE = 3000
_BATCH = 64


@dataclass(frozen=True)
class EnsembleConfig:
    size: int
    length: int
    sigma0: float
    params: GjrGarchParams
    seed: int = 0
    ivg_mode: str = "literal"
    stream_key: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("ensemble size must be >= 1")
        if self.length < 2:
            raise ValueError("series length must be >= 2")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if self.ivg_mode not in IVG_MODES:
            raise ValueError(f"unknown ivg mode {self.ivg_mode!r}")
        _require_stationary(self.params)


@dataclass(frozen=True, eq=False)
class LinkFrequency:
    """Per-pair occurrence counts over ``size`` null graphs (upper triangle)."""

    vg_counts: np.ndarray
    ivg_counts: np.ndarray
    size: int
    ivg_mode: str = "literal"

    @property
    def n(self) -> int:
        return self.vg_counts.shape[0]

    def probabilities(self, kind: str = "VG") -> np.ndarray:
        counts = self.vg_counts if kind == "VG" else self.ivg_counts
        return counts / self.size

    def to_csv(self) -> str:
        """One row per pair ``i < j`` with 1-based indices."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "j", "distance", "vg_count", "ivg_count", "p_vg", "p_ivg", "Z"])
        iu, ju = np.triu_indices(self.n, 1)
        for i, j in zip(iu.tolist(), ju.tolist()):
            a, b = int(self.vg_counts[i, j]), int(self.ivg_counts[i, j])
            w.writerow([i + 1, j + 1, j - i, a, b, repr(a / self.size), repr(b / self.size), self.size])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class DistanceProfile:
    distance: np.ndarray  # 1 .. n-1
    mean: np.ndarray
    std: np.ndarray
    kind: str = "VG"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["distance", "p_mean", "p_std"])
        for d, m, s in zip(self.distance.tolist(), self.mean.tolist(), self.std.tolist()):
            w.writerow([d, repr(m), repr(s)])
        return buf.getvalue()


# --------------------------------------------------------------------------
# kernels


@njit(cache=True, nogil=True)
def _accumulate_links(eps, a0, a1, b1, g1, sigma0, literal, vg_counts, ivg_counts):
    n = eps.shape[1]
    r = np.empty(n)
    y = np.empty(n)
    for b in range(eps.shape[0]):
        _simulate_path(eps[b], a0, a1, b1, g1, sigma0, r, y)
        for i in range(n - 1):
            yi = y[i]
            smax = -np.inf
            smin = np.inf
            for j in range(i + 1, n):
                s = (y[j] - yi) / (j - i)
                if s > smax:
                    vg_counts[i, j] += 1
                    smax = s
                if s < smin:
                    if literal and j > i + 1:
                        ivg_counts[i, j] += 1
                    smin = s


@njit(cache=True, nogil=True)
def _accumulate_degrees(eps, a0, a1, b1, g1, sigma0, hist):
    n = eps.shape[1]
    r = np.empty(n)
    y = np.empty(n)
    deg = np.empty(n, dtype=np.int64)
    for b in range(eps.shape[0]):
        _simulate_path(eps[b], a0, a1, b1, g1, sigma0, r, y)
        deg[:] = 0
        for i in range(n - 1):
            yi = y[i]
            smax = -np.inf
            for j in range(i + 1, n):
                s = (y[j] - yi) / (j - i)
                if s > smax:
                    deg[i] += 1
                    deg[j] += 1
                    smax = s
        for i in range(n):
            hist[deg[i]] += 1


def _noise_batch(cfg: EnsembleConfig, lo: int, hi: int) -> np.ndarray:
    eps = np.empty((hi - lo, cfg.length))
    for row, k in enumerate(range(lo, hi)):
        eps[row] = sample_noise(cfg.params.noise, stream(cfg.seed, *cfg.stream_key, k), cfg.length)
    return eps


def _chunks(total: int, workers: int) -> List[Tuple[int, int]]:
    workers = max(1, min(workers, total))
    edges = np.linspace(0, total, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run_chunks(work: Callable[[int, int], np.ndarray], total: int, workers: int):
    parts = _chunks(total, workers)
    if len(parts) == 1:
        return [work(*parts[0])]
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        return list(pool.map(lambda p: work(*p), parts))


def generate_frequencies(
    cfg: EnsembleConfig,
    workers: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> LinkFrequency:
    """Count, for every pair, the null replicates whose VG / IVG contain it."""
    p = cfg.params
    n = cfg.length
    literal = cfg.ivg_mode == "literal"

    def work(lo, hi):
        vg = np.zeros((n, n), dtype=np.int32)
        ivg = np.zeros((n, n), dtype=np.int32)
        for start in range(lo, hi, _BATCH):
            stop = min(hi, start + _BATCH)
            eps = _noise_batch(cfg, start, stop)
            _accumulate_links(eps, p.alpha0, p.alpha1, p.beta1, p.gamma1, cfg.sigma0, literal, vg, ivg)
            if progress is not None:
                progress(stop, cfg.size)
        return vg, ivg

    parts = _run_chunks(work, cfg.size, workers)
    vg = sum(part[0] for part in parts)
    ivg = sum(part[1] for part in parts)
    if not literal:
        ivg = np.triu(cfg.size - vg, 2).astype(np.int32)
    if vg[np.arange(n - 1), np.arange(1, n)].min(initial=cfg.size) != cfg.size:
        raise GarchError("simulation produced non-finite volatilities")
    return LinkFrequency(vg, ivg, cfg.size, cfg.ivg_mode)


@lru_cache(maxsize=32)
def cached_frequencies(cfg: EnsembleConfig, workers: int = 1) -> LinkFrequency:
    """:func:`generate_frequencies` memoised on the (hashable) config."""
    return generate_frequencies(cfg, workers)


def distance_profile(freq: LinkFrequency, kind: str = "VG") -> DistanceProfile:
    """Mean and (population) standard deviation of ``p_ij`` at each ``|i - j|``."""
    p = freq.probabilities(kind)
    n = freq.n
    mean = np.empty(n - 1)
    std = np.empty(n - 1)
    for d in range(1, n):
        diag = np.diagonal(p, offset=d)
        mean[d - 1] = diag.mean()
        std[d - 1] = diag.std()
    return DistanceProfile(np.arange(1, n), mean, std, kind)


def null_degree_distribution(cfg: EnsembleConfig, samples: int, workers: int = 1) -> DegreeHistogram:
    """Pooled VG degree histogram over replicates ``0 .. samples - 1``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    p = cfg.params
    n = cfg.length

    def work(lo, hi):
        hist = np.zeros(n, dtype=np.int64)
        for start in range(lo, hi, _BATCH):
            stop = min(hi, start + _BATCH)
            _accumulate_degrees(_noise_batch(cfg, start, stop), p.alpha0, p.alpha1, p.beta1,
                                p.gamma1, cfg.sigma0, hist)
        return hist

    return DegreeHistogram.from_array(sum(_run_chunks(work, samples, workers)))


def compare_with_null(empirical: DegreeHistogram, null: DegreeHistogram) -> RankSumResult:
    """Rank-sum test between the degree multisets two histograms describe."""
    return rank_sum_test(empirical.expand(), null.expand())


@dataclass(frozen=True)
class StabilityRow:
    z: int
    mean_distance: float
    cv: float
    distances: Tuple[float, ...]


def stability_diagnostic(
    cfg: EnsembleConfig,
    z_values: Sequence[int],
    repeats: int,
    same_seed: bool = False,
    workers: int = 1,
) -> List[StabilityRow]:
    """Spread of the distance between pooled degree histograms of twin ensembles.

    For each ensemble size ``Z`` this draws ``repeats`` independent pairs of
    size-``Z`` ensembles and measures the Jensen-Shannon divergence (bits)
    between their pooled VG degree histograms. ``cv`` is the sample standard
    deviation of those distances over their mean.
    """
    rows = []
    for z in z_values:
        if z < 2:
            raise ValueError("every ensemble size must be >= 2")
        dists = []
        for rep in range(repeats):
            hists = []
            for side in (0, 1):
                key = cfg.stream_key + (z, rep, 0 if same_seed else side)
                hists.append(null_degree_distribution(replace(cfg, stream_key=key), z, workers))
            dists.append(distribution_distance(hists[0].counts, hists[1].counts))
        d = np.array(dists)
        mean = float(d.mean())
        sd = float(d.std(ddof=1)) if d.size > 1 else 0.0
        rows.append(StabilityRow(int(z), mean, sd / mean if mean > 0 else 0.0, tuple(dists)))
    return rows


def stability_csv(rows: Sequence[StabilityRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Z", "mean_js_divergence_bits", "cv", "repeats"])
    for row in rows:
        w.writerow([row.z, repr(row.mean_distance), repr(row.cv), len(row.distances)])
    return buf.getvalue()
