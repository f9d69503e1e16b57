"""Visibility and invisibility graphs of a series, plus degree statistics.

Pair ``(i, j)``, ``i < j``, is visible when every intermediate point lies
strictly below the chord joining ``(i, y_i)`` and ``(j, y_j)``. Written with
slopes from the source ``i`` this reads ``s(i, k) < s(i, j)`` for all
``i < k < j``, so a forward sweep keeping the running maximum slope decides
every pair from ``i`` in one pass. The invisibility criterion flips the
inequality and keeps the running minimum instead.

Both the sweep and the brute-force pairwise evaluation compute each slope
with the same floating-point expression, so they agree bit for bit.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from typing import Literal, TextIO

import numpy as np
from numba import njit

GraphKind = Literal["VG", "IVG"]
IvgMode = Literal["literal", "complement"]
IVG_MODES = ("literal", "complement")


@njit(cache=True, nogil=True)
def _sweep(y, vg, ivg):
    n = y.shape[0]
    for i in range(n - 1):
        yi = y[i]
        smax = -np.inf
        smin = np.inf
        for j in range(i + 1, n):
            s = (y[j] - yi) / (j - i)
            if s > smax:
                vg[i, j] = True
            if j > i + 1 and s < smin:
                ivg[i, j] = True
            if s > smax:
                smax = s
            if s < smin:
                smin = s


@njit(cache=True)
def _brute(y, vg, ivg):
    n = y.shape[0]
    for i in range(n - 1):
        for j in range(i + 1, n):
            sij = (y[j] - y[i]) / (j - i)
            below = True
            above = j > i + 1
            for k in range(i + 1, j):
                sik = (y[k] - y[i]) / (k - i)
                if not sik < sij:
                    below = False
                if not sik > sij:
                    above = False
            vg[i, j] = below
            ivg[i, j] = above


@dataclass(frozen=True, eq=False)
class VisibilityGraph:
    """Undirected simple graph on ``n`` time-ordered nodes.

    ``adjacency`` is an ``n x n`` boolean matrix holding only the strict upper
    triangle (``i < j``).
    """

    adjacency: np.ndarray
    kind: GraphKind = "VG"
    mode: str = "literal"

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(self.adjacency))

    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of 0-based ``(i, j)`` pairs, ``i < j``, row-major."""
        return np.argwhere(self.adjacency)

    def has_edge(self, i: int, j: int) -> bool:
        i, j = min(i, j), max(i, j)
        return bool(self.adjacency[i, j]) if i != j else False

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VisibilityGraph)
            and self.kind == other.kind
            and np.array_equal(self.adjacency, other.adjacency)
        )

    def reversed(self) -> "VisibilityGraph":
        """The same graph with node ``i`` relabelled ``n - 1 - i``."""
        flipped = self.adjacency[::-1, ::-1].T
        return VisibilityGraph(np.ascontiguousarray(flipped), self.kind, self.mode)


def _as_series(y) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=float)
    if y.ndim != 1 or y.size < 2:
        raise ValueError("need a one-dimensional series of length >= 2")
    if not np.all(np.isfinite(y)):
        bad = int(np.flatnonzero(~np.isfinite(y))[0])
        raise ValueError(f"non-finite value at index {bad}")
    return y


def build_pair(y, ivg_mode: IvgMode = "literal", method: Literal["sweep", "brute"] = "sweep"):
    """VG and IVG of ``y`` in one pass."""
    if ivg_mode not in IVG_MODES:
        raise ValueError(f"unknown ivg mode {ivg_mode!r}")
    y = _as_series(y)
    n = y.size
    vg = np.zeros((n, n), dtype=np.bool_)
    ivg = np.zeros((n, n), dtype=np.bool_)
    if method == "sweep":
        _sweep(y, vg, ivg)
    elif method == "brute":
        _brute(y, vg, ivg)
    else:
        raise ValueError(f"unknown method {method!r}")
    if ivg_mode == "complement":
        ivg = np.triu(~vg, 1)
    return VisibilityGraph(vg, "VG"), VisibilityGraph(ivg, "IVG", ivg_mode)


def vg_build(y, method: Literal["sweep", "brute"] = "sweep") -> VisibilityGraph:
    return build_pair(y, "literal", method)[0]


def ivg_build(y, mode: IvgMode = "literal", method: Literal["sweep", "brute"] = "sweep") -> VisibilityGraph:
    """Invisibility graph.

    ``mode='literal'`` links ``i, j`` (``|i - j| >= 2``) when every
    intermediate point lies strictly above the chord. ``mode='complement'``
    links exactly the non-adjacent pairs missing from the VG. The two differ
    once a pair has two or more intermediate points, e.g. ``[0, 10, -10, 0]``.
    """
    return build_pair(y, mode, method)[1]


def degrees(g: VisibilityGraph):
    """Per-node degrees and the mean degree ``2 m / n``."""
    a = g.adjacency
    d = a.sum(axis=0).astype(np.int64) + a.sum(axis=1)
    return d, 2.0 * g.edge_count / g.n


@dataclass(frozen=True)
class DegreeHistogram:
    counts: dict  # degree -> number of nodes

    @property
    def total(self) -> int:
        return int(sum(self.counts.values()))

    def as_array(self) -> np.ndarray:
        """Counts indexed by degree, ``0..max degree``."""
        out = np.zeros(max(self.counts, default=-1) + 1, dtype=np.int64)
        for k, v in self.counts.items():
            out[k] = v
        return out

    def expand(self) -> np.ndarray:
        """The multiset of degrees this histogram summarises."""
        keys = np.array(sorted(self.counts), dtype=np.int64)
        return np.repeat(keys, [self.counts[k] for k in keys])

    def mean(self) -> float:
        return float(sum(k * v for k, v in self.counts.items()) / self.total)

    @classmethod
    def from_array(cls, counts) -> "DegreeHistogram":
        counts = np.asarray(counts)
        return cls({int(k): int(counts[k]) for k in np.flatnonzero(counts)})


def degree_histogram(deg) -> DegreeHistogram:
    deg = np.asarray(deg, dtype=np.int64)
    if deg.size == 0:
        raise ValueError("degree_histogram needs at least one degree")
    return DegreeHistogram(dict(sorted(Counter(deg.tolist()).items())))


def write_edge_list(g: VisibilityGraph, out: TextIO) -> None:
    """Write ``i,j`` rows with 1-based node indices."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["i", "j"])
    for i, j in g.edges():
        w.writerow([int(i) + 1, int(j) + 1])


def edge_list_csv(g: VisibilityGraph) -> str:
    buf = io.StringIO()
    write_edge_list(g, buf)
    return buf.getvalue()
