"""Link validation against the null ensemble and the sliding-window indicators.

For each window the empirical VG and IVG of the volatility slice are
compared with a fresh null ensemble of the same length. An empirical edge is
validated when its null occurrence frequency is at most ``rho``. The window
record carries the validated counts ``n`` (VG) and ``n_bar`` (IVG), the mean
degrees of both graphs and the validated visibility

    V = (n / <d>) / (n_bar / <d_bar>).
"""

from __future__ import annotations

import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from . import garch
from .ensemble import DEFAULT_ENSEMBLE_SIZE, EnsembleConfig, LinkFrequency, cached_frequencies, distance_profile
from .garch import FitReport, GarchError, GjrGarchParams
from .timeseries import PriceSeries, ReturnSeries, VolatilitySeries, compute_returns, historical_volatility
from .visibility import IVG_MODES, VisibilityGraph, build_pair, degrees

log = logging.getLogger(__name__)

# Reported V when the IVG side has no validated link.
V_SENTINEL = sys.float_info.max

FitScope = Literal["global", "per-window"]


@dataclass(frozen=True)
class ValidationConfig:
    rho: float = 0.1
    window: int = 500
    shift: int = 60
    ensemble_size: int = DEFAULT_ENSEMBLE_SIZE
    fit_scope: FitScope = "global"
    ivg_mode: str = "literal"
    seed: int = 0
    profile_mode: bool = False

    def __post_init__(self):
        if not 0 < self.rho <= 1:
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.shift < 1:
            raise ValueError("shift must be >= 1")
        if self.ensemble_size < 1:
            raise ValueError("ensemble size must be >= 1")
        if self.fit_scope not in ("global", "per-window"):
            raise ValueError(f"unknown fit scope {self.fit_scope!r}")
        if self.ivg_mode not in IVG_MODES:
            raise ValueError(f"unknown ivg mode {self.ivg_mode!r}")


@dataclass(frozen=True)
class ValidatedLinks:
    edges: np.ndarray  # (m, 2), 0-based
    count: int


def _pair_probabilities(freq: LinkFrequency, kind: str, profile_mode: bool) -> np.ndarray:
    p = freq.probabilities(kind)
    if not profile_mode:
        return p
    prof = distance_profile(freq, kind)
    n = freq.n
    dist = np.subtract.outer(np.arange(n), np.arange(n)).T  # j - i
    out = np.zeros_like(p)
    iu = np.triu_indices(n, 1)
    out[iu] = prof.mean[dist[iu] - 1]
    return out


def validate_links(
    graph: VisibilityGraph,
    freq: LinkFrequency,
    rho: float,
    profile_mode: bool = False,
) -> ValidatedLinks:
    """Edges of ``graph`` whose null frequency ``p_ij`` is at most ``rho``.

    VG graphs are checked against VG counts and IVG graphs against IVG
    counts. ``profile_mode`` swaps each ``p_ij`` for the mean frequency at
    distance ``|i - j|``.
    """
    if graph.n != freq.n:
        raise ValueError(f"graph has {graph.n} nodes, frequencies {freq.n}")
    if graph.kind == "IVG" and graph.mode != freq.ivg_mode:
        raise ValueError(f"IVG mode {graph.mode!r} does not match ensemble mode {freq.ivg_mode!r}")
    p = _pair_probabilities(freq, graph.kind, profile_mode)
    keep = graph.adjacency & (p <= rho)
    edges = np.argwhere(keep)
    return ValidatedLinks(edges, int(edges.shape[0]))


def validated_visibility(n: int, mean_d: float, n_bar: int, mean_d_bar: float) -> Tuple[float, str]:
    """``(n / mean_d) / (n_bar / mean_d_bar)`` plus a quality flag.

    ``n_bar == 0`` gives ``V_SENTINEL`` flagged ``"n_bar_zero"`` (or NaN
    flagged ``"undefined"`` when ``n`` is zero too); the flag is ``"ok"``
    otherwise.
    """
    if not mean_d > 0:
        raise ValueError("VG mean degree must be positive")
    if n_bar == 0:
        return (V_SENTINEL, "n_bar_zero") if n > 0 else (float("nan"), "undefined")
    if not mean_d_bar > 0:
        raise ValueError("IVG mean degree must be positive when n_bar > 0")
    return (n / mean_d) / (n_bar / mean_d_bar), "ok"


def conditional_volatility_series(
    prices: PriceSeries,
    params: Optional[GjrGarchParams] = None,
    noise: str = "t",
) -> Tuple[VolatilitySeries, ReturnSeries, Optional[FitReport]]:
    """Percent returns of ``prices`` and their filtered conditional volatility.

    The volatility recursion starts from the historical volatility of the full
    return series. Without ``params`` a global fit is run first and returned
    as the third element.
    """
    returns = compute_returns(prices, "percent")
    report = None
    if params is None:
        report = garch.fit(returns, noise=noise)
        params = report.params
    vol = garch.filter_volatility(params, returns, historical_volatility(returns))
    return vol, returns, report


@dataclass
class WindowRecord:
    end_index: int  # 1-based index of the last element in the window
    end_label: Optional[str]
    n: int
    n_bar: int
    mean_deg_vg: float
    mean_deg_ivg: float
    V: float
    flags: str = "ok"
    sigma0: float = float("nan")
    params: Optional[dict] = None


@dataclass
class IndicatorSeries:
    records: List[WindowRecord]
    config: ValidationConfig
    params: Optional[dict]
    extra: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def provenance(self) -> dict:
        return {"config": asdict(self.config), "params": self.params, **self.extra}

    def __len__(self) -> int:
        return len(self.records)

    def to_csv(self) -> str:
        """CSV with the configuration embedded as leading ``#`` comment lines."""
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.provenance(), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["end_date", "end_index", "n", "n_bar", "mean_deg_vg", "mean_deg_ivg", "V", "flags"])
        for r in self.records:
            w.writerow([r.end_label or "", r.end_index, r.n, r.n_bar, repr(r.mean_deg_vg),
                        repr(r.mean_deg_ivg), repr(r.V), r.flags])
        return buf.getvalue()

    def to_json(self) -> str:
        recs = []
        for r in self.records:
            d = asdict(r)
            for k in ("V", "mean_deg_vg", "mean_deg_ivg", "sigma0"):
                if not np.isfinite(d[k]):
                    d[k] = repr(d[k])
            recs.append(d)
        return json.dumps({"provenance": self.provenance(), "records": recs}, sort_keys=True, indent=1)


def window_starts(length: int, window: int, shift: int) -> range:
    """0-based window starts ``0, L, 2L, ...``; ``floor((T - W) / L) + 1`` of them."""
    if length < window:
        raise ValueError(f"series of length {length} is shorter than the window {window}")
    return range(0, (length - window) // shift * shift + 1, shift)


def evaluate_window(
    y: np.ndarray,
    sigma0: float,
    params: GjrGarchParams,
    cfg: ValidationConfig,
    rhos: Sequence[float] = (),
    workers: int = 1,
) -> List[Tuple[int, int, float, float, float, str]]:
    """Validate one window for each threshold in ``rhos`` (default ``cfg.rho``).

    Returns ``(n, n_bar, <d>, <d_bar>, V, flag)`` per threshold, computed
    from a single ensemble.
    """
    vg, ivg = build_pair(y, cfg.ivg_mode)
    ens = EnsembleConfig(cfg.ensemble_size, len(y), round(float(sigma0), 6), params,
                         cfg.seed, cfg.ivg_mode)
    freq = cached_frequencies(ens, workers)
    _, mean_d = degrees(vg)
    _, mean_db = degrees(ivg)
    out = []
    for rho in rhos or (cfg.rho,):
        n = validate_links(vg, freq, rho, cfg.profile_mode).count
        nb = validate_links(ivg, freq, rho, cfg.profile_mode).count
        v, flag = validated_visibility(n, mean_d, nb, mean_db)
        out.append((n, nb, mean_d, mean_db, v, flag))
    return out


def sliding_indicators(
    vol: VolatilitySeries,
    cfg: ValidationConfig,
    rhos: Sequence[float],
    params: Optional[GjrGarchParams] = None,
    returns: Optional[ReturnSeries] = None,
    workers: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> Dict[float, IndicatorSeries]:
    """:func:`sliding_indicator` for several thresholds sharing each window's ensemble."""
    if not rhos:
        raise ValueError("need at least one threshold")
    cfgs = {rho: replace(cfg, rho=rho) for rho in rhos}
    y_all = vol.values
    if returns is not None and len(returns) != len(vol):
        raise ValueError("returns and volatility must have equal length")
    if cfg.fit_scope == "per-window" and returns is None:
        raise ValueError("per-window fitting needs the return series")
    if cfg.fit_scope == "global" and params is None:
        raise ValueError("global fit scope needs null-model parameters")

    starts = window_starts(len(vol), cfg.window, cfg.shift)
    records: Dict[float, List[WindowRecord]] = {rho: [] for rho in rhos}
    for count, lo in enumerate(starts, start=1):
        hi = lo + cfg.window
        label = vol.labels[hi - 1] if vol.labels is not None else None
        r_win = returns.values[lo:hi] if returns is not None else None
        sigma0 = (historical_volatility(r_win) if r_win is not None
                  else float(np.sqrt(np.mean(y_all[lo:hi] ** 2))))
        win_params, y = params, y_all[lo:hi]
        if cfg.fit_scope == "per-window":
            try:
                win_params = garch.fit(r_win, noise=params.noise.kind if params else "t").params
                y = garch.filter_volatility(win_params, r_win, sigma0).values
            except (GarchError, ValueError) as exc:
                log.warning("window ending at %d: fit failed (%s)", hi, exc)
                nan = float("nan")
                for lst in records.values():
                    lst.append(WindowRecord(hi, label, 0, 0, nan, nan, nan, "fit_failed", sigma0))
                continue
        results = evaluate_window(y, sigma0, win_params, cfg, rhos, workers)
        pdict = win_params.to_dict() if cfg.fit_scope == "per-window" else None
        for rho, (n, nb, md, mdb, v, flag) in zip(rhos, results):
            records[rho].append(WindowRecord(hi, label, n, nb, md, mdb, v, flag, sigma0, pdict))
        if progress is not None:
            progress(count, len(starts))

    gparams = params.to_dict() if params is not None else None
    return {rho: IndicatorSeries(records[rho], cfgs[rho], gparams) for rho in rhos}


def sliding_indicator(
    vol: VolatilitySeries,
    cfg: ValidationConfig,
    params: Optional[GjrGarchParams] = None,
    returns: Optional[ReturnSeries] = None,
    workers: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> IndicatorSeries:
    """Validated-link counts and ``V`` for windows ending at ``W, W+L, ...``.

    The null ensemble of each window starts from ``sigma0`` equal to the
    sample standard deviation of the window's returns (``returns`` aligned
    with ``vol``); without returns the root mean square of the window's
    volatilities is used instead. With ``cfg.fit_scope='per-window'`` the
    model is refitted on every window's returns and the window volatility is
    refiltered with those parameters; windows whose fit fails are kept with
    flag ``"fit_failed"`` and no counts.
    """
    return sliding_indicators(vol, cfg, [cfg.rho], params, returns, workers, progress)[cfg.rho]
