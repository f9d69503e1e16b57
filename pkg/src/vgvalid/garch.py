"""GJR-GARCH(1,1,1) with normal or standardized Student-t innovations.

    r_t = sigma_t * eps_t
    sigma_t^2 = alpha0 + (alpha1 + gamma1 * [r_{t-1} < 0]) * r_{t-1}^2 + beta1 * sigma_{t-1}^2

The first observation has volatility ``sigma0`` exactly. Returns are in
percent units by default, which keeps ``alpha0`` of order 1e-3..1e-1.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
from numba import njit
from scipy.optimize import minimize
from scipy.special import gammaln

from .stats import NoiseFamily, sample_noise, stream
from .timeseries import ReturnSeries, VolatilitySeries, historical_volatility

MIN_FIT_LENGTH = 250
PARAM_NAMES = ("alpha0", "alpha1", "beta1", "gamma1", "dof")


class GarchError(ValueError):
    pass


@dataclass(frozen=True)
class GjrGarchParams:
    alpha0: float
    alpha1: float
    beta1: float
    gamma1: float
    noise: NoiseFamily = field(default_factory=NoiseFamily.normal)

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise GarchError(f"alpha0 must be positive, got {self.alpha0}")
        if self.alpha1 < 0 or self.beta1 < 0:
            raise GarchError("alpha1 and beta1 must be nonnegative")
        if self.alpha1 + self.gamma1 < 0:
            raise GarchError("alpha1 + gamma1 must be nonnegative")

    @property
    def persistence(self) -> float:
        return self.alpha1 + self.beta1 + 0.5 * self.gamma1

    def as_vector(self) -> np.ndarray:
        v = [self.alpha0, self.alpha1, self.beta1, self.gamma1]
        if self.noise.kind == "t":
            v.append(self.noise.dof)
        return np.array(v)

    @classmethod
    def from_vector(cls, v, noise_kind: str = "normal") -> "GjrGarchParams":
        noise = NoiseFamily.student_t(v[4]) if noise_kind == "t" else NoiseFamily.normal()
        return cls(float(v[0]), float(v[1]), float(v[2]), float(v[3]), noise)

    def to_dict(self) -> dict:
        return {
            "alpha0": self.alpha0, "alpha1": self.alpha1, "beta1": self.beta1,
            "gamma1": self.gamma1, "noise": self.noise.kind, "dof": self.noise.dof,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GjrGarchParams":
        noise = NoiseFamily(d.get("noise", "normal"), d.get("dof"))
        return cls(d["alpha0"], d["alpha1"], d["beta1"], d["gamma1"], noise)


@dataclass(frozen=True)
class Stationarity:
    stationary: bool
    margin: float

    def __bool__(self) -> bool:
        return self.stationary


def stationarity_check(params: GjrGarchParams) -> Stationarity:
    margin = 1.0 - params.persistence
    return Stationarity(params.alpha0 > 0 and margin > 0, margin)


def _require_stationary(params: GjrGarchParams) -> None:
    if not stationarity_check(params):
        raise GarchError(f"non-stationary parameters (persistence {params.persistence:.6g} >= 1)")


def unconditional_variance(params: GjrGarchParams) -> float:
    denom = 1.0 - params.persistence
    if denom <= 0:
        raise GarchError(f"no finite unconditional variance: persistence {params.persistence:.6g}")
    return params.alpha0 / denom


def relaxation_time(params: GjrGarchParams) -> float:
    """Time scale ``-1 / ln(persistence)`` of the approach to stationarity."""
    p = params.persistence
    if not 0.0 < p < 1.0:
        raise GarchError(f"relaxation time needs persistence in (0, 1), got {p:.6g}")
    return -1.0 / math.log(p)


# --------------------------------------------------------------------------
# kernels


@njit(cache=True, nogil=True)
def _variance_path(r, a0, a1, b1, g1, s2_first, out):
    """Fill ``out`` with conditional variances; return first bad index or -1."""
    out[0] = s2_first
    for t in range(1, r.shape[0]):
        a = r[t - 1]
        lev = g1 if a < 0.0 else 0.0
        s2 = a0 + (a1 + lev) * a * a + b1 * out[t - 1]
        if not (s2 > 0.0 and s2 < np.inf):
            return t
        out[t] = s2
    return -1


@njit(cache=True, nogil=True)
def _neg_loglik(r, a0, a1, b1, g1, s2_first, is_t, nu, logc):
    """Negative log-likelihood; ``inf`` whenever a variance is not positive."""
    s2 = s2_first
    total = 0.0
    for t in range(r.shape[0]):
        if t > 0:
            a = r[t - 1]
            lev = g1 if a < 0.0 else 0.0
            s2 = a0 + (a1 + lev) * a * a + b1 * s2
            if not (s2 > 0.0 and s2 < np.inf):
                return np.inf
        z2 = r[t] * r[t] / s2
        if is_t:
            ld = logc - 0.5 * (nu + 1.0) * np.log1p(z2 / (nu - 2.0))
        else:
            ld = logc - 0.5 * z2
        total += ld - 0.5 * np.log(s2)
    return -total


@njit(cache=True, nogil=True)
def _simulate_path(eps, a0, a1, b1, g1, sigma0, r_out, s_out):
    s2 = sigma0 * sigma0
    s_out[0] = sigma0
    r_out[0] = sigma0 * eps[0]
    for t in range(1, eps.shape[0]):
        a = r_out[t - 1]
        lev = g1 if a < 0.0 else 0.0
        s2 = a0 + (a1 + lev) * a * a + b1 * s2
        s = np.sqrt(s2)
        s_out[t] = s
        r_out[t] = s * eps[t]


# --------------------------------------------------------------------------
# filtering, likelihood, simulation


def _values(r) -> np.ndarray:
    return np.ascontiguousarray(r.values if isinstance(r, ReturnSeries) else r, dtype=float)


def filter_volatility(params: GjrGarchParams, returns, sigma0: float) -> VolatilitySeries:
    """Conditional volatility of observed returns, first value ``sigma0``."""
    if not sigma0 > 0:
        raise GarchError("sigma0 must be positive")
    _require_stationary(params)
    r = _values(returns)
    s2 = np.empty(r.size)
    bad = _variance_path(r, params.alpha0, params.alpha1, params.beta1, params.gamma1, sigma0 ** 2, s2)
    if bad >= 0:
        raise GarchError(f"non-finite conditional variance at index {bad}")
    labels = returns.labels if isinstance(returns, ReturnSeries) else None
    return VolatilitySeries(np.sqrt(s2), labels, kind="conditional")


def _nll_args(params: GjrGarchParams):
    is_t = params.noise.kind == "t"
    return is_t, (params.noise.dof if is_t else 0.0), params.noise.log_norm_const()


def log_likelihood(params: GjrGarchParams, returns, sigma0: float) -> float:
    """``sum_t [log f(r_t / sigma_t) - log sigma_t]`` over every observation."""
    if not sigma0 > 0:
        raise GarchError("sigma0 must be positive")
    _require_stationary(params)
    r = _values(returns)
    nll = _neg_loglik(r, params.alpha0, params.alpha1, params.beta1, params.gamma1,
                      sigma0 ** 2, *_nll_args(params))
    if not np.isfinite(nll):
        raise GarchError("non-finite log-likelihood")
    return -nll


def simulate(
    params: GjrGarchParams,
    length: int,
    sigma0: float,
    seed: Union[int, np.random.Generator] = 0,
) -> Tuple[ReturnSeries, VolatilitySeries]:
    """Simulate ``length`` returns and volatilities started at ``sigma0``.

    An integer seed maps to ``stream(seed)``; a Generator is used as is.
    """
    if not sigma0 > 0:
        raise GarchError("sigma0 must be positive")
    _require_stationary(params)
    rng = stream(seed) if isinstance(seed, (int, np.integer)) else seed
    eps = np.ascontiguousarray(sample_noise(params.noise, rng, length))
    r = np.empty(length)
    s = np.empty(length)
    _simulate_path(eps, params.alpha0, params.alpha1, params.beta1, params.gamma1, sigma0, r, s)
    return ReturnSeries(r, scale="percent"), VolatilitySeries(s, kind="conditional")


# --------------------------------------------------------------------------
# maximum likelihood


@dataclass
class FitReport:
    params: GjrGarchParams
    std_errors: Dict[str, float]
    t_statistics: Dict[str, float]
    p_values: Dict[str, float]
    log_likelihood: float
    converged: bool
    iterations: int
    sigma0: float
    nobs: int
    boundary: Dict[str, bool] = field(default_factory=dict)
    p_underflow: Dict[str, bool] = field(default_factory=dict)
    hessian_ok: bool = True
    # inverse Hessian in natural coordinates; boundary rows and columns are zero
    covariance: list = field(default_factory=list)

    @property
    def names(self):
        return PARAM_NAMES if self.params.noise.kind == "t" else PARAM_NAMES[:4]

    @property
    def estimates(self) -> Dict[str, float]:
        return dict(zip(self.names, self.params.as_vector().tolist()))

    def persistence_std_error(self) -> float:
        """Delta-method standard error of ``alpha1 + beta1 + gamma1 / 2``."""
        grad = np.array([0.0, 1.0, 1.0, 0.5, 0.0][: len(self.names)])
        cov = np.asarray(self.covariance, dtype=float)
        return float(np.sqrt(grad @ cov @ grad))

    def table(self) -> str:
        """Parameter table: estimate, std. error, t-statistic, p-value."""
        lines = [f"{'parameter':<10}{'estimate':>12}{'std. error':>12}{'t-statistic':>13}{'p-value':>12}"]
        for name, est in self.estimates.items():
            p = self.p_values[name]
            p_txt = "0*" if self.p_underflow.get(name) else f"{p:.4g}"
            tag = " (boundary)" if self.boundary.get(name) else ""
            lines.append(
                f"{name:<10}{est:>12.6g}{self.std_errors[name]:>12.4g}"
                f"{self.t_statistics[name]:>13.4g}{p_txt:>12}{tag}"
            )
        lines.append(f"log-likelihood {self.log_likelihood:.6f}  nobs {self.nobs}  "
                     f"converged {self.converged}  iterations {self.iterations}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        d = dict(d)
        d["params"] = GjrGarchParams.from_dict(d["params"])
        return cls(**d)

    def to_json(self, **kw) -> str:
        return json.dumps(_jsonable(self.to_dict()), **kw)

    @classmethod
    def from_json(cls, text: str) -> "FitReport":
        return cls.from_dict(_unjson(json.loads(text)))


def _jsonable(obj):
    # NaN/inf are not valid JSON; store them as strings
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _unjson(obj):
    if isinstance(obj, dict):
        return {k: _unjson(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unjson(v) for v in obj]
    if obj in ("nan", "inf", "-inf"):
        return float(obj)
    return obj


def _to_natural(u: np.ndarray, is_t: bool) -> np.ndarray:
    """Map unconstrained ``u`` onto feasible parameters.

    ``(alpha1, beta1, gamma1 / 2, 1 - persistence)`` is a softmax of
    ``(u1, u2, u3, 0)``, so every term is positive and persistence < 1.
    """
    z = np.array([u[1], u[2], u[3], 0.0])
    z = np.exp(z - z.max())
    w = z / z.sum()
    out = [math.exp(u[0]), w[0], w[1], 2.0 * w[2]]
    if is_t:
        out.append(2.0 + math.exp(u[4]))
    return np.array(out)


def _to_unconstrained(theta: np.ndarray, is_t: bool) -> np.ndarray:
    slack = 1.0 - theta[1] - theta[2] - 0.5 * theta[3]
    ref = math.log(slack)
    u = [math.log(theta[0]), math.log(theta[1]) - ref, math.log(theta[2]) - ref,
         math.log(0.5 * theta[3]) - ref]
    if is_t:
        u.append(math.log(theta[4] - 2.0))
    return np.array(u)


# (alpha1, beta1, gamma1) for the multi-start
_STARTS = (
    (0.05, 0.90, 0.05),
    (0.02, 0.92, 0.10),
    (0.10, 0.80, 0.10),
    (0.03, 0.85, 0.20),
    (0.01, 0.96, 0.04),
)

_BOUNDARY_TOL = 1e-6


def _nll_natural(r, theta, s2_first, is_t):
    if is_t:
        nu = theta[4]
        if not 2.0 < nu < np.inf:
            return np.inf
        logc = gammaln(0.5 * (nu + 1.0)) - gammaln(0.5 * nu) - 0.5 * math.log(math.pi * (nu - 2.0))
    else:
        nu, logc = 0.0, -0.5 * math.log(2 * math.pi)
    return _neg_loglik(r, theta[0], theta[1], theta[2], theta[3], s2_first, is_t, nu, logc)


def _hessian(f, x: np.ndarray, steps: np.ndarray) -> np.ndarray:
    k = x.size
    h = np.zeros((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = steps[i]
        h[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / steps[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = steps[j]
            h[i, j] = h[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * steps[i] * steps[j])
    return h


def fit(
    returns,
    noise: str = "t",
    starts: int = 5,
    tol: float = 1e-8,
    maxiter: int = 20000,
) -> FitReport:
    """Maximum-likelihood GJR-GARCH fit.

    ``sigma0`` is pinned to the sample standard deviation of the whole input.
    Nelder-Mead runs from ``starts`` fixed starting points on an
    unconstrained reparameterisation and the best end point is polished by a
    restart. Standard errors come from the inverse finite-difference Hessian
    of the negative log-likelihood in natural coordinates. A parameter that
    ends within 1e-6 of zero is put on the boundary: it is set to exactly 0,
    dropped from the Hessian and reported with a zero standard error.
    """
    r = _values(returns)
    if r.size < MIN_FIT_LENGTH:
        raise GarchError(f"fit needs at least {MIN_FIT_LENGTH} returns, got {r.size}")
    if noise not in ("normal", "t"):
        raise GarchError(f"unknown noise kind {noise!r}")
    is_t = noise == "t"
    sigma0 = historical_volatility(r)
    if not sigma0 > 0:
        raise GarchError("cannot fit a constant return series")
    s2_first = sigma0 ** 2
    var = float(np.var(r))

    def objective(u):
        try:
            theta = _to_natural(u, is_t)
        except (OverflowError, ValueError):
            return np.inf
        val = _nll_natural(r, theta, s2_first, is_t)
        return val if np.isfinite(val) else 1e300

    best = None
    iterations = 0
    for a1, b1, g1 in _STARTS[:max(1, starts)]:
        theta0 = [var * (1.0 - a1 - b1 - 0.5 * g1), a1, b1, g1] + ([8.0] if is_t else [])
        res = minimize(objective, _to_unconstrained(np.array(theta0), is_t), method="Nelder-Mead",
                       options={"xatol": 1e-7, "fatol": tol, "maxiter": maxiter, "maxfev": maxiter,
                                "adaptive": True})
        iterations += res.nit
        if best is None or res.fun < best.fun:
            best = res
    # restart from the best point: collapses a prematurely shrunken simplex
    polish = minimize(objective, best.x, method="Nelder-Mead",
                      options={"xatol": 1e-8, "fatol": tol, "maxiter": maxiter, "maxfev": maxiter,
                               "adaptive": True})
    iterations += polish.nit
    if polish.fun <= best.fun:
        converged = bool(polish.success and best.fun - polish.fun < 1e-6)
        best = polish
    else:
        converged = bool(best.success)

    theta = _to_natural(best.x, is_t)
    names = PARAM_NAMES if is_t else PARAM_NAMES[:4]
    boundary = {nm: False for nm in names}
    for idx in (1, 2, 3):
        if theta[idx] < _BOUNDARY_TOL:
            theta[idx] = 0.0
            boundary[names[idx]] = True
    nll = _nll_natural(r, theta, s2_first, is_t)

    free = [i for i, nm in enumerate(names) if not boundary[nm]]
    se = np.zeros(len(names))
    cov_full = np.zeros((len(names), len(names)))
    hessian_ok = True

    def reduced(x):
        full = theta.copy()
        full[free] = x
        return _nll_natural(r, full, s2_first, is_t)

    steps = 1e-4 * np.maximum(np.abs(theta[free]), 1e-2)
    hess = _hessian(reduced, theta[free], steps)
    try:
        if not np.all(np.isfinite(hess)):
            raise np.linalg.LinAlgError
        np.linalg.cholesky(hess)
        cov = np.linalg.inv(hess)
        se[free] = np.sqrt(np.diag(cov))
        cov_full[np.ix_(free, free)] = cov
    except np.linalg.LinAlgError:
        hessian_ok = False
        se[free] = np.nan
        cov_full[np.ix_(free, free)] = np.nan

    std_errors, t_stats, p_values, underflow = {}, {}, {}, {}
    for i, nm in enumerate(names):
        std_errors[nm] = float(se[i])
        if se[i] > 0:
            t = float(theta[i] / se[i])
            p = math.erfc(abs(t) / math.sqrt(2.0))
        elif boundary[nm]:
            t, p = 0.0, 1.0
        else:
            t, p = float("nan"), float("nan")
        t_stats[nm] = t
        p_values[nm] = p
        underflow[nm] = p == 0.0

    return FitReport(
        params=GjrGarchParams.from_vector(theta, noise),
        std_errors=std_errors,
        t_statistics=t_stats,
        p_values=p_values,
        log_likelihood=float(-nll),
        converged=converged,
        iterations=int(iterations),
        sigma0=float(sigma0),
        nobs=int(r.size),
        boundary=boundary,
        p_underflow=underflow,
        hessian_ok=hessian_ok,
        covariance=cov_full.tolist(),
    )
