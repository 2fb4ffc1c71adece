"""Estimators and Monte Carlo aggregation: empirical covariances, global and
local regularity indices, dyadic p-variation sums, bootstrap intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .gaussian_field import Trajectory

__all__ = [
    "EstimateWithCI",
    "CovarianceTable",
    "PVariationReport",
    "empirical_cov",
    "hurst_estimate",
    "local_hurst",
    "dyadic_p_variation",
    "mc_aggregate",
]


@dataclass(frozen=True)
class EstimateWithCI:
    value: float
    ci_low: float
    ci_high: float
    method: str
    n: int
    boundary: bool = False

    def __post_init__(self):
        if not (self.ci_low <= self.value <= self.ci_high):
            raise ConfigurationError("confidence interval does not bracket value")

    def as_dict(self) -> dict:
        return {"value": self.value, "ci_low": self.ci_low,
                "ci_high": self.ci_high, "method": self.method, "n": self.n,
                "boundary": self.boundary}


@dataclass(frozen=True)
class CovarianceTable:
    lags: np.ndarray
    values: np.ndarray
    errors: np.ndarray          # jackknife standard errors
    n_realizations: int


@dataclass(frozen=True)
class PVariationReport:
    p: float
    depth: int
    dyadic_sums: np.ndarray     # S_n(p) for n = 1..depth
    weighted_bound: float       # sum_n n^c S_n(p)
    weight_exponent: float
    bounded: bool               # no growth of S_n over the deepest levels
    trend: float                # fitted slope of log S_n per level

    def as_dict(self) -> dict:
        return {"p": self.p, "depth": self.depth,
                "dyadic_sums": [float(s) for s in self.dyadic_sums],
                "weighted_bound": self.weighted_bound,
                "weight_exponent": self.weight_exponent,
                "bounded": self.bounded, "trend": self.trend}


def _values_matrix(trajs):
    if isinstance(trajs, np.ndarray) and trajs.ndim == 2:
        return trajs
    grids = [t.t_grid for t in trajs]
    ref = grids[0]
    for g in grids[1:]:
        if g.shape != ref.shape or not np.allclose(g, ref, rtol=1e-12, atol=1e-12):
            raise ConfigurationError("ensemble trajectories on different grids")
    return np.stack([t.values for t in trajs])


def empirical_cov(trajs, lags, *, demean=True) -> CovarianceTable:
    """Time-averaged lag covariances of an ensemble, with jackknife errors.

    All trajectories must share one grid.  Realizations are the independent
    units: within-path samples are averaged first, the spread across paths
    gives the error bars.
    """
    x = _values_matrix(trajs)
    m, n = x.shape
    if m < 2:
        raise DomainError("need at least two trajectories")
    lags = np.asarray(lags, dtype=int)
    if np.any(lags < 0) or np.any(lags >= n):
        raise DomainError("lags must lie in [0, n)")
    if demean:
        x = x - x.mean()
    values = np.empty(lags.size)
    errors = np.empty(lags.size)
    for i, k in enumerate(lags):
        per_real = (np.mean(x[:, k:] * x[:, : n - k], axis=1) if k
                    else np.mean(x * x, axis=1))
        theta = per_real.mean()
        loo = (per_real.sum() - per_real) / (m - 1)
        values[i] = theta
        errors[i] = math.sqrt((m - 1) / m * np.sum((loo - loo.mean()) ** 2))
    return CovarianceTable(lags=lags, values=values, errors=errors,
                           n_realizations=m)


def _aggregated_variance(values, min_scale_exp=1, trim=4):
    """Mean-square increments at dyadic scales and the fitted slope.

    Returns (scales, msq, half_slope); the regularity index is half the
    log-log slope.  Mean squares (not centered variances) keep deterministic
    trends visible: a linear ramp reads as slope 2, index 1.
    """
    n = values.size
    j_max = int(math.floor(math.log2(n))) - trim
    if j_max < min_scale_exp + 1:
        raise DomainError("trajectory too short for scale regression")
    scales = 2 ** np.arange(min_scale_exp, j_max + 1)
    msq = np.array([np.mean((values[s:] - values[:-s]) ** 2) for s in scales])
    if np.any(msq <= 0):
        scales_f = scales[msq > 0]
        if scales_f.size < 2:
            return scales, msq, 1.0    # constant path: treat as smooth limit
        msq = msq[msq > 0]
        scales = scales_f
    slope = np.polyfit(np.log(scales), np.log(msq), 1)[0]
    return scales, msq, 0.5 * slope


def _block_bootstrap_ci(values, scales, seed, n_boot, level, n_blocks=64):
    """Bootstrap the scale regression by resampling coarse time blocks
    (the same blocks at every scale, preserving cross-scale coupling)."""
    rng = np.random.default_rng(seed)
    n = values.size
    edges = np.linspace(0, n - int(scales[-1]), n_blocks + 1).astype(int)
    block_means = np.empty((scales.size, n_blocks))
    for i, s in enumerate(scales):
        sq = (values[s:] - values[:-s]) ** 2
        for b in range(n_blocks):
            seg = sq[edges[b]:max(edges[b + 1], edges[b] + 1)]
            block_means[i, b] = seg.mean() if seg.size else sq.mean()
    log_s = np.log(scales)
    denom = np.sum((log_s - log_s.mean()) ** 2)
    hs = np.empty(n_boot)
    draws = rng.integers(0, n_blocks, size=(n_boot, n_blocks))
    for b in range(n_boot):
        msq = block_means[:, draws[b]].mean(axis=1)
        msq = np.maximum(msq, 1e-300)
        lm = np.log(msq)
        slope = np.sum((log_s - log_s.mean()) * (lm - lm.mean())) / denom
        hs[b] = 0.5 * slope
    lo, hi = np.quantile(hs, [(1 - level) / 2, 1 - (1 - level) / 2])
    return float(lo), float(hi)


def _hurst_core(values, *, n_boot, seed, level, min_len, trim=4):
    if values.size < min_len:
        raise DomainError(f"need at least {min_len} samples")
    scales, msq, h_raw = _aggregated_variance(values, trim=trim)
    boundary = not (0.02 < h_raw < 0.98)
    h = float(np.clip(h_raw, 0.0, 1.0))
    if n_boot and not boundary:
        lo, hi = _block_bootstrap_ci(values, scales, seed, n_boot, level)
        lo, hi = min(lo, h), max(hi, h)
        method = "aggregated-variance/block-bootstrap"
    else:
        lo = hi = h
        method = "aggregated-variance"
    return EstimateWithCI(value=h, ci_low=float(lo), ci_high=float(hi),
                          method=method, n=int(values.size), boundary=boundary)


def hurst_estimate(traj: Trajectory, *, n_boot=1000, seed=0,
                   level=0.95) -> EstimateWithCI:
    """Global regularity index by aggregated-variance log-log regression.

    Regresses log mean-square increments at dyadic scales on log scale; half
    the slope estimates the index.  Invariant under affine transforms of the
    path.  Estimates hitting the [0, 1] boundary are flagged (deterministic
    trends, e.g. a linear ramp, read as 1).
    """
    return _hurst_core(traj.values, n_boot=n_boot, seed=seed, level=level,
                       min_len=1 << 10)


def local_hurst(traj: Trajectory, t0, window=None, *, n_boot=200, seed=0,
                level=0.95) -> EstimateWithCI:
    """Regularity index from a window centered at time t0.

    ``window`` is the number of samples (defaults to 1/16 of the path,
    floored at 2^8); the estimator is the global one restricted to the
    window, with fewer trimmed scales so short windows keep enough points.
    """
    n = traj.values.size
    if window is None:
        window = max(n // 16, 1 << 8)
    window = int(window)
    if window < 1 << 8:
        raise DomainError("window must cover at least 2^8 samples")
    if window > n:
        raise DomainError("window exceeds the trajectory")
    center = int(np.searchsorted(traj.t_grid, t0))
    lo = np.clip(center - window // 2, 0, n - window)
    return _hurst_core(traj.values[lo:lo + window], n_boot=n_boot, seed=seed,
                       level=level, min_len=1 << 8, trim=3)


def dyadic_p_variation(traj: Trajectory, p, max_depth=None, *,
                       weight_exponent=2.0) -> PVariationReport:
    """Dyadic-level p-th power increment sums S_n(p) and their weighted
    aggregate sum_n n^c S_n(p).

    S_n bounded in n indicates finite p-variation (expected for p above the
    reciprocal of the path's regularity index); the reported trend is the
    fitted slope of log S_n over the deepest half of the levels.  The
    weighted aggregate is a diagnostic, not a certified bound.
    """
    p = float(p)
    if p < 1.0:
        raise DomainError("p must be at least 1")
    n_pts = traj.values.size
    max_possible = int(math.floor(math.log2(n_pts - 1)))
    if max_depth is None:
        max_depth = max_possible
    max_depth = int(max_depth)
    if max_depth < 2 or max_depth > max_possible:
        raise DomainError(
            f"depth must lie in [2, {max_possible}] for {n_pts} samples")
    sums = np.empty(max_depth)
    w = traj.values
    for lvl in range(1, max_depth + 1):
        idx = np.round(np.linspace(0, n_pts - 1, (1 << lvl) + 1)).astype(int)
        sums[lvl - 1] = np.sum(np.abs(np.diff(w[idx])) ** p)
    levels = np.arange(1, max_depth + 1)
    weighted = float(np.sum(levels ** weight_exponent * sums))
    half = max_depth // 2
    tail_levels = levels[half:]
    tail = np.maximum(sums[half:], 1e-300)
    trend = float(np.polyfit(tail_levels, np.log(tail), 1)[0]) if tail.size > 1 else 0.0
    return PVariationReport(p=p, depth=max_depth, dyadic_sums=sums,
                            weighted_bound=weighted,
                            weight_exponent=float(weight_exponent),
                            bounded=trend <= 0.0, trend=trend)


_STATISTICS = {
    "mean": np.mean,
    "median": np.median,
    "std": lambda x: np.std(x, ddof=1),
}


def mc_aggregate(records, statistic="mean", *, level=0.95, n_boot=1000,
                 seed=0) -> EstimateWithCI:
    """Bootstrap percentile interval of a statistic over per-realization
    records."""
    x = np.asarray(records, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("no records to aggregate")
    fn = _STATISTICS.get(statistic, statistic)
    if not callable(fn):
        raise ConfigurationError(f"unknown statistic {statistic!r}")
    value = float(fn(x))
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, x.size, size=(int(n_boot), x.size))
    boots = np.array([fn(x[row]) for row in idx])
    lo, hi = np.quantile(boots, [(1 - level) / 2, 1 - (1 - level) / 2])
    lo, hi = min(float(lo), value), max(float(hi), value)
    return EstimateWithCI(value=value, ci_low=lo, ci_high=hi,
                          method=f"bootstrap[{statistic}]", n=int(x.size))
