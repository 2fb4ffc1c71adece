"""Simulation of the limiting travel-time processes and their covariances.

Four families, all normalized to start at 0 on t in [0, 1]:

* fractional Brownian motion (Gaussian, constant index),
* Hermite processes of rank K (non-Gaussian for K >= 2; partial sums of the
  K-th Hermite polynomial of long-memory Gaussian noise, the discrete
  non-central-limit construction),
* the multifractional Gaussian process driven by a depth-varying index
  (partial sums of coupled fractional white noises sharing one spectral
  noise, weighted N^(-h(j/N))),
* its rank-K generalization combining both.

Covariance oracles: the fBm/Hermite closed form and the double integral of
the asymptotic field covariance for the multifractional case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .gaussian_field import (FrequencyGridSpec, Trajectory,
                             asymptotic_covariance_scale, fgn_covariance,
                             sample_field_diagonal, synthesize_fgn,
                             validate_hurst)
from .hermite import hermite_poly
from .quadrature import geometric_edges, panel_nodes

__all__ = [
    "LimitSpec",
    "simulate",
    "simulate_hermite",
    "simulate_sh",
    "simulate_sh_hermite",
    "hermite_covariance",
    "sh_covariance",
]

# spectral cutoff for the coupled-noise construction: the partial sums are
# low-frequency dominated, so 16*pi per unit micro step keeps the truncated
# variance share below 0.5% at a quarter of the media-sampling cost
_SH_X_MAX_FACTOR = 16.0 * np.pi


def _as_profile(h_profile):
    if callable(h_profile):
        return h_profile
    value = float(h_profile)
    return lambda u: np.full_like(np.asarray(u, dtype=float), value)


def _profile_values(h_profile, n):
    prof = _as_profile(h_profile)
    h = np.asarray(prof(np.arange(1, n + 1) / n), dtype=float)
    if np.any(h <= 0.5) or np.any(h >= 1.0):
        raise DomainError(
            f"index profile leaves (1/2, 1): range [{h.min():.3f}, {h.max():.3f}]")
    return h


def hermite_covariance(h, t1, t2):
    """(|t1|^2H + |t2|^2H - |t1 - t2|^2H) / 2 - the same for every rank
    once the process is variance-normalized."""
    h = validate_hurst(h)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if np.any(t1 < 0) or np.any(t2 < 0):
        raise DomainError("times must be nonnegative")
    val = 0.5 * (np.abs(t1) ** (2 * h) + np.abs(t2) ** (2 * h)
                 - np.abs(t1 - t2) ** (2 * h))
    return float(val) if val.ndim == 0 else val


def _hermite_sum_std(h_tilde, k, n):
    """Exact standard deviation of sum_{j<=n} P_K(Y_j) for fGn(h_tilde):
    Var = K! * sum_l (n - |l|) rho(l)^K."""
    lags = np.arange(1, n)
    rho_k = fgn_covariance(h_tilde, lags) ** k
    var = math.factorial(k) * (n + 2.0 * np.dot(n - lags, rho_k))
    return math.sqrt(var)


def simulate_hermite(h, k, n, seed, *, normalization="unit_variance_at_1") -> Trajectory:
    """Rank-K Hermite process by partial sums of P_K of exact fGn.

    The driving noise has index (H - 1)/K + 1 so the K-th Hermite power
    decays with exponent 2 - 2H; the variance at t = 1 is normalized to 1
    exactly (finite-sample lag sum), making the covariance the fBm form for
    every K.
    """
    h = float(h)
    if not 0.5 < h < 1.0:
        raise DomainError("limit index must lie in (1/2, 1)")
    k = int(k)
    if k < 1:
        raise DomainError("rank must be a positive integer")
    h_tilde = (h - 1.0) / k + 1.0
    n = int(n)
    if n < 2:
        raise DomainError("need at least two increments")
    y = synthesize_fgn(h_tilde, n, seed)
    p = hermite_poly(k, y.values)
    if normalization == "unit_variance_at_1":
        scale = _hermite_sum_std(h_tilde, k, n)
    elif normalization == "raw":
        scale = float(n) ** h
    else:
        raise DomainError(f"unknown normalization {normalization!r}")
    values = np.concatenate([[0.0], np.cumsum(p)]) / scale
    return Trajectory(np.arange(n + 1) / n, values,
                      meta={"kind": "hermite", "h": h, "k": k, "n": n,
                            "seed": y.meta.get("seed"),
                            "normalization": normalization})


def _coupled_noise(h_field, n, seed, *, level_spacing, grid_spec=None):
    zeta = np.arange(1, n + 1, dtype=float)
    if grid_spec is None:
        grid_spec = FrequencyGridSpec(x_max=_SH_X_MAX_FACTOR,
                                      dx=2.0 * np.pi / (4.0 * (n + 1.0)))
    values, info = sample_field_diagonal(h_field, zeta, grid_spec=grid_spec,
                                         seed=seed, level_spacing=level_spacing)
    return values, info


def simulate_sh(h_profile, n, seed, *, level_spacing=0.02,
                grid_spec=None) -> Trajectory:
    """Multifractional limit process on [0, 1]: partial sums
    sum_{j <= N t} N^(-h(j/N)) Y_j(h(j/N)) with one shared spectral noise
    coupling the fractional white noises Y(.) across indices."""
    n = int(n)
    if n < 2 ** 8:
        raise DomainError("need at least 2^8 increments")
    h = _profile_values(h_profile, n)
    y, _ = _coupled_noise(h, n, seed, level_spacing=level_spacing,
                          grid_spec=grid_spec)
    values = np.concatenate([[0.0], np.cumsum(float(n) ** (-h) * y)])
    return Trajectory(np.arange(n + 1) / n, values,
                      meta={"kind": "sh", "n": n, "seed": repr(seed)})


_SH_HERMITE_NORM_CACHE: dict = {}


def simulate_sh_hermite(h_profile, k, n, seed, *, level_spacing=0.02,
                        grid_spec=None, calibration_paths=256) -> Trajectory:
    """Rank-K multifractional process: partial sums of P_K of the coupled
    noise at field indices (h(.) - 1)/K + 1, weighted N^(-h(.)).

    Reduces to :func:`simulate_sh` at K = 1 and matches
    :func:`simulate_hermite` in law for constant profiles.  Normalization:
    exact for constant profiles, Monte Carlo calibrated (cached) otherwise.
    """
    k = int(k)
    if k < 1:
        raise DomainError("rank must be a positive integer")
    n = int(n)
    if n < 2 ** 8:
        raise DomainError("need at least 2^8 increments")
    h = _profile_values(h_profile, n)
    h_field = (h - 1.0) / k + 1.0
    y, _ = _coupled_noise(h_field, n, seed, level_spacing=level_spacing,
                          grid_spec=grid_spec)
    p = hermite_poly(k, y)
    weights = float(n) ** (-h)
    if k == 1:
        scale = 1.0
    elif np.ptp(h) < 1e-12:
        scale = _hermite_sum_std(float(h_field[0]), k, n) / float(n) ** float(h[0])
    else:
        key = (h.tobytes(), k, n, int(calibration_paths))
        scale = _SH_HERMITE_NORM_CACHE.get(key)
        if scale is None:
            # calibration paths draw from their own fixed seed stream
            acc = np.empty(calibration_paths)
            for i in range(calibration_paths):
                yc, _ = _coupled_noise(h_field, n, (987001, k, i),
                                       level_spacing=level_spacing,
                                       grid_spec=grid_spec)
                acc[i] = np.dot(weights, hermite_poly(k, yc))
            scale = float(acc.std(ddof=1))
            _SH_HERMITE_NORM_CACHE[key] = scale
    values = np.concatenate([[0.0], np.cumsum(weights * p)]) / scale
    return Trajectory(np.arange(n + 1) / n, values,
                      meta={"kind": "sh_hermite", "k": k, "n": n,
                            "seed": repr(seed)})


# --------------------------------------------------------------------------
# multifractional covariance oracle (weakly singular double integral)
# --------------------------------------------------------------------------

def _inner_integral(u1, z2, h_prof, j1_sq, band, npts=12):
    """int_0^z2 R(h(u1), h(u2)) |u1 - u2|^(h(u1)+h(u2)-2) du2 with the
    singular diagonal band integrated analytically (frozen coefficients).

    The band removes the need to resolve anything below ``band``, so the
    flank panels only grade down to that width.
    """
    h1 = float(h_prof(np.asarray(u1)))
    total = 0.0
    if u1 < z2:
        d_left = min(band, u1)
        d_right = min(band, z2 - u1)
        r11 = j1_sq * asymptotic_covariance_scale(h1, h1)
        total += r11 * (d_left ** (2 * h1 - 1) + d_right ** (2 * h1 - 1)) / (2 * h1 - 1)
        segments = []
        if u1 - d_left > 0:
            segments.append((0.0, u1 - d_left, "right"))
        if u1 + d_right < z2:
            segments.append((u1 + d_right, z2, "left"))
    else:
        segments = [(0.0, z2, "right")] if z2 > 0 else []
    for a, b, toward in segments:
        frac = min(0.25, max(1e-7, 0.5 * band / (b - a)))
        edges = geometric_edges(a, b, toward=toward, min_frac=frac)
        nodes, weights = panel_nodes(edges, npts)
        h2 = np.asarray(h_prof(nodes), dtype=float)
        scale = j1_sq * asymptotic_covariance_scale(np.full_like(h2, h1), h2)
        vals = scale * np.abs(u1 - nodes) ** (h1 + h2 - 2.0)
        total += float(np.dot(weights, vals))
    return total


def sh_covariance(h_profile, z1, z2, *, j1=1.0, band=1e-3, npts=16) -> float:
    """Covariance of the multifractional limit at (z1, z2):

        j1^2 * int_0^z1 int_0^z2 R(h(u1), h(u2)) |u1-u2|^(h(u1)+h(u2)-2)

    with R the long-lag covariance constant of the coupled field.  The
    weakly singular diagonal is handled by an analytic band plus panels
    graded geometrically toward the singular lines and the domain corners.
    Exact for constant profiles (where the identity
    int int H(2H-1)|u-v|^(2H-2) = z^(2H) applies); frozen-coefficient band
    error O(h' * band * log^2 band) otherwise.
    """
    z1 = float(z1)
    z2 = float(z2)
    if z1 < 0 or z2 < 0:
        raise DomainError("depths must be nonnegative")
    if z1 == 0.0 or z2 == 0.0:
        return 0.0
    prof = _as_profile(h_profile)
    h_check = np.asarray(prof(np.linspace(0.0, max(z1, z2), 65)), dtype=float)
    if np.any(h_check <= 0.5) or np.any(h_check >= 1.0):
        raise DomainError("index profile leaves (1/2, 1)")
    j1_sq = float(j1) ** 2
    delta = band * max(z1, z2)

    breakpoints = [0.0, z1] if z2 >= z1 else [0.0, z2, z1]
    outer_edges = []
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        seg = geometric_edges(a, b, toward="both", min_frac=1e-9)
        outer_edges.append(seg if not outer_edges else seg[1:])
    edges = np.concatenate(outer_edges)
    nodes, weights = panel_nodes(edges, npts)
    inner = np.array([_inner_integral(float(u), z2, prof, j1_sq, delta)
                      for u in nodes])
    return float(np.dot(weights, inner))


# --------------------------------------------------------------------------
# one entry point for all limit families
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitSpec:
    """Which limiting process to simulate, at what resolution."""

    kind: str                      # fbm | hermite | multifrac | multifrac_hermite
    n: int
    seed: int | tuple = 0
    h: float | None = None         # constant index (fbm / hermite)
    k: int = 1
    h_profile: object = None       # callable on [0, 1] (multifrac kinds)
    normalization: str = "unit_variance_at_1"

    def __post_init__(self):
        kinds = ("fbm", "hermite", "multifrac", "multifrac_hermite")
        if self.kind not in kinds:
            raise DomainError(f"kind must be one of {kinds}")
        if self.kind in ("fbm", "hermite") and self.h is None:
            raise DomainError(f"{self.kind} needs a constant index h")
        if self.kind in ("multifrac", "multifrac_hermite") and self.h_profile is None:
            raise DomainError(f"{self.kind} needs an index profile")


def simulate(spec: LimitSpec) -> Trajectory:
    if spec.kind == "fbm":
        return simulate_hermite(spec.h, 1, spec.n, spec.seed,
                                normalization=spec.normalization)
    if spec.kind == "hermite":
        return simulate_hermite(spec.h, spec.k, spec.n, spec.seed,
                                normalization=spec.normalization)
    if spec.kind == "multifrac":
        return simulate_sh(spec.h_profile, spec.n, spec.seed)
    return simulate_sh_hermite(spec.h_profile, spec.k, spec.n, spec.seed)
