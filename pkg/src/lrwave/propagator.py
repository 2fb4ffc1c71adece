"""Frequency-domain propagation through a slab medium.

The up/down-going amplitudes evolve under a trace-free generator whose slab
exponential is exact: with constant fluctuation nu over a sub-step of width
dz and frozen midpoint phase phi = 2 w z_mid / eps^tau,

    P_step = I + (i w nu dz / 2) * M(phi),      M(phi) = [[1, -e^{-i phi}],
                                                          [e^{i phi}, -1]],

and M(phi)^2 = 0, so P_step is the exact exponential of its generator and
det P_step = 1 identically.  Only the matrix entries (alpha, beta) are
tracked; the lower row is their conjugate mirror.

Per-frequency computations are independent: the spectrum routine maps over
frequencies with no shared state, mirroring negative frequencies by
conjugation (the medium is real).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, StateError
from .medium import MediumRealization

__all__ = [
    "PropagatorState",
    "FrequencyGrid",
    "TransmissionSpectrum",
    "propagate",
    "transmission",
    "spectrum",
]

MAX_PHASE_STEP = np.pi / 8.0


@dataclass(frozen=True)
class PropagatorState:
    """Propagator entries at depth z for one frequency; |alpha|^2 - |beta|^2
    stays 1 up to float accumulation.

    Drift is measured relative to |alpha|^2 (for strongly scattered
    frequencies the absolute defect is amplified by the entry magnitudes);
    the relative defect equals the |T|^2 + |R|^2 conservation defect.
    """

    alpha: complex
    beta: complex
    z: float
    omega: float

    @property
    def det_drift(self) -> float:
        defect = abs(abs(self.alpha) ** 2 - abs(self.beta) ** 2 - 1.0)
        return defect / max(1.0, abs(self.alpha) ** 2)


@dataclass(frozen=True)
class FrequencyGrid:
    """Hermitian-symmetric frequency grid in FFT order."""

    omegas: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float)
        n = w.size
        if n < 2:
            raise ConfigurationError("need at least two frequencies")
        # FFT order: w[n-k] == -w[k] for 0 < k < n/2
        k = np.arange(1, (n + 1) // 2)
        if not np.allclose(w[n - k], -w[k], rtol=1e-12, atol=1e-12 * max(1.0, w.max())):
            raise ConfigurationError("frequency grid is not Hermitian-symmetric")
        object.__setattr__(self, "omegas", w)

    @classmethod
    def for_window(cls, n: int, ds: float) -> "FrequencyGrid":
        return cls(2.0 * np.pi * np.fft.fftfreq(int(n), float(ds)))

    @property
    def n(self) -> int:
        return self.omegas.size


@dataclass(frozen=True)
class TransmissionSpectrum:
    """Transmission/reflection coefficients over a frequency grid for one
    realization.  ``active`` masks the frequencies actually propagated (the
    rest default to the transparent values and must not be trusted where the
    source has energy)."""

    grid: FrequencyGrid
    T: np.ndarray
    R: np.ndarray
    det_drift: float
    active: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def conservation_defect(self) -> float:
        mask = slice(None) if self.active is None else self.active
        return float(np.max(np.abs(np.abs(self.T[mask]) ** 2
                                   + np.abs(self.R[mask]) ** 2 - 1.0)))


def _substeps(omega, dz, eps_tau, max_phase=MAX_PHASE_STEP):
    return max(1, int(math.ceil(abs(omega) * dz / (eps_tau * max_phase))))


def _advance_slabs(alpha, beta, omegas, nu, z_left, dz, eps_tau, n_sub):
    """Advance all frequencies in one n_sub bin through every slab.

    Phases for a block of steps are precomputed in one vectorized call; the
    step recursion itself is sequential by nature.
    """
    sub = dz / n_sub
    offs = (np.arange(n_sub) + 0.5) * sub
    z_mid = (z_left[:, None] + offs[None, :]).ravel()
    nu_rep = np.repeat(nu, n_sub) if n_sub > 1 else nu
    half_c = 0.5j * sub * omegas
    scaled = 2.0 * z_mid / eps_tau
    for lo in range(0, z_mid.size, 1024):
        hi = min(lo + 1024, z_mid.size)
        phases = np.exp(1j * np.outer(scaled[lo:hi], omegas))
        for r in range(hi - lo):
            c = half_c * nu_rep[lo + r]
            ph = phases[r]
            a_new = (1.0 + c) * alpha - (c * np.conj(ph)) * beta
            beta = (c * ph) * alpha + (1.0 - c) * beta
            alpha = a_new
    return alpha, beta


def propagate(real: MediumRealization, omega, *,
              max_phase=MAX_PHASE_STEP) -> PropagatorState:
    """Propagate one frequency from the surface to the bottom of the medium.

    Sub-steps keep the phase increment per step at or below ``max_phase``;
    each step is the exact exponential of its frozen-phase generator, so the
    determinant is conserved identically and drift is pure float roundoff.
    """
    omega = float(omega)
    eps_tau = real.epsilon ** real.tau
    n_sub = _substeps(omega, real.dz, eps_tau, max_phase)
    alpha = np.array([1.0 + 0.0j])
    beta = np.array([0.0 + 0.0j])
    alpha, beta = _advance_slabs(alpha, beta, np.array([omega]), real.nu_eps,
                                 real.z_grid[:-1], real.dz, eps_tau, n_sub)
    state = PropagatorState(alpha=complex(alpha[0]), beta=complex(beta[0]),
                            z=real.depth, omega=omega)
    if state.det_drift > 1e-6:
        raise StateError(
            f"determinant drift {state.det_drift:.2e} exceeds 1e-6; "
            "reduce the sub-step phase bound")
    return state


def transmission(state: PropagatorState):
    """(T, R) = (1/conj(alpha), beta/conj(alpha)); |T|^2 + |R|^2 = 1."""
    alpha = np.asarray(state.alpha)
    if np.any(np.abs(alpha) < 1.0 - 1e-9):
        raise StateError(
            "corrupted propagator state: |alpha| < 1 violates conservation")
    t = 1.0 / np.conj(alpha)
    r = np.asarray(state.beta) / np.conj(alpha)
    if np.ndim(state.alpha) == 0:
        return complex(t), complex(r)
    return t, r


def spectrum(real: MediumRealization, grid: FrequencyGrid, *,
             active: np.ndarray | None = None,
             max_phase=MAX_PHASE_STEP) -> TransmissionSpectrum:
    """Transmission/reflection over a Hermitian grid for one realization.

    Only nonnegative frequencies are integrated; negative ones mirror by
    conjugation.  ``active`` (boolean, FFT order) restricts propagation to
    frequencies that matter for a given source; inactive entries stay at the
    transparent values (T, R) = (1, 0).
    """
    w = grid.omegas
    n = w.size
    if active is not None:
        active = np.asarray(active, dtype=bool)
        if active.shape != w.shape:
            raise ConfigurationError("active mask does not match the grid")
        # a frequency is computed if itself or its mirror is requested
        need = active.copy()
        k = np.arange(1, (n + 1) // 2)
        need[k] |= active[n - k]
        need[n - k] |= active[k]
    else:
        need = np.ones(n, dtype=bool)

    eps_tau = real.epsilon ** real.tau
    t_arr = np.ones(n, dtype=complex)
    r_arr = np.zeros(n, dtype=complex)
    drift = 0.0

    pos_idx = np.nonzero(need & (w >= 0.0))[0]
    if pos_idx.size:
        n_subs = np.array([_substeps(w[i], real.dz, eps_tau, max_phase)
                           for i in pos_idx])
        for ns in np.unique(n_subs):
            sel = pos_idx[n_subs == ns]
            omegas = w[sel]
            alpha = np.ones(sel.size, dtype=complex)
            beta = np.zeros(sel.size, dtype=complex)
            alpha, beta = _advance_slabs(alpha, beta, omegas, real.nu_eps,
                                         real.z_grid[:-1], real.dz, eps_tau,
                                         int(ns))
            defect = (np.abs(np.abs(alpha) ** 2 - np.abs(beta) ** 2 - 1.0)
                      / np.maximum(1.0, np.abs(alpha) ** 2))
            drift = max(drift, float(defect.max()))
            if np.any(np.abs(alpha) < 1.0 - 1e-9):
                raise StateError("corrupted propagator state: |alpha| < 1")
            t_arr[sel] = 1.0 / np.conj(alpha)
            r_arr[sel] = beta / np.conj(alpha)

    # mirror to negative frequencies: real medium => conjugate symmetry
    k = np.arange(1, (n + 1) // 2)
    neg = n - k
    t_arr[neg] = np.conj(t_arr[k])
    r_arr[neg] = np.conj(r_arr[k])
    if n % 2 == 0 and need[n // 2]:
        # the unpaired Nyquist entry has no mirror partner; propagate at |w|
        st = propagate(real, abs(w[n // 2]), max_phase=max_phase)
        t_arr[n // 2], r_arr[n // 2] = transmission(st)
        drift = max(drift, st.det_drift)

    return TransmissionSpectrum(grid=grid, T=t_arr, R=r_arr, det_drift=drift,
                                active=None if active is None else need,
                                meta={"epsilon": real.epsilon, "tau": real.tau})
