"""The exact viscous-dispersive solution operator of u_t = u_xx - u_xxx.

On L-periodic functions the operator acts diagonally in Fourier space,

    V(t): u_hat(k) -> exp(-Q(k) t) u_hat(k),
    Q(k) = (2*pi/L)^2 k^2 - i (2*pi/L)^3 k^3,

a contraction semigroup: Re Q(k) >= 0 with equality only at k = 0.  The
dispersive (odd) part of Q is dropped on the unpaired Nyquist mode, matching
the odd-derivative convention of :mod:`kdvblab.fourier` so that real fields
stay real.
"""

from __future__ import annotations

import numpy as np

from .fourier import SpectralField, sobolev_norm


def semigroup_symbol(k, L: float):
    """Q(k) = (2*pi/L)^2 k^2 - i (2*pi/L)^3 k^3; accepts scalar or array k."""
    if not L > 0:
        raise ValueError(f"period must be positive, got {L}")
    w = 2.0 * np.pi / L
    k = np.asarray(k, dtype=float)
    q = w**2 * k**2 - 1j * w**3 * k**3
    return complex(q) if q.ndim == 0 else q


def _decay_factors(grid, t: float) -> np.ndarray:
    q = semigroup_symbol(grid.modes, grid.L)
    q = q.copy()
    q[grid.n // 2] = q[grid.n // 2].real  # keep the lone Nyquist mode real
    return np.exp(-q * t)


def apply_semigroup(field: SpectralField, t: float) -> SpectralField:
    """Apply V(t) for t >= 0 (the backward problem is ill-posed)."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    return field.with_coeffs(field.coeffs * _decay_factors(field.grid, t))


def smoothing_exponent_probe(field: SpectralField, r: float, delta: float,
                             t_list) -> float:
    """Fit the small-time smoothing exponent of the semigroup.

    Returns the least-squares slope of log(||V(t) u||_{r+delta} / ||u||_r)
    against log(1/t) over the given times.  The parabolic smoothing estimate
    predicts a slope of at most delta/2.
    """
    t = np.asarray(t_list, dtype=float)
    if t.size == 0:
        raise ValueError("t_list must not be empty")
    if np.any(t <= 0) or np.any(t >= 1) or np.any(np.diff(t) >= 0):
        raise ValueError("t_list must be strictly decreasing with entries in (0, 1)")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    base = sobolev_norm(field, r)
    ratios = np.array(
        [sobolev_norm(apply_semigroup(field, ti), r + delta) / base for ti in t]
    )
    x = np.log(1.0 / t)
    slope = np.polyfit(x, np.log(ratios), 1)[0]
    return float(slope)
