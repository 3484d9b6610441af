"""Periodic grids and discrete Fourier analysis on [0, L].

Conventions
-----------
A real L-periodic function sampled at the n equispaced nodes x_j = jL/n is
represented by the coefficients

    u_hat(k) = (1/L) * integral_0^L exp(-2*pi*i*k*x/L) u(x) dx,

discretised by the trapezoid rule, which on this grid is exactly
``fft(samples)/n``.  Coefficients are stored in FFT order,

    k = [0, 1, ..., n/2-1, -n/2, ..., -1],

so the unpaired Nyquist mode sits at index n//2.  With this normalisation the
periodic Sobolev norm takes the form

    ||u||_s^2 = L * sum_k (1 + |k|^2)^s |u_hat(k)|^2,

with k the integer mode index.  Products are dealiased by the 3/2 zero-padding
rule, which is exact for quadratic nonlinearities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SpectralSymmetryError

#: padded grid size used for dealiased products, as a multiple of n
PAD_FACTOR = 3, 2  # numerator, denominator of the 3/2 rule


def _padded_size(n: int) -> int:
    return (PAD_FACTOR[0] * n) // PAD_FACTOR[1]


@dataclass(frozen=True)
class PeriodicGrid:
    """Equispaced periodic grid: n collocation points on [0, L).

    n must be a power of two with n >= 8; nodes are x_j = jL/n.
    """

    n: int
    L: float

    def __post_init__(self):
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"period must be positive, got {self.L}")

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * (self.L / self.n)

    @property
    def modes(self) -> np.ndarray:
        """Integer wavenumbers in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of an L-periodic function.

    ``coeffs[i]`` is u_hat(k) for k = grid.modes[i] (FFT order).  ``is_real``
    marks fields whose samples are real, i.e. u_hat(-k) = conj(u_hat(k)) with
    a real Nyquist coefficient.
    """

    grid: PeriodicGrid
    coeffs: np.ndarray = field(repr=False)
    is_real: bool = True

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} coefficients, got shape {c.shape}")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def mode(self, k: int) -> complex:
        """Coefficient u_hat(k) for an integer mode -n/2 <= k <= n/2 - 1."""
        n = self.grid.n
        if not -n // 2 <= k < n // 2:
            raise ValueError(f"mode {k} not representable on an n={n} grid")
        return complex(self.coeffs[k % n])

    def with_coeffs(self, coeffs, is_real=None) -> "SpectralField":
        return SpectralField(self.grid, coeffs, self.is_real if is_real is None else is_real)


def forward_transform(samples, grid: PeriodicGrid) -> SpectralField:
    """Transform real samples at the grid nodes to Fourier coefficients."""
    v = np.asarray(samples, dtype=float)
    if v.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} samples, got shape {v.shape}")
    return SpectralField(grid, np.fft.fft(v) / grid.n, is_real=True)


def inverse_transform(field: SpectralField) -> np.ndarray:
    """Evaluate a real field at the grid nodes.

    The imaginary residue of the reconstruction is discarded below 1e-10
    relative; anything larger means the coefficients are not Hermitian and
    raises :class:`SpectralSymmetryError`.
    """
    if not field.is_real:
        raise ValueError("inverse_transform expects a field flagged is_real")
    v = np.fft.ifft(field.coeffs) * field.grid.n
    scale = float(np.max(np.abs(v)))
    resid = float(np.max(np.abs(v.imag)))
    if resid > 1e-10 * max(scale, 1e-300):
        raise SpectralSymmetryError(
            f"coefficients violate Hermitian symmetry: imaginary residue {resid:.3e} "
            f"against field scale {scale:.3e}"
        )
    return v.real


def differentiate(field: SpectralField, order: int) -> SpectralField:
    """Spectral derivative of the given order (1, 2 or 3).

    Odd orders zero the unpaired Nyquist mode so that real fields stay real.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")
    grid = field.grid
    ik = 2j * np.pi * grid.modes / grid.L
    if order % 2 == 1:
        ik = ik.copy()
        ik[grid.n // 2] = 0.0
    return field.with_coeffs(field.coeffs * ik**order)


def sobolev_norm(field: SpectralField, s: float) -> float:
    """Periodic Sobolev norm ||u||_s = sqrt(L * sum (1+k^2)^s |u_hat(k)|^2)."""
    k = field.grid.modes
    w = (1.0 + k.astype(float) ** 2) ** s
    return float(np.sqrt(field.grid.L * np.sum(w * np.abs(field.coeffs) ** 2)))


def translate(field: SpectralField, a: float) -> SpectralField:
    """Shift map u(.) -> u(. + a): multiplies u_hat(k) by exp(2*pi*i*k*a/L).

    All modes are phased, which preserves every Sobolev norm exactly.  A field
    with energy in the unpaired Nyquist mode consequently loses exact realness
    of its reconstruction for shifts off the grid; resolved fields (Nyquist at
    roundoff) are unaffected.
    """
    grid = field.grid
    phase = np.exp(2j * np.pi * grid.modes * (a / grid.L))
    return field.with_coeffs(field.coeffs * phase)


def _pad_coeffs(coeffs: np.ndarray, n: int, m: int, real: bool) -> np.ndarray:
    """Embed n coefficients (FFT order) into an m >= n spectrum.

    For real fields the unpaired Nyquist entry is split between +-n/2 so the
    padded spectrum stays Hermitian; complex fields keep it as a lone -n/2
    mode.
    """
    half = n // 2
    out = np.zeros(m, dtype=complex)
    out[:half] = coeffs[:half]
    if half > 1:
        out[m - (half - 1):] = coeffs[n - (half - 1):]
    nyq = coeffs[half]
    if real:
        out[m - half] += 0.5 * nyq
        out[half] += 0.5 * np.conj(nyq)
    else:
        out[m - half] += nyq
    return out


def _truncate_coeffs(coeffs: np.ndarray, m: int, n: int, real: bool) -> np.ndarray:
    """Restrict an m-point spectrum to the n retained modes (FFT order).

    On the coarse grid the exponentials with k = +-n/2 coincide at the nodes,
    so in the real case the +n/2 entry is folded onto the retained Nyquist
    slot; in the complex case the restriction is a plain projection.
    """
    half = n // 2
    out = np.zeros(n, dtype=complex)
    out[:half] = coeffs[:half]
    if half > 1:
        out[n - (half - 1):] = coeffs[m - (half - 1):]
    out[half] = coeffs[m - half]
    if real:
        out[half] += coeffs[half]
    return out


def padded_samples(field: SpectralField, m: int | None = None) -> np.ndarray:
    """Samples of the field on the refined m-point grid (default 3n/2).

    Real fields return real samples (the split-Nyquist embedding); complex
    fields return complex samples.
    """
    n = field.grid.n
    m = _padded_size(n) if m is None else m
    padded = _pad_coeffs(field.coeffs, n, m, field.is_real)
    v = np.fft.ifft(padded) * m
    return v.real if field.is_real else v


def field_from_padded(samples: np.ndarray, grid: PeriodicGrid, is_real: bool) -> SpectralField:
    """Transform samples on a refined grid back to a field on ``grid``."""
    m = samples.shape[0]
    coeffs = np.fft.fft(samples) / m
    return SpectralField(grid, _truncate_coeffs(coeffs, m, grid.n, is_real), is_real)


def multiply_dealiased(u: SpectralField, v: SpectralField) -> SpectralField:
    """Pointwise product computed alias-free by the 3/2 zero-padding rule.

    Both factors are evaluated on the 3n/2-point grid, multiplied there, and
    truncated back to n modes.  Exact (to roundoff) whenever the true product
    is band-limited to the retained modes, in particular for all quadratics.
    """
    if u.grid != v.grid:
        raise ValueError("operands live on different grids")
    m = _padded_size(u.grid.n)
    real = u.is_real and v.is_real
    su = padded_samples(u, m)
    sv = padded_samples(v, m)
    return field_from_padded(su * sv, u.grid, real)


def resample(field: SpectralField, n_new: int) -> SpectralField:
    """Re-represent the field on a grid with n_new points (same period).

    Upsampling pads with zeros (exact for resolved fields); downsampling is a
    spectral truncation.
    """
    grid_new = PeriodicGrid(n_new, field.grid.L)
    n = field.grid.n
    if n_new == n:
        return SpectralField(grid_new, field.coeffs, field.is_real)
    if n_new > n:
        c = _pad_coeffs(field.coeffs, n, n_new, field.is_real)
    else:
        c = _truncate_coeffs(field.coeffs, n, n_new, field.is_real)
    return SpectralField(grid_new, c, field.is_real)


def hermitize(field: SpectralField) -> SpectralField:
    """Project onto the Hermitian-symmetric part (removes roundoff drift)."""
    n = field.grid.n
    refl = np.conj(field.coeffs[(-np.arange(n)) % n])
    return SpectralField(field.grid, 0.5 * (field.coeffs + refl), is_real=True)


def real_part(field: SpectralField) -> SpectralField:
    """Real part of a complex field, as a real field on the same grid."""
    return hermitize(field)


def constant_field(grid: PeriodicGrid, value: float) -> SpectralField:
    c = np.zeros(grid.n, dtype=complex)
    c[0] = value
    return SpectralField(grid, c, is_real=True)


def cosine_field(grid: PeriodicGrid, k: int, amplitude: float = 1.0, phase: float = 0.0) -> SpectralField:
    """amplitude * cos(2*pi*k*x/L + phase) as a spectral field."""
    if not 0 < k < grid.n // 2:
        raise ValueError(f"need 0 < k < n/2 for a paired cosine mode, got k={k}")
    c = np.zeros(grid.n, dtype=complex)
    c[k] = 0.5 * amplitude * np.exp(1j * phase)
    c[-k % grid.n] = 0.5 * amplitude * np.exp(-1j * phase)
    return SpectralField(grid, c, is_real=True)
