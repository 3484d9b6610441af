"""Bloch/Floquet spectra of the linearisation around a periodic wave.

The linearised operator around a profile phi with speed c is

    L u = -u''' + u'' + a1(x) u' + a0(x) u,
    a1 = c - f'(phi),   a0 = g'(phi) - f''(phi) phi',

acting on L-periodic functions.  Perturbations with Floquet exponent
theta in (-pi, pi] are captured by substituting d/dx -> d/dx + i*theta/L,
giving a one-parameter family of operators whose point spectra, united over
theta, make up the full spectrum of the linearisation on the line (Hill's
method).  Matrices are assembled in the Fourier basis exp(2*pi*i*k*x/L):
the constant-coefficient part is diagonal with symbol -D^3 + D^2,
D = i*(2*pi*k + theta)/L, and the variable coefficients contribute
Toeplitz-type convolution blocks.  All eigensolves are dense.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EigenpairResidualError, TruncationError
from .fourier import (PeriodicGrid, SpectralField, differentiate,
                      field_from_padded, padded_samples, sobolev_norm)
from .models import ModelFunctions
from .waves import WaveProfile

#: real parts below this margin do not count as instability (the translation
#: mode contributes an exact zero eigenvalue at theta = 0)
INSTABILITY_MARGIN = 1e-6


@dataclass(eq=False)
class BlochMatrix:
    """Truncated Floquet-parameter matrix on modes -N..N (row = output mode)."""

    theta: float
    N: int
    entries: np.ndarray
    profile: WaveProfile
    a1: SpectralField = field(repr=False, default=None)
    a0: SpectralField = field(repr=False, default=None)


@dataclass(eq=False)
class BlochSpectrum:
    """Eigenvalues over a theta sweep, each sorted by descending real part."""

    thetas: np.ndarray
    eigenvalues: list
    N: int
    max_real: float
    argmax_theta: float
    failures: list

    @property
    def unstable(self) -> bool:
        return self.max_real > INSTABILITY_MARGIN


def linearized_coefficients(w: WaveProfile, model: ModelFunctions):
    """Coefficient fields (a1, a0) of the linearisation around the wave."""
    phi = w.phi
    u = padded_samples(phi)
    ux = padded_samples(differentiate(phi, 1))
    a1 = field_from_padded(w.c - model.fp(u), phi.grid, True)
    a0 = field_from_padded(model.gp(u) - model.fpp(u) * ux, phi.grid, True)
    return a1, a0


def _convolution_table(coeffs: np.ndarray, n: int, N: int) -> np.ndarray:
    """u_hat(m) for offsets m = -2N..2N, zero beyond the stored band.

    The stored band is [-n/2, n/2-1]; the +n/2 entry is recovered from its
    Hermitian partner.  Offsets beyond the band are unresolved tails and
    enter as zero, so keep 4N <= n when fully-resolved blocks are needed.
    """
    table = np.zeros(4 * N + 1, dtype=complex)
    for m in range(-2 * N, 2 * N + 1):
        if -n // 2 <= m < n // 2:
            table[m + 2 * N] = coeffs[m % n]
        elif m == n // 2:
            table[m + 2 * N] = np.conj(coeffs[n // 2])
    return table


def assemble_bloch(w: WaveProfile, model: ModelFunctions, theta: float, N: int) -> BlochMatrix:
    """Matrix of the Floquet-parameter operator in the Fourier basis."""
    if not -np.pi < theta <= np.pi:
        raise ValueError(f"theta must lie in (-pi, pi], got {theta}")
    n = w.phi.grid.n
    if 2 * N + 1 > n:
        raise TruncationError(
            f"truncation 2N+1 = {2 * N + 1} exceeds the {n} stored modes; "
            "resample the profile to a finer grid instead of zero-padding"
        )
    a1, a0 = linearized_coefficients(w, model)
    t1 = _convolution_table(a1.coeffs, n, N)
    t0 = _convolution_table(a0.coeffs, n, N)
    ks = np.arange(-N, N + 1)
    D = 1j * (2.0 * np.pi * ks + theta) / w.L
    off = ks[:, None] - ks[None, :] + 2 * N
    M = t1[off] * D[None, :] + t0[off]
    M[np.diag_indices_from(M)] += -D**3 + D**2
    return BlochMatrix(theta=theta, N=N, entries=M, profile=w, a1=a1, a0=a0)


def _sorted_eig(entries: np.ndarray, vectors: bool):
    if vectors:
        ev, V = np.linalg.eig(entries)
    else:
        ev, V = np.linalg.eigvals(entries), None
    order = np.lexsort((-ev.imag, -ev.real))
    return (ev[order], V[:, order] if vectors else None)


def eigen_bloch(m: BlochMatrix) -> np.ndarray:
    """All 2N+1 eigenvalues, sorted by descending real part."""
    try:
        ev, _ = _sorted_eig(m.entries, vectors=False)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(m.entries)
        raise RuntimeError(
            f"eigensolver failed at theta={m.theta:.6g} (condition ~ {cond:.3e})"
        ) from exc
    return ev


def _next_pow2(x: int) -> int:
    return 1 << max(x - 1, 7).bit_length()


def eigenpair_bloch(m: BlochMatrix, which: int):
    """The ``which``-th eigenpair (ordering of :func:`eigen_bloch`).

    The eigenvector is normalised to unit L^2 norm with its largest
    coefficient rotated to the positive real axis, and certified by
    re-applying the operator pseudospectrally on a refined grid; a relative
    residual above 1e-8 raises :class:`EigenpairResidualError`.
    """
    if not 0 <= which < m.entries.shape[0]:
        raise ValueError(f"eigenpair index {which} out of range")
    ev, V = _sorted_eig(m.entries, vectors=True)
    lam = complex(ev[which])
    vec = V[:, which]

    w = m.profile
    N = m.N
    n_fine = _next_pow2(max(2 * N + 2, w.phi.grid.n))
    grid_fine = PeriodicGrid(n_fine, w.L)
    coeffs = np.zeros(n_fine, dtype=complex)
    ks = np.arange(-N, N + 1)
    coeffs[ks % n_fine] = vec
    psi_fine = SpectralField(grid_fine, coeffs, is_real=False)
    norm = sobolev_norm(psi_fine, 0.0)
    top = coeffs[np.argmax(np.abs(coeffs))]
    rotation = np.exp(-1j * np.angle(top)) / norm
    coeffs = coeffs * rotation
    psi_fine = SpectralField(grid_fine, coeffs, is_real=False)

    D = 1j * (2.0 * np.pi * grid_fine.modes + m.theta) / w.L
    s_psi = np.fft.ifft(coeffs) * n_fine
    s_dpsi = np.fft.ifft(D * coeffs) * n_fine
    s_a1 = padded_samples(m.a1, n_fine)
    s_a0 = padded_samples(m.a0, n_fine)
    applied = (np.fft.fft(s_a1 * s_dpsi + s_a0 * s_psi) / n_fine
               + (-D**3 + D**2) * coeffs)
    resid = np.sqrt(w.L * np.sum(np.abs(applied - lam * coeffs) ** 2))
    if resid > 1e-8:
        raise EigenpairResidualError(
            f"eigenpair residual {resid:.3e} exceeds 1e-8 (truncation N={N} too small)"
        )

    n = w.phi.grid.n
    coeffs_n = np.zeros(n, dtype=complex)
    coeffs_n[ks % n] = vec * rotation
    return lam, SpectralField(w.phi.grid, coeffs_n, is_real=False)


def _max_workers(n_jobs: int) -> int:
    cap = os.environ.get("KDVB_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n_jobs, limit))


def floquet_sweep(w: WaveProfile, model: ModelFunctions, n_theta: int, N: int,
                  workers: int | None = None) -> BlochSpectrum:
    """Eigenvalues over a uniform Floquet-exponent grid in (-pi, pi].

    The grid always contains theta = 0 (where the translation mode and, for
    unstable waves, the top eigenvalue live), so refining n_theta leaves the
    recorded maximum stable.  Per-theta eigensolver failures are recorded in
    ``failures`` and the remaining results returned.
    """
    if n_theta < 2:
        raise ValueError(f"need at least two theta points, got {n_theta}")
    raw = 2.0 * np.pi * np.arange(n_theta) / n_theta
    thetas = np.sort(np.where(raw > np.pi + 1e-12, raw - 2.0 * np.pi, raw))

    def job(theta):
        return eigen_bloch(assemble_bloch(w, model, theta, N))

    results = [None] * n_theta
    failures = []
    max_w = _max_workers(n_theta) if workers is None else max(1, workers)
    if max_w == 1:
        for i, th in enumerate(thetas):
            try:
                results[i] = job(th)
            except Exception as exc:  # noqa: BLE001 - per-theta isolation
                failures.append((float(th), str(exc)))
                results[i] = np.empty(0, dtype=complex)
    else:
        with ThreadPoolExecutor(max_workers=max_w) as pool:
            futures = {i: pool.submit(job, th) for i, th in enumerate(thetas)}
            for i, fut in futures.items():
                try:
                    results[i] = fut.result()
                except Exception as exc:  # noqa: BLE001
                    failures.append((float(thetas[i]), str(exc)))
                    results[i] = np.empty(0, dtype=complex)

    max_real, argmax_theta = -np.inf, np.nan
    for th, ev in zip(thetas, results):
        if ev.size and ev[0].real > max_real:
            max_real, argmax_theta = float(ev[0].real), float(th)
    return BlochSpectrum(thetas=thetas, eigenvalues=results, N=N,
                         max_real=max_real, argmax_theta=argmax_theta,
                         failures=failures)


def coefficient_bound(w: WaveProfile, model: ModelFunctions) -> float:
    """C0 = sup_x |a0(x) - a1'(x)/2|, evaluated on an 8x refined grid."""
    a1, a0 = linearized_coefficients(w, model)
    d_a1 = differentiate(a1, 1)
    combo = a0.with_coeffs(a0.coeffs - 0.5 * d_a1.coeffs)
    return float(np.max(np.abs(padded_samples(combo, 8 * w.phi.grid.n))))


def resolvent_bound_probe(w: WaveProfile, model: ModelFunctions, lambdas, N: int) -> np.ndarray:
    """Operator norms of the truncated resolvent at the given points.

    Values are largest singular values of (lambda - L)^{-1} in the
    l^2-coefficient norm; the energy estimate bounds each by
    1/(Re lambda - C0) with C0 = :func:`coefficient_bound`.
    """
    lams = np.asarray(lambdas, dtype=complex)
    c0 = coefficient_bound(w, model)
    if np.any(lams.real <= c0 + 1.0):
        raise ValueError(f"probe points need Re lambda > C0 + 1 = {c0 + 1.0:.6g}")
    M = assemble_bloch(w, model, 0.0, N).entries
    eye = np.eye(M.shape[0])
    out = np.empty(lams.size)
    for i, lam in enumerate(lams):
        smin = np.linalg.svd(lam * eye - M, compute_uv=False)[-1]
        out[i] = 1.0 / smin
    return out


def save_spectrum_csv(sweep: BlochSpectrum, path) -> None:
    """One row per eigenvalue: theta, re_lambda, im_lambda, rank."""
    with open(path, "w") as fh:
        fh.write("theta,re_lambda,im_lambda,rank\n")
        for th, ev in zip(sweep.thetas, sweep.eigenvalues):
            for rank, lam in enumerate(ev):
                fh.write(f"{float(th)!r},{float(lam.real)!r},"
                         f"{float(lam.imag)!r},{rank}\n")


def save_spectrum_summary(sweep: BlochSpectrum, path) -> None:
    doc = {
        "max_real": sweep.max_real,
        "argmax_theta": sweep.argmax_theta,
        "N": sweep.N,
        "n_theta": int(len(sweep.thetas)),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")
