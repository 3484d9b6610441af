"""Periodic traveling-wave profiles by Fourier-collocation Newton iteration.

A profile phi with speed c and fundamental period L satisfies the third-order
ODE

    -c phi' + f'(phi) phi' + phi''' - phi'' - g(phi) = 0.

The solver rescales to the fixed reference interval [0, 2*pi] (so the period
enters as an explicit scalar unknown), collocates the equation at the grid
nodes, and closes the system with a phase condition Im phi_hat(1) = 0 plus
either a fixed speed or a fixed amplitude a(phi) = 2 |phi_hat(1)|.  Small-
amplitude branches bifurcate from the zero state at critical speed -r with
period 2*pi/sqrt(r); the predictor seeds Newton with the linear-theory
cosine and the branch is then continued in the amplitude parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import json

import numpy as np

from .errors import BifurcationPointError, NewtonConvergenceError
from .fourier import (PeriodicGrid, SpectralField, cosine_field, differentiate,
                      field_from_padded, forward_transform, hermitize,
                      inverse_transform, padded_samples, resample, sobolev_norm)
from .models import ModelFunctions, kdvbf


@dataclass(eq=False)
class WaveProfile:
    """A traveling wave: profile field, speed, period, branch parameter.

    ``eps`` parametrises the branch through the squared amplitude measure
    a(phi)^2 = (2 |phi_hat(1)|)^2; ``residual`` is the L^2 norm of the
    profile-equation residual at the stored resolution.
    """

    phi: SpectralField
    c: float
    L: float
    eps: float
    residual: float


def amplitude(field: SpectralField) -> float:
    """Branch amplitude measure a = 2 |u_hat(1)|."""
    return 2.0 * abs(field.mode(1))


def profile_residual(w: WaveProfile, model: ModelFunctions) -> SpectralField:
    """-c phi' + f'(phi) phi' + phi''' - phi'' - g(phi), with the nonlinear
    terms evaluated on the 3/2-padded grid.

    Zero (to roundoff) exactly when ``w`` solves the profile equation on its
    grid.
    """
    phi = w.phi
    d1 = differentiate(phi, 1)
    d2 = differentiate(phi, 2)
    d3 = differentiate(phi, 3)
    u = padded_samples(phi)
    ux = padded_samples(d1)
    nl = field_from_padded(model.fp(u) * ux - model.g(u), phi.grid, True)
    # the third derivative amplifies coefficient roundoff by (n/2)^3 while the
    # combination nearly cancels; project back onto the symmetric part
    return hermitize(phi.with_coeffs(-w.c * d1.coeffs + nl.coeffs + d3.coeffs - d2.coeffs))


@lru_cache(maxsize=8)
def _diff_matrices(n: int):
    """Dense spectral differentiation matrices on the 2*pi reference grid."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    kodd = k.copy()
    kodd[n // 2] = 0.0
    ident = np.eye(n)
    F = np.fft.fft(ident, axis=0)
    Fi = np.fft.ifft(ident, axis=0)
    D1 = np.real(Fi @ ((1j * kodd)[:, None] * F))
    D2 = np.real(Fi @ ((-(k**2))[:, None] * F))
    D3 = np.real(Fi @ ((-1j * kodd**3)[:, None] * F))
    for D in (D1, D2, D3):
        D.flags.writeable = False
    return D1, D2, D3


def hopf_predictor(r: float, alpha: float, eps: float, n: int = 64) -> WaveProfile:
    """Linear-theory seed for the small-amplitude branch.

    Critical speed -r, period 2*pi/sqrt(r), profile sqrt(eps) * cos with zero
    mean.  Only a Newton seed: its residual is O(eps).
    """
    if not (r > 0 and alpha > 0):
        raise ValueError("need r > 0 and alpha > 0")
    if not 0 < eps <= 0.25:
        raise ValueError(f"predictor is only meaningful for 0 < eps <= 0.25, got {eps}")
    L = 2.0 * np.pi / np.sqrt(r)
    grid = PeriodicGrid(n, L)
    phi = cosine_field(grid, 1, np.sqrt(eps))
    w = WaveProfile(phi=phi, c=-r, L=L, eps=eps, residual=np.inf)
    w.residual = sobolev_norm(profile_residual(w, kdvbf(r, alpha)), 0.0)
    return w


def refine_newton(guess: WaveProfile, model: ModelFunctions, fix: str,
                  target: float, max_iter: int = 50, tol: float = 1e-10) -> WaveProfile:
    """Newton-refine a profile with speed and period as free unknowns.

    Unknowns are the collocation samples plus (c, L); equations are the
    collocated profile ODE on the rescaled domain, the phase condition
    Im phi_hat(1) = 0, and the closure ``fix``: either c = target or the
    amplitude measure 2 |phi_hat(1)| = target.  The Jacobian is assembled
    analytically from the linearised profile operator together with the
    d/dc and d/dL columns, and solved densely.
    """
    if fix not in ("speed", "amplitude"):
        raise ValueError(f"fix must be 'speed' or 'amplitude', got {fix!r}")
    if not np.isfinite(guess.residual):
        raise ValueError("guess residual must be finite")
    n = guess.phi.grid.n
    psi = inverse_transform(guess.phi)
    c, L = float(guess.c), float(guess.L)
    D1, D2, D3 = _diff_matrices(n)
    j = np.arange(n)
    mode1_row = np.exp(-2j * np.pi * j / n) / n   # psi_hat(1) = mode1_row @ psi

    res = np.inf
    polish_left = 3  # extra quadratic steps once below tol, down to the roundoff floor
    best = None
    for it in range(max_iter + 1):
        grid = PeriodicGrid(n, L)
        phi = forward_transform(psi, grid)
        stage = WaveProfile(phi=phi, c=c, L=L, eps=0.0, residual=0.0)
        R = inverse_transform(profile_residual(stage, model))
        res = float(np.sqrt((L / n) * np.sum(R**2)))
        psihat1 = complex(mode1_row @ psi)
        phase = psihat1.imag
        closure = (c - target) if fix == "speed" else (2.0 * abs(psihat1) - target)
        scale = 1.0 + abs(psihat1)
        converged = (res < tol and abs(phase) <= 1e-12 * scale
                     and abs(closure) <= 1e-12 * (1.0 + abs(target)))
        if converged:
            improving = best is None or res < 0.5 * best[0]
            if best is None or res < best[0]:
                best = (res, psi.copy(), c, L, phi)
            if res == 0.0 or not improving or polish_left == 0:
                break
            polish_left -= 1
        if it == max_iter:
            if best is not None:
                break
            raise NewtonConvergenceError(res)

        beta = 2.0 * np.pi / L
        d1psi = D1 @ psi
        Jpsi = (-c * beta * D1
                + np.diag(model.fpp(psi) * (beta * d1psi))
                + model.fp(psi)[:, None] * (beta * D1)
                + beta**3 * D3 - beta**2 * D2
                - np.diag(model.gp(psi)))
        dRdc = -beta * d1psi
        dRdbeta = (-c * d1psi + model.fp(psi) * d1psi
                   + 3.0 * beta**2 * (D3 @ psi) - 2.0 * beta * (D2 @ psi))
        dRdL = dRdbeta * (-2.0 * np.pi / L**2)

        A = np.zeros((n + 2, n + 2))
        rhs = np.zeros(n + 2)
        A[:n, :n] = Jpsi
        A[:n, n] = dRdc
        A[:n, n + 1] = dRdL
        rhs[:n] = -R
        A[n, :n] = mode1_row.imag
        rhs[n] = -phase
        if fix == "speed":
            A[n + 1, n] = 1.0
        else:
            if abs(psihat1) < 1e-14:
                raise BifurcationPointError()
            A[n + 1, :n] = 2.0 * (psihat1.conjugate() * mode1_row).real / abs(psihat1)
        rhs[n + 1] = -closure

        try:
            delta = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise BifurcationPointError(f"singular Newton system: {exc}") from exc
        psi = psi + delta[:n]
        c = c + float(delta[n])
        L = L + float(delta[n + 1])
        if not (np.isfinite(L) and L > 0 and np.isfinite(c) and np.all(np.isfinite(psi))):
            raise NewtonConvergenceError(res, "Newton step left the admissible region")

    res, psi, c, L, phi = best
    a = 2.0 * abs(complex(mode1_row @ psi))
    out = WaveProfile(phi=phi, c=c, L=L, eps=a * a, residual=res)
    out.residual = sobolev_norm(profile_residual(out, model), 0.0)
    return out


@dataclass
class BranchResult:
    """Profiles from a continuation run; ``truncated`` marks an early stop."""

    profiles: list
    truncated: bool = False
    failure: str | None = None


def continue_branch(r: float, alpha: float, eps_list, n: int = 64) -> BranchResult:
    """Natural-parameter continuation of the small-amplitude branch.

    The predictor seeds the first solve and each converged profile seeds the
    next amplitude target.  The first Newton failure truncates the branch
    (the admissible parameter range is not known a priori).
    """
    eps = [float(e) for e in eps_list]
    if not eps:
        return BranchResult(profiles=[])
    if any(b <= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps_list must be strictly increasing")
    if eps[0] > 0.01:
        raise ValueError(f"first branch point must satisfy eps <= 0.01, got {eps[0]}")
    model = kdvbf(r, alpha)
    seed = hopf_predictor(r, alpha, eps[0], n)
    profiles = []
    for e in eps:
        try:
            seed = refine_newton(seed, model, "amplitude", np.sqrt(e))
        except NewtonConvergenceError as exc:
            return BranchResult(profiles=profiles, truncated=True, failure=str(exc))
        profiles.append(seed)
    return BranchResult(profiles=profiles)


def resample_profile(w: WaveProfile, n_new: int) -> WaveProfile:
    """The same wave represented on an ``n_new``-point grid (same period)."""
    return WaveProfile(phi=resample(w.phi, n_new), c=w.c, L=w.L,
                       eps=w.eps, residual=w.residual)


def save_profile(w: WaveProfile, r: float, alpha: float, path) -> None:
    """Write a profile as a JSON document; files round-trip bit-exactly."""
    doc = {
        "r": r,
        "alpha": alpha,
        "eps": w.eps,
        "c": w.c,
        "L": w.L,
        "n": w.phi.grid.n,
        "coeffs": [[float(z.real), float(z.imag)] for z in w.phi.coeffs],
        "residual": w.residual,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_profile(path):
    """Read a profile JSON document; returns (WaveProfile, r, alpha)."""
    with open(path) as fh:
        doc = json.load(fh)
    grid = PeriodicGrid(doc["n"], doc["L"])
    coeffs = np.array([complex(re, im) for re, im in doc["coeffs"]])
    w = WaveProfile(
        phi=SpectralField(grid, coeffs, is_real=True),
        c=doc["c"], L=doc["L"], eps=doc["eps"], residual=doc["residual"],
    )
    return w, doc["r"], doc["alpha"]
