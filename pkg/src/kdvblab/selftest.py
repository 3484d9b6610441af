"""Built-in verification suite: structural examples and invariant checks.

Run through the CLI (``kdvblab selftest``); prints one line per check and
exits nonzero if anything fails.  These are quick desk checks, not the full
test suite.
"""

from __future__ import annotations

import numpy as np

from . import evolution, experiment, fourier, semigroup, spectra, waves
from .fourier import (PeriodicGrid, SpectralField, constant_field, cosine_field,
                      forward_transform, inverse_transform, multiply_dealiased,
                      sobolev_norm, translate)
from .models import kdvbf, linear_source, validate_derivatives

trapezoid = getattr(np, "trapezoid", np.trapz)  # numpy 2.x renamed trapz

CHECKS = []


def _check(name):
    def wrap(fn):
        CHECKS.append((name, fn))
        return fn
    return wrap


def _assert_close(a, b, tol, label=""):
    err = np.max(np.abs(np.asarray(a) - np.asarray(b)))
    if not err <= tol:
        raise AssertionError(f"{label or 'mismatch'}: error {err:.3e} > {tol:g}")


def _rng(seed=0):
    return np.random.default_rng(seed)


def _random_real_field(grid, seed=0, decay=0.0):
    rng = _rng(seed)
    samples = rng.standard_normal(grid.n)
    f = forward_transform(samples, grid)
    if decay:
        k = grid.modes.astype(float)
        f = f.with_coeffs(f.coeffs * (1.0 + k**2) ** (-decay / 2.0))
    return f


@_check("transform: constant maps to a single zero-mode coefficient")
def _t_constant():
    grid = PeriodicGrid(32, 2.0)
    f = forward_transform(np.ones(32), grid)
    _assert_close(f.mode(0), 1.0, 1e-14)
    _assert_close(np.delete(f.coeffs, 0), 0.0, 1e-14)


@_check("transform: cosine splits into the +-1 pair")
def _t_cosine():
    grid = PeriodicGrid(64, 5.0)
    f = forward_transform(np.cos(2 * np.pi * grid.nodes / grid.L), grid)
    _assert_close(f.mode(1), 0.5, 1e-14)
    _assert_close(f.mode(-1), 0.5, 1e-14)


@_check("transform: round trip reproduces random samples")
def _t_roundtrip():
    grid = PeriodicGrid(64, 3.0)
    v = _rng(1).standard_normal(64)
    _assert_close(inverse_transform(forward_transform(v, grid)), v, 1e-12)


@_check("derivative: cos -> -(2*pi/L) sin, third order composes")
def _t_derivative():
    grid = PeriodicGrid(64, 4.0)
    f = cosine_field(grid, 1)
    d = fourier.differentiate(f, 1)
    expected = -(2 * np.pi / grid.L) * np.sin(2 * np.pi * grid.nodes / grid.L)
    _assert_close(inverse_transform(d), expected, 1e-12)
    d3 = fourier.differentiate(f, 3)
    d12 = fourier.differentiate(fourier.differentiate(f, 1), 2)
    _assert_close(d3.coeffs, d12.coeffs, 1e-14)


@_check("Sobolev norm: ||1||_3 = sqrt(2 pi) and ||cos||_0 = sqrt(pi) on L = 2 pi")
def _t_norm_values():
    grid = PeriodicGrid(64, 2 * np.pi)
    _assert_close(sobolev_norm(constant_field(grid, 1.0), 3.0), np.sqrt(2 * np.pi), 1e-12)
    _assert_close(sobolev_norm(cosine_field(grid, 1), 0.0), np.sqrt(np.pi), 1e-12)


@_check("Parseval: spectral L2 norm equals the trapezoid norm (100 fields)")
def _t_parseval():
    grid = PeriodicGrid(64, 3.7)
    for seed in range(100):
        f = _random_real_field(grid, seed)
        v = inverse_transform(f)
        grid_norm = np.sqrt((grid.L / grid.n) * np.sum(v**2))
        rel = abs(sobolev_norm(f, 0.0) - grid_norm) / grid_norm
        if rel > 1e-10:
            raise AssertionError(f"seed {seed}: Parseval violated, rel {rel:.2e}")


@_check("translation preserves every Sobolev norm")
def _t_translate_norm():
    grid = PeriodicGrid(64, 2.5)
    f = _random_real_field(grid, 3)
    for a in (0.1 * grid.L, 0.5 * grid.L, 0.9 * grid.L):
        for s in (0.0, 3.0):
            rel = abs(sobolev_norm(translate(f, a), s) - sobolev_norm(f, s))
            if rel > 1e-12 * sobolev_norm(f, s):
                raise AssertionError(f"norm changed under shift a={a}, s={s}")


@_check("translate(cos, L/4) matches the shifted cosine pointwise")
def _t_translate_pointwise():
    grid = PeriodicGrid(64, 2 * np.pi)
    f = cosine_field(grid, 1)
    shifted = translate(f, grid.L / 4)
    _assert_close(inverse_transform(shifted),
                  np.cos(grid.nodes + grid.L / 4), 1e-12)


@_check("dealiased product equals the brute-force convolution")
def _t_dealias_oracle():
    grid = PeriodicGrid(32, 2 * np.pi)
    n = grid.n
    u = _random_real_field(grid, 11)
    v = _random_real_field(grid, 12)
    keep = np.abs(grid.modes) <= n // 3
    u = u.with_coeffs(np.where(keep, u.coeffs, 0.0))
    v = v.with_coeffs(np.where(keep, v.coeffs, 0.0))
    w = multiply_dealiased(u, v)

    def conv(k):
        return sum(u.mode(k1) * v.mode(k - k1)
                   for k1 in range(-n // 2, n // 2)
                   if -n // 2 <= k - k1 < n // 2)

    for k in range(-n // 2 + 1, n // 2):
        if abs(w.mode(k) - conv(k)) > 1e-12:
            raise AssertionError(f"mode {k}: product {w.mode(k)} vs convolution {conv(k)}")
    # the +-n/2 exponentials coincide at the nodes; the retained Nyquist slot
    # carries their folded sum
    nyq = conv(-n // 2) + np.conj(conv(-n // 2))
    if abs(w.mode(-n // 2) - nyq) > 1e-12:
        raise AssertionError(f"Nyquist slot {w.mode(-n//2)} vs folded {nyq}")


@_check("semigroup symbol: 0, 1-i and 4+8i at the reference points")
def _t_symbol():
    q = semigroup.semigroup_symbol
    _assert_close(q(0, 1.0), 0.0, 1e-15)
    _assert_close(q(1, 2 * np.pi), 1.0 - 1.0j, 1e-14)
    _assert_close(q(-2, 2 * np.pi), 4.0 + 8.0j, 1e-13)


@_check("semigroup: identity at t=0, exact single-mode decay, contraction")
def _t_semigroup_action():
    grid = PeriodicGrid(32, 2 * np.pi)
    f = _random_real_field(grid, 4)
    _assert_close(semigroup.apply_semigroup(f, 0.0).coeffs, f.coeffs, 1e-15)
    single = cosine_field(grid, 1)
    out = semigroup.apply_semigroup(single, 1.0)
    _assert_close(out.mode(1), 0.5 * np.exp(-1.0 + 1.0j), 1e-14)
    for t in (0.1, 1.0):
        if sobolev_norm(semigroup.apply_semigroup(f, t), 3.0) > sobolev_norm(f, 3.0):
            raise AssertionError(f"norm grew under the semigroup at t={t}")


@_check("semigroup law V(t)V(s) = V(t+s)")
def _t_semigroup_law():
    grid = PeriodicGrid(32, 2 * np.pi)
    f = _random_real_field(grid, 5)
    for t in (0.1, 0.7):
        for s in (0.1, 0.7):
            lhs = semigroup.apply_semigroup(semigroup.apply_semigroup(f, t), s)
            rhs = semigroup.apply_semigroup(f, t + s)
            scale = np.max(np.abs(rhs.coeffs))
            _assert_close(lhs.coeffs, rhs.coeffs, 1e-12 * scale)


@_check("smoothing probe: fitted exponent within the parabolic bound")
def _t_smoothing():
    grid = PeriodicGrid(512, 2 * np.pi)
    rng = _rng(6)
    k = grid.modes.astype(float)
    coeffs = (1.0 + k**2) ** -0.5 * np.exp(2j * np.pi * rng.random(grid.n))
    f = fourier.hermitize(SpectralField(grid, coeffs, is_real=True))
    t_list = 2.0 ** -np.arange(4, 15)
    slope = semigroup.smoothing_exponent_probe(f, 0.0, 1.8, t_list)
    if not slope <= 0.95:
        raise AssertionError(f"smoothing exponent {slope:.3f} exceeds 0.9 + 0.05")


@_check("model derivatives agree with centred differences")
def _t_models():
    validate_derivatives(kdvbf(1.0, 1.0))
    validate_derivatives(kdvbf(2.0, 0.5))
    validate_derivatives(linear_source(1.0))


@_check("nonlinearity: equilibria of the logistic source map to zero")
def _t_nonlinearity():
    grid = PeriodicGrid(64, 2 * np.pi)
    model = kdvbf(1.0, 1.0)
    for value in (0.0, 1.0):
        out = evolution.nonlinearity(constant_field(grid, value), model)
        _assert_close(out.coeffs, 0.0, 1e-13)
    cos = cosine_field(grid, 1)
    flux_only = kdvbf(0.0, 1.0)  # f = u^2/2, g = 0
    out = evolution.nonlinearity(cos, flux_only)
    _assert_close(inverse_transform(out), 0.5 * np.sin(2 * grid.nodes), 1e-12)


@_check("ETDRK4 with zero nonlinearity reproduces the exact semigroup")
def _t_etdrk4_linear():
    grid = PeriodicGrid(64, 2 * np.pi)
    zero = kdvbf(0.0, 0.0)  # f = 0, g = 0
    f = _random_real_field(grid, 8, decay=4.0)
    dt = 0.05
    stepped = evolution.step_etdrk4(f, dt, zero)
    exact = semigroup.apply_semigroup(f, dt)
    _assert_close(stepped.coeffs, exact.coeffs, 1e-12)


@_check("carrying-capacity equilibrium is preserved step by step")
def _t_equilibrium():
    grid = PeriodicGrid(32, 2 * np.pi)
    model = kdvbf(1.0, 1.0)
    u = constant_field(grid, 1.0)
    for _ in range(5):
        u = evolution.step_etdrk4(u, 0.01, model)
    _assert_close(u.mode(0), 1.0, 1e-12)
    _assert_close(np.delete(u.coeffs, 0), 0.0, 1e-12)


@_check("mean balance: drift of the mean equals the integrated source mean")
def _t_mean_balance():
    grid = PeriodicGrid(64, 2 * np.pi)
    model = kdvbf(1.0, 1.0)
    u0 = cosine_field(grid, 1, 0.2)
    config = evolution.SolverConfig(dt=1e-3, t_end=0.2, record_every=1)
    trace = evolution.solve(u0, model, config)
    g_means = np.array([
        evolution.nonlinearity(f, model).mode(0).real for f in trace.fields
    ])
    drift = trace.fields[-1].mode(0).real - trace.fields[0].mode(0).real
    integral = trapezoid(g_means, trace.times)
    _assert_close(drift, integral, 1e-6, "mean-balance law")


@_check("Picard with zero forcing returns the linear flow after one sweep")
def _t_picard_trivial():
    grid = PeriodicGrid(32, 2 * np.pi)
    free = kdvbf(0.0, 0.0)
    f = _random_real_field(grid, 9, decay=4.0)
    out = evolution.solve_picard(f, free, 0.2)
    exact = semigroup.apply_semigroup(f, 0.2)
    _assert_close(out.coeffs, exact.coeffs, 1e-12)


@_check("Hopf predictor: c = -r, L = 2 pi / sqrt(r), amplitude sqrt(eps)")
def _t_predictor():
    w = waves.hopf_predictor(1.0, 1.0, 0.01)
    _assert_close(w.c, -1.0, 1e-15)
    _assert_close(w.L, 2 * np.pi, 1e-14)
    _assert_close(waves.amplitude(w.phi), 0.1, 1e-14)
    _assert_close(waves.hopf_predictor(4.0, 1.0, 0.01).L, np.pi, 1e-14)


@_check("profile residual vanishes on both logistic equilibria")
def _t_profile_trivial():
    grid = PeriodicGrid(64, 2 * np.pi)
    model = kdvbf(1.0, 1.0)
    for value, c in ((0.0, -1.0), (1.0, 0.3)):
        w = waves.WaveProfile(phi=constant_field(grid, value), c=c,
                              L=grid.L, eps=0.0, residual=0.0)
        _assert_close(waves.profile_residual(w, model).coeffs, 0.0, 1e-13)


@_check("constant-coefficient operator: growth rate r on constants, zero at k = +-1")
def _t_bloch_constant():
    grid = PeriodicGrid(256, 2 * np.pi)
    model = kdvbf(1.0, 1.0)
    w = waves.WaveProfile(phi=constant_field(grid, 0.0), c=-1.0,
                          L=grid.L, eps=0.0, residual=0.0)
    m = spectra.assemble_bloch(w, model, 0.0, 16)
    ks = np.arange(-16, 17)
    symbol = 1j * ks**3 - ks.astype(float)**2 - 1j * ks + 1.0
    _assert_close(np.diag(m.entries), symbol, 1e-12)
    lam, psi = spectra.eigenpair_bloch(m, 0)
    _assert_close(lam, 1.0, 1e-10)
    _assert_close(abs(psi.mode(0)), 1.0 / np.sqrt(2 * np.pi), 1e-10)


@_check("spectra at +-theta are complex conjugates (branch wave)")
def _t_conjugation():
    branch = waves.continue_branch(1.0, 1.0, [0.005, 0.02])
    w = branch.profiles[-1]
    model = kdvbf(1.0, 1.0)
    def tie_robust_sort(v):
        return v[np.lexsort((v.imag, np.round(v.real, 6)))]

    for theta in (0.7, 2.0):
        ev_p = spectra.eigen_bloch(spectra.assemble_bloch(w, model, theta, 20))
        ev_m = spectra.eigen_bloch(spectra.assemble_bloch(w, model, -theta, 20))
        _assert_close(tie_robust_sort(ev_p), tie_robust_sort(np.conj(ev_m)), 1e-8)


@_check("resolvent norm obeys the energy bound at three probe points")
def _t_resolvent():
    grid = PeriodicGrid(64, 2 * np.pi)
    model = kdvbf(1.0, 1.0)
    zero = waves.WaveProfile(phi=constant_field(grid, 0.0), c=-1.0,
                             L=grid.L, eps=0.0, residual=0.0)
    lams = np.array([3.0, 10.0, 20.0])
    probe = spectra.resolvent_bound_probe(zero, model, lams, 16)
    c0 = spectra.coefficient_bound(zero, model)
    _assert_close(c0, 1.0, 1e-12)
    bound = 1.0 / (lams - c0) * (1.0 + 1e-6)
    if np.any(probe > bound):
        raise AssertionError(f"probe {probe} exceeds bound {bound}")
    branch = waves.continue_branch(1.0, 1.0, [0.005, 0.02])
    w = branch.profiles[-1]
    c0w = spectra.coefficient_bound(w, model)
    probe_w = spectra.resolvent_bound_probe(w, model, [c0w + 5.0], 20)
    if probe_w[0] > (1.0 / 5.0) * (1.0 + 1e-6):
        raise AssertionError(f"wave probe {probe_w[0]} exceeds {(1/5)*(1+1e-6)}")


@_check("orbital distance of an exact translate is zero with the right shift")
def _t_orbital():
    branch = waves.continue_branch(1.0, 1.0, [0.005, 0.02])
    w = branch.profiles[-1]
    u = translate(w.phi, 0.3 * w.L)
    d, a = experiment.orbital_distance(u, w, 3.0)
    if d > 1e-10:
        raise AssertionError(f"translate distance {d:.2e}")
    if min(abs(a - 0.3 * w.L), abs(a - 0.3 * w.L + w.L), abs(a - 0.3 * w.L - w.L)) > 1e-6:
        raise AssertionError(f"argmin shift {a} vs {0.3 * w.L}")


def run_selftest(verbose: bool = True) -> int:
    failures = 0
    for name, fn in CHECKS:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            if verbose:
                print(f"FAIL {name}: {exc}")
        else:
            if verbose:
                print(f"PASS {name}")
    if verbose:
        total = len(CHECKS)
        print(f"{total - failures}/{total} checks passed")
    return 0 if failures == 0 else 1
