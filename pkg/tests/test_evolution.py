import numpy as np
import pytest

from kdvblab import (BlowUpError, NonContractionError, PeriodicGrid,
                     SolverConfig, SpectralField, apply_semigroup,
                     constant_field, contraction_ratios, cosine_field,
                     data_map_continuity_probe, hermitize,
                     inverse_transform, kdvbf, linear_source, load_trace,
                     nonlinearity, save_trace, sobolev_norm, solve,
                     solve_picard, step_etdrk4)

from conftest import rng

trapezoid = getattr(np, "trapezoid", np.trapz)  # numpy 2.x renamed trapz


def smooth_random_field(grid, seed, norm_h3, decay=3.0):
    k = grid.modes.astype(float)
    raw = (rng(seed).standard_normal(grid.n)
           + 1j * rng(seed + 1).standard_normal(grid.n)) * (1 + k**2) ** (-decay)
    f = hermitize(SpectralField(grid, raw, is_real=True))
    return f.with_coeffs(norm_h3 * f.coeffs / sobolev_norm(f, 3.0))


class TestNonlinearity:
    def test_zero_state(self, model):
        grid = PeriodicGrid(64, 2 * np.pi)
        out = nonlinearity(constant_field(grid, 0.0), model)
        assert np.max(np.abs(out.coeffs)) < 1e-15

    def test_carrying_capacity_equilibrium(self, model):
        grid = PeriodicGrid(64, 2 * np.pi)
        out = nonlinearity(constant_field(grid, 1.0), model)
        assert np.max(np.abs(out.coeffs)) < 1e-13

    def test_burgers_flux_of_cosine(self):
        # f = u^2/2, g = 0: F = -u u_x = sin(2x)/2 for u = cos x
        grid = PeriodicGrid(64, 2 * np.pi)
        out = nonlinearity(cosine_field(grid, 1), kdvbf(0.0, 1.0))
        assert np.max(np.abs(inverse_transform(out)
                             - 0.5 * np.sin(2 * grid.nodes))) < 1e-12


class TestStepEtdrk4:
    def test_pure_linear_flow_matches_semigroup(self):
        grid = PeriodicGrid(64, 2 * np.pi)
        free = kdvbf(0.0, 0.0)
        f = smooth_random_field(grid, 8, 0.5)
        out = step_etdrk4(f, 0.05, free)
        exact = apply_semigroup(f, 0.05)
        assert np.max(np.abs(out.coeffs - exact.coeffs)) < 1e-12

    def test_constant_equilibrium_is_fixed(self, model):
        grid = PeriodicGrid(32, 2 * np.pi)
        u = constant_field(grid, 1.0)
        for _ in range(10):
            u = step_etdrk4(u, 0.01, model)
        assert abs(u.mode(0) - 1.0) < 1e-12
        assert np.max(np.abs(np.delete(u.coeffs, 0))) < 1e-12

    def test_self_convergence_is_fourth_order(self, model):
        grid = PeriodicGrid(64, 2 * np.pi)
        u0 = smooth_random_field(grid, 0, 0.3)

        def final(dt):
            config = SolverConfig(dt=dt, t_end=0.5, record_every=10**9)
            return solve(u0, model, config).fields[-1]

        ref = final(0.5 / 2**13)
        errs = []
        for p in (5, 6, 7):
            out = final(0.5 / 2**p)
            errs.append(sobolev_norm(out.with_coeffs(out.coeffs - ref.coeffs), 3.0))
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all(ratios > 10.0) and np.all(ratios < 24.0)

    def test_blow_up_detected_within_a_step(self, model):
        grid = PeriodicGrid(32, 2 * np.pi)
        u = constant_field(grid, -1e160)
        with pytest.raises(BlowUpError):
            step_etdrk4(u, 0.1, model)


class TestSolve:
    def test_zero_data_stays_zero(self, model):
        grid = PeriodicGrid(32, 2 * np.pi)
        trace = solve(constant_field(grid, 0.0), model,
                      SolverConfig(dt=1e-2, t_end=0.5))
        assert not trace.blown_up
        assert max(np.max(np.abs(f.coeffs)) for f in trace.fields) < 1e-14

    def test_linear_model_single_mode_factor(self):
        # f = 0, g = r u: each mode evolves by exp((r - Q(k)) t) exactly;
        # for r = 1, L = 2 pi the k = 1 modulus is constant
        grid = PeriodicGrid(32, 2 * np.pi)
        u0 = cosine_field(grid, 1)
        trace = solve(u0, linear_source(1.0),
                      SolverConfig(dt=1e-3, t_end=1.0, record_every=100))
        for t, f in zip(trace.times, trace.fields):
            expected = 0.5 * np.exp(1j * t)  # exp((1 - (1 - i)) t) * 0.5
            assert abs(f.mode(1) - expected) < 1e-8
            assert abs(abs(f.mode(1)) - 0.5) < 1e-8

    def test_mean_balance_along_trace(self, model):
        """d/dt of the mean equals the source mean; flux and dispersion drop out."""
        grid = PeriodicGrid(64, 2 * np.pi)
        u0 = cosine_field(grid, 1, 0.2)
        trace = solve(u0, model, SolverConfig(dt=5e-4, t_end=0.3, record_every=1))
        g_means = np.array([nonlinearity(f, model).mode(0).real
                            for f in trace.fields])
        drift = trace.fields[-1].mode(0).real - trace.fields[0].mode(0).real
        integral = trapezoid(g_means, trace.times)
        assert abs(drift - integral) < 1e-8

    def test_blow_up_truncates_and_flags(self, model):
        grid = PeriodicGrid(32, 2 * np.pi)
        trace = solve(constant_field(grid, -5.0), model,
                      SolverConfig(dt=1e-3, t_end=5.0))
        assert trace.blown_up
        assert trace.blowup_time is not None and trace.blowup_time < 1.0
        assert trace.times[-1] <= trace.blowup_time

    def test_trace_round_trip_bit_exact(self, model, tmp_path):
        grid = PeriodicGrid(32, 2 * np.pi)
        u0 = cosine_field(grid, 1, 0.3)
        trace = solve(u0, model, SolverConfig(dt=1e-2, t_end=0.1, record_every=2))
        path = tmp_path / "trace.jsonl"
        save_trace(trace, path)
        back = load_trace(path)
        assert np.array_equal(back.times, trace.times)
        assert np.array_equal(back.norms, trace.norms)
        for a, b in zip(back.fields, trace.fields):
            assert np.array_equal(a.coeffs, b.coeffs)
        assert back.model_name == trace.model_name


class TestSolverConfig:
    def test_dt_must_be_smaller_than_t_end(self):
        with pytest.raises(ValueError):
            SolverConfig(dt=1.0, t_end=0.5)

    def test_picard_tol_floor(self):
        with pytest.raises(ValueError):
            SolverConfig(dt=0.1, t_end=1.0, picard_tol=1e-15)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            SolverConfig(dt=0.1, t_end=1.0, scheme="euler")


class TestPicard:
    def test_zero_forcing_returns_linear_flow(self):
        grid = PeriodicGrid(32, 2 * np.pi)
        f = smooth_random_field(grid, 9, 0.4)
        out = solve_picard(f, kdvbf(0.0, 0.0), 0.2)
        exact = apply_semigroup(f, 0.2)
        assert np.max(np.abs(out.coeffs - exact.coeffs)) < 1e-12

    def test_agrees_with_etdrk4_for_small_data(self, model):
        grid = PeriodicGrid(64, 2 * np.pi)
        u0 = cosine_field(grid, 1, 1.0)
        u0 = u0.with_coeffs(u0.coeffs + cosine_field(grid, 2, 0.4, 0.7).coeffs)
        u0 = u0.with_coeffs(0.1 * u0.coeffs / sobolev_norm(u0, 3.0))
        p = solve_picard(u0, model, 0.05)
        trace = solve(u0, model, SolverConfig(dt=1e-4, t_end=0.05, record_every=10**9))
        e = trace.fields[-1]
        diff = sobolev_norm(p.with_coeffs(p.coeffs - e.coeffs), 3.0)
        assert diff < 1e-6

    def test_iteration_contracts(self, model):
        grid = PeriodicGrid(64, 2 * np.pi)
        u0 = cosine_field(grid, 1, 1.0)
        u0 = u0.with_coeffs(0.1 * u0.coeffs / sobolev_norm(u0, 3.0))
        ratios = contraction_ratios(u0, model, 0.05)
        assert np.all(ratios < 0.1)
        tail = ratios[-3:]
        assert np.max(tail) / np.min(tail) < 2.0

    def test_long_horizon_raises_non_contraction(self, model):
        grid = PeriodicGrid(32, 2 * np.pi)
        u0 = cosine_field(grid, 1, 3.0)
        with pytest.raises(NonContractionError) as err:
            solve_picard(u0, model, 3.0, max_iter=8)
        assert err.value.last_ratio > 0

    def test_per_step_picard_scheme_matches_etdrk4(self, model):
        grid = PeriodicGrid(32, 2 * np.pi)
        u0 = cosine_field(grid, 1, 0.1)
        a = solve(u0, model, SolverConfig(dt=0.01, t_end=0.1, scheme="picard",
                                          record_every=10**9))
        b = solve(u0, model, SolverConfig(dt=1e-4, t_end=0.1, record_every=10**9))
        diff = sobolev_norm(a.fields[-1].with_coeffs(
            a.fields[-1].coeffs - b.fields[-1].coeffs), 3.0)
        assert diff < 1e-7


class TestDataMapContinuity:
    def test_linear_model_ratio_is_exactly_the_growth_factor(self):
        # along the zero mode the linear dynamics amplify by e^{rT} exactly
        grid = PeriodicGrid(32, 2 * np.pi)
        u0 = cosine_field(grid, 1, 0.2)
        ratios = data_map_continuity_probe(
            u0, linear_source(1.0), 0.5, [1e-2, 1e-3, 1e-4], dt=1e-3,
            direction=constant_field(grid, 1.0))
        assert np.max(np.abs(ratios - np.exp(0.5))) < 1e-7
        assert np.max(ratios) - np.min(ratios) < 1e-9

    def test_kdvbf_ratios_bounded_as_delta_shrinks(self, model):
        grid = PeriodicGrid(64, 2 * np.pi)
        u0 = cosine_field(grid, 1, 1.0)
        u0 = u0.with_coeffs(0.5 * u0.coeffs / sobolev_norm(u0, 3.0))
        ratios = data_map_continuity_probe(u0, model, 0.5,
                                           [1e-2, 1e-3, 1e-4, 1e-5], dt=2e-3)
        assert np.all(np.isfinite(ratios))
        assert np.max(ratios) / np.min(ratios) < 1.2

    def test_deltas_validated(self, model):
        grid = PeriodicGrid(32, 2 * np.pi)
        u0 = cosine_field(grid, 1, 0.1)
        with pytest.raises(ValueError):
            data_map_continuity_probe(u0, model, 0.1, [1e-3, 1e-2])
