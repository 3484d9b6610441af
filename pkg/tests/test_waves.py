import json

import numpy as np
import pytest

from kdvblab import (BifurcationPointError, NewtonConvergenceError,
                     PeriodicGrid, amplitude, constant_field, continue_branch,
                     cosine_field, hopf_predictor, inverse_transform,
                     load_profile, profile_residual, refine_newton,
                     save_profile, sobolev_norm, translate)
from kdvblab.waves import WaveProfile


class TestHopfPredictor:
    def test_reference_values(self):
        w = hopf_predictor(1.0, 1.0, 0.01)
        assert w.c == -1.0
        assert abs(w.L - 2 * np.pi) < 1e-14
        assert abs(amplitude(w.phi) - 0.1) < 1e-14

    def test_period_scales_with_sqrt_r(self):
        assert abs(hopf_predictor(4.0, 1.0, 0.01).L - np.pi) < 1e-14

    def test_amplitude_vanishes_with_eps(self):
        for eps in (1e-2, 1e-4, 1e-6):
            w = hopf_predictor(1.0, 1.0, eps)
            assert abs(amplitude(w.phi) - np.sqrt(eps)) < 1e-14
            assert w.c == -1.0

    def test_eps_cap(self):
        with pytest.raises(ValueError):
            hopf_predictor(1.0, 1.0, 0.3)


class TestProfileResidual:
    @pytest.mark.parametrize("value,c", [(0.0, -1.0), (1.0, 0.7)])
    def test_equilibria_solve_the_profile_equation(self, model, value, c):
        grid = PeriodicGrid(64, 2 * np.pi)
        w = WaveProfile(phi=constant_field(grid, value), c=c, L=grid.L,
                        eps=0.0, residual=0.0)
        assert sobolev_norm(profile_residual(w, model), 0.0) < 1e-13

    def test_near_kernel_seed_against_quadrature_oracle(self, model):
        """Residual of the linear-theory seed vs direct fine-grid quadrature."""
        r = alpha = 1.0
        L = 2 * np.pi / np.sqrt(r)
        grid = PeriodicGrid(64, L)
        w = WaveProfile(phi=cosine_field(grid, 1, 0.1), c=-r, L=L,
                        eps=0.01, residual=0.0)
        res = sobolev_norm(profile_residual(w, model), 0.0)

        # oracle: evaluate the profile expression for 0.1 cos(2 pi x / L)
        # analytically on a fine grid and take the trapezoid L2 norm
        m = 4096
        x = np.arange(m) * L / m
        om = 2 * np.pi / L
        phi = 0.1 * np.cos(om * x)
        dphi = -0.1 * om * np.sin(om * x)
        d2phi = -0.1 * om**2 * np.cos(om * x)
        d3phi = 0.1 * om**3 * np.sin(om * x)
        expr = (-w.c * dphi + alpha * phi * dphi + d3phi - d2phi
                - r * phi * (1 - phi))
        oracle = np.sqrt((L / m) * np.sum(expr**2))
        assert res > 0
        assert 1e-3 < res < 1e-1  # near-kernel direction at onset
        assert abs(res - oracle) < 1e-10


class TestRefineNewton:
    def test_exact_constant_returned_unchanged(self, model):
        grid = PeriodicGrid(64, 2 * np.pi)
        guess = WaveProfile(phi=constant_field(grid, 1.0), c=0.4, L=grid.L,
                            eps=0.0, residual=0.0)
        out = refine_newton(guess, model, "speed", 0.4)
        assert np.array_equal(inverse_transform(out.phi), np.ones(64))
        assert out.c == 0.4
        assert out.L == grid.L

    def test_converges_from_predictor(self, model):
        w = refine_newton(hopf_predictor(1.0, 1.0, 0.04), model,
                          "amplitude", np.sqrt(0.04))
        assert w.residual < 1e-10
        assert abs(w.c + 1.0) < 2 * 0.04
        assert abs(w.L - 2 * np.pi) < 4 * 0.04
        assert abs(amplitude(w.phi) - 0.2) < 1e-12

    def test_phase_gauge_enforced(self, wave_eps02):
        assert abs(wave_eps02.phi.mode(1).imag) < 1e-10

    def test_translated_guess_returns_same_orbit(self, model, wave_eps02):
        w = wave_eps02
        shifted = WaveProfile(phi=translate(w.phi, 0.37 * w.L), c=w.c, L=w.L,
                              eps=w.eps, residual=w.residual)
        again = refine_newton(shifted, model, "amplitude", np.sqrt(w.eps))
        assert np.max(np.abs(np.abs(again.phi.coeffs)
                             - np.abs(w.phi.coeffs))) < 1e-8

    def test_invalid_fix_keyword(self, model, wave_eps02):
        with pytest.raises(ValueError):
            refine_newton(wave_eps02, model, "period", 1.0)

    def test_stagnation_reports_last_residual(self, model):
        guess = hopf_predictor(1.0, 1.0, 0.04)
        with pytest.raises(NewtonConvergenceError) as err:
            refine_newton(guess, model, "amplitude", np.sqrt(0.04), max_iter=0)
        assert np.isfinite(err.value.last_residual)

    def test_zero_amplitude_seed_is_a_bifurcation_point(self, model):
        """The amplitude closure degenerates exactly at branch onset."""
        grid = PeriodicGrid(64, 2 * np.pi)
        onset = WaveProfile(phi=constant_field(grid, 0.0), c=-1.0, L=grid.L,
                            eps=0.0, residual=0.0)
        with pytest.raises(BifurcationPointError):
            refine_newton(onset, model, "amplitude", 0.1)


class TestBranch:
    def test_branch_profiles_satisfy_the_ode(self, branch, model):
        for w in branch.profiles:
            assert w.residual < 1e-9
            assert sobolev_norm(profile_residual(w, model), 0.0) < 1e-9

    def test_amplitude_follows_sqrt_eps(self, branch):
        eps = np.array([w.eps for w in branch.profiles])
        amp = np.array([amplitude(w.phi) for w in branch.profiles])
        for i in range(1, len(eps)):
            measured = amp[i] / amp[0]
            predicted = np.sqrt(eps[i] / eps[0])
            assert abs(measured / predicted - 1.0) < 0.15

    def test_speed_and_period_move_linearly_in_eps(self, branch):
        eps = np.array([w.eps for w in branch.profiles])
        dc = np.array([abs(w.c + 1.0) for w in branch.profiles])
        dL = np.array([abs(w.L - 2 * np.pi) for w in branch.profiles])
        slope_c = np.polyfit(np.log(eps), np.log(dc), 1)[0]
        slope_L = np.polyfit(np.log(eps), np.log(dL), 1)[0]
        assert 0.8 <= slope_c <= 1.2
        assert 0.8 <= slope_L <= 1.2

    def test_wave_energy_grows_along_branch(self, branch):
        norms = []
        for w in branch.profiles:
            mean_removed = w.phi.with_coeffs(
                np.where(np.arange(w.phi.grid.n) == 0, 0.0, w.phi.coeffs))
            norms.append(sobolev_norm(mean_removed, 0.0))
        assert np.all(np.diff(norms) > 0)

    def test_translates_remain_solutions(self, branch, model):
        w = branch.profiles[-1]
        for a in (0.21 * w.L, 0.68 * w.L):
            moved = WaveProfile(phi=translate(w.phi, a), c=w.c, L=w.L,
                                eps=w.eps, residual=w.residual)
            assert sobolev_norm(profile_residual(moved, model), 0.0) < 1e-9

    def test_empty_list_gives_empty_branch(self):
        result = continue_branch(1.0, 1.0, [])
        assert result.profiles == [] and not result.truncated

    def test_validates_eps_list(self):
        with pytest.raises(ValueError):
            continue_branch(1.0, 1.0, [0.01, 0.01])
        with pytest.raises(ValueError):
            continue_branch(1.0, 1.0, [0.02, 0.04])  # first point too far out

    def test_unreachable_target_truncates_with_flag(self):
        result = continue_branch(1.0, 1.0, [0.005, 25.0])
        assert result.truncated
        assert len(result.profiles) == 1
        assert result.failure

    def test_other_parameter_regime(self):
        """r = 2, alpha = 0.5: onset at speed -2 with period 2 pi / sqrt(2)."""
        r, alpha = 2.0, 0.5
        result = continue_branch(r, alpha, [0.005, 0.01, 0.02, 0.04])
        assert not result.truncated
        eps = np.array([w.eps for w in result.profiles])
        dc = np.array([abs(w.c + r) for w in result.profiles])
        dL = np.array([abs(w.L - 2 * np.pi / np.sqrt(r)) for w in result.profiles])
        assert 0.8 <= np.polyfit(np.log(eps), np.log(dc), 1)[0] <= 1.2
        assert 0.8 <= np.polyfit(np.log(eps), np.log(dL), 1)[0] <= 1.2
        for w in result.profiles:
            assert w.residual < 1e-9


class TestProfileIO:
    def test_round_trip_bit_exact(self, wave_eps02, tmp_path):
        path = tmp_path / "wave.json"
        save_profile(wave_eps02, 1.0, 1.0, path)
        back, r, alpha = load_profile(path)
        assert (r, alpha) == (1.0, 1.0)
        assert back.c == wave_eps02.c
        assert back.L == wave_eps02.L
        assert back.eps == wave_eps02.eps
        assert back.residual == wave_eps02.residual
        assert np.array_equal(back.phi.coeffs, wave_eps02.phi.coeffs)

    def test_document_fields(self, wave_eps02, tmp_path):
        path = tmp_path / "wave.json"
        save_profile(wave_eps02, 1.0, 1.0, path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"r", "alpha", "eps", "c", "L", "n", "coeffs", "residual"}
        assert doc["n"] == wave_eps02.phi.grid.n
