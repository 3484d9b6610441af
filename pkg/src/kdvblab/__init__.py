"""kdvblab: periodic traveling waves of KdV-Burgers equations with a source.

A pseudospectral laboratory: exact viscous-dispersive semigroup, exponential
time stepping and a Duhamel fixed-point solver, Fourier-collocation Newton
continuation of small-amplitude wavetrains, Hill's-method Bloch/Floquet
spectra, and orbital-instability experiments.
"""

from .errors import (BifurcationPointError, BlowUpError, ConfigError,
                     EigenpairResidualError, NewtonConvergenceError,
                     NonContractionError, SpectralSymmetryError, TruncationError)
from .fourier import (PeriodicGrid, SpectralField, constant_field, cosine_field,
                      differentiate, forward_transform, hermitize,
                      inverse_transform, multiply_dealiased, real_part,
                      resample, sobolev_norm, translate)
from .semigroup import apply_semigroup, semigroup_symbol, smoothing_exponent_probe
from .models import ModelFunctions, kdvbf, linear_source, validate_derivatives
from .evolution import (EvolutionTrace, SolverConfig, contraction_ratios,
                        data_map_continuity_probe, load_trace, nonlinearity,
                        save_trace, solve, solve_picard, step_etdrk4)
from .waves import (BranchResult, WaveProfile, amplitude, continue_branch,
                    hopf_predictor, load_profile, profile_residual,
                    refine_newton, resample_profile, save_profile)
from .spectra import (INSTABILITY_MARGIN, BlochMatrix, BlochSpectrum,
                      assemble_bloch, coefficient_bound, eigen_bloch,
                      eigenpair_bloch, floquet_sweep, linearized_coefficients,
                      resolvent_bound_probe, save_spectrum_csv,
                      save_spectrum_summary)
from .experiment import (InstabilityReport, comoving_map, instability_experiment,
                         iterated_escape, orbital_distance, save_report)
from .config import RunConfig, load_config, parse_config
from .cli import run_cli

__version__ = "0.1.0"
