"""Command-line surface tying the laboratory together.

Subcommands: ``solve`` (time evolution from a config and an initial-data
file), ``find-wave`` (branch continuation), ``spectrum`` (Floquet sweep of a
stored profile), ``instability`` (profile -> eigenpair -> growth experiment),
``selftest``.  Exit codes: 0 success, 1 numerical failure, 2 usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import ConfigError, load_config
from .errors import (BlowUpError, EigenpairResidualError, NewtonConvergenceError,
                     NonContractionError)
from .evolution import SolverConfig, save_trace, solve
from .experiment import instability_experiment, save_report
from .fourier import PeriodicGrid, SpectralField, forward_transform, resample
from .models import kdvbf
from .selftest import run_selftest
from .spectra import (assemble_bloch, eigenpair_bloch, floquet_sweep,
                      save_spectrum_csv, save_spectrum_summary)
from .waves import (WaveProfile, continue_branch, load_profile,
                    resample_profile, save_profile)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdvblab",
        description="periodic traveling waves of KdV-Burgers equations with a "
                    "source: continuation, Bloch spectra, instability experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="evolve initial data, write a trace")
    p_solve.add_argument("--config", required=True, help="key = value run configuration")
    p_solve.add_argument("--initial", required=True,
                         help="JSON initial data: {'L':..., 'samples':[...]} or a profile document")
    p_solve.add_argument("-o", "--output", required=True, help="output trace (JSON lines)")

    p_wave = sub.add_parser("find-wave", help="continue the small-amplitude branch")
    p_wave.add_argument("--r", type=float, required=True)
    p_wave.add_argument("--alpha", type=float, required=True)
    p_wave.add_argument("--eps", required=True, help="comma-separated increasing branch points")
    p_wave.add_argument("--n", type=int, default=64, help="collocation points (power of two)")
    p_wave.add_argument("-o", "--output", required=True, help="output directory")

    p_spec = sub.add_parser("spectrum", help="Floquet sweep of a stored profile")
    p_spec.add_argument("--profile", required=True)
    p_spec.add_argument("--N", type=int, default=48, help="Fourier truncation (modes -N..N)")
    p_spec.add_argument("--n-theta", type=int, default=33)
    p_spec.add_argument("-o", "--output", default=None,
                        help="output directory (default: alongside the profile)")

    p_inst = sub.add_parser("instability", help="eigenfunction-seeded growth experiment")
    p_inst.add_argument("--profile", default=None, help="stored profile JSON")
    p_inst.add_argument("--r", type=float, default=None)
    p_inst.add_argument("--alpha", type=float, default=None)
    p_inst.add_argument("--eps", type=float, default=None)
    p_inst.add_argument("--delta0", type=float, default=1e-6)
    p_inst.add_argument("--T", type=float, default=None,
                        help="horizon (default: ln(1e3)/Re lambda)")
    p_inst.add_argument("--dt", type=float, default=2e-3)
    p_inst.add_argument("--N", type=int, default=48)
    p_inst.add_argument("--iterates", type=int, default=5)
    p_inst.add_argument("-o", "--output", required=True, help="report JSON path")

    sub.add_parser("selftest", help="run the built-in verification suite")
    return parser


def _load_initial(path):
    with open(path) as fh:
        doc = json.load(fh)
    if "samples" in doc:
        samples = np.asarray(doc["samples"], dtype=float)
        grid = PeriodicGrid(samples.size, float(doc["L"]))
        return forward_transform(samples, grid)
    if "coeffs" in doc:
        grid = PeriodicGrid(int(doc["n"]), float(doc["L"]))
        coeffs = np.array([complex(re, im) for re, im in doc["coeffs"]])
        return SpectralField(grid, coeffs, is_real=True)
    raise ConfigError("initial-data file needs a 'samples' or 'coeffs' field")


def _cmd_solve(args) -> int:
    cfg = load_config(args.config)
    u0 = _load_initial(args.initial)
    model = kdvbf(cfg.r, cfg.alpha)
    trace = solve(u0, model, cfg.solver())
    save_trace(trace, args.output)
    if trace.blown_up:
        print(f"blow-up at t = {trace.blowup_time:g}; truncated trace written to {args.output}",
              file=sys.stderr)
        return 1
    print(f"wrote {len(trace.times)} records to {args.output}")
    return 0


def _cmd_find_wave(args) -> int:
    try:
        eps_list = [float(tok) for tok in args.eps.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse --eps list: {exc}") from exc
    os.makedirs(args.output, exist_ok=True)
    branch = continue_branch(args.r, args.alpha, eps_list, n=args.n)
    for eps, w in zip(eps_list, branch.profiles):
        path = os.path.join(args.output, f"eps{eps:g}.json")
        save_profile(w, args.r, args.alpha, path)
        print(f"eps={eps:g}: c={w.c:.12g} L={w.L:.12g} residual={w.residual:.3e} -> {path}")
    if branch.truncated:
        print(f"branch truncated after {len(branch.profiles)} points: {branch.failure}",
              file=sys.stderr)
        return 1
    return 0


def _resolved_profile(w: WaveProfile, N: int) -> WaveProfile:
    """Resample so the convolution blocks at truncation N are fully resolved."""
    need = max(w.phi.grid.n, 4 * N)
    n_use = 1 << (need - 1).bit_length()
    return resample_profile(w, n_use) if n_use != w.phi.grid.n else w


def _cmd_spectrum(args) -> int:
    w, r, alpha = load_profile(args.profile)
    model = kdvbf(r, alpha)
    w = _resolved_profile(w, args.N)
    sweep = floquet_sweep(w, model, args.n_theta, args.N)
    out_dir = args.output or os.path.dirname(os.path.abspath(args.profile))
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.profile))[0]
    csv_path = os.path.join(out_dir, f"{stem}_spectrum.csv")
    json_path = os.path.join(out_dir, f"{stem}_spectrum.json")
    save_spectrum_csv(sweep, csv_path)
    save_spectrum_summary(sweep, json_path)
    print(f"max Re lambda = {sweep.max_real:.12g} at theta = {sweep.argmax_theta:.6g} "
          f"({'unstable' if sweep.unstable else 'no instability detected'})")
    print(f"wrote {csv_path} and {json_path}")
    if sweep.failures:
        print(f"{len(sweep.failures)} theta points failed", file=sys.stderr)
        return 1
    return 0


def _cmd_instability(args) -> int:
    if args.profile:
        w, r, alpha = load_profile(args.profile)
    else:
        if args.r is None or args.alpha is None or args.eps is None:
            raise ConfigError("need either --profile or all of --r/--alpha/--eps")
        r, alpha = args.r, args.alpha
        branch = continue_branch(r, alpha, _ramp_to(args.eps))
        if branch.truncated:
            raise NewtonConvergenceError(float("nan"), branch.failure)
        w = branch.profiles[-1]
    model = kdvbf(r, alpha)

    w_fine = _resolved_profile(w, args.N)
    matrix = assemble_bloch(w_fine, model, 0.0, args.N)
    lam, psi_fine = eigenpair_bloch(matrix, 0)
    psi = resample(psi_fine, w.phi.grid.n)

    T = args.T if args.T is not None else float(np.log(1e3) / lam.real)
    solver = SolverConfig(dt=args.dt, t_end=T, record_every=max(1, int(round(T / args.dt / 400))))
    report = instability_experiment(w, model, (lam, psi), args.delta0, T, solver,
                                    escape_iterates=args.iterates)
    save_report(report, args.output, r=r, alpha=alpha)
    print(f"lambda = {lam.real:.8g}{lam.imag:+.3g}j, fitted rate = {report.fitted_rate:.8g}, "
          f"verdict = {report.verdict}")
    print(f"wrote {args.output}")
    return 0 if report.verdict in ("growth_confirmed", "blow_up") else 1


def _ramp_to(eps: float) -> list:
    """Continuation schedule from near onset up to the requested point."""
    if eps <= 0.005:
        return [eps]
    targets = [0.005]
    while targets[-1] < eps:
        targets.append(min(2.0 * targets[-1], eps))
    return targets


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    commands = {
        "solve": _cmd_solve,
        "find-wave": _cmd_find_wave,
        "spectrum": _cmd_spectrum,
        "instability": _cmd_instability,
        "selftest": lambda _: run_selftest(),
    }
    try:
        return commands[args.command](args)
    except (ConfigError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BlowUpError, NonContractionError, NewtonConvergenceError,
            EigenpairResidualError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
