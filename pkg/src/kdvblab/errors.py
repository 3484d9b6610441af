"""Exception types shared across the package."""


class SpectralSymmetryError(ValueError):
    """A field flagged as real carries coefficients without Hermitian symmetry."""


class TruncationError(ValueError):
    """Requested mode truncation exceeds the stored coefficient resolution."""


class BlowUpError(RuntimeError):
    """Time integration produced non-finite values or exceeded the norm ceiling.

    For unstable dynamics run long enough this is expected behaviour (a
    detection, not a bug); the attribute ``time`` records when it happened.
    """

    def __init__(self, time, message=None):
        self.time = time
        super().__init__(message or f"solution blew up near t = {time:g}")


class NonContractionError(RuntimeError):
    """Fixed-point iteration failed to contract (horizon too large).

    ``last_ratio`` is the final quotient of successive-iterate differences.
    """

    def __init__(self, last_ratio, message=None):
        self.last_ratio = last_ratio
        super().__init__(
            message
            or f"fixed-point iteration not contracting (last ratio {last_ratio:.3g}); "
            "reduce the time horizon"
        )


class NewtonConvergenceError(RuntimeError):
    """Newton iteration stagnated before reaching the residual tolerance."""

    def __init__(self, last_residual, message=None):
        self.last_residual = last_residual
        super().__init__(
            message or f"Newton did not converge (last residual {last_residual:.3e})"
        )


class BifurcationPointError(NewtonConvergenceError):
    """Singular Newton system; expected exactly at the branch onset."""

    def __init__(self, message="singular Newton system (at or too close to the bifurcation point)"):
        self.last_residual = float("nan")
        RuntimeError.__init__(self, message)


class EigenpairResidualError(RuntimeError):
    """An eigenpair failed its independent operator-residual check."""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""
