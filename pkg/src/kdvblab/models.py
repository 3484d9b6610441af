"""Nonlinearities f (flux) and g (source) defining a member of the family

    u_t + f(u)_x - u_xx + u_xxx = g(u).

All callables must accept and return numpy arrays elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Scalar = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ModelFunctions:
    """Flux f with derivatives fp, fpp and source g with derivative gp."""

    f: Scalar
    fp: Scalar
    fpp: Scalar
    g: Scalar
    gp: Scalar
    name: str = "custom"


def kdvbf(r: float = 1.0, alpha: float = 1.0) -> ModelFunctions:
    """Burgers flux with a logistic source: f = alpha*u^2/2, g = r*u*(1-u)."""
    return ModelFunctions(
        f=lambda u: 0.5 * alpha * u * u,
        fp=lambda u: alpha * u,
        fpp=lambda u: np.full_like(np.asarray(u, dtype=float), alpha),
        g=lambda u: r * u * (1.0 - u),
        gp=lambda u: r * (1.0 - 2.0 * u),
        name=f"kdvbf(r={r:g}, alpha={alpha:g})",
    )


def linear_source(r: float = 1.0) -> ModelFunctions:
    """No transport, linear growth: f = 0, g = r*u."""
    zero = lambda u: np.zeros_like(np.asarray(u, dtype=float))
    return ModelFunctions(
        f=zero,
        fp=zero,
        fpp=zero,
        g=lambda u: r * np.asarray(u, dtype=float),
        gp=lambda u: np.full_like(np.asarray(u, dtype=float), r),
        name=f"linear_source(r={r:g})",
    )


def validate_derivatives(model: ModelFunctions, rtol: float = 1e-6) -> None:
    """Check fp, fpp, gp against centred differences at 20 points in [-2, 2].

    Raises ValueError on the first mismatch beyond ``rtol`` (mixed with an
    absolute floor of the same size).
    """
    u = np.linspace(-2.0, 2.0, 20)
    h = 1e-5
    pairs = [
        ("fp vs f", model.fp, model.f),
        ("fpp vs fp", model.fpp, model.fp),
        ("gp vs g", model.gp, model.g),
    ]
    for label, deriv, base in pairs:
        fd = (base(u + h) - base(u - h)) / (2.0 * h)
        exact = deriv(u)
        err = np.max(np.abs(fd - exact) / (1.0 + np.abs(exact)))
        if err > rtol:
            raise ValueError(
                f"model '{model.name}': {label} mismatch {err:.3e} exceeds {rtol:g}"
            )
