"""Weighted Bergman kernels on Reinhardt domains."""

import json

from ._core import (
    ArgumentError,
    CnParams,
    ConvergenceError,
    DnmParams,
    DomainError,
    VEtaParams,
    arity,
    closed_kernel,
    interior_points,
    moment_closed,
    moment_quadrature,
    run_cli,
    series_kernel,
)
from . import _core

__all__ = [
    "ArgumentError",
    "CnParams",
    "ConvergenceError",
    "DnmParams",
    "DomainError",
    "VEtaParams",
    "arity",
    "closed_kernel",
    "cross_validate",
    "interior_points",
    "moment_closed",
    "moment_quadrature",
    "run_cli",
    "series_kernel",
    "sphere_integral",
]


def cross_validate(params, num_points, seed, rel_tol):
    """Closed form against the moment series at interior point pairs; list of report dicts."""
    return json.loads(_core.cross_validate_json(params, num_points, seed, rel_tol))


def sphere_integral(alpha, samples, seed):
    """Monte Carlo check of the sphere integral of |xi^alpha|^2; one report dict."""
    return json.loads(_core.sphere_integral_json(alpha, samples, seed))[0]
