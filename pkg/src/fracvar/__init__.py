"""Fractional gradients, divergences, variations and perimeters on uniform grids."""

from __future__ import annotations

__version__ = "0.1.0"

from .constants import constants_table, mu, nu  # noqa: E402
from .fields import AnalyticFn, ErrorBudget, GridSpec, ScalarField, VectorField, rasterize  # noqa: E402
from .geometry import BoundedRegion, ShapeSet  # noqa: E402
from .measures import frac_perimeter, frac_variation, gagliardo_seminorm  # noqa: E402
from .operators import frac_divergence, frac_gradient, frac_laplacian, riesz_potential  # noqa: E402

__all__ = [
    "AnalyticFn",
    "BoundedRegion",
    "ErrorBudget",
    "GridSpec",
    "ScalarField",
    "ShapeSet",
    "VectorField",
    "__version__",
    "constants_table",
    "frac_divergence",
    "frac_gradient",
    "frac_laplacian",
    "frac_perimeter",
    "frac_variation",
    "gagliardo_seminorm",
    "mu",
    "nu",
    "rasterize",
    "riesz_potential",
]
