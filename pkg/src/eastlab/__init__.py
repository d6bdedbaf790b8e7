"""eastlab: exact and Monte Carlo laboratory for East-like kinetically
constrained spin models on finite boxes of Z^d."""

from .lattice import (
    Box,
    BoundaryCondition,
    ModelParams,
    SpinConfig,
    constraint,
    east_boundary,
    norm1,
    stationary_weight,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "BoundaryCondition",
    "ModelParams",
    "SpinConfig",
    "constraint",
    "east_boundary",
    "norm1",
    "stationary_weight",
    "__version__",
]
