"""Event-driven Monte Carlo engine with splittable per-site random streams."""

from .kernels import HAVE_NUMBA
from .rng import EventStream
from .simulate import (
    EstimateResult,
    FrontExtents,
    PersistenceEstimate,
    Snapshot,
    Trajectory,
    estimate_hitting,
    estimate_persistence,
    simulate,
    snapshot,
    snapshot_extents,
    write_pgm,
)

__all__ = [
    "HAVE_NUMBA",
    "EventStream",
    "Trajectory",
    "simulate",
    "EstimateResult",
    "estimate_hitting",
    "PersistenceEstimate",
    "estimate_persistence",
    "Snapshot",
    "snapshot",
    "write_pgm",
    "FrontExtents",
    "snapshot_extents",
]
