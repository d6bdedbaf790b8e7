"""Event-driven Monte Carlo for the East-like process: runs and estimators.

Wraps the compiled kernels with box/boundary bookkeeping, hitting-time and
persistence estimators over independent replicas, and three-level snapshots
(never updated / updated / vacancy) with portable-graymap emission.  Replica
r always consumes the (seed, r, site) streams, so estimates are reproducible
for a fixed seed no matter how replicas are distributed over workers, and
reductions run in replica order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..lattice import Box, BoundaryCondition, ModelParams, SpinConfig, Site
from . import kernels
from .kernels import RUN_TO_TIME, U64


def _adjacency(box: Box, sigma: BoundaryCondition):
    """CSR-style East-neighbour / up-neighbour tables and boundary freedoms."""
    sig = sigma.as_dict()
    n = box.site_count
    nbr, up, bc = [], [], np.zeros(n, dtype=np.uint8)
    for x in box.sites():
        down_i, up_i = [], []
        for j in range(box.d):
            y = tuple(c - (1 if i == j else 0) for i, c in enumerate(x))
            z = tuple(c + (1 if i == j else 0) for i, c in enumerate(x))
            if y in box:
                down_i.append(box.index(y))
            elif sig[y] == 0:
                bc[box.index(x)] = 1
            if z in box:
                up_i.append(box.index(z))
        nbr.append(down_i)
        up.append(up_i)

    def pack(lists):
        ptr = np.zeros(n + 1, dtype=np.int64)
        for i, l in enumerate(lists):
            ptr[i + 1] = ptr[i] + len(l)
        flat = np.array([j for l in lists for j in l], dtype=np.int64)
        return ptr, flat

    nbr_ptr, nbr_flat = pack(nbr)
    up_ptr, up_flat = pack(up)
    return nbr_ptr, nbr_flat, up_ptr, up_flat, bc


def _as_state(box: Box, eta0) -> np.ndarray:
    if eta0 is None:
        return np.ones(box.site_count, dtype=np.uint8)
    if isinstance(eta0, SpinConfig):
        return eta0.to_array()
    out = np.asarray(eta0, dtype=np.uint8).copy()
    if out.shape != (box.site_count,):
        raise ValueError("initial state has the wrong length")
    return out


@dataclass(frozen=True)
class Trajectory:
    """Final state of one replica plus per-site update bookkeeping.

    events is None unless the run was asked to collect them (small boxes
    only; the log is one entry per clock ring, legal or not).
    """

    box: Box
    sigma: BoundaryCondition
    params: ModelParams
    seed: int
    replica: int
    t_end: float
    state: np.ndarray
    first_legal: np.ndarray
    last_update: np.ndarray
    rings: int
    legal_rings: int
    events: tuple | None = None


def simulate(
    box: Box,
    sigma: BoundaryCondition,
    params: ModelParams,
    eta0,
    t_end: float,
    seed: int,
    replica: int = 0,
    collect_events: bool = False,
) -> Trajectory:
    """Exact-in-distribution run of one replica up to time t_end.

    collect_events routes through the pure-Python reference simulator (the
    kernels are tested bit-identical to it) and attaches the event log.
    """
    n = box.site_count
    state = _as_state(box, eta0)
    if collect_events:
        from .reference import reference_run

        st, fl, lu, events, _ = reference_run(
            box, sigma, params, state, float(t_end), seed, replica
        )
        return Trajectory(
            box, sigma, params, seed, replica, float(t_end), st, fl, lu,
            len(events), sum(1 for e in events if e.legal), tuple(events),
        )
    nbr_ptr, nbr_flat, up_ptr, up_flat, bc = _adjacency(box, sigma)
    rng = np.empty(n, dtype=np.uint64)
    scheduled = np.empty(n, dtype=np.uint8)
    first_legal = np.empty(n)
    last_update = np.empty(n)
    ht = np.empty(n + 1)
    hs = np.empty(n + 1, dtype=np.int64)
    with np.errstate(over="ignore"):
        _, rings, legals = kernels.sim_core(
            state,
            nbr_ptr,
            nbr_flat,
            up_ptr,
            up_flat,
            bc,
            U64(seed),
            U64(replica),
            params.p,
            float(t_end),
            RUN_TO_TIME,
            -1,
            rng,
            scheduled,
            first_legal,
            last_update,
            ht,
            hs,
        )
    return Trajectory(
        box,
        sigma,
        params,
        seed,
        replica,
        float(t_end),
        state,
        first_legal,
        last_update,
        int(rings),
        int(legals),
    )


@dataclass(frozen=True)
class EstimateResult:
    """Sample mean and standard error over replicas, with the raw values."""

    mean: float
    stderr: float
    values: np.ndarray

    @staticmethod
    def from_values(values: np.ndarray) -> "EstimateResult":
        values = np.asarray(values, dtype=np.float64)
        m = float(values.mean())
        se = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else math.inf
        return EstimateResult(m, se, values)


def _hitting_chunk(args):
    (box, sigma, params, x, seed, replica0, count, eta0) = args
    nbr_ptr, nbr_flat, up_ptr, up_flat, bc = _adjacency(box, sigma)
    with np.errstate(over="ignore"):
        return kernels.hitting_batch(
            eta0,
            nbr_ptr,
            nbr_flat,
            up_ptr,
            up_flat,
            bc,
            U64(seed),
            U64(replica0),
            int(count),
            params.p,
            box.index(x),
        )


def estimate_hitting(
    box: Box,
    sigma: BoundaryCondition,
    params: ModelParams,
    x: Site,
    replicas: int,
    seed: int,
    eta0=None,
    workers: int = 1,
) -> EstimateResult:
    """Sample mean/stderr of the first time site x is vacant (start: all ones)."""
    eta0 = _as_state(box, eta0)
    if workers <= 1:
        taus = _hitting_chunk((box, sigma, params, x, seed, 0, replicas, eta0))
    else:
        chunk = (replicas + workers - 1) // workers
        jobs = [
            (box, sigma, params, x, seed, r0, min(chunk, replicas - r0), eta0)
            for r0 in range(0, replicas, chunk)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_hitting_chunk, jobs))
        taus = np.concatenate(parts)
    return EstimateResult.from_values(taus)


def _persistence_chunk(args):
    (box, sigma, params, tracked, seed, replica0, count, t_max) = args
    nbr_ptr, nbr_flat, up_ptr, up_flat, bc = _adjacency(box, sigma)
    with np.errstate(over="ignore"):
        return kernels.persistence_batch(
            nbr_ptr,
            nbr_flat,
            up_ptr,
            up_flat,
            bc,
            U64(seed),
            U64(replica0),
            int(count),
            params.p,
            box.index(tracked),
            float(t_max),
        )


@dataclass(frozen=True)
class PersistenceEstimate:
    t_grid: np.ndarray
    survival: np.ndarray
    stderr: np.ndarray
    first_ring_times: np.ndarray  # inf when the site never rang legally


def estimate_persistence(
    box: Box,
    sigma: BoundaryCondition,
    params: ModelParams,
    t_grid,
    replicas: int,
    seed: int,
    tracked: Site | None = None,
    workers: int = 1,
) -> PersistenceEstimate:
    """Survival estimate of the tracked site from stationary starts.

    Each replica draws its initial configuration from the product measure
    (its dedicated init stream), runs until the first legal ring at the
    tracked site or max(t_grid), and the survival curve is the fraction of
    replicas with no legal ring by each grid time.
    """
    tracked = tracked if tracked is not None else box.upper
    t_grid = np.asarray(sorted(float(t) for t in t_grid))
    t_max = float(t_grid.max())
    if workers <= 1:
        taus = _persistence_chunk((box, sigma, params, tracked, seed, 0, replicas, t_max))
    else:
        chunk = (replicas + workers - 1) // workers
        jobs = [
            (box, sigma, params, tracked, seed, r0, min(chunk, replicas - r0), t_max)
            for r0 in range(0, replicas, chunk)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_persistence_chunk, jobs))
        taus = np.concatenate(parts)
    surv = np.array([np.mean(taus > t) for t in t_grid])
    se = np.sqrt(surv * (1.0 - surv) / replicas)
    return PersistenceEstimate(t_grid, surv, se, taus)


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

LABEL_NEVER = 255  # white
LABEL_UPDATED = 128  # grey
LABEL_VACANCY = 0  # black


@dataclass(frozen=True)
class Snapshot:
    """Per-site labels at a fixed time; vacancy overrides updated."""

    box: Box
    t: float
    labels: np.ndarray  # uint8, canonical site order


def snapshot(traj: Trajectory) -> Snapshot:
    labels = np.full(traj.box.site_count, LABEL_NEVER, dtype=np.uint8)
    updated = np.isfinite(traj.first_legal)
    labels[updated] = LABEL_UPDATED
    labels[traj.state == 0] = LABEL_VACANCY
    return Snapshot(traj.box, traj.t_end, labels)


def write_pgm(snap: Snapshot, path) -> None:
    """Plain (P2) portable graymap; site (a_1, a_2) is the top-left pixel,
    x_1 indexes rows (downwards) and x_2 columns (rightwards)."""
    box = snap.box
    if box.d == 1:
        rows, cols = 1, box.site_count
    elif box.d == 2:
        rows, cols = box.shape
    else:
        raise ValueError("graymaps are emitted for d <= 2 only")
    grid = snap.labels.reshape(rows, cols)
    with open(path, "w") as fh:
        fh.write(f"P2\n{cols} {rows}\n255\n")
        for r in range(rows):
            fh.write(" ".join(str(int(v)) for v in grid[r]) + "\n")


@dataclass(frozen=True)
class FrontExtents:
    """l1 reach of the updated set along the diagonal band and the axis lines."""

    diagonal: int
    axis: int
    span: int  # bounding-box side of the updated set (max single-coordinate reach)


def snapshot_extents(traj: Trajectory) -> FrontExtents:
    """Anisotropy statistics of the updated region (d = 2).

    diagonal: largest |x - a|_1 over updated sites within one step of the
    main diagonal; axis: largest |x - a|_1 over updated sites on one of the
    two axis lines through the lower corner.  A front that hugs the axes has
    axis > diagonal; the East-like front is diagonal-dominant.
    """
    box = traj.box
    if box.d != 2:
        raise ValueError("front extents are defined for d = 2")
    a = box.lower
    diag = axis = span = 0
    idx = np.flatnonzero(np.isfinite(traj.first_legal))
    for i in idx:
        x = box.site(int(i))
        r = (x[0] - a[0]) + (x[1] - a[1])
        span = max(span, x[0] - a[0] + 1, x[1] - a[1] + 1)
        if abs(x[0] - x[1]) <= 1:
            diag = max(diag, r)
        if x[0] == a[0] or x[1] == a[1]:
            axis = max(axis, r)
    return FrontExtents(diag, axis, span)
