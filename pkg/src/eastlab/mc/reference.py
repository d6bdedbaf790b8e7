"""Readable pure-Python reference simulator with an event log.

Implements exactly the algorithm of mc.kernels (same streams, same wetting
rule, same tie-breaking) with Python's heapq and the reference rng module.
It is the correctness oracle for the compiled kernels -- the equivalence
tests replay both on the same seeds and compare trajectories event by event
-- and the provider of optional event logs for small runs.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from ..lattice import Box, BoundaryCondition, ModelParams
from . import rng as _rng
from .kernels import INIT_STREAM_SITE


@dataclass(frozen=True)
class Event:
    t: float
    site: int
    legal: bool
    new_spin: int | None  # None for a discarded ring


def reference_run(
    box: Box,
    sigma: BoundaryCondition,
    params: ModelParams,
    eta0: np.ndarray,
    t_end: float,
    seed: int,
    replica: int = 0,
    stop_on_vacancy_at: int | None = None,
    stop_on_legal_ring_at: int | None = None,
):
    """Run one replica, returning (state, first_legal, last_update, events, t_stop)."""
    n = box.site_count
    sig = sigma.as_dict()
    nbrs: list[list[int]] = []
    ups: list[list[int]] = []
    bc_free: list[bool] = []
    for x in box.sites():
        down, up, free = [], [], False
        for j in range(box.d):
            y = tuple(c - (1 if i == j else 0) for i, c in enumerate(x))
            z = tuple(c + (1 if i == j else 0) for i, c in enumerate(x))
            if y in box:
                down.append(box.index(y))
            elif sig[y] == 0:
                free = True
            if z in box:
                up.append(box.index(z))
        nbrs.append(down)
        ups.append(up)
        bc_free.append(free)

    state = np.array(eta0, dtype=np.uint8).copy()
    streams: dict[int, int] = {}
    heap: list[tuple[float, int]] = []

    def start_stream(i: int, now: float) -> None:
        s = _rng.stream_state(seed, replica, i)
        u, s = _rng.next_uniform(s)
        streams[i] = s
        heapq.heappush(heap, (now - math.log(1.0 - u), i))

    for i in range(n):
        if bc_free[i] or any(state[j] == 0 for j in nbrs[i]):
            start_stream(i, 0.0)

    first_legal = np.full(n, np.inf)
    last_update = np.full(n, np.inf)
    events: list[Event] = []
    t_stop = math.inf
    while heap:
        t, x = heap[0]
        if t > t_end:
            break
        heapq.heappop(heap)
        u, streams[x] = _rng.next_uniform(streams[x])
        coin = 1 if u < params.p else 0
        legal = bc_free[x] or any(state[j] == 0 for j in nbrs[x])
        if legal:
            if not np.isfinite(first_legal[x]):
                first_legal[x] = t
            last_update[x] = t
            old = int(state[x])
            state[x] = coin
            events.append(Event(t, x, True, coin))
            if stop_on_legal_ring_at is not None and x == stop_on_legal_ring_at:
                t_stop = t
                break
            if old == 1 and coin == 0:
                for y in ups[x]:
                    if y not in streams:
                        start_stream(y, t)
                if stop_on_vacancy_at is not None and x == stop_on_vacancy_at:
                    t_stop = t
                    break
        else:
            events.append(Event(t, x, False, None))
        u, streams[x] = _rng.next_uniform(streams[x])
        heapq.heappush(heap, (t - math.log(1.0 - u), x))
    return state, first_legal, last_update, events, t_stop


def reference_product_sample(
    seed: int, replica: int, n: int, params: ModelParams
) -> np.ndarray:
    """Stationary product sample, matching kernels.sample_product_state."""
    s = _rng.stream_state(seed, replica, INIT_STREAM_SITE)
    out = np.empty(n, dtype=np.uint8)
    for i in range(n):
        u, s = _rng.next_uniform(s)
        out[i] = 1 if u < params.p else 0
    return out
