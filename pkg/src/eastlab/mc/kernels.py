"""Event-driven simulation core, compiled with numba when available.

The algorithm is the graphical construction restricted to sites that can
matter: each site carries a rate-one clock and a coin stream; at a clock ring
the constraint is evaluated, an illegal ring is discarded (its coin is still
consumed), a legal ring resamples the spin to the coin value.  Sites whose
constraint has never been satisfiable (no boundary vacancy and no East
neighbour that was ever vacant) cannot ring legally, so their clocks are not
simulated at all; a site's stream starts being consumed when it first becomes
"wet" (East neighbour vacant or unconstrained), which is exact in
distribution by memorylessness and keeps the event count proportional to the
active region.  Every draw comes from the per-(seed, replica, site) SplitMix
streams of mc.rng, so trajectories are reproducible bit for bit, with or
without the compiler, and independent of scheduling.

Next-event selection is a binary heap on (time, site); ties are impossible
up to floating-point collisions, which the site index breaks.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_S30 = U64(30)
_S27 = U64(27)
_S31 = U64(31)
_S11 = U64(11)
_ONE = U64(1)
_DBL = 2.0**-53

#: pseudo-site index of the stream that samples a replica's initial state
INIT_STREAM_SITE = 1 << 32

RUN_TO_TIME = 0
STOP_ON_VACANCY = 1
STOP_ON_LEGAL_RING = 2


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True)
def _stream_state(seed, replica, site):
    h = _mix64(seed)
    h = _mix64(h + (replica + _ONE) * _GOLDEN)
    h = _mix64(h + (site + _ONE) * _GOLDEN)
    return h


@njit(cache=True)
def _next_state(state):
    return state + _GOLDEN


@njit(cache=True)
def _uniform_of(state):
    return float(_mix64(state) >> _S11) * _DBL


@njit(cache=True)
def _heap_push(ht, hs, size, t, s):
    i = size
    ht[i] = t
    hs[i] = s
    while i > 0:
        parent = (i - 1) >> 1
        if ht[i] < ht[parent] or (ht[i] == ht[parent] and hs[i] < hs[parent]):
            ht[i], ht[parent] = ht[parent], ht[i]
            hs[i], hs[parent] = hs[parent], hs[i]
            i = parent
        else:
            break
    return size + 1


@njit(cache=True)
def _heap_pop(ht, hs, size):
    last = size - 1
    ht[0] = ht[last]
    hs[0] = hs[last]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= last:
            break
        r = l + 1
        c = l
        if r < last and (ht[r] < ht[l] or (ht[r] == ht[l] and hs[r] < hs[l])):
            c = r
        if ht[c] < ht[i] or (ht[c] == ht[i] and hs[c] < hs[i]):
            ht[i], ht[c] = ht[c], ht[i]
            hs[i], hs[c] = hs[c], hs[i]
            i = c
        else:
            break
    return last


@njit(cache=True)
def sample_product_state(seed, replica, p, state):
    """Fill state with a product-Bernoulli(p) sample from the init stream."""
    s = _stream_state(seed, replica, U64(INIT_STREAM_SITE))
    for i in range(state.shape[0]):
        s = _next_state(s)
        state[i] = 1 if _uniform_of(s) < p else 0


@njit(cache=True)
def sim_core(
    state,
    nbr_ptr,
    nbr_flat,
    up_ptr,
    up_flat,
    bc_free,
    seed,
    replica,
    p,
    t_end,
    mode,
    target,
    rng,
    scheduled,
    first_legal,
    last_update,
    ht,
    hs,
):
    """One replica of the event-driven East-like dynamics.

    Mutates state / first_legal / last_update in place and returns
    (stop_time, ring_count, legal_count); stop_time is the hit or first-ring
    time for the stopping modes (inf when the run reached t_end first).
    """
    n = state.shape[0]
    size = 0
    for i in range(n):
        scheduled[i] = 0
        first_legal[i] = np.inf
        last_update[i] = np.inf
    for i in range(n):
        wet = bc_free[i] == 1
        if not wet:
            for k in range(nbr_ptr[i], nbr_ptr[i + 1]):
                if state[nbr_flat[k]] == 0:
                    wet = True
                    break
        if wet:
            scheduled[i] = 1
            rng[i] = _stream_state(seed, replica, U64(i))
            rng[i] = _next_state(rng[i])
            gap = -math.log(1.0 - _uniform_of(rng[i]))
            size = _heap_push(ht, hs, size, gap, i)
    rings = 0
    legals = 0
    while size > 0:
        t = ht[0]
        x = hs[0]
        if t > t_end:
            break
        size = _heap_pop(ht, hs, size)
        rings += 1
        rng[x] = _next_state(rng[x])  # the coin is consumed even if illegal
        coin = 1 if _uniform_of(rng[x]) < p else 0
        legal = bc_free[x] == 1
        if not legal:
            for k in range(nbr_ptr[x], nbr_ptr[x + 1]):
                if state[nbr_flat[k]] == 0:
                    legal = True
                    break
        if legal:
            legals += 1
            if first_legal[x] == np.inf:
                first_legal[x] = t
            last_update[x] = t
            if mode == STOP_ON_LEGAL_RING and x == target:
                state[x] = coin
                return t, rings, legals
            old = state[x]
            state[x] = coin
            if old == 1 and coin == 0:
                for k in range(up_ptr[x], up_ptr[x + 1]):
                    y = up_flat[k]
                    if scheduled[y] == 0:
                        scheduled[y] = 1
                        rng[y] = _stream_state(seed, replica, U64(y))
                        rng[y] = _next_state(rng[y])
                        gap = -math.log(1.0 - _uniform_of(rng[y]))
                        size = _heap_push(ht, hs, size, t + gap, y)
                if mode == STOP_ON_VACANCY and x == target:
                    return t, rings, legals
        rng[x] = _next_state(rng[x])
        gap = -math.log(1.0 - _uniform_of(rng[x]))
        size = _heap_push(ht, hs, size, t + gap, x)
    return np.inf, rings, legals


@njit(cache=True)
def hitting_batch(
    eta0,
    nbr_ptr,
    nbr_flat,
    up_ptr,
    up_flat,
    bc_free,
    seed,
    replica0,
    n_replicas,
    p,
    target,
):
    """Hit times of "vacancy at target" for consecutive replicas."""
    n = eta0.shape[0]
    taus = np.empty(n_replicas)
    state = np.empty(n, dtype=np.uint8)
    rng = np.empty(n, dtype=np.uint64)
    scheduled = np.empty(n, dtype=np.uint8)
    first_legal = np.empty(n)
    last_update = np.empty(n)
    ht = np.empty(n + 1)
    hs = np.empty(n + 1, dtype=np.int64)
    for r in range(n_replicas):
        state[:] = eta0
        tau, _, _ = sim_core(
            state,
            nbr_ptr,
            nbr_flat,
            up_ptr,
            up_flat,
            bc_free,
            seed,
            replica0 + U64(r),
            p,
            np.inf,
            STOP_ON_VACANCY,
            target,
            rng,
            scheduled,
            first_legal,
            last_update,
            ht,
            hs,
        )
        taus[r] = tau
    return taus


@njit(cache=True)
def persistence_batch(
    nbr_ptr,
    nbr_flat,
    up_ptr,
    up_flat,
    bc_free,
    seed,
    replica0,
    n_replicas,
    p,
    target,
    t_max,
):
    """First-legal-ring times at target from stationary starts (inf if > t_max)."""
    n = nbr_ptr.shape[0] - 1
    taus = np.empty(n_replicas)
    state = np.empty(n, dtype=np.uint8)
    rng = np.empty(n, dtype=np.uint64)
    scheduled = np.empty(n, dtype=np.uint8)
    first_legal = np.empty(n)
    last_update = np.empty(n)
    ht = np.empty(n + 1)
    hs = np.empty(n + 1, dtype=np.int64)
    for r in range(n_replicas):
        rep = replica0 + U64(r)
        sample_product_state(seed, rep, p, state)
        tau, _, _ = sim_core(
            state,
            nbr_ptr,
            nbr_flat,
            up_ptr,
            up_flat,
            bc_free,
            seed,
            rep,
            p,
            t_max,
            STOP_ON_LEGAL_RING,
            target,
            rng,
            scheduled,
            first_legal,
            last_update,
            ht,
            hs,
        )
        taus[r] = tau
    return taus
