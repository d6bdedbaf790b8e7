"""Reachability combinatorics of the East-like chain under a vacancy budget.

From the fully occupied configuration, with minimal boundary conditions and
never more than m vacancies present at once, the set of reachable
configurations is explored by breadth-first search over bit-packed states.
The key statistics are the farthest site (in l1 distance from the lower
corner, plus one) at which any reachable configuration has a vacancy, Y(m),
and the same maximum over reachable configurations with a single vacancy,
X(m); these grow as 2^m - 1 and 2^{m-1}.  A shell projection onto a
one-dimensional East chain transports paths and is used to bound the
d-dimensional sets by the one-dimensional ones.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..lattice import Box, BoundaryCondition, ModelParams, norm1
from ..exact.generator import build_generator
from ..exact.spectral import (
    bottleneck_lower_bound,
    dirichlet_form_indicator,
    spectral_gap,
)

MAX_REACH_STATES = 10_000_000


@dataclass(frozen=True)
class ReachSet:
    """Configurations reachable from full under the vacancy budget m."""

    box: Box
    m: int
    states: frozenset[int]
    X: int
    Y: int


def _budget_size(n: int, m: int) -> int:
    return sum(math.comb(n, k) for k in range(m + 1))


def reachable_set(box: Box, m: int, direction: int = 0) -> ReachSet:
    """BFS over East-like single flips keeping at most m vacancies.

    Minimal boundary conditions: the single frozen vacancy sits below the
    lower corner in the given direction, so the lower corner is always free
    to flip.
    """
    n = box.site_count
    if _budget_size(n, m) > MAX_REACH_STATES:
        raise ValueError("vacancy-budget state space too large")
    sigma = BoundaryCondition.minimal(box, direction)
    from ..lattice import ConstraintTable

    table = ConstraintTable.build(box, sigma)
    full = (1 << n) - 1
    seen = {full}
    queue = deque([full])
    while queue:
        s = queue.popleft()
        vac = n - bin(s).count("1")
        for i in range(n):
            if not table.satisfied(s, i):
                continue
            t = s ^ (1 << i)
            creates = (s >> i) & 1 == 1
            if creates and vac + 1 > m:
                continue
            if t not in seen:
                seen.add(t)
                queue.append(t)
    xstat, ystat = 0, 0
    lower = box.lower
    for s in seen:
        if s == full:
            continue
        vac_sites = [box.site(i) for i in range(n) if (s >> i) & 1 == 0]
        reach = max(norm1(tuple(c - a for c, a in zip(x, lower))) + 1 for x in vac_sites)
        ystat = max(ystat, reach)
        if len(vac_sites) == 1:
            xstat = max(xstat, reach)
    return ReachSet(box, m, frozenset(seen), xstat, ystat)


def shell_projection(box: Box, bits: int) -> tuple[int, int]:
    """Collapse a configuration to one spin per l1 shell around the corner.

    Shell a >= 1 holds the sites at l1 distance a - 1 from the lower corner;
    its projected spin is vacant iff some site of the shell is vacant.
    Returns (packed 1d configuration, number of shells).  The projection
    never increases the vacancy count and maps East-like paths to (lazy)
    East paths.
    """
    n_shells = box.l1_diameter + 1
    out = (1 << n_shells) - 1
    lower = box.lower
    for i in range(box.site_count):
        if (bits >> i) & 1 == 0:
            a = norm1(tuple(c - l for c, l in zip(box.site(i), lower)))
            out &= ~(1 << a)
    return out, n_shells


@dataclass(frozen=True)
class EnergeticBottleneckReport:
    box: Box
    n: int
    reach: ReachSet
    pi_V: float
    pi_Vc: float
    dirichlet_exact: float
    dirichlet_bound_axis: float  # (n+1) C(N,n) q^{n+1}, the one-dimensional form
    dirichlet_bound_general: float  # (n d + 1) C(N,n) q^{n+1}
    lower_bound: float
    relaxation_time: float


def energetic_bottleneck(
    box: Box, n: int, params: ModelParams, direction: int = 0
) -> EnergeticBottleneckReport:
    """Certified relaxation-time lower bound from the vacancy-budget cut.

    V is the set reachable with at most n vacancies; every state of its
    internal boundary has exactly n vacancies (asserted), so escaping V
    costs a vacancy creation and the cut is exponentially thin in q.
    The resulting bound pi(V) pi(V^c) / D(1_V) is compared against the
    exact relaxation time computed by the eigensolver.
    """
    reach = reachable_set(box, n, direction)
    R = build_generator(box, BoundaryCondition.minimal(box, direction), params)
    member = np.zeros(R.n_states, dtype=bool)
    member[list(reach.states)] = True
    N = box.site_count
    # internal boundary must sit on the n-vacancy shell
    from ..lattice import ConstraintTable

    table = ConstraintTable.build(box, R.sigma)
    for s in reach.states:
        vac = N - bin(s).count("1")
        if vac == n:
            continue
        for i in range(N):
            if table.satisfied(s, i):
                assert member[s ^ (1 << i)], "sub-budget state escaped the cut"
    dform = dirichlet_form_indicator(R, member)
    pi_V = float(R.pi[member].sum())
    cni = math.comb(N, n)
    bound_axis = (n + 1) * cni * params.q ** (n + 1)
    bound_general = (n * box.d + 1) * cni * params.q ** (n + 1)
    lower = bottleneck_lower_bound(R, member)
    trel = spectral_gap(R).relaxation_time
    return EnergeticBottleneckReport(
        box, n, reach, pi_V, 1.0 - pi_V, dform, bound_axis, bound_general, lower, trel
    )
