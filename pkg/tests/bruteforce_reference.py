"""Independent brute-force route to the removal dynamics and its core set.

Deliberately shares no code or data layout with eastlab.bottleneck: sites are
coordinate tuples, configurations are frozensets of vacancy positions, gaps
are found by scanning the whole extended box, and every stage recomputes
everything from scratch.  Golden files for the core set and its internal
boundary are generated from here (see make_goldens.py) and the main
implementation must match them bit for bit.
"""

from __future__ import annotations

import itertools


def sites(d: int, L: int):
    return list(itertools.product(range(1, L + 1), repeat=d))


def boundary_sites(d: int, L: int):
    out = []
    for j in range(d):
        for rest in itertools.product(range(1, L + 1), repeat=d - 1):
            z = rest[:j] + (0,) + rest[j:]
            out.append(z)
    return out


def brute_gap(d: int, L: int, vacancies: frozenset, x) -> int:
    best = None
    for z in sites(d, L) + boundary_sites(d, L):
        if z == x or any(a > b for a, b in zip(z, x)):
            continue
        if z in vacancies or 0 in z:
            dist = sum(abs(a - b) for a, b in zip(z, x))
            if best is None or dist < best:
                best = dist
    assert best is not None and best >= 1
    return best


def brute_stage(d: int, L: int, vacancies: frozenset, g: int) -> frozenset:
    return frozenset(
        x for x in vacancies if brute_gap(d, L, vacancies, x) != g
    )


def brute_final(d: int, L: int, vacancies: frozenset) -> frozenset:
    cur = vacancies
    for g in range(1, L):
        cur = brute_stage(d, L, cur, g)
    return cur


def brute_in_core(d: int, L: int, vacancies: frozenset) -> bool:
    return brute_final(d, L, vacancies) == frozenset({(L,) * d})


def brute_constraint(d: int, L: int, vacancies: frozenset, x) -> bool:
    for j in range(d):
        y = tuple(c - (1 if i == j else 0) for i, c in enumerate(x))
        if 0 in y or y in vacancies:
            return True
    return False


def all_configs(d: int, L: int):
    ss = sites(d, L)
    for k in range(len(ss) + 1):
        for vac in itertools.combinations(ss, k):
            yield frozenset(vac)


def brute_core(d: int, L: int):
    return [v for v in all_configs(d, L) if brute_in_core(d, L, v)]


def brute_boundary(d: int, L: int):
    core = set(map(frozenset, brute_core(d, L)))
    out = []
    for eta in sorted(core, key=sorted):
        for x in sites(d, L):
            if not brute_constraint(d, L, eta, x):
                continue
            flipped = eta ^ {x}
            if frozenset(flipped) not in core:
                out.append((eta, x))
    return out


def to_bits(d: int, L: int, vacancies: frozenset) -> int:
    """Pack as the canonical bit order (lexicographic, last coordinate
    fastest) used by the main implementation; conversion only, no logic."""
    ss = sites(d, L)
    order = sorted(ss)
    bits = 0
    for i, x in enumerate(order):
        if x not in vacancies:
            bits |= 1 << i
    return bits
