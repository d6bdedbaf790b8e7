"""Deterministic vacancy-removal dynamics and the special-vacancy extraction.

Work happens on a cube Lambda = [1, L]^d whose East boundary is filled with
frozen vacancies (configurations are implicitly zero there).  The *gap* of a
site x in eta is the least l1 distance from x to a componentwise-smaller
vacancy of the extended configuration.  Stage g of the removal dynamics fills
every vacancy whose current gap is exactly g; running stages 1..L-1 always
ends in the full configuration or in the single-vacancy-at-upper-corner
configuration.  The states ending at the latter form the bottleneck core; the
states of its internal boundary each carry a certificate of at least
log2(L)+1 "special" vacancies, extracted by a deterministic algorithm whose
step-by-step contracts are asserted at runtime.

Every choice the construction leaves open (which witness sequence, which
candidate vacancy) is resolved lexicographically so traces are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .lattice import Box, Site, east_boundary, norm1


@lru_cache(maxsize=64)
def _site_list(box: Box) -> tuple[Site, ...]:
    return tuple(box.sites())


def _leq(z: Site, x: Site) -> bool:
    """Componentwise z <= x."""
    return all(a <= b for a, b in zip(z, x))


def _sub(x: Site, z: Site) -> Site:
    return tuple(a - b for a, b in zip(x, z))


class _Extended:
    """A packed configuration together with the frozen boundary vacancies."""

    def __init__(self, box: Box, bits: int):
        self.box = box
        self.bits = bits
        self._boundary = set(east_boundary(box))

    def is_vacant(self, z: Site) -> bool:
        if z in self.box:
            return (self.bits >> self.box.index(z)) & 1 == 0
        if z in self._boundary:
            return True
        raise ValueError(f"site {z} outside the extended box")

    def in_extended(self, z: Site) -> bool:
        return z in self.box or z in self._boundary


def _extended_sites(box: Box):
    yield from box.sites()
    yield from east_boundary(box)


def vacancy_gap(box: Box, bits: int, x: Site) -> int:
    """Least g > 0 with a vacancy at some z componentwise <= x, |x-z|_1 = g.

    The configuration is extended by vacancies on the East boundary, so the
    minimum always exists and is at most min_j (x_j - a_j + 1).
    """
    if x not in box:
        raise ValueError(f"{x} not in box")
    g = min(c - a + 1 for c, a in zip(x, box.lower))
    sites = _site_list(box)
    for i in range(box.site_count):
        if (bits >> i) & 1 == 0:
            z = sites[i]
            if z != x and _leq(z, x):
                d = norm1(_sub(x, z))
                if d < g:
                    g = d
    return g


def gap_profile(box: Box, bits: int) -> dict[Site, int]:
    """Gaps of all vacancies of the configuration."""
    return {
        x: vacancy_gap(box, bits, x)
        for i, x in enumerate(_site_list(box))
        if (bits >> i) & 1 == 0
    }


def fill_stage(box: Box, bits: int, g: int) -> int:
    """Fill (set to particle) exactly the vacancies whose current gap is g."""
    if g < 1:
        raise ValueError("stages start at 1")
    out = bits
    for i, x in enumerate(_site_list(box)):
        if (bits >> i) & 1 == 0 and vacancy_gap(box, bits, x) == g:
            out |= 1 << i
    return out


@dataclass(frozen=True)
class DeterministicTrace:
    """Stages Phi_0(eta) = eta, Phi_g = fill_stage(Phi_{g-1}, g), g <= L-1."""

    box: Box
    stages: tuple[int, ...]

    @property
    def final(self) -> int:
        return self.stages[-1]


def _require_cube(box: Box) -> int:
    side = box.shape[0]
    if box.lower != (1,) * box.d or any(s != side for s in box.shape):
        raise ValueError("removal dynamics is defined on cubes [1,L]^d")
    return side


def full_state(box: Box) -> int:
    return (1 << box.site_count) - 1


def corner_state(box: Box) -> int:
    """Single vacancy at the upper corner (L, ..., L)."""
    return full_state(box) ^ (1 << box.index(box.upper))


@lru_cache(maxsize=1 << 18)
def _removal_stages(box: Box, bits: int) -> tuple[int, ...]:
    L = _require_cube(box)
    stages = [bits]
    cur = bits
    for g in range(1, L):
        cur = fill_stage(box, cur, g)
        stages.append(cur)
    return tuple(stages)


def removal_trace(box: Box, bits: int) -> DeterministicTrace:
    return DeterministicTrace(box, _removal_stages(box, bits))


def in_bottleneck(box: Box, bits: int) -> bool:
    """Does the removal dynamics end at the single upper-corner vacancy?"""
    return removal_trace(box, bits).final == corner_state(box)


def constraint_max(box: Box, bits: int, x: Site) -> int:
    """East-like constraint at x with the frozen boundary vacancies."""
    ext = _Extended(box, bits)
    for j in range(box.d):
        y = tuple(c - (1 if i == j else 0) for i, c in enumerate(x))
        if ext.in_extended(y) and ext.is_vacant(y):
            return 1
    return 0


def bottleneck_boundary(box: Box) -> list[tuple[int, Site]]:
    """All (eta, witness x) with eta in the core, c_x(eta)=1, eta^x outside.

    Enumerates the full state space; feasible up to 16 sites.
    """
    n = box.site_count
    if n > 16:
        raise ValueError("boundary enumeration caps at 16 sites")
    member = [in_bottleneck(box, s) for s in range(1 << n)]
    out = []
    for s in range(1 << n):
        if not member[s]:
            continue
        for i, x in enumerate(box.sites()):
            if constraint_max(box, s, x) and not member[s ^ (1 << i)]:
                out.append((s, x))
    return out


def core_states(box: Box) -> list[int]:
    """All packed states in the bottleneck core (exhaustive)."""
    n = box.site_count
    if n > 16:
        raise ValueError("core enumeration caps at 16 sites")
    return [s for s in range(1 << n) if in_bottleneck(box, s)]


# ---------------------------------------------------------------------------
# witness sequence (backward induction) and the special-vacancy algorithm
# ---------------------------------------------------------------------------


class TraceContractError(AssertionError):
    """A step-by-step contract of the extraction algorithm failed.

    This always means an implementation bug (or a violated precondition),
    never a tolerance issue: every check here is exact integer logic.
    """


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise TraceContractError(msg)


def witness_sequence(box: Box, bits: int, z0: Site) -> tuple[list[Site], list[int]]:
    """The chain z0 = u_0 << u_1 << ... << u_M = v* with distances d_i.

    Built by backward induction from the upper corner: the vacancy at the
    current vertex is removed at some first stage m from exactly one of eta,
    eta^z0; a vacancy of that configuration at l1 distance m below
    (lexicographically smallest such) becomes the next vertex.  The three
    structural properties of the chain -- survival of both vacancies below
    the splitting stage, the split itself, and the split of the parent at the
    previous stage -- are asserted before returning.
    """
    L = _require_cube(box)
    vstar = box.upper
    flipped = bits ^ (1 << box.index(z0))
    tr_a = removal_trace(box, bits).stages
    tr_b = removal_trace(box, flipped).stages

    def spin(stages, g, x):
        return (stages[g] >> box.index(x)) & 1

    _check(z0 != vstar, "witness z0 must differ from the upper corner")
    _check(tr_a[L - 1] == corner_state(box), "input is not in the bottleneck core")
    _check(tr_b[L - 1] == full_state(box), "flipped configuration still in core")

    vs: list[Site] = [vstar]
    cs: list[int] = []
    cur = vstar
    prev_c = L  # splitting stages strictly decrease
    for _ in range(4 * box.site_count + 4):
        if cur == z0:
            break
        m = None  # first stage where the two traces disagree at cur
        for g in range(1, prev_c):
            if spin(tr_a, g, cur) != spin(tr_b, g, cur):
                m = g
                break
        _check(m is not None, f"traces never split at {cur}")
        _check(
            spin(tr_a, m - 1, cur) == 0 and spin(tr_b, m - 1, cur) == 0,
            "both configurations must hold the vacancy up to the split stage",
        )
        removed_from_a = spin(tr_a, m, cur) == 1
        tr_hot, tr_cold = (tr_a, tr_b) if removed_from_a else (tr_b, tr_a)
        cands = []  # vacancies certifying gap m at cur in the removed-from trace
        for z in _extended_sites(box):
            if z != cur and _leq(z, cur) and norm1(_sub(cur, z)) == m:
                if _vacant_in_stage(box, tr_hot[m - 1], z):
                    cands.append(z)
        _check(bool(cands), f"no vacancy certifies gap {m} at {cur}")
        nxt = min(cands)
        _check(
            nxt in box and not _vacant_in_stage(box, tr_cold[m - 1], nxt),
            "candidate must be interior and absent from the surviving trace",
        )
        vs.append(nxt)
        cs.append(m)
        cur = nxt
        prev_c = m
    _check(cur == z0, "backward induction failed to reach z0")
    _check(cs[-1] == 1, "last splitting stage must be one")
    us = list(reversed(vs))
    ds = list(reversed(cs))
    _check(
        bool(ds) and ds[0] == 1 and all(x < y for x, y in zip(ds, ds[1:])),
        "distances must satisfy 1 = d_1 < d_2 < ... < d_M",
    )
    _check(ds[-1] < L, "distances stay below L")
    for i in range(1, len(us)):
        for g in range(0, ds[i - 1]):
            _check(
                spin(tr_a, g, us[i]) == 0 and spin(tr_b, g, us[i]) == 0,
                "witness vacancy must survive both traces below its distance",
            )
        _check(
            spin(tr_a, ds[i - 1], us[i]) != spin(tr_b, ds[i - 1], us[i]),
            "witness vacancy must split the traces at its distance",
        )
        _check(
            spin(tr_a, ds[i - 1] - 1, us[i - 1])
            != spin(tr_b, ds[i - 1] - 1, us[i - 1]),
            "parent vertex must split the traces one stage earlier",
        )
    return us, ds


def _vacant_in_stage(box: Box, stage_bits: int, z: Site) -> bool:
    if z in box:
        return (stage_bits >> box.index(z)) & 1 == 0
    return True  # boundary extension vacancy


@dataclass(frozen=True)
class AlgorithmTrace:
    """Output of the special-vacancy extraction.

    z_sites[i] is the (i+1)-th special vacancy, deltas[i] the box after
    absorbing it; eps, xi, gamma, ell parametrise each step (side taken,
    displacement vector with nonnegative entries, its l1 norm, running l1
    diameter).  u_seq/d_seq is the witness chain the run was driven by.
    """

    box: Box
    eta_bits: int
    z0: Site
    z_sites: tuple[Site, ...]
    deltas: tuple[Box, ...]
    eps: tuple[int, ...]
    xi: tuple[Site, ...]
    gamma: tuple[int, ...]
    ell: tuple[int, ...]
    u_seq: tuple[Site, ...]
    d_seq: tuple[int, ...]

    @property
    def S(self) -> int:
        return len(self.z_sites)

    def interior_sites(self) -> list[Site]:
        return [z for z in self.z_sites if z in self.box]

    def tuple_head(self, k: int) -> tuple[Site, ...]:
        return self.z_sites[:k]


def special_vacancies(box: Box, bits: int, z0: Site) -> AlgorithmTrace:
    """Run the special-vacancy extraction on (eta, z0).

    Preconditions: eta in the core, c_{z0}(eta) = 1, eta^{z0} outside the
    core, z0 != upper corner.  Each recursive step asserts its structural
    contracts (nonempty candidate sets, corner bookkeeping, and the growth
    relations gamma_1 = ell_1 = 1, ell_{i+1} = ell_i + gamma_{i+1},
    gamma_{i+1} <= ell_i); any violation raises TraceContractError.
    """
    L = _require_cube(box)
    boundary = set(east_boundary(box))
    ext = _Extended(box, bits)
    vstar = box.upper
    _check(z0 in box and z0 != vstar, "z0 must be interior and not the corner")
    _check(constraint_max(box, bits, z0) == 1, "constraint at z0 must hold")
    us, ds = witness_sequence(box, bits, z0)
    M = len(ds)

    below = []
    for j in range(box.d):
        z = tuple(c - (1 if i == j else 0) for i, c in enumerate(z0))
        if ext.in_extended(z) and ext.is_vacant(z):
            below.append(z)
    _check(bool(below), "constraint held but no East neighbour is vacant")
    z1 = min(below)
    z_sites = [z1]
    deltas = [Box(z1, z0)]
    eps = [-1]
    xi = [_sub(z0, z1)]
    gamma = [1]
    ell = [1]
    k = 0  # upper corner of the current box is us[k]
    _check(norm1(xi[0]) == 1 and deltas[0].l1_diameter == 1, "first step has unit size")

    for _ in range(4 * box.site_count + 4):
        delta = deltas[-1]
        a, b = delta.lower, delta.upper
        _check(b == us[k], "upper corner must track the witness sequence")
        _check(ext.is_vacant(a), "lower corner must hold a vacancy")
        _check(z0 in delta and z0 != a, "z0 stays off the lower corner")
        if b == vstar and a in boundary:
            break
        diam = delta.l1_diameter
        if a not in boundary:
            minus = [
                z
                for z in _extended_sites(box)
                if z not in delta
                and _leq(z, a)
                and norm1(_sub(a, z)) < diam
                and ext.is_vacant(z)
            ]
            cands = list(minus)
            if k < M:
                u_next = us[k + 1]
                if (
                    u_next not in delta
                    and _leq(b, u_next)
                    and norm1(_sub(u_next, b)) <= diam
                    and ext.is_vacant(u_next)
                ):
                    cands.append(u_next)
            _check(bool(cands), "candidate set empty: trichotomy violated")
            z_next = min(cands)
            if z_next in minus:
                eps.append(-1)
                xi.append(_sub(a, z_next))
            else:
                eps.append(+1)
                xi.append(_sub(z_next, b))
                k += 1
        else:
            _check(k < M, "boundary-cornered box must still have witnesses above")
            z_next = us[k + 1]
            _check(
                z_next not in delta
                and _leq(b, z_next)
                and norm1(_sub(z_next, b)) <= diam,
                "witness must land in the upper extension set",
            )
            eps.append(+1)
            xi.append(_sub(z_next, b))
            k += 1
        _check(z_next not in z_sites, "special vacancies must be distinct")
        _check(ext.is_vacant(z_next), "special vacancies sit on vacancies")
        z_sites.append(z_next)
        deltas.append(delta.hull_with(z_next))
        gamma.append(norm1(xi[-1]))
        ell.append(deltas[-1].l1_diameter)
        _check(ell[-1] == ell[-2] + gamma[-1], "diameter must grow by the step size")
        _check(gamma[-1] <= ell[-2], "step size cannot exceed the previous diameter")
    else:
        raise TraceContractError("extraction failed to terminate")

    S = len(z_sites)
    interior = [z for z in z_sites if z in box]
    _check(len(interior) == S - 1, "exactly S-1 special vacancies are interior")
    for z in interior:
        _check((bits >> box.index(z)) & 1 == 0, "interior specials are vacancies")
    n = L.bit_length() - 1
    if L == 1 << n:
        _check(S >= n + 1, f"S={S} below the guaranteed n+1={n + 1}")
    return AlgorithmTrace(
        box,
        bits,
        z0,
        tuple(z_sites),
        tuple(deltas),
        tuple(eps),
        tuple(xi),
        tuple(gamma),
        tuple(ell),
        tuple(us),
        tuple(ds),
    )


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------


def staircase_sum(n: int, d: int, positive: bool = False) -> int:
    """Exact sum over the staircase tuple set of prod_i x_i^{d-1}.

    The set is all (x_1, ..., x_{n+1}) of nonnegative integers with x_1 = 1
    and x_i <= x_1 + ... + x_{i-1}; positive=True restricts to entries >= 1
    (the convention matching step sizes of the extraction algorithm, whose
    displacements are never empty).  Convention 0^0 = 1, so d = 1 counts
    tuples.  Exact-integer dynamic programming over prefix sums.
    """
    if n < 0 or d < 1:
        raise ValueError("need n >= 0, d >= 1")
    lo = 1 if positive else 0
    table: dict[int, int] = {1: 1}  # prefix sum -> weighted count, after x_1
    for _ in range(n):
        nxt: dict[int, int] = {}
        for msum, w in table.items():
            for x in range(lo, msum + 1):
                mult = 1 if d == 1 else x ** (d - 1)
                if mult == 0:
                    continue
                nxt[msum + x] = nxt.get(msum + x, 0) + w * mult
        table = nxt
    return sum(table.values())


def staircase_sum_naive(n: int, d: int, positive: bool = False) -> int:
    """Direct enumeration of the staircase set; only sensible for small n."""
    lo = 1 if positive else 0
    total = 0

    def rec(prefix_sum: int, depth: int, weight: int):
        nonlocal total
        if depth == n + 1:
            total += weight
            return
        for x in range(lo, prefix_sum + 1):
            mult = 1 if d == 1 else x ** (d - 1)
            if mult:
                rec(prefix_sum + x, depth + 1, weight * mult)

    rec(1, 1, 1)
    return total


def staircase_sum_displayed_bound(n: int, d: int) -> Fraction:
    """2^{d n(n-1)/2} / (n! d^n), the stated bound on the staircase sum."""
    return Fraction(2 ** (d * (n * (n - 1) // 2)), math.factorial(n) * d**n)


def staircase_sum_chain_bound(n: int, d: int) -> Fraction:
    """2^{d(n(n+1)/2 + n - 1)} / (n! d^{n-1}): what the chained integral
    estimates behind the stated bound actually deliver."""
    if n < 1:
        return Fraction(2**d, 1)
    return Fraction(
        2 ** (d * (n * (n + 1) // 2 + n - 1)), math.factorial(n) * d ** (n - 1)
    )


def displayed_tuple_bound(n: int, d: int) -> Fraction:
    """2^{2d(n+1)} 2^{d n(n-1)/2} / (n! d^n): stated cap on distinct heads."""
    return Fraction(2 ** (2 * d * (n + 1)), 1) * staircase_sum_displayed_bound(n, d)


def chain_tuple_bound(n: int, d: int) -> Fraction:
    """Head cap with the staircase factor the estimate chain actually gives."""
    return Fraction(
        2 ** ((d + 1) * n) * 2 ** ((d - 1) * (n + 1)), 1
    ) * staircase_sum_chain_bound(n, d)


@dataclass(frozen=True)
class TupleCountReport:
    box: Box
    n: int
    tuples: tuple[tuple[Site, ...], ...]
    displayed_bound: Fraction
    chain_bound: Fraction

    @property
    def count(self) -> int:
        return len(self.tuples)


def count_special_tuples(box: Box) -> TupleCountReport:
    """Distinct heads (z_1 .. z_{n+1}) over all core-boundary witnesses."""
    L = _require_cube(box)
    n = L.bit_length() - 1
    if L != 1 << n:
        raise ValueError("tuple counting needs L a power of two")
    tuples = set()
    for bits, x in bottleneck_boundary(box):
        tr = special_vacancies(box, bits, x)
        tuples.add(tr.tuple_head(n + 1))
    return TupleCountReport(
        box,
        n,
        tuple(sorted(tuples)),
        displayed_tuple_bound(n, box.d),
        chain_tuple_bound(n, box.d),
    )
