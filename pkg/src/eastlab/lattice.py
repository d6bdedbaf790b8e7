"""Boxes in Z^d, spin configurations, boundary conditions and the East-like constraint.

The East-like process on a box Lambda = prod_i [a_i, b_i] updates the spin at a
site x only if some East-neighbour x - e (e a canonical basis vector) carries a
vacancy.  Vacancies are 0, particles are 1.  Sites of the East boundary (the
sites just outside Lambda whose increment by a basis vector lands in Lambda)
carry a frozen boundary configuration sigma; a boundary condition is *ergodic*
when sigma has a vacancy at a - e for some basis vector e, which makes the
finite-volume chain irreducible.

Everything in this module is immutable after construction and safe to share
across threads.  The canonical site order used by every matrix, bitmask and
CSV in this package is lexicographic on coordinates with the *last* coordinate
fastest (C order); site index i corresponds to bit i of a packed state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

Site = tuple[int, ...]

#: Exact enumeration packs a configuration into one machine word.
MAX_PACKED_SITES = 63


def norm1(x: Site) -> int:
    """l1 norm of a lattice vector."""
    return sum(abs(c) for c in x)


@dataclass(frozen=True)
class Box:
    """A finite box prod_i [lower_i, upper_i] in Z^d."""

    lower: Site
    upper: Site

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("lower/upper must be nonempty tuples of equal length")
        if any(a > b for a, b in zip(self.lower, self.upper)):
            raise ValueError(f"empty box: lower={self.lower} upper={self.upper}")
        object.__setattr__(self, "lower", tuple(int(a) for a in self.lower))
        object.__setattr__(self, "upper", tuple(int(b) for b in self.upper))

    @property
    def d(self) -> int:
        return len(self.lower)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(b - a + 1 for a, b in zip(self.lower, self.upper))

    @property
    def site_count(self) -> int:
        return math.prod(self.shape)

    @property
    def l1_diameter(self) -> int:
        """sup_{x,y in box} |x-y|_1, i.e. sum of the side lengths minus d."""
        return sum(s - 1 for s in self.shape)

    def __contains__(self, x: Site) -> bool:
        return len(x) == self.d and all(
            a <= c <= b for a, c, b in zip(self.lower, x, self.upper)
        )

    def index(self, x: Site) -> int:
        """Canonical site index: lexicographic, last coordinate fastest."""
        if x not in self:
            raise ValueError(f"site {x} not in box {self.lower}..{self.upper}")
        i = 0
        for a, c, n in zip(self.lower, x, self.shape):
            i = i * n + (c - a)
        return i

    def site(self, i: int) -> Site:
        """Inverse of :meth:`index`."""
        if not 0 <= i < self.site_count:
            raise ValueError(f"site index {i} out of range")
        coords = []
        for a, n in zip(reversed(self.lower), reversed(self.shape)):
            coords.append(a + i % n)
            i //= n
        return tuple(reversed(coords))

    def sites(self) -> Iterator[Site]:
        """All sites in canonical order."""
        for i in range(self.site_count):
            yield self.site(i)

    @staticmethod
    def cube(L: int, d: int) -> "Box":
        """The cube [1, L]^d."""
        return Box((1,) * d, (L,) * d)

    def hull_with(self, x: Site) -> "Box":
        """Minimal box containing this box and the extra site x."""
        lo = tuple(min(a, c) for a, c in zip(self.lower, x))
        hi = tuple(max(b, c) for b, c in zip(self.upper, x))
        return Box(lo, hi)


def east_boundary(box: Box) -> list[Site]:
    """Sites x outside the box with x + e inside for some basis vector e.

    Returned sorted lexicographically so downstream bitmask and CSV layouts
    are reproducible.
    """
    out = set()
    for x in box.sites():
        for j in range(box.d):
            y = tuple(c - (1 if i == j else 0) for i, c in enumerate(x))
            if y not in box:
                out.add(y)
    return sorted(out)


@dataclass(frozen=True)
class ModelParams:
    """Vacancy density q in (0,1); p = 1 - q; theta_q = log2(1/q)."""

    q: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0,1), got {self.q}")

    @property
    def p(self) -> float:
        return 1.0 - self.q

    @property
    def theta_q(self) -> float:
        return -math.log2(self.q)


@dataclass(frozen=True)
class BoundaryCondition:
    """Frozen spin assignment on the East boundary of a box.

    kind is one of "maximal" (all vacancies), "minimal:e<j>" (single vacancy
    at lower_corner - e_j) or "explicit".  Only ergodic assignments are
    representable: construction fails unless sigma_{a-e} = 0 for some basis
    vector e, a the lower corner.
    """

    box: Box
    kind: str
    values: tuple[tuple[Site, int], ...]  # (boundary site, spin), sorted

    def __post_init__(self):
        vac = dict(self.values)
        a = self.box.lower
        for j in range(self.box.d):
            y = tuple(c - (1 if i == j else 0) for i, c in enumerate(a))
            if vac.get(y, 1) == 0:
                return
        raise ValueError(
            "boundary condition is not ergodic: no vacancy at lower_corner - e"
        )

    def as_dict(self) -> dict[Site, int]:
        return dict(self.values)

    def value(self, x: Site) -> int:
        return dict(self.values)[x]

    def dominates(self, other: "BoundaryCondition") -> bool:
        """Pointwise sigma_x <= other_x (more vacancies = more constraint relief)."""
        mine, theirs = self.as_dict(), other.as_dict()
        return all(mine[x] <= theirs[x] for x in mine)

    @staticmethod
    def maximal(box: Box) -> "BoundaryCondition":
        vals = tuple((x, 0) for x in east_boundary(box))
        return BoundaryCondition(box, "maximal", vals)

    @staticmethod
    def minimal(box: Box, direction: int = 0) -> "BoundaryCondition":
        """Single vacancy at lower_corner - e_{direction+1}, particles elsewhere."""
        if not 0 <= direction < box.d:
            raise ValueError(f"direction {direction} out of range for d={box.d}")
        a = box.lower
        zero = tuple(c - (1 if i == direction else 0) for i, c in enumerate(a))
        vals = tuple((x, 0 if x == zero else 1) for x in east_boundary(box))
        return BoundaryCondition(box, f"minimal:e{direction + 1}", vals)

    @staticmethod
    def explicit(box: Box, assignment: Mapping[Site, int]) -> "BoundaryCondition":
        bd = east_boundary(box)
        missing = [x for x in bd if x not in assignment]
        if missing:
            raise ValueError(f"explicit boundary condition missing sites {missing}")
        vals = tuple((x, int(assignment[x])) for x in bd)
        return BoundaryCondition(box, "explicit", vals)

    @staticmethod
    def from_label(box: Box, label: str) -> "BoundaryCondition":
        """Parse "maximal" / "minimal" / "minimal:e2" config labels."""
        if label == "maximal":
            return BoundaryCondition.maximal(box)
        if label == "minimal":
            return BoundaryCondition.minimal(box, 0)
        if label.startswith("minimal:e"):
            return BoundaryCondition.minimal(box, int(label[len("minimal:e"):]) - 1)
        raise ValueError(f"unknown boundary condition label {label!r}")


@dataclass(frozen=True)
class SpinConfig:
    """Bit-packed occupancy over a box; bit i = spin at canonical site i."""

    box: Box
    bits: int

    def __post_init__(self):
        n = self.box.site_count
        if n > MAX_PACKED_SITES:
            raise ValueError(f"box has {n} sites, packing caps at {MAX_PACKED_SITES}")
        if not 0 <= self.bits < (1 << n):
            raise ValueError("bits out of range for box")

    @staticmethod
    def all_ones(box: Box) -> "SpinConfig":
        return SpinConfig(box, (1 << box.site_count) - 1)

    @staticmethod
    def single_vacancy(box: Box, x: Site) -> "SpinConfig":
        full = (1 << box.site_count) - 1
        return SpinConfig(box, full ^ (1 << box.index(x)))

    @staticmethod
    def from_occupancies(box: Box, occ: Mapping[Site, int]) -> "SpinConfig":
        bits = 0
        for x in box.sites():
            bits |= (occ[x] & 1) << box.index(x)
        return SpinConfig(box, bits)

    def spin(self, x: Site) -> int:
        return (self.bits >> self.box.index(x)) & 1

    def flip(self, x: Site) -> "SpinConfig":
        return SpinConfig(self.box, self.bits ^ (1 << self.box.index(x)))

    def vacancies(self) -> list[Site]:
        return [x for x in self.box.sites() if self.spin(x) == 0]

    def vacancy_count(self) -> int:
        n = self.box.site_count
        return n - int(self.bits).bit_count()

    def to_array(self) -> np.ndarray:
        n = self.box.site_count
        return np.array([(self.bits >> i) & 1 for i in range(n)], dtype=np.uint8)


def constraint(box: Box, sigma: BoundaryCondition, eta: SpinConfig, x: Site) -> int:
    """East-like constraint at x: 1 iff eta*sigma has a vacancy at some x - e.

    Reads only spins strictly below x; in particular it never reads eta_x.
    """
    if x not in box:
        raise ValueError(f"constraint queried outside the box: {x}")
    sig = sigma.as_dict()
    for j in range(box.d):
        y = tuple(c - (1 if i == j else 0) for i, c in enumerate(x))
        occ = eta.spin(y) if y in box else sig[y]
        if occ == 0:
            return 1
    return 0


def stationary_weight(eta: SpinConfig, params: ModelParams) -> float:
    """Product Bernoulli weight prod_x p^{eta_x} q^{1-eta_x}."""
    n = eta.box.site_count
    ones = int(eta.bits).bit_count()
    return params.p**ones * params.q ** (n - ones)


@dataclass(frozen=True)
class ConstraintTable:
    """Vectorised constraint data for one (box, sigma) pair.

    neighbour_masks[i] has the bits of the in-box East neighbours of site i;
    bc_vacant[i] says whether sigma puts a vacancy at some out-of-box East
    neighbour of site i.  The constraint of state s at site i is then
    bc_vacant[i] or (s & mask_i) != mask_i.
    """

    box: Box
    sigma: BoundaryCondition
    neighbour_masks: tuple[int, ...]
    bc_vacant: tuple[bool, ...]

    @staticmethod
    def build(box: Box, sigma: BoundaryCondition) -> "ConstraintTable":
        sig = sigma.as_dict()
        masks, flags = [], []
        for x in box.sites():
            m, f = 0, False
            for j in range(box.d):
                y = tuple(c - (1 if i == j else 0) for i, c in enumerate(x))
                if y in box:
                    m |= 1 << box.index(y)
                elif sig[y] == 0:
                    f = True
            masks.append(m)
            flags.append(f)
        return ConstraintTable(box, sigma, tuple(masks), tuple(flags))

    def satisfied(self, state: int, i: int) -> bool:
        m = self.neighbour_masks[i]
        return self.bc_vacant[i] or (state & m) != m

    def satisfied_all_states(self, i: int, n_states: int) -> np.ndarray:
        """Constraint at site i for every packed state 0..n_states-1."""
        if self.bc_vacant[i]:
            return np.ones(n_states, dtype=bool)
        m = self.neighbour_masks[i]
        s = np.arange(n_states, dtype=np.uint64)
        return (s & np.uint64(m)) != np.uint64(m)
