"""Unit-flow recursion that propagates corner resistances across scales.

For x in the positive quadrant let R(x) be the effective resistance, in the
East-like network on Lambda_x = prod [1, x_i] with minimal boundary
conditions, between the fully occupied state and the states with a vacancy
at x.  Given a midpoint box V_x and weights rho on it, a unit flow from full
to the target set is assembled per y in V_x from three pieces:

* a mimic of the equilibrium flow of Lambda_y on configurations that are
  fully occupied outside Lambda_y (reaches "vacancy at y"),
* its reversal with the vacancy at y pinned (clears the other vacancies,
  landing on the single-vacancy-at-y state), and
* a translated copy of the equilibrium flow of Lambda_{x~(y)}, run inside
  the shifted window north-east of y, which carries the pinned vacancy on
  to x; here x~(y) = x - y + (0, 1, ..., 1).

The sum is divergence-free off the source and target (checked to 1e-10),
has unit strength, and its energy pieces are comparable to the sub-lattice
resistances, which yields the three-term recursion
R(x) <= 9 sum rho R(y) + (9/q) sum rho^2 R(y) + (9/q) sum rho^2 R(x~(y)).
The per-piece energy constants e and e/q require the state-space size
|Lambda_x| <= 1/q; the report records whether that precondition held.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..lattice import Box, BoundaryCondition, ModelParams, Site
from ..exact.generator import build_generator
from ..exact.network import capacity, hitting_set_vacancy

DIV_TOL = 1e-10


def quadrant_box(x: Site) -> Box:
    return Box((1,) * len(x), x)


def corner_resistance(x: Site, params: ModelParams) -> float:
    """R(x): resistance from full occupancy to a vacancy at the far corner."""
    box = quadrant_box(x)
    R = build_generator(box, BoundaryCondition.minimal(box), params)
    full = R.n_states - 1
    sol = capacity(R, [full], hitting_set_vacancy(R, x))
    return sol.resistance


def _equilibrium_edges(x: Site, params: ModelParams) -> tuple[dict, float]:
    """Equilibrium unit-flow edges (state pairs of Lambda_x) and R(x)."""
    box = quadrant_box(x)
    R = build_generator(box, BoundaryCondition.minimal(box), params)
    full = R.n_states - 1
    sol = capacity(R, [full], hitting_set_vacancy(R, x))
    return sol.equilibrium_flow().values, sol.resistance


def _scatter_map(sub: Box, big: Box, shift: Site) -> list[int]:
    """big-box site index of each sub-box site, translated by shift."""
    return [
        big.index(tuple(c + s for c, s in zip(site, shift))) for site in sub.sites()
    ]


def _embed(bits: int, positions: list[int], base: int) -> int:
    out = base
    for k, i in enumerate(positions):
        if (bits >> k) & 1 == 0:
            out &= ~(1 << i)
    return out


def shifted_target(x: Site, y: Site) -> Site:
    """x~(y) = x - y + (0, 1, ..., 1)."""
    return tuple(
        xc - yc + (0 if i == 0 else 1) for i, (xc, yc) in enumerate(zip(x, y))
    )


@dataclass(frozen=True)
class FlowPieceReport:
    y: Site
    target_shifted: Site
    resistance_y: float
    resistance_shifted: float
    energy_mimic: float
    energy_reversal: float
    energy_carry: float

    def energy_bounds_hold(self, q: float) -> bool:
        e = math.e
        return (
            self.energy_mimic <= e * self.resistance_y
            and self.energy_reversal <= (e / q) * self.resistance_y
            and self.energy_carry <= (e / q) * self.resistance_shifted
        )


@dataclass(frozen=True)
class FlowRecursionReport:
    x: Site
    q: float
    rho: dict[Site, float]
    resistance_x: float
    pieces: tuple[FlowPieceReport, ...]
    total_energy: float
    strength: float
    max_divergence_off: float
    recursion_rhs: float
    energy_precondition: bool  # |Lambda_x| <= 1/q
    reversal_supports_disjoint: bool
    carry_supports_disjoint: bool

    @property
    def recursion_holds(self) -> bool:
        return self.resistance_x <= self.recursion_rhs

    @property
    def thomson_chain_holds(self) -> bool:
        return self.resistance_x <= self.total_energy <= self.recursion_rhs + 1e-9


def flow_recursion(
    x: Site, V: Box, params: ModelParams, rho: dict[Site, float] | None = None
) -> FlowRecursionReport:
    """Build the composite unit flow and verify the resistance recursion.

    x needs every entry >= 3 and V must sit inside prod [2, x_i - 1]; rho
    defaults to uniform on V and must sum to one.  Divergence defects above
    1e-10 off the source/target, or a non-unit strength, raise immediately.
    """
    d = len(x)
    if any(c < 3 for c in x):
        raise ValueError("every coordinate of x must be at least 3")
    inner = Box((2,) * d, tuple(c - 1 for c in x))
    if not (all(V.lower[i] >= inner.lower[i] for i in range(d))
            and all(V.upper[i] <= inner.upper[i] for i in range(d))):
        raise ValueError("V must sit inside prod [2, x_i - 1]")
    ys = list(V.sites())
    if rho is None:
        rho = {y: 1.0 / len(ys) for y in ys}
    if abs(sum(rho.values()) - 1.0) > 1e-12:
        raise ValueError("rho must sum to one")

    box_x = quadrant_box(x)
    Rx = build_generator(box_x, BoundaryCondition.minimal(box_x), params)
    C = Rx.conductances().tocsr()
    full = Rx.n_states - 1
    ix = {s: box_x.index(s) for s in box_x.sites()}
    target = set(int(t) for t in hitting_set_vacancy(Rx, x))

    resistance_x = capacity(Rx, [full], sorted(target)).resistance

    def edge_energy(values: dict) -> float:
        tot = 0.0
        for (a, b), v in values.items():
            c = C[a, b]
            if c <= 0.0:
                raise RuntimeError(f"flow touches a non-edge ({a}, {b})")
            tot += v * v / c
        return tot

    theta: dict[tuple[int, int], float] = {}

    def add(values: dict, weight: float) -> None:
        for (a, b), v in values.items():
            key, sign = ((a, b), 1.0) if a < b else ((b, a), -1.0)
            theta[key] = theta.get(key, 0.0) + sign * weight * v

    pieces = []
    reversal_supports: list[set] = []
    carry_supports: list[set] = []
    for y in ys:
        box_y = quadrant_box(y)
        psi_y, res_y = _equilibrium_edges(y, params)
        pos_y = _scatter_map(box_y, box_x, (0,) * d)
        bit_y = 1 << ix[y]

        mimic: dict[tuple[int, int], float] = {}
        for (a, b), v in psi_y.items():
            mimic[(_embed(a, pos_y, full), _embed(b, pos_y, full))] = v
        # reversal lives on pairs that both pin the vacancy at y, so edges of
        # the mimic that flip y itself have no counterpart
        reversal = {
            (eb ^ bit_y, ea ^ bit_y): v
            for (ea, eb), v in mimic.items()
            if (ea & bit_y) and (eb & bit_y)
        }

        xt = shifted_target(x, y)
        psi_t, res_t = _equilibrium_edges(xt, params)
        box_t = quadrant_box(xt)
        shift = tuple(yc - (0 if i == 0 else 1) for i, yc in enumerate(y))
        pos_t = _scatter_map(box_t, box_x, shift)
        base_t = full & ~bit_y
        carry = {
            (_embed(a, pos_t, base_t), _embed(b, pos_t, base_t)): v
            for (a, b), v in psi_t.items()
        }

        w = rho[y]
        add(mimic, w)
        add(reversal, w)
        add(carry, w)
        reversal_supports.append({frozenset(e) for e in reversal})
        carry_supports.append({frozenset(e) for e in carry})
        pieces.append(
            FlowPieceReport(
                y,
                xt,
                res_y,
                res_t,
                edge_energy(mimic),
                edge_energy(reversal),
                edge_energy(carry),
            )
        )

    div: dict[int, float] = {}
    for (a, b), v in theta.items():
        div[a] = div.get(a, 0.0) + v
        div[b] = div.get(b, 0.0) - v
    off = max(
        (abs(v) for s, v in div.items() if s != full and s not in target),
        default=0.0,
    )
    strength = div.get(full, 0.0)
    if off > DIV_TOL:
        raise RuntimeError(f"composite flow has divergence {off:.3e} off source/target")
    if abs(strength - 1.0) > DIV_TOL:
        raise RuntimeError(f"composite flow has strength {strength!r}, not 1")

    q = params.q
    rhs = (
        9.0 * sum(rho[p.y] * p.resistance_y for p in pieces)
        + (9.0 / q) * sum(rho[p.y] ** 2 * p.resistance_y for p in pieces)
        + (9.0 / q) * sum(rho[p.y] ** 2 * p.resistance_shifted for p in pieces)
    )
    rev_disjoint = all(
        not (reversal_supports[i] & reversal_supports[j])
        for i in range(len(ys))
        for j in range(i + 1, len(ys))
    )
    car_disjoint = all(
        not (carry_supports[i] & carry_supports[j])
        for i in range(len(ys))
        for j in range(i + 1, len(ys))
    )
    return FlowRecursionReport(
        x,
        q,
        dict(rho),
        resistance_x,
        tuple(pieces),
        edge_energy(theta),
        strength,
        off,
        rhs,
        box_x.site_count <= 1.0 / q,
        rev_disjoint,
        car_disjoint,
    )
