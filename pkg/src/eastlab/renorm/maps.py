"""Scalar renormalisation maps for the leading theta_q^2 coefficient.

Two one-dimensional dynamical systems drive the coefficient bookkeeping: the
infinite-volume map lam -> (2 d lam - 1 - lam)/(d^2 lam - 1), decreasing on
(1/d, 1] with an attractive quadratic fixed point at 1/d, and the
finite-volume map H(lam) = (d^2 - lam)/(2 d - lam - 1) with an attractive
quadratic fixed point at d.  Quadratic attraction means |lam_k - fp| decays
like C/k, which the trajectory diagnostics expose.
"""

from __future__ import annotations

from dataclasses import dataclass

MAP_NAMES = ("theorem-coefficient", "finite-volume-H")

# accepted aliases for CLI/config use
_ALIASES = {
    "theorem-coefficient": "theorem-coefficient",
    "coefficient": "theorem-coefficient",
    "infinite": "theorem-coefficient",
    "finite-volume-H": "finite-volume-H",
    "H": "finite-volume-H",
    "h": "finite-volume-H",
}


def coefficient_map(lam: float, d: int) -> float:
    """(2 d lam - 1 - lam)/(d^2 lam - 1), defined for lam in (1/d, 1]."""
    den = d * d * lam - 1.0
    if den <= 0.0:
        raise ValueError(f"lam={lam} outside the domain (1/{d}, 1]")
    return (2.0 * d * lam - 1.0 - lam) / den


def h_map(lam: float, d: int) -> float:
    """(d^2 - lam)/(2 d - lam - 1), defined for lam <= d (d >= 2)."""
    den = 2.0 * d - lam - 1.0
    if den == 0.0:
        raise ValueError(f"lam={lam} hits the pole of the map")
    return (d * d - lam) / den


@dataclass(frozen=True)
class RenormTrajectory:
    map_name: str
    d: int
    lam0: float
    values: tuple[float, ...]
    fixed_point: float

    @property
    def final(self) -> float:
        return self.values[-1]

    def scaled_errors(self) -> list[float]:
        """k * |lam_k - fixed point| for k >= 1 (bounded under quadratic
        attraction)."""
        return [
            k * abs(v - self.fixed_point) for k, v in enumerate(self.values) if k >= 1
        ]


def renorm_iterate(map_name: str, lam0: float, d: int, k: int) -> RenormTrajectory:
    """Iterate the chosen map k times from lam0 in dimension d >= 2."""
    if d < 2:
        raise ValueError("renormalisation maps need d >= 2")
    try:
        name = _ALIASES[map_name]
    except KeyError:
        raise ValueError(f"unknown map {map_name!r}; pick one of {MAP_NAMES}") from None
    if name == "theorem-coefficient":
        if not (1.0 / d <= lam0 <= 1.0):
            raise ValueError(f"lam0={lam0} outside [1/{d}, 1]")
        step, fp = coefficient_map, 1.0 / d
    else:
        if lam0 > d:
            raise ValueError(f"lam0={lam0} above the fixed point d={d}")
        step, fp = h_map, float(d)
    vals = [float(lam0)]
    for _ in range(k):
        vals.append(step(vals[-1], d))
    return RenormTrajectory(name, d, float(lam0), tuple(vals), fp)
