"""Multiscale side-length schedule and the resistance recursion it feeds.

The schedule interleaves two geometric sequences L_m^+ (from 11, shrinking
its prefactor) and L_m^- (from 1, growing its prefactor) so that every scale
window [L_m^-, L_m^+] halves into the previous window: closed forms
L_m^+ = 2 + 2^m (9 - m/(2N)) and L_m^- = -2 + 2^m (3 + m/(2N)).  Across one
scale the maximal corner resistance obeys R_m <= 27 N^d / (q 2^{dm}) R_{m-1},
which telescopes to an explicit multiplicative factor evaluated here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class MultiscaleSchedule:
    N: int
    upper: tuple[float, ...]  # L_m^+, m = 0..N
    lower: tuple[float, ...]  # L_m^-, m = 0..N

    @property
    def m0(self) -> int:
        """First scale at which the halving windows are guaranteed nonempty."""
        return math.ceil(math.log2(4 * self.N))


def multiscale_schedule(N: int) -> MultiscaleSchedule:
    """Side-length schedule by recursion, checked against the closed forms."""
    if N < 1:
        raise ValueError("need N >= 1")
    up, lo = [11.0], [1.0]
    for m in range(1, N + 1):
        up.append(2.0 * up[-1] - (2 ** (m - 1)) / N - 2.0)
        lo.append(2.0 * lo[-1] + (2 ** (m - 1)) / N + 2.0)
    for m in range(N + 1):
        cu = 2.0 + 2.0**m * (9.0 - m / (2.0 * N))
        cl = -2.0 + 2.0**m * (3.0 + m / (2.0 * N))
        if abs(up[m] - cu) > 1e-9 * max(1.0, abs(cu)) or abs(
            lo[m] - cl
        ) > 1e-9 * max(1.0, abs(cl)):
            raise RuntimeError(f"closed form disagrees with recursion at m={m}")
    return MultiscaleSchedule(N, tuple(up), tuple(lo))


def windows_nested(s: MultiscaleSchedule) -> bool:
    """Property (i): L_m^- <= L_m^+ for 1 <= m <= N."""
    return all(s.lower[m] <= s.upper[m] for m in range(1, s.N + 1))


def midpoint_containment(s: MultiscaleSchedule, m: int, x: int, y: int) -> bool:
    """Property (ii) in one coordinate: if L_m^- <= x <= L_m^+ and
    |2y - x| <= 2^{m-1}/N, then y and x - y lie in
    [L_{m-1}^- + 1, L_{m-1}^+ - 1]."""
    if not (s.lower[m] <= x <= s.upper[m]):
        raise ValueError("x outside the scale-m window")
    if abs(2 * y - x) > 2 ** (m - 1) / s.N:
        raise ValueError("y does not halve x at this scale")
    lo, hi = s.lower[m - 1] + 1.0, s.upper[m - 1] - 1.0
    return lo <= y <= hi and lo <= x - y <= hi


def one_step_factor(q: float, d: int, N: int, m: int) -> float:
    """27 N^d / (q 2^{dm}), the scale-m resistance amplification."""
    return 27.0 * N**d / (q * 2.0 ** (d * m))


def telescoped_factor_log2(q: float, d: int, N: int, m0: int) -> float:
    """log2 of the displayed telescoped bound
    27^{N-m0} 2^{(N-m0) theta_q - d[C(N,2)-C(m0,2)] + d (N-m0) log2 N}."""
    theta = -math.log2(q)
    k = N - m0
    return (
        k * math.log2(27.0)
        + k * theta
        - d * (math.comb(N, 2) - math.comb(m0, 2))
        + d * k * math.log2(N)
    )


def product_factor_log2(q: float, d: int, N: int, m0: int) -> float:
    """log2 of the exact product of the one-step factors for m0 < m <= N."""
    return sum(math.log2(one_step_factor(q, d, N, m)) for m in range(m0 + 1, N + 1))
