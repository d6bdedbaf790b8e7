"""Electrical-network computations for the reversible East-like chain.

The chain with generator L and stationary measure pi defines a network whose
edges are the admissible single-spin flips, with conductance
C(eta, eta') = pi(eta) K(eta, eta') and resistance 1/C.  Capacities between
disjoint sets come from a harmonic potential solve; unit flows and their
energies give the dual (Thomson) view; mean hitting times admit both a direct
linear solve and a capacity identity, and the two are cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .generator import RateMatrix

#: Direct sparse factorisation below this many free states, else CG.
DIRECT_SOLVE_CUTOFF = 1 << 14

LINEAR_SOLVE_TOL = 1e-10


def _solve_restricted(R: RateMatrix, free: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (-L)_FF x = rhs on the free states.

    Direct factorisation when small; conjugate gradients on the pi^{1/2}
    symmetrisation (SPD once a nonempty absorbing set is removed) when large.
    """
    A = (-R.L).tocsr()[free][:, free]
    if free.sum() <= DIRECT_SOLVE_CUTOFF:
        return spla.spsolve(A.tocsc(), rhs)
    s = np.sqrt(R.pi[free])
    Asym = sp.diags(s) @ A @ sp.diags(1.0 / s)
    Asym = 0.5 * (Asym + Asym.T)
    b = s * rhs
    precond = sp.diags(1.0 / Asym.diagonal())
    y, info = spla.cg(Asym, b, rtol=LINEAR_SOLVE_TOL, atol=0.0, M=precond)
    if info != 0:
        raise RuntimeError(f"conjugate gradients failed to converge (info={info})")
    return y / s


@dataclass
class FlowField:
    """Antisymmetric function on the directed transition edges of a chain.

    Values are stored once per unordered edge, keyed (a, b) with a < b and
    meaning the flow from a to b; value(b, a) is the negative.
    """

    R: RateMatrix
    values: dict[tuple[int, int], float] = field(default_factory=dict)

    def value(self, a: int, b: int) -> float:
        if a < b:
            return self.values.get((a, b), 0.0)
        return -self.values.get((b, a), 0.0)

    def add(self, a: int, b: int, v: float) -> None:
        if a == b:
            raise ValueError("flow on a self-loop")
        key, sign = ((a, b), 1.0) if a < b else ((b, a), -1.0)
        self.values[key] = self.values.get(key, 0.0) + sign * v

    def support_states(self) -> set[int]:
        out: set[int] = set()
        for a, b in self.values:
            out.add(a)
            out.add(b)
        return out

    def divergence(self, state: int) -> float:
        tot = 0.0
        for (a, b), v in self.values.items():
            if a == state:
                tot += v
            elif b == state:
                tot -= v
        return tot

    def divergences(self) -> dict[int, float]:
        div: dict[int, float] = {}
        for (a, b), v in self.values.items():
            div[a] = div.get(a, 0.0) + v
            div[b] = div.get(b, 0.0) - v
        return div

    def strength(self, sources: np.ndarray | set[int]) -> float:
        src = set(int(s) for s in np.atleast_1d(np.asarray(list(sources))).ravel())
        div = self.divergences()
        return sum(v for s, v in div.items() if s in src)

    def energy(self, conductances: sp.spmatrix | None = None) -> float:
        """(1/2) sum over directed edges of r(e) theta(e)^2."""
        C = conductances if conductances is not None else self.R.conductances()
        C = C.tocsr()
        tot = 0.0
        for (a, b), v in self.values.items():
            if v == 0.0:
                continue
            c = C[a, b]
            if c <= 0.0:
                raise ValueError(f"flow on a non-edge ({a},{b})")
            tot += v * v / c
        return tot

    def scaled(self, factor: float) -> "FlowField":
        return FlowField(self.R, {e: factor * v for e, v in self.values.items()})


@dataclass(frozen=True)
class HarmonicSolution:
    """Harmonic potential between A (h=1) and B (h=0) with its capacity."""

    R: RateMatrix
    A: np.ndarray
    B: np.ndarray
    potential: np.ndarray
    capacity: float
    escape_form_capacity: float
    harmonic_residual: float

    @property
    def resistance(self) -> float:
        return 1.0 / self.capacity

    def equilibrium_flow(self) -> FlowField:
        """Unit flow theta(a,b) = C(a,b)(h(a)-h(b)) / capacity."""
        h = self.potential
        C = self.R.conductances().tocoo()
        flow = FlowField(self.R)
        for a, b, c in zip(C.row, C.col, C.data):
            if a < b and c > 0.0:
                v = c * (h[a] - h[b]) / self.capacity
                if v != 0.0:
                    flow.add(int(a), int(b), v)
        return flow


def _as_index_array(S, n_states: int) -> np.ndarray:
    idx = np.asarray(sorted(set(int(s) for s in S)), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("empty state set")
    if idx.min() < 0 or idx.max() >= n_states:
        raise ValueError("state index out of range")
    return idx


def capacity(R: RateMatrix, A, B, check_tol: float = 1e-9) -> HarmonicSolution:
    """Capacity between disjoint state sets A and B.

    Solves for the harmonic potential h with h=1 on A, h=0 on B; the capacity
    is the Dirichlet form of h.  An independent committor solve gives the
    escape-probability form sum_{z in A} pi(z) K(z) P_z(tau_A^+ > tau_B); the
    two must agree to check_tol (relative).
    """
    n = R.n_states
    A = _as_index_array(A, n)
    B = _as_index_array(B, n)
    if np.intersect1d(A, B).size:
        raise ValueError("A and B intersect")
    free = np.ones(n, dtype=bool)
    free[A] = False
    free[B] = False

    h = np.zeros(n)
    h[A] = 1.0
    if free.any():
        rhs = R.L.tocsr()[free][:, ~free] @ h[~free]
        h[free] = _solve_restricted(R, free, rhs)
    resid = float(np.abs((R.L @ h)[free]).max()) if free.any() else 0.0

    C = R.conductances().tocoo()
    mask = C.row < C.col
    dh = h[C.row[mask]] - h[C.col[mask]]
    cap = float(np.sum(C.data[mask] * dh * dh))

    # independent committor route: u = P_.(tau_B < tau_A)
    u = np.zeros(n)
    u[B] = 1.0
    if free.any():
        rhs_u = R.L.tocsr()[free][:, ~free] @ u[~free]
        u[free] = _solve_restricted(R, free, rhs_u)
    K = R.L.tocsr()
    cap_escape = 0.0
    for z in A:
        row = K.getrow(z)
        for j, rate in zip(row.indices, row.data):
            if j != z and rate > 0.0:
                cap_escape += R.pi[z] * rate * u[j]
    cap_escape = float(cap_escape)

    scale = max(cap, cap_escape)
    if scale > 0 and abs(cap - cap_escape) > check_tol * scale:
        raise RuntimeError(
            f"capacity mismatch: Dirichlet {cap!r} vs escape form {cap_escape!r}"
        )
    return HarmonicSolution(R, A, B, h, cap, cap_escape, resid)


def resistance(R: RateMatrix, A, B) -> float:
    return capacity(R, A, B).resistance


@dataclass(frozen=True)
class ThomsonReport:
    capacity: float
    equilibrium_energy: float
    max_divergence_off_sets: float
    strength: float

    def energy_matches_resistance(self, tol: float = 1e-9) -> bool:
        r = 1.0 / self.capacity
        return abs(self.equilibrium_energy - r) <= tol * max(r, 1.0)


def thomson_check(R: RateMatrix, A, B, div_tol: float = 1e-12) -> ThomsonReport:
    """Energy of the equilibrium flow equals the resistance; divergence of the
    flow vanishes off A union B.  Any other unit A->B flow has energy >= R."""
    sol = capacity(R, A, B)
    flow = sol.equilibrium_flow()
    sets = set(int(x) for x in np.concatenate([sol.A, sol.B]))
    div = flow.divergences()
    off = max((abs(v) for s, v in div.items() if s not in sets), default=0.0)
    strength = sum(v for s, v in div.items() if s in set(int(x) for x in sol.A))
    if off > div_tol:
        raise RuntimeError(f"equilibrium flow has divergence {off:.3e} off A,B")
    return ThomsonReport(sol.capacity, flow.energy(), off, strength)


@dataclass(frozen=True)
class HittingResult:
    value: float
    capacity_identity_value: float | None
    relative_error: float | None


def mean_hitting_time(
    R: RateMatrix, start, B, check_tol: float = 1e-9
) -> HittingResult:
    """Mean hitting time of the state set B.

    start is a single state or a probability vector over states.  The direct
    route solves (-L) u = 1 off B with u = 0 on B.  For a single start state z
    the capacity identity E_z[tau_B] = R_{z,B} sum_{eta not in B} pi(eta)
    P_eta(tau_z < tau_B) is evaluated as well and must agree to check_tol.
    """
    n = R.n_states
    B = _as_index_array(B, n)
    free = np.ones(n, dtype=bool)
    free[B] = False
    u = np.zeros(n)
    if free.any():
        u[free] = _solve_restricted(R, free, np.ones(int(free.sum())))

    dist = np.asarray(start, dtype=np.float64) if np.ndim(start) == 1 else None
    if dist is not None and dist.size == n:
        return HittingResult(float(dist @ u), None, None)
    z = int(start)
    if z in set(int(b) for b in B):
        return HittingResult(0.0, None, None)
    value = float(u[z])

    sol = capacity(R, [z], B)
    g = np.zeros(n)  # committor to z before B
    g[z] = 1.0
    free_g = np.ones(n, dtype=bool)
    free_g[B] = False
    free_g[z] = False
    if free_g.any():
        rhs = R.L.tocsr()[free_g][:, ~free_g] @ g[~free_g]
        g[free_g] = _solve_restricted(R, free_g, rhs)
    keep = np.ones(n, dtype=bool)
    keep[B] = False
    ident = sol.resistance * float(R.pi[keep] @ g[keep])
    rel = abs(value - ident) / max(abs(value), abs(ident), 1e-300)
    if rel > check_tol:
        raise RuntimeError(
            f"hitting-time identity violated: direct {value!r} vs capacity {ident!r}"
        )
    return HittingResult(value, ident, rel)


def hitting_set_vacancy(R: RateMatrix, x) -> np.ndarray:
    """States with a vacancy at site x (the usual hitting target)."""
    i = R.box.index(x)
    states = np.arange(R.n_states, dtype=np.int64)
    return states[(states >> i) & 1 == 0]
